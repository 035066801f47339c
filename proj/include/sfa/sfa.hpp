#pragma once

// Single include for the whole library.

#include <sfa/attack.hpp>
#include <sfa/estimation.hpp>
#include <sfa/graph.hpp>
#include <sfa/io.hpp>
#include <sfa/manifest.hpp>
#include <sfa/metrics.hpp>
#include <sfa/model.hpp>
#include <sfa/pipeline.hpp>
#include <sfa/random.hpp>
#include <sfa/svg.hpp>
#include <sfa/synth.hpp>
#include <sfa/weakness.hpp>
