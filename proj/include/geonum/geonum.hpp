#pragma once

#include "geonum/error.hpp"
#include "geonum/harness/config.hpp"
#include "geonum/harness/experiments.hpp"
#include "geonum/harness/report.hpp"
#include "geonum/lattice.hpp"
#include "geonum/linalg.hpp"
#include "geonum/random.hpp"
#include "geonum/regions.hpp"
#include "geonum/rogers.hpp"
#include "geonum/sampler.hpp"
#include "geonum/siegel.hpp"
#include "geonum/stats.hpp"
