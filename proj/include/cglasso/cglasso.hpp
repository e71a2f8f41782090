#pragma once

#include "cglasso/baselines.hpp"
#include "cglasso/cgl.hpp"
#include "cglasso/core.hpp"
#include "cglasso/errors.hpp"
#include "cglasso/estimators.hpp"
#include "cglasso/glasso.hpp"
#include "cglasso/ingest.hpp"
#include "cglasso/io.hpp"
#include "cglasso/map_newton.hpp"
#include "cglasso/metrics.hpp"
#include "cglasso/parallel.hpp"
#include "cglasso/random.hpp"
#include "cglasso/simulate.hpp"
#include "cglasso/stars.hpp"
