#pragma once

// Umbrella header.

#include "semiband/analytics.hpp"
#include "semiband/environment.hpp"
#include "semiband/perturbation.hpp"
#include "semiband/poisson_binomial.hpp"
#include "semiband/policy.hpp"
#include "semiband/quadrature.hpp"
#include "semiband/random.hpp"
#include "semiband/resampling.hpp"
#include "semiband/selection.hpp"
#include "semiband/stability.hpp"

#include "semiband/harness/benchmark.hpp"
#include "semiband/harness/config.hpp"
#include "semiband/harness/experiment.hpp"
#include "semiband/harness/parallel.hpp"
#include "semiband/harness/render.hpp"
#include "semiband/harness/verify.hpp"
