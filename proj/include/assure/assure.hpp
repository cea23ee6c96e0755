// assure.hpp: umbrella header.
#pragma once

#include "assure/baselines.hpp"
#include "assure/classes.hpp"
#include "assure/error.hpp"
#include "assure/estimators.hpp"
#include "assure/json_io.hpp"
#include "assure/model.hpp"
#include "assure/optimize.hpp"
#include "assure/parallel.hpp"
#include "assure/quadrature.hpp"
#include "assure/rng.hpp"
#include "assure/sim.hpp"
#include "assure/specfun.hpp"
