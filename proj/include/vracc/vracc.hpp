#pragma once

#include "vracc/accel.hpp"
#include "vracc/anderson.hpp"
#include "vracc/cost.hpp"
#include "vracc/data_io.hpp"
#include "vracc/driver.hpp"
#include "vracc/engine.hpp"
#include "vracc/experiment.hpp"
#include "vracc/lbfgs.hpp"
#include "vracc/logistic.hpp"
#include "vracc/metric.hpp"
#include "vracc/problem.hpp"
#include "vracc/prox.hpp"
#include "vracc/rng.hpp"
#include "vracc/sampler.hpp"
#include "vracc/types.hpp"
