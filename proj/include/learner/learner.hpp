#pragma once

#include "learner/analysis.hpp"
#include "learner/dlearner.hpp"
#include "learner/error.hpp"
#include "learner/fit.hpp"
#include "learner/io.hpp"
#include "learner/matrix_core.hpp"
#include "learner/model_select.hpp"
#include "learner/parallel.hpp"
#include "learner/rank.hpp"
#include "learner/report.hpp"
#include "learner/rng.hpp"
#include "learner/simulation.hpp"
