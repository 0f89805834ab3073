#pragma once

#include "nlsq/cv_algebra.hpp"
#include "nlsq/diagnostics.hpp"
#include "nlsq/dynamics.hpp"
#include "nlsq/estimator.hpp"
#include "nlsq/metrology_bounds.hpp"
#include "nlsq/moment_engine.hpp"
#include "nlsq/operators.hpp"
#include "nlsq/spectrum.hpp"
#include "nlsq/spin_algebra.hpp"
#include "nlsq/state.hpp"
#include "nlsq/types.hpp"
