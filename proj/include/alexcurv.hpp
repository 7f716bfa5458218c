#pragma once

#include "alexcurv/errors.hpp"
#include "alexcurv/geometry.hpp"
#include "alexcurv/function_spec.hpp"
#include "alexcurv/convex_functions.hpp"
#include "alexcurv/surface.hpp"
#include "alexcurv/intrinsic_metric.hpp"
#include "alexcurv/curvature_checks.hpp"
#include "alexcurv/regularization.hpp"
#include "alexcurv/serialization.hpp"
#include "alexcurv/scenario.hpp"
