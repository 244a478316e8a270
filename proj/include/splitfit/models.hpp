#ifndef SPLITFIT_MODELS_HPP
#define SPLITFIT_MODELS_HPP

#include "splitfit/consolidation.hpp"
#include "splitfit/model.hpp"

namespace splitfit {

/// Worked-example model u(t) = a t^2 (space variable fixed at 1): a single
/// linearly entering parameter.
ModelDefinition make_appendix_model(Interval a_bounds = {-100.0, 100.0});

/// Partly-linear toy u(t) = amplitude * exp(-rate t): one linear, one
/// nonlinear parameter.
ModelDefinition make_exponential_model(Interval amplitude_bounds = {-1e6, 1e6},
                                       Interval rate_bounds = {1e-6, 100.0});

} // namespace splitfit

#endif
