#pragma once

#include "clusterstab/flow.hpp"

#include <utility>

namespace clusterstab {

/// One normalized explicit Euler step of Ė = -G_c + <G_c, E> E:
/// E_next = (E + h D) / |E + h D|, with the bundle evaluated at E_next.
std::pair<PatternMatrix, GradientBundle> full_step(const WeightMatrix& w, double eps, const PatternMatrix& E,
                                                   const GradientBundle& at_E, double h, int k, double c,
                                                   const EigenOptions& opts = {});

/// Convenience overload that evaluates the bundle at E first.
std::pair<PatternMatrix, GradientBundle> full_step(const WeightMatrix& w, double eps, const PatternMatrix& E,
                                                   double h, int k, double c, const EigenOptions& opts = {});

/**
 * Full-rank inner iteration: Armijo-controlled normalized Euler on the
 * (penalized) gradient system, starting from E0 (normalized internally).
 * Stops on the configured rule, on F <= stop_below, or after maxit steps.
 */
StationaryPoint integrate_full(const WeightMatrix& w, double eps, int k, const PatternMatrix& E0,
                               const FlowConfig& config, double c = 0.0);

}  // namespace clusterstab
