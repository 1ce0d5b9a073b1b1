#pragma once

#include "clusterstab/graph.hpp"
#include "clusterstab/spectral.hpp"

#include <Eigen/Core>

namespace clusterstab {

/**
 * Objective, gradient and penalty of the inner problem at (eps, E, k, c).
 *
 * value    F = λ_{k+1} - λ_k of L(W + eps E)
 * grad     G with g_ij = (z_i + z_j)/2 - (x_i x_j - y_i y_j) on each edge
 * penalty  Q = ½ Σ_{i≠j} (w_ij + eps e_ij)₋², i.e. Σ over edges of v₋²
 * penalized_grad  G + c (W + eps E)₋
 *
 * The time derivative of F along E(t) is eps <G, Ė> and that of F + cQ is
 * eps <G_c, Ė>.
 */
struct GradientBundle {
  double value = 0;
  PatternMatrix grad;
  SpectralData spectral;
  double penalty = 0;
  PatternMatrix penalized_grad;
  double c = 0;
  double eps = 0;
  /// Edge values of W + eps E.
  Eigen::VectorXd perturbed;

  double penalized_value() const { return value + c * penalty; }
  /// Eigenvalue crossing away from coalescence: derivative formulas invalid.
  bool crossing() const { return !spectral.gapsimple && !spectral.coalesced; }
};

/// Edge gradient from spectral data, O(m).
PatternMatrix gradient_from_spectral(const SpectralData& sd, const PatternPtr& pattern);

/// Frobenius norm of (W + eps E)₋ over both orientations.
double negativity_norm(const Eigen::VectorXd& perturbed_edges);
/// Smallest entry of W + eps E (0 when the pattern is empty).
double min_entry(const Eigen::VectorXd& perturbed_edges);

GradientBundle evaluate(const WeightMatrix& w, double eps, const PatternMatrix& E, int k, double c = 0.0,
                        const EigenOptions& opts = {}, const Eigen::MatrixXd* start = nullptr);

/// -G + <G, E> E, the right-hand side of the norm-constrained gradient flow.
PatternMatrix descent_field(const PatternMatrix& G, const PatternMatrix& E);

/// Unit-norm steepest descent direction on the tangent space of the unit
/// sphere at E, or the zero matrix when E is stationary.
PatternMatrix constrained_direction(const PatternMatrix& G, const PatternMatrix& E);

}  // namespace clusterstab
