#include "clusterstab/functional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace clusterstab {

PatternMatrix gradient_from_spectral(const SpectralData& sd, const PatternPtr& pattern) {
  const auto& edges = pattern->edges();
  Eigen::VectorXd g(static_cast<Eigen::Index>(edges.size()));
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const int i = edges[e].i;
    const int j = edges[e].j;
    g[static_cast<Eigen::Index>(e)] =
        0.5 * (sd.z[i] + sd.z[j]) - (sd.x[i] * sd.x[j] - sd.y[i] * sd.y[j]);
  }
  return {pattern, std::move(g)};
}

double negativity_norm(const Eigen::VectorXd& perturbed_edges) {
  return std::sqrt(2.0 * perturbed_edges.cwiseMin(0.0).squaredNorm());
}

double min_entry(const Eigen::VectorXd& perturbed_edges) {
  return perturbed_edges.size() ? perturbed_edges.minCoeff() : 0.0;
}

GradientBundle evaluate(const WeightMatrix& w, double eps, const PatternMatrix& E, int k, double c,
                        const EigenOptions& opts, const Eigen::MatrixXd* start) {
  if (c < 0.0) throw StructuralError("penalty weight must be nonnegative");
  GradientBundle b;
  b.eps = eps;
  b.c = c;
  b.perturbed = w.perturbed(eps, E);
  b.spectral = spectral_data(w.pattern(), b.perturbed, k, opts, start);
  b.value = std::max(0.0, b.spectral.gap());
  b.grad = gradient_from_spectral(b.spectral, w.pattern_ptr());
  const Eigen::VectorXd neg = b.perturbed.cwiseMin(0.0);
  b.penalty = neg.squaredNorm();
  b.penalized_grad = b.grad;
  if (c > 0.0) b.penalized_grad.values() += c * neg;
  return b;
}

PatternMatrix descent_field(const PatternMatrix& G, const PatternMatrix& E) {
  return -G + G.dot(E) * E;
}

PatternMatrix constrained_direction(const PatternMatrix& G, const PatternMatrix& E) {
  PatternMatrix z = descent_field(G, E);
  const double nz = z.frobenius_norm();
  const double scale = std::max(G.frobenius_norm(), std::numeric_limits<double>::min());
  if (nz <= 1e-14 * scale) return PatternMatrix(G.pattern_ptr());
  z *= 1.0 / nz;
  return z;
}

}  // namespace clusterstab
