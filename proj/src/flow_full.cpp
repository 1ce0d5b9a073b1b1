#include "clusterstab/flow_full.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace clusterstab {

double alignment_residual(const PatternMatrix& G, const PatternMatrix& E) {
  const double g = G.frobenius_norm();
  if (g == 0.0) return 0.0;
  return descent_field(G, E).frobenius_norm() / g;
}

std::pair<PatternMatrix, GradientBundle> full_step(const WeightMatrix& w, double eps, const PatternMatrix& E,
                                                   const GradientBundle& at_E, double h, int k, double c,
                                                   const EigenOptions& opts) {
  PatternMatrix next = E + h * descent_field(at_E.penalized_grad, E);
  next = next.normalized();
  GradientBundle b = evaluate(w, eps, next, k, c, opts, &at_E.spectral.eigenvectors);
  return {std::move(next), std::move(b)};
}

std::pair<PatternMatrix, GradientBundle> full_step(const WeightMatrix& w, double eps, const PatternMatrix& E,
                                                   double h, int k, double c, const EigenOptions& opts) {
  const GradientBundle at_E = evaluate(w, eps, E, k, c, opts);
  return full_step(w, eps, E, at_E, h, k, c, opts);
}

StationaryPoint integrate_full(const WeightMatrix& w, double eps, int k, const PatternMatrix& E0,
                               const FlowConfig& config, double c) {
  StationaryPoint out;
  out.c = c;
  PatternMatrix E = E0.normalized();
  GradientBundle bundle = evaluate(w, eps, E, k, c, config.eig);
  out.eigensolves = 1;
  double f0 = bundle.penalized_value();
  double h = config.h0;
  const auto& ar = config.armijo;

  auto record = [&](int iter) {
    if (!config.record_trajectory) return;
    out.trajectory.push_back({iter, h, bundle.value, bundle.penalized_grad.frobenius_norm(), bundle.penalty,
                              std::numeric_limits<double>::quiet_NaN()});
  };
  record(0);

  auto below = [&](const GradientBundle& b) {
    return config.stop_below >= 0.0 && b.penalized_value() <= config.stop_below;
  };

  if (below(bundle)) {
    out.stopped_below = true;
  } else {
    for (int it = 1; it <= config.maxit; ++it) {
      if (bundle.spectral.coalesced) {
        out.converged = true;
        out.diagnostics = "eigenvalues coalesced";
        break;
      }
      const PatternMatrix D = descent_field(bundle.penalized_grad, E);
      const double dn2 = D.dot(D);
      const double gnorm = bundle.penalized_grad.frobenius_norm();
      if (dn2 <= 1e-28 * std::max(gnorm * gnorm, 1e-300)) {
        out.converged = true;
        break;
      }
      if (config.stop_rule == StopRule::GradientAlignment &&
          std::sqrt(dn2) <= config.alignment_tol * gnorm) {
        out.converged = true;
        break;
      }
      const double slope = -eps * dn2;

      bool first_try = true;
      int backtracks = 0;
      int halvings = 0;
      bool failed = false;
      PatternMatrix E_new;
      GradientBundle b_new;
      double f_new = 0.0;
      for (;;) {
        E_new = (E + h * D).normalized();
        b_new = evaluate(w, eps, E_new, k, c, config.eig, &bundle.spectral.eigenvectors);
        ++out.eigensolves;
        if (b_new.crossing() && !below(b_new)) {
          if (++halvings > config.max_crossing_halvings) {
            out.diagnostics = "eigenvalue crossing persisted after step halving";
            failed = true;
            break;
          }
          h *= 0.5;
          first_try = false;
          continue;
        }
        f_new = b_new.penalized_value();
        if (f_new <= f0 + ar.decrease * h * slope) break;
        if (++backtracks > ar.max_backtracks) {
          // Nothing measurable left to gain: treat as stationary.
          if (std::abs(f_new - f0) <= config.tol || -h * slope <= config.tol) {
            out.converged = true;
            out.diagnostics = "line search exhausted at stationarity";
          } else {
            out.diagnostics = "line search failed";
          }
          failed = true;
          break;
        }
        h *= ar.backtrack;
        first_try = false;
      }
      if (failed) break;

      if (f_new > f0) ++out.monotone_violations;
      const double change = std::abs(f_new - f0);
      E = std::move(E_new);
      bundle = std::move(b_new);
      f0 = f_new;
      out.iterations = it;
      if (first_try) h = std::min(h * ar.growth, ar.h_max);
      record(it);

      if (below(bundle)) {
        out.stopped_below = true;
        break;
      }
      if (config.stop_rule == StopRule::ObjectiveChange && change <= config.tol) {
        out.converged = true;
        break;
      }
    }
  }
  if (!out.converged && !out.stopped_below && out.diagnostics.empty()) {
    out.diagnostics = "iteration cap reached";
  }
  out.E = std::move(E);
  out.bundle = std::move(bundle);
  return out;
}

}  // namespace clusterstab
