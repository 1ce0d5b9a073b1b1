#include "clusterstab/outer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace clusterstab {

Method parse_method(const std::string& name) {
  if (name == "lowrank") return Method::LowRank;
  if (name == "full") return Method::Full;
  if (name == "auto") return Method::Auto;
  throw std::invalid_argument("unknown method '" + name + "' (expected lowrank, full or auto)");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::LowRank: return "lowrank";
    case Method::Full: return "full";
    case Method::Auto: return "auto";
  }
  return "?";
}

std::string to_string(InnerKind kind) {
  switch (kind) {
    case InnerKind::LowRank: return "lowrank";
    case InnerKind::Full: return "full";
    case InnerKind::FullPenalized: return "full-penalized";
  }
  return "?";
}

namespace {

PatternMatrix initial_direction(const WeightMatrix& w, int k, const EigenOptions& opts) {
  const SpectralData sd = spectral_data(w.pattern(), w.weights(), k, opts);
  PatternMatrix g = gradient_from_spectral(sd, w.pattern_ptr());
  const double nrm = g.frobenius_norm();
  if (nrm == 0.0) throw StructuralError("gradient vanishes at the unperturbed graph");
  g *= -1.0 / nrm;
  return g;
}

}  // namespace

PhiResult phi(const WeightMatrix& w, double eps, int k, const WarmStart& warm, InnerKind kind,
              const FlowConfig& config, double c) {
  if (eps < 0.0) throw std::invalid_argument("eps must be nonnegative");
  PhiResult out;
  if (kind == InnerKind::LowRank) {
    const SvsdFactors f0 = warm.factors ? *warm.factors : init_factors(w, k, config.eig);
    out.point = inner_iteration_lowrank(w, eps, k, f0, config);
  } else {
    const PatternMatrix E0 = warm.E ? *warm.E : initial_direction(w, k, config.eig);
    out.point = integrate_full(w, eps, k, E0, config, kind == InnerKind::FullPenalized ? c : 0.0);
  }
  out.value = out.point.bundle.penalized_value();
  return out;
}

double phi_derivative(const StationaryPoint& point) {
  if (!point.converged) {
    throw std::runtime_error("phi derivative needs a converged inner iteration (" + point.diagnostics + ")");
  }
  return -point.bundle.penalized_grad.frobenius_norm();
}

OuterResult outer_iteration(const WeightMatrix& w, int k, InnerKind kind, const OuterConfig& config,
                            double g_k) {
  OuterResult res;
  res.final_kind = kind;
  FlowConfig inner = config.inner;
  if (config.early_stop_inner) inner.stop_below = config.toler;

  double lb = config.eps_lb;
  double ub = config.eps_ub >= 0.0 ? config.eps_ub : w.frobenius_norm();
  if (!(lb >= 0.0) || !(ub > lb)) throw std::invalid_argument("invalid bracket for the outer iteration");

  const SpectralData sd0 = spectral_data(w.pattern(), w.weights(), k, config.inner.eig);
  if (g_k < 0.0) g_k = sd0.gap();
  double eps = config.eps0;
  if (eps < 0.0) {
    const double gnorm = gradient_from_spectral(sd0, w.pattern_ptr()).frobenius_norm();
    eps = gnorm > 0.0 ? g_k / gnorm : 0.5 * (lb + ub);
  }
  eps = std::clamp(eps, lb, ub);

  auto penalty_at = [&](int l) { return kind == InnerKind::FullPenalized ? inner.penalty.at(l) : 0.0; };

  WarmStart warm;
  auto run = [&](double e, int l) {
    PhiResult r;
    try {
      r = phi(w, e, k, warm, res.final_kind, inner, penalty_at(l));
      if (r.point.fallback && res.final_kind == InnerKind::LowRank) throw LowRankBreakdown(r.point.diagnostics);
    } catch (const LowRankBreakdown& ex) {
      if (res.final_kind != InnerKind::LowRank) throw;
      res.fallback = true;
      res.final_kind = InnerKind::Full;
      res.diagnostics += std::string("low-rank breakdown (") + ex.what() + "); switched to full rank. ";
      WarmStart full_warm;
      if (warm.E) full_warm.E = warm.E;
      warm = full_warm;
      r = phi(w, e, k, warm, res.final_kind, inner);
    }
    res.inner_iterations += r.point.iterations;
    for (const auto& rec : r.point.trajectory) res.trajectory.emplace_back(l, rec);
    warm.E = r.point.E;
    warm.factors = r.point.factors;
    return r;
  };

  PhiResult cur = run(eps, 0);
  res.trace.push_back({0, eps, cur.value, lb, ub, penalty_at(0), "initial", cur.point.iterations});

  std::optional<std::pair<double, PhiResult>> best;
  if (cur.value < config.toler) best.emplace(eps, cur);

  int l = 0;
  while (l < config.niter && ub - lb > config.toler) {
    double next = 0.0;
    std::string step_kind;
    if (cur.value < config.toler) {
      ub = std::min(ub, eps);
      next = 0.5 * (lb + ub);
      step_kind = "bisection";
    } else {
      lb = std::max(lb, eps);
      double dphi = 0.0;
      try {
        dphi = phi_derivative(cur.point);
      } catch (const std::runtime_error&) {
        dphi = 0.0;
      }
      next = dphi < 0.0 ? eps - cur.value / dphi : std::numeric_limits<double>::infinity();
      step_kind = "newton";
    }
    if (!(next >= lb && next <= ub)) {
      next = 0.5 * (lb + ub);
      step_kind = "midpoint";
    }
    ++l;
    eps = next;
    cur = run(eps, l);
    res.trace.push_back({l, eps, cur.value, lb, ub, penalty_at(l), step_kind, cur.point.iterations});
    if (cur.value < config.toler && (!best || eps <= best->first)) best.emplace(eps, cur);
  }
  res.outer_iterations = l;
  if (l >= config.niter && ub - lb > config.toler) res.diagnostics += "outer iteration cap reached. ";

  if (cur.value < config.toler) {
    best.emplace(eps, cur);
  } else if (!best) {
    // No coalescing iterate seen: try the upper bracket end once.
    PhiResult at_ub = run(ub, l + 1);
    res.trace.push_back({l + 1, ub, at_ub.value, lb, ub, penalty_at(l + 1), "upper-bound", at_ub.point.iterations});
    if (at_ub.value < config.toler) best.emplace(ub, at_ub);
    else {
      best.emplace(ub, at_ub);
      res.diagnostics += "no iterate reached phi < toler. ";
    }
  }
  res.eps_star = best->first;
  res.certified = best->second.value < config.toler;
  res.E_star = best->second.point.E;
  res.bundle = best->second.point.bundle;
  res.factors = best->second.point.factors;
  return res;
}

namespace {

struct Candidate {
  OuterResult outer;
  Eigen::VectorXd perturbed;
  double neg_norm = 0;
  double min_entry = 0;
};

Candidate run_candidate(const WeightMatrix& w, int k, InnerKind kind, const OuterConfig& config, double g_k) {
  Candidate c;
  c.outer = outer_iteration(w, k, kind, config, g_k);
  c.perturbed = w.perturbed(c.outer.eps_star, c.outer.E_star);
  c.neg_norm = negativity_norm(c.perturbed);
  c.min_entry = min_entry(c.perturbed);
  return c;
}

/// Full-rank distance: unpenalized first, penalized schedule if inadmissible.
Candidate full_candidate(const WeightMatrix& w, int k, const OuterConfig& config, double g_k) {
  Candidate c = run_candidate(w, k, InnerKind::Full, config, g_k);
  if (c.min_entry < -config.admissibility_tol) c = run_candidate(w, k, InnerKind::FullPenalized, config, g_k);
  return c;
}

}  // namespace

StabilityRow structured_distance(const WeightMatrix& w, int k, const OuterConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  StabilityRow row;
  row.k = k;
  const int n = w.size();
  if (k < 2 || k > n - 1) throw std::invalid_argument("k must lie in [2, n-1]");

  try {
    const SpectralData sd0 = spectral_data(w.pattern(), w.weights(), k, config.inner.eig);
    row.g_k = std::max(0.0, sd0.gap());

    std::optional<Candidate> low;
    std::optional<Candidate> full;
    Candidate chosen;
    switch (config.method) {
      case Method::LowRank:
        low = run_candidate(w, k, InnerKind::LowRank, config, row.g_k);
        chosen = *low;
        break;
      case Method::Full:
        full = full_candidate(w, k, config, row.g_k);
        chosen = *full;
        break;
      case Method::Auto:
        low = run_candidate(w, k, InnerKind::LowRank, config, row.g_k);
        if (low->min_entry < -config.admissibility_tol) {
          row.low_rank_inadmissible = true;
          full = run_candidate(w, k, InnerKind::FullPenalized, config, row.g_k);
          chosen = *full;
        } else {
          chosen = *low;
        }
        break;
    }
    if (config.compare_methods) {
      if (!low) low = run_candidate(w, k, InnerKind::LowRank, config, row.g_k);
      if (!full) full = full_candidate(w, k, config, row.g_k);
    }
    if (low) row.d_low = low->outer.eps_star;
    if (full) row.d_full = full->outer.eps_star;

    const OuterResult& o = chosen.outer;
    row.method = to_string(o.final_kind);
    row.penalized = o.final_kind == InnerKind::FullPenalized;
    row.eps_star = o.eps_star;
    row.phi = o.bundle.penalized_value();
    row.neg_norm = chosen.neg_norm;
    row.outer_iters = o.outer_iterations;
    row.inner_iters = o.inner_iterations;
    if (low && full) row.inner_iters = low->outer.inner_iterations + full->outer.inner_iterations;
    row.trace = o.trace;
    row.trajectory = o.trajectory;
    row.diagnostics = o.diagnostics;

    // Δ = ε⋆E⋆, with residual negativity removed when it is small enough.
    PatternMatrix delta = o.eps_star * o.E_star;
    if (chosen.min_entry < -config.admissibility_tol && chosen.neg_norm <= config.clip_tol) {
      delta.values() = delta.values().cwiseMax(-w.weights());
      row.clipped = true;
    }
    const Eigen::VectorXd perturbed = w.weights() + delta.values();
    row.min_entry = min_entry(perturbed);
    row.admissible = row.min_entry >= -config.admissibility_tol;
    row.d_k = delta.frobenius_norm();
    if (row.clipped) {
      if (low && o.final_kind == InnerKind::LowRank) row.d_low = row.d_k;
      if (full && o.final_kind != InnerKind::LowRank) row.d_full = row.d_k;
    }
    row.delta = std::move(delta);

    EigenOptions fresh = config.inner.eig;
    fresh.seed = config.seed + 7919;
    const SpectralData cert = spectral_data(w.pattern(), perturbed, k, fresh);
    row.certificate_gap = cert.gap();
    if (!o.certified) {
      row.failed = true;
      row.diagnostics += "distance not certified (phi >= toler). ";
    }
    if (!row.admissible) row.diagnostics += "optimizer is not admissible. ";
  } catch (const std::exception& ex) {
    row.failed = true;
    row.diagnostics += ex.what();
  }
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

StabilityReport select_k(const WeightMatrix& w, int kmin, int kmax, const OuterConfig& config, int jobs) {
  if (kmin < 2 || kmax > w.size() - 1 || kmin > kmax) {
    throw std::invalid_argument("k range must satisfy 2 <= kmin <= kmax <= n-1");
  }
  StabilityReport report;
  report.config = config;
  const int count = kmax - kmin + 1;
  report.rows.resize(static_cast<std::size_t>(count));
  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min(jobs, count);

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int i = next++; i < count; i = next++) {
      report.rows[static_cast<std::size_t>(i)] = structured_distance(w, kmin + i, config);
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  double best_d = -1.0;
  double best_g = -1.0;
  for (const auto& row : report.rows) {
    if (row.failed) {
      report.warnings.push_back("k=" + std::to_string(row.k) + " excluded: " + row.diagnostics);
    } else if (row.d_k > best_d) {
      best_d = row.d_k;
      report.k_opt = row.k;
    }
    if (row.g_k > best_g) {
      best_g = row.g_k;
      report.k_gap = row.k;
    }
  }
  return report;
}

Eigen::MatrixXd unstructured_coalescer(const WeightMatrix& w, int k, const EigenOptions& opts) {
  const SpectralData sd = spectral_data(w.pattern(), w.weights(), k, opts);
  const Eigen::MatrixXd L = Eigen::MatrixXd(laplacian(w));
  return L - 0.5 * sd.gap() * (sd.x * sd.x.transpose() - sd.y * sd.y.transpose());
}

}  // namespace clusterstab
