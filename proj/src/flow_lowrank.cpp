#include "clusterstab/flow_lowrank.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>

namespace clusterstab {
namespace {

constexpr double kRankTol = 1e-10;

Eigen::MatrixXd rs_matrix() {
  Eigen::MatrixXd rs = Eigen::MatrixXd::Zero(4, 4);
  rs.diagonal() << 0.25, -0.25, -1.0, 1.0;
  return rs;
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& S) { return 0.5 * (S + S.transpose()); }

}  // namespace

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& K, Eigen::MatrixXd* triangular) {
  const Eigen::Index n = K.rows();
  const Eigen::Index r = K.cols();
  if (n < r) throw LowRankBreakdown("fewer rows than columns in QR input");
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(K);
  Eigen::MatrixXd T = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  const Eigen::VectorXd d = T.diagonal().cwiseAbs();
  if (d.maxCoeff() == 0.0 || d.minCoeff() <= kRankTol * d.maxCoeff()) {
    throw LowRankBreakdown("numerically rank-deficient QR input");
  }
  Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(n, r);
  Q.applyOnTheLeft(qr.householderQ());
  if (triangular != nullptr) *triangular = std::move(T);
  return Q;
}

RFactors assemble_R(const SpectralData& sd, bool orthonormalize) {
  const Eigen::Index n = sd.x.size();
  RFactors r;
  r.RU.resize(n, 4);
  r.RU.col(0) = sd.z.array() + 1.0;
  r.RU.col(1) = sd.z.array() - 1.0;
  r.RU.col(2) = sd.x;
  r.RU.col(3) = sd.y;
  r.RS = rs_matrix();

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(r.RU);
  const Eigen::VectorXd d = qr.matrixQR().topRows(4).diagonal().cwiseAbs();
  r.rank = 0;
  for (Eigen::Index i = 0; i < 4; ++i) r.rank += d[i] > kRankTol * d.maxCoeff() ? 1 : 0;
  if (orthonormalize && r.rank == 4) {
    Eigen::MatrixXd T;
    r.B = orthonormal_basis(r.RU, &T);
    r.Lambda = symmetrize(T * r.RS * T.transpose());
  }
  return r;
}

LowRankSym tangent_project(const SvsdFactors& f, const LowRankSym& A) {
  const Eigen::Index r = f.U.cols();
  const Eigen::MatrixXd AU = A.U * (A.S * (A.U.transpose() * f.U));
  const Eigen::MatrixXd T = symmetrize(f.U.transpose() * AU);
  LowRankSym out;
  out.U.resize(f.U.rows(), 2 * r);
  out.U << f.U, AU;
  out.S = Eigen::MatrixXd::Zero(2 * r, 2 * r);
  out.S.topLeftCorner(r, r) = -T;
  out.S.topRightCorner(r, r).setIdentity();
  out.S.bottomLeftCorner(r, r).setIdentity();
  return out;
}

Eigen::MatrixXd tangent_project(const SvsdFactors& f, const Eigen::MatrixXd& A) {
  const Eigen::MatrixXd AU = A * f.U;
  const Eigen::MatrixXd UtA = f.U.transpose() * A;
  return AU * f.U.transpose() + f.U * UtA - f.U * (UtA * f.U) * f.U.transpose();
}

PatternMatrix factors_to_pattern(const SvsdFactors& f, const PatternPtr& pattern) {
  return project_pattern(LowRankSym{f.U, f.S}, pattern);
}

void normalize_factors(SvsdFactors& f, const PatternPtr& pattern) {
  f.S = symmetrize(f.S);
  const double nrm = factors_to_pattern(f, pattern).frobenius_norm();
  if (!(nrm > 0.0) || !std::isfinite(nrm)) {
    throw LowRankBreakdown("pattern projection of the low-rank iterate vanished");
  }
  f.S /= nrm;
}

double condition_number(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(S), Eigen::EigenvaluesOnly);
  const Eigen::VectorXd d = es.eigenvalues().cwiseAbs();
  if (d.minCoeff() == 0.0) return std::numeric_limits<double>::infinity();
  return d.maxCoeff() / d.minCoeff();
}

SvsdFactors init_factors(const SpectralData& sd, const PatternPtr& pattern) {
  const RFactors r = assemble_R(sd);
  if (r.rank < 4) {
    throw LowRankBreakdown("x, y and z are linearly dependent; use the full-rank flow");
  }
  Eigen::MatrixXd D;
  SvsdFactors f;
  f.U = orthonormal_basis(r.RU, &D);
  f.S = symmetrize(-D * r.RS * D.transpose());
  normalize_factors(f, pattern);
  return f;
}

SvsdFactors init_factors(const WeightMatrix& w, int k, const EigenOptions& opts) {
  return init_factors(spectral_data(w.pattern(), w.weights(), k, opts), w.pattern_ptr());
}

double eta_coefficient(const SvsdFactors& f, const RFactors& R, const PatternMatrix& E) {
  const LowRankSym pr = tangent_project(f, R.as_lowrank());
  return project_pattern(pr, E.pattern_ptr()).dot(E);
}

SvsdFactors splitting_step(const SvsdFactors& f0, const RFactors& R0, const WeightMatrix& w, double eps,
                           int k, double h, const EigenOptions& opts, int* eigensolves) {
  const PatternPtr& pattern = w.pattern_ptr();
  const PatternMatrix E0 = factors_to_pattern(f0, pattern);
  const double eta0 = eta_coefficient(f0, R0, E0);

  // Basis update.
  const Eigen::MatrixXd US0 = f0.U * f0.S;
  const Eigen::MatrixXd K1 = US0 + h * (-R0.apply(f0.U) + eta0 * US0);
  SvsdFactors f1;
  f1.U = orthonormal_basis(K1);
  const Eigen::MatrixXd M = f1.U.transpose() * f0.U;
  SvsdFactors tilde{f1.U, symmetrize(M * f0.S * M.transpose())};
  normalize_factors(tilde, pattern);

  // Coefficient update with R evaluated at the rotated iterate.
  const PatternMatrix E_tilde = factors_to_pattern(tilde, pattern);
  const SpectralData sd = spectral_data(*pattern, w.perturbed(eps, E_tilde), k, opts);
  if (eigensolves != nullptr) ++*eigensolves;
  const RFactors R_tilde = assemble_R(sd);
  const double eta = eta_coefficient(tilde, R_tilde, E_tilde);
  const Eigen::MatrixXd RtU = R_tilde.apply(tilde.U);
  f1.S = tilde.S + h * (-symmetrize(tilde.U.transpose() * RtU) + eta * tilde.S);
  normalize_factors(f1, pattern);
  return f1;
}

SvsdFactors splitting_step(const SvsdFactors& f0, const WeightMatrix& w, double eps, int k, double h,
                           const EigenOptions& opts) {
  const PatternMatrix E0 = factors_to_pattern(f0, w.pattern_ptr());
  const RFactors R0 = assemble_R(spectral_data(w.pattern(), w.perturbed(eps, E0), k, opts));
  return splitting_step(f0, R0, w, eps, k, h, opts);
}

SvsdFactors direct_us_step(const SvsdFactors& f0, const RFactors& R0, const PatternPtr& pattern, double eta,
                           double h) {
  const Eigen::MatrixXd RU = R0.apply(f0.U);
  const Eigen::MatrixXd T = symmetrize(f0.U.transpose() * RU);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(f0.S);
  if (!lu.isInvertible()) throw LowRankBreakdown("S is singular");
  const Eigen::MatrixXd Udot = -(RU - f0.U * T) * lu.inverse();
  const Eigen::MatrixXd S1 = f0.S + h * (-T + eta * f0.S);
  Eigen::MatrixXd Tq;
  SvsdFactors f1;
  f1.U = orthonormal_basis(f0.U + h * Udot, &Tq);
  f1.S = symmetrize(Tq * S1 * Tq.transpose());
  normalize_factors(f1, pattern);
  return f1;
}

StationaryPoint inner_iteration_lowrank(const WeightMatrix& w, double eps, int k, const SvsdFactors& f0,
                                        const FlowConfig& config) {
  const PatternPtr& pattern = w.pattern_ptr();
  StationaryPoint out;
  SvsdFactors f = f0;
  normalize_factors(f, pattern);
  PatternMatrix E = factors_to_pattern(f, pattern);
  GradientBundle bundle = evaluate(w, eps, E, k, 0.0, config.eig);
  out.eigensolves = 1;
  RFactors R = assemble_R(bundle.spectral);
  double f_cur = bundle.value;
  double h = config.h0;
  int ill_conditioned = 0;
  const auto& ar = config.armijo;

  auto record = [&](int iter) {
    if (!config.record_trajectory) return;
    out.trajectory.push_back({iter, h, bundle.value, bundle.grad.frobenius_norm(), 0.0, condition_number(f.S)});
  };
  record(0);
  auto below = [&](const GradientBundle& b) { return config.stop_below >= 0.0 && b.value <= config.stop_below; };

  if (below(bundle)) {
    out.stopped_below = true;
  } else {
    for (int it = 1; it <= config.maxit; ++it) {
      if (bundle.spectral.coalesced) {
        out.converged = true;
        out.diagnostics = "eigenvalues coalesced";
        break;
      }
      if (R.rank < 4) {
        out.fallback = true;
        out.diagnostics = "x, y, z became linearly dependent";
        break;
      }
      // Ė = -Π P_Y R + η E at the current point.
      const PatternMatrix PiPR = project_pattern(tangent_project(f, R.as_lowrank()), pattern);
      const double eta = PiPR.dot(E);
      const PatternMatrix Edot = eta * E - PiPR;
      const double gnorm = bundle.grad.frobenius_norm();
      const double edot_norm = Edot.frobenius_norm();
      if (edot_norm <= 1e-14 * std::max(gnorm, 1e-300)) {
        out.converged = true;
        break;
      }
      if (config.stop_rule == StopRule::GradientAlignment &&
          alignment_residual(bundle.grad, E) <= config.alignment_tol) {
        out.converged = true;
        break;
      }
      const double slope = eps * bundle.grad.dot(Edot);

      bool first_try = true;
      bool failed = false;
      int backtracks = 0;
      int halvings = 0;
      SvsdFactors f_new;
      PatternMatrix E_new;
      GradientBundle b_new;
      for (;;) {
        bool step_ok = true;
        try {
          f_new = config.use_direct_us ? direct_us_step(f, R, pattern, eta, h)
                                       : splitting_step(f, R, w, eps, k, h, config.eig, &out.eigensolves);
        } catch (const LowRankBreakdown&) {
          step_ok = false;
        }
        if (step_ok) {
          E_new = factors_to_pattern(f_new, pattern);
          b_new = evaluate(w, eps, E_new, k, 0.0, config.eig, &bundle.spectral.eigenvectors);
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
          const double bound = slope < 0.0 ? f_cur + ar.decrease * h * slope : f_cur;
          if (b_new.value <= bound && (slope < 0.0 || b_new.value < f_cur)) break;
        }
        if (++backtracks > ar.max_backtracks) {
          if (step_ok && (std::abs(b_new.value - f_cur) <= config.tol || std::abs(h * slope) <= config.tol)) {
            out.converged = true;
            out.diagnostics = "line search exhausted at stationarity";
          } else {
            out.diagnostics = step_ok ? "line search failed" : "QR breakdown in the splitting step";
            out.fallback = !step_ok;
          }
          failed = true;
          break;
        }
        h *= ar.backtrack;
        first_try = false;
      }
      if (failed) break;

      if (b_new.value > f_cur) ++out.monotone_violations;
      const double change = std::abs(b_new.value - f_cur);
      f = std::move(f_new);
      E = std::move(E_new);
      bundle = std::move(b_new);
      R = assemble_R(bundle.spectral);
      f_cur = bundle.value;
      out.iterations = it;
      if (first_try) h = std::min(h * ar.growth, ar.h_max);
      record(it);

      if (condition_number(f.S) > config.cond_limit) {
        if (++ill_conditioned >= config.cond_patience) {
          out.fallback = true;
          out.diagnostics = "S persistently ill-conditioned";
          break;
        }
      } else {
        ill_conditioned = 0;
      }
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
  out.factors = std::move(f);
  return out;
}

}  // namespace clusterstab
