#include "clusterstab/flow_full.hpp"
#include "clusterstab/flow_lowrank.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

using namespace clusterstab;

namespace {

Eigen::MatrixXd dense_R(const SpectralData& sd) {
  const Eigen::Index n = sd.x.size();
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(n);
  return 0.5 * (sd.z * one.transpose() + one * sd.z.transpose()) - sd.x * sd.x.transpose() +
         sd.y * sd.y.transpose();
}

Eigen::MatrixXd dense_Y(const SvsdFactors& f) { return f.U * f.S * f.U.transpose(); }

/// Right-hand side of Ẏ = -P_Y R(Π Y) + η Y evaluated on dense matrices.
Eigen::MatrixXd dense_rhs(const WeightMatrix& w, double eps, int k, const Eigen::MatrixXd& Y) {
  const PatternMatrix E = project_pattern(Y, w.pattern_ptr());
  const SpectralData sd = spectral_data(w, eps, E, k);
  const Eigen::MatrixXd R = dense_R(sd);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Y);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(Y.rows()));
  for (Eigen::Index i = 0; i < Y.rows(); ++i) idx[static_cast<std::size_t>(i)] = i;
  std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(es.eigenvalues()(a)) > std::abs(es.eigenvalues()(b));
  });
  Eigen::MatrixXd U(Y.rows(), 4);
  for (int c = 0; c < 4; ++c) U.col(c) = es.eigenvectors().col(idx[static_cast<std::size_t>(c)]);
  const Eigen::MatrixXd P = U * U.transpose();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(Y.rows(), Y.rows());
  const Eigen::MatrixXd PR = R - (I - P) * R * (I - P);
  const PatternMatrix PiPR = project_pattern(PR, w.pattern_ptr());
  const double eta = PiPR.dot(E) / E.dot(E);
  return -PR + eta * Y;
}

Eigen::MatrixXd rk4(const WeightMatrix& w, double eps, int k, Eigen::MatrixXd Y, double T, int steps) {
  const double dt = T / steps;
  for (int s = 0; s < steps; ++s) {
    const Eigen::MatrixXd k1 = dense_rhs(w, eps, k, Y);
    const Eigen::MatrixXd k2 = dense_rhs(w, eps, k, Y + 0.5 * dt * k1);
    const Eigen::MatrixXd k3 = dense_rhs(w, eps, k, Y + 0.5 * dt * k2);
    const Eigen::MatrixXd k4 = dense_rhs(w, eps, k, Y + dt * k3);
    Y += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return Y;
}

}  // namespace

TEST_SUITE("flow_full") {
  TEST_CASE("one Euler step with a small step size lowers F") {
    const WeightMatrix w = oracle::random_graph(20, 0.3, 41);
    const SpectralData sd = spectral_data(w.pattern(), w.weights(), 3);
    const PatternMatrix E0 = oracle::random_pattern_matrix(w.pattern_ptr(), 1).normalized();
    const GradientBundle b0 = evaluate(w, 0.5, E0, 3);
    const auto [E1, b1] = full_step(w, 0.5, E0, b0, 1e-3, 3, 0.0);
    CHECK(E1.frobenius_norm() == doctest::Approx(1.0));
    CHECK(b1.value < b0.value);
    CHECK(sd.gap() > 0.0);
  }

  TEST_CASE("integration descends monotonically to an aligned stationary point") {
    const WeightMatrix w = oracle::random_graph(20, 0.3, 42);
    const int k = 2;
    const double g = spectral_gap(w, k);
    const PatternMatrix G0 = gradient_from_spectral(spectral_data(w.pattern(), w.weights(), k), w.pattern_ptr());
    FlowConfig cfg;
    cfg.stop_rule = StopRule::GradientAlignment;
    cfg.alignment_tol = 1e-6;
    cfg.maxit = 5000;
    cfg.record_trajectory = true;
    const double eps = 0.3 * g / G0.frobenius_norm();
    const StationaryPoint sp = integrate_full(w, eps, k, -1.0 * G0.normalized(), cfg);
    CHECK(sp.converged);
    CHECK(sp.monotone_violations == 0);
    CHECK(alignment_residual(sp.bundle.grad, sp.E) <= 1e-6);
    // E* = -G/|G| at stationarity.
    CHECK((sp.E + sp.bundle.grad.normalized()).frobenius_norm() < 1e-5);
    for (std::size_t i = 1; i < sp.trajectory.size(); ++i) {
      CHECK(sp.trajectory[i].F <= sp.trajectory[i - 1].F);
    }
  }

  TEST_CASE("penalized integration reduces negativity as c grows") {
    const WeightMatrix w = oracle::random_graph(16, 0.4, 43, 0.01, 0.2);
    const int k = 2;
    const PatternMatrix G0 = gradient_from_spectral(spectral_data(w.pattern(), w.weights(), k), w.pattern_ptr());
    FlowConfig cfg;
    cfg.maxit = 3000;
    const double eps = 0.6 * spectral_gap(w, k) / G0.frobenius_norm();
    const StationaryPoint plain = integrate_full(w, eps, k, -1.0 * G0.normalized(), cfg, 0.0);
    const StationaryPoint pen = integrate_full(w, eps, k, plain.E, cfg, 50.0);
    const double neg0 = negativity_norm(w.perturbed(eps, plain.E));
    const double neg1 = negativity_norm(w.perturbed(eps, pen.E));
    REQUIRE(neg0 > 0.0);
    CHECK(neg1 < neg0);
    CHECK(pen.monotone_violations == 0);
  }
}

TEST_SUITE("flow_lowrank") {
  TEST_CASE("R factors reproduce the rank-4 matrix and its projection is G") {
    const WeightMatrix w = oracle::random_graph(15, 0.3, 51);
    const SpectralData sd = spectral_data(w.pattern(), w.weights(), 3);
    const RFactors R = assemble_R(sd, true);
    CHECK(R.rank == 4);
    const Eigen::MatrixXd Rd = dense_R(sd);
    CHECK((R.as_lowrank().to_dense() - Rd).norm() < 1e-13);
    CHECK((R.B * R.Lambda * R.B.transpose() - Rd).norm() < 1e-12);
    CHECK((project_pattern(Rd, w.pattern_ptr()).values() - gradient_from_spectral(sd, w.pattern_ptr()).values())
              .norm() < 1e-13);
    const Eigen::MatrixXd V = Eigen::MatrixXd::Random(15, 3);
    CHECK((R.apply(V) - Rd * V).norm() < 1e-12);
  }

  TEST_CASE("tangent projection: factored equals dense, idempotent, fixes Y") {
    const WeightMatrix w = oracle::random_graph(15, 0.3, 52);
    const SvsdFactors f = init_factors(w, 3);
    const Eigen::MatrixXd Y = dense_Y(f);
    const Eigen::MatrixXd A = oracle::random_symmetric(15, 3);
    const Eigen::MatrixXd PA = tangent_project(f, A);
    CHECK((tangent_project(f, PA) - PA).norm() < 1e-12 * A.norm());
    CHECK((tangent_project(f, Y) - Y).norm() < 1e-12 * Y.norm());
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(15, 15);
    const Eigen::MatrixXd P = f.U * f.U.transpose();
    CHECK((PA - (A - (I - P) * A * (I - P))).norm() < 1e-12 * A.norm());

    LowRankSym Al{Eigen::MatrixXd::Random(15, 4), Eigen::MatrixXd::Identity(4, 4)};
    Al.S(0, 0) = -2.0;
    CHECK((tangent_project(f, Al).to_dense() - tangent_project(f, Al.to_dense())).norm() < 1e-12);
  }

  TEST_CASE("initial factors give Pi Y0 = -G0/|G0|") {
    const WeightMatrix w = oracle::random_graph(18, 0.3, 53);
    const SpectralData sd = spectral_data(w.pattern(), w.weights(), 4);
    const SvsdFactors f = init_factors(sd, w.pattern_ptr());
    const PatternMatrix E0 = factors_to_pattern(f, w.pattern_ptr());
    const PatternMatrix G0 = gradient_from_spectral(sd, w.pattern_ptr());
    CHECK(E0.frobenius_norm() == doctest::Approx(1.0));
    CHECK((E0 + G0.normalized()).frobenius_norm() < 1e-12);
    CHECK((f.U.transpose() * f.U - Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-12);
  }

  TEST_CASE("eta matches the dense evaluation") {
    const WeightMatrix w = oracle::random_graph(15, 0.3, 54);
    const SvsdFactors f = init_factors(w, 2);
    const PatternMatrix E = factors_to_pattern(f, w.pattern_ptr());
    const SpectralData sd = spectral_data(w, 0.4, E, 2);
    const RFactors R = assemble_R(sd);
    const Eigen::MatrixXd PR = tangent_project(f, dense_R(sd));
    CHECK(eta_coefficient(f, R, E) == doctest::Approx(project_pattern(PR, w.pattern_ptr()).dot(E)).epsilon(1e-12));
  }

  TEST_CASE("splitting step has local error O(h^2) against a dense RK4 oracle") {
    const WeightMatrix w = oracle::random_graph(12, 0.35, 55);
    const int k = 3;
    const double eps = 0.4 * spectral_gap(w, k);
    const SvsdFactors f0 = init_factors(w, k);
    const Eigen::MatrixXd Y0 = dense_Y(f0);
    double prev = 0.0;
    std::vector<double> ratios;
    for (double h : {0.04, 0.02, 0.01}) {
      const SvsdFactors f1 = splitting_step(f0, w, eps, k, h);
      const Eigen::MatrixXd exact = rk4(w, eps, k, Y0, h, 40);
      const double err = (dense_Y(f1) - exact).norm();
      if (prev > 0.0) ratios.push_back(prev / err);
      prev = err;
    }
    for (double r : ratios) {
      CHECK(r > 3.0);
      CHECK(r < 5.5);
    }
  }

  TEST_CASE("direct (U, S) Euler step agrees with the splitting step to O(h^2)") {
    const WeightMatrix w = oracle::random_graph(12, 0.35, 56);
    const int k = 2;
    const double eps = 0.3 * spectral_gap(w, k);
    const SvsdFactors f0 = init_factors(w, k);
    const PatternMatrix E0 = factors_to_pattern(f0, w.pattern_ptr());
    const RFactors R0 = assemble_R(spectral_data(w, eps, E0, k));
    const double eta = eta_coefficient(f0, R0, E0);
    double prev = 0.0;
    for (double h : {0.02, 0.01}) {
      const double d = (dense_Y(direct_us_step(f0, R0, w.pattern_ptr(), eta, h)) -
                        dense_Y(splitting_step(f0, R0, w, eps, k, h)))
                           .norm();
      if (prev > 0.0) CHECK(prev / d > 3.0);
      prev = d;
    }
  }

  TEST_CASE("low-rank inner iteration: monotone descent and Y* parallel to R*") {
    const WeightMatrix w = oracle::random_graph(14, 0.35, 57);
    const int k = 2;
    const double eps = 0.3 * spectral_gap(w, k);
    FlowConfig cfg;
    cfg.tol = 1e-15;
    cfg.maxit = 20000;
    const StationaryPoint sp = inner_iteration_lowrank(w, eps, k, init_factors(w, k), cfg);
    CHECK(sp.monotone_violations == 0);
    REQUIRE(sp.factors.has_value());
    const Eigen::MatrixXd Y = dense_Y(*sp.factors);
    const Eigen::MatrixXd R = dense_R(sp.bundle.spectral);
    CHECK((Y / Y.norm() + R / R.norm()).norm() < 1e-4);
  }

  TEST_CASE("QR of a rank-deficient block raises a breakdown") {
    Eigen::MatrixXd K = Eigen::MatrixXd::Random(10, 4);
    K.col(3) = K.col(0) + K.col(1);
    CHECK_THROWS_AS(orthonormal_basis(K), LowRankBreakdown);
  }
}
