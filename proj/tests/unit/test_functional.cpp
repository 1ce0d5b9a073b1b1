#include "clusterstab/functional.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

using namespace clusterstab;

TEST_SUITE("functional") {
  TEST_CASE("at eps = 0 the objective is the spectral gap and the penalty vanishes") {
    const WeightMatrix w = oracle::random_graph(25, 0.25, 31);
    const PatternMatrix E = oracle::random_pattern_matrix(w.pattern_ptr(), 1).normalized();
    const GradientBundle b = evaluate(w, 0.0, E, 4, 2.0);
    CHECK(b.value == doctest::Approx(oracle::gap(w.to_dense(false), 4)).epsilon(1e-12));
    CHECK(b.penalty == 0.0);
    CHECK((b.penalized_grad.values() - b.grad.values()).norm() == 0.0);
  }

  TEST_CASE("gradient equals the adjoint applied to xx' - yy'") {
    const WeightMatrix w = oracle::random_graph(25, 0.25, 32);
    const PatternMatrix E = oracle::random_pattern_matrix(w.pattern_ptr(), 2).normalized();
    const GradientBundle b = evaluate(w, 0.2, E, 3);
    const Eigen::VectorXd& x = b.spectral.x;
    const Eigen::VectorXd& y = b.spectral.y;
    const Eigen::MatrixXd M = x * x.transpose() - y * y.transpose();
    CHECK((b.grad.values() - laplacian_adjoint(M, w.pattern_ptr()).values()).norm() < 1e-13);
  }

  TEST_CASE("time derivative of F matches eps <G, Edot> by finite differences") {
    const WeightMatrix w = oracle::random_graph(30, 0.2, 33);
    const double eps = 0.3;
    const int k = 3;
    const PatternMatrix E = oracle::random_pattern_matrix(w.pattern_ptr(), 3).normalized();
    const PatternMatrix Edot = oracle::random_pattern_matrix(w.pattern_ptr(), 4);
    const GradientBundle b = evaluate(w, eps, E, k);
    const double t = 1e-6;
    const double fp = oracle::gap(w.to_dense(false) + eps * (E + t * Edot).to_dense(), k);
    const double fm = oracle::gap(w.to_dense(false) + eps * (E - t * Edot).to_dense(), k);
    const double fd = (fp - fm) / (2 * t);
    const double formula = eps * b.grad.dot(Edot);
    CHECK(std::abs(fd - formula) <= 1e-3 * std::abs(formula));
  }

  TEST_CASE("penalty and penalized gradient") {
    const WeightMatrix w = oracle::random_graph(20, 0.3, 34, 0.05, 0.3);
    const PatternMatrix E = oracle::random_pattern_matrix(w.pattern_ptr(), 5).normalized();
    const double eps = 1.0;
    const double c = 3.0;
    const GradientBundle b = evaluate(w, eps, E, 2, c);
    const Eigen::VectorXd v = w.weights() + eps * E.values();
    const Eigen::VectorXd neg = v.cwiseMin(0.0);
    REQUIRE(neg.squaredNorm() > 0.0);
    CHECK(b.penalty == doctest::Approx(neg.squaredNorm()));
    CHECK(negativity_norm(v) == doctest::Approx(std::sqrt(2.0) * neg.norm()));
    CHECK(min_entry(v) == v.minCoeff());
    CHECK((b.penalized_grad.values() - (b.grad.values() + c * neg)).norm() < 1e-14);

    // d/dt (F + cQ) = eps <G_c, Edot>.
    const PatternMatrix Edot = oracle::random_pattern_matrix(w.pattern_ptr(), 6);
    const double t = 1e-6;
    const double fp = evaluate(w, eps, E + t * Edot, 2, c).penalized_value();
    const double fm = evaluate(w, eps, E - t * Edot, 2, c).penalized_value();
    const double fd = (fp - fm) / (2 * t);
    CHECK(std::abs(fd - eps * b.penalized_grad.dot(Edot)) <= 1e-3 * std::abs(fd));
  }

  TEST_CASE("descent field is tangent to the unit sphere") {
    const WeightMatrix w = oracle::random_graph(20, 0.3, 35);
    const PatternMatrix E = oracle::random_pattern_matrix(w.pattern_ptr(), 7).normalized();
    const PatternMatrix G = oracle::random_pattern_matrix(w.pattern_ptr(), 8);
    CHECK(std::abs(descent_field(G, E).dot(E)) < 1e-13);
    const PatternMatrix D = constrained_direction(G, E);
    CHECK(D.frobenius_norm() == doctest::Approx(1.0));
    CHECK(D.dot(G) < 0.0);
    // Any other unit tangent direction decreases <G, .> less.
    PatternMatrix other = oracle::random_pattern_matrix(w.pattern_ptr(), 9);
    other -= other.dot(E) * E;
    other = other.normalized();
    CHECK(D.dot(G) <= other.dot(G) + 1e-14);
  }

  TEST_CASE("constrained direction vanishes at E = -G/|G|") {
    const WeightMatrix w = oracle::random_graph(15, 0.3, 36);
    const PatternMatrix G = oracle::random_pattern_matrix(w.pattern_ptr(), 10);
    const PatternMatrix E = -1.0 * G.normalized();
    CHECK(constrained_direction(G, E).frobenius_norm() == 0.0);
  }
}
