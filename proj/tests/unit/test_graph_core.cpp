#include "clusterstab/generators.hpp"
#include "clusterstab/graph.hpp"
#include "clusterstab/laplacian.hpp"
#include "clusterstab/matrix_market.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <filesystem>
#include <set>
#include <sstream>

using namespace clusterstab;

namespace {

PatternPtr make_pattern(int n, std::vector<Edge> edges) { return std::make_shared<const Pattern>(n, std::move(edges)); }

WeightMatrix path3() { return WeightMatrix(make_pattern(3, {{0, 1}, {1, 2}}), Eigen::Vector2d(1.0, 1.0)); }

}  // namespace

TEST_SUITE("graph_core") {
  TEST_CASE("pattern normalizes orientation and removes duplicates") {
    Pattern p(4, {{2, 1}, {0, 3}, {1, 2}, {3, 0}});
    REQUIRE(p.edge_count() == 2);
    CHECK(p.edges()[0] == Edge{0, 3});
    CHECK(p.edges()[1] == Edge{1, 2});
    CHECK(p.contains(3, 0));
    CHECK_FALSE(p.contains(0, 1));
    CHECK(p.incident(3).size() == 1);
    CHECK(p.incident(3)[0].neighbor == 0);
  }

  TEST_CASE("pattern rejects self-loops and out-of-range vertices") {
    CHECK_THROWS_AS(Pattern(3, {{1, 1}}), StructuralError);
    CHECK_THROWS_AS(Pattern(3, {{0, 3}}), StructuralError);
  }

  TEST_CASE("weight matrix rejects negative weights") {
    CHECK_THROWS_AS(WeightMatrix(make_pattern(2, {{0, 1}}), Eigen::VectorXd::Constant(1, -1.0)), StructuralError);
  }

  TEST_CASE("pattern matrix Frobenius norm counts both orientations") {
    PatternMatrix a(make_pattern(3, {{0, 1}, {1, 2}}), Eigen::Vector2d(3.0, 4.0));
    CHECK(a.frobenius_norm() == doctest::Approx(std::sqrt(2.0 * 25.0)));
    CHECK(a.frobenius_norm() == doctest::Approx(a.to_dense().norm()));
    CHECK(a.normalized().frobenius_norm() == doctest::Approx(1.0));
  }

  TEST_CASE("laplacian of the 2-node graph") {
    WeightMatrix w(make_pattern(2, {{0, 1}}), Eigen::VectorXd::Constant(1, 2.0));
    const Eigen::MatrixXd L = Eigen::MatrixXd(laplacian(w));
    Eigen::Matrix2d expect;
    expect << 2, -2, -2, 2;
    CHECK((L - expect).norm() == 0.0);
    const Eigen::VectorXd ev = oracle::eigenvalues(L);
    CHECK(ev(0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(ev(1) == doctest::Approx(4.0));
  }

  TEST_CASE("laplacian of the path P3") {
    const Eigen::MatrixXd L = Eigen::MatrixXd(laplacian(path3()));
    Eigen::Matrix3d expect;
    expect << 1, -1, 0, -1, 2, -1, 0, -1, 1;
    CHECK((L - expect).norm() == 0.0);
    const Eigen::VectorXd ev = oracle::eigenvalues(L);
    CHECK(std::abs(ev(0)) < 1e-14);
    CHECK(ev(1) == doctest::Approx(1.0));
    CHECK(ev(2) == doctest::Approx(3.0));
  }

  TEST_CASE("laplacian rows sum to zero and match the dense oracle") {
    const WeightMatrix w = oracle::random_graph(30, 0.2, 7);
    const Eigen::MatrixXd L = Eigen::MatrixXd(laplacian(w));
    CHECK((L * Eigen::VectorXd::Ones(30)).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((L - oracle::dense_laplacian(w.to_dense(false))).norm() < 1e-13);
    const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(30, -1.0, 2.0);
    CHECK((laplacian_apply(w.pattern(), w.weights(), v) - L * v).norm() < 1e-12);
  }

  TEST_CASE("laplacian_dense rejects non-square and asymmetric input") {
    CHECK_THROWS_AS(laplacian_dense(Eigen::MatrixXd::Zero(2, 3)), StructuralError);
    Eigen::Matrix2d a;
    a << 0, 1, 2, 0;
    CHECK_THROWS_AS(laplacian_dense(a), StructuralError);
  }

  TEST_CASE("adjoint identity on random pairs") {
    const WeightMatrix w = oracle::random_graph(25, 0.3, 11);
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 100; ++s) {
      const PatternMatrix A = oracle::random_pattern_matrix(w.pattern_ptr(), 1000 + s);
      const Eigen::MatrixXd M = oracle::random_symmetric(25, 2000 + s);
      const double lhs = oracle::frob(Eigen::MatrixXd(laplacian(A)), M);
      const double rhs = A.dot(laplacian_adjoint(M, w.pattern_ptr()));
      worst = std::max(worst, std::abs(lhs - rhs) / (A.frobenius_norm() * M.norm()));
    }
    CHECK(worst < 1e-10);
  }

  TEST_CASE("adjoint on the 2-node graph and on the constant matrix") {
    auto p = make_pattern(2, {{0, 1}});
    Eigen::Matrix2d M;
    M << 1.5, -0.25, -0.25, 4.0;
    CHECK(laplacian_adjoint(M, p).values()(0) == doctest::Approx((1.5 + 4.0 + 0.5) / 2.0));
    const WeightMatrix w = oracle::random_graph(10, 0.5, 3);
    const Eigen::MatrixXd ones = Eigen::MatrixXd::Constant(10, 10, 0.1);
    CHECK(laplacian_adjoint(ones, w.pattern_ptr()).values().cwiseAbs().maxCoeff() < 1e-15);
  }

  TEST_CASE("low-rank adjoint and projection agree with the dense versions") {
    const WeightMatrix w = oracle::random_graph(20, 0.3, 5);
    LowRankSym m{Eigen::MatrixXd::Random(20, 4), Eigen::MatrixXd::Random(4, 4)};
    m.S = 0.5 * (m.S + m.S.transpose()).eval();
    const Eigen::MatrixXd dense = m.to_dense();
    CHECK((laplacian_adjoint(m, w.pattern_ptr()).values() - laplacian_adjoint(dense, w.pattern_ptr()).values())
              .norm() < 1e-12);
    CHECK((project_pattern(m, w.pattern_ptr()).values() - project_pattern(dense, w.pattern_ptr()).values()).norm() <
          1e-12);
    LowRankSym other{Eigen::MatrixXd::Random(20, 3), Eigen::MatrixXd::Identity(3, 3)};
    CHECK(frobenius_inner(m, other) == doctest::Approx(oracle::frob(dense, other.to_dense())));
  }

  TEST_CASE("pattern projection is idempotent and self-adjoint") {
    const WeightMatrix w = oracle::random_graph(18, 0.3, 9);
    const auto& p = w.pattern_ptr();
    for (std::uint64_t s = 0; s < 10; ++s) {
      const Eigen::MatrixXd M = oracle::random_symmetric(18, 10 + s);
      const Eigen::MatrixXd N = oracle::random_symmetric(18, 50 + s);
      const PatternMatrix pm = project_pattern(M, p);
      CHECK((project_pattern(pm.to_dense(), p).values() - pm.values()).norm() <= 1e-14 * pm.frobenius_norm());
      const double lhs = oracle::frob(pm.to_dense(), N);
      const double rhs = oracle::frob(M, project_pattern(N, p).to_dense());
      CHECK(std::abs(lhs - rhs) <= 1e-14 * M.norm() * N.norm());
    }
    auto empty = make_pattern(5, {});
    const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(5, 1.0, 2.0);
    CHECK(project_pattern(Eigen::MatrixXd(x * x.transpose()), empty).frobenius_norm() == 0.0);
  }

  TEST_CASE("matrix market: single edge file") {
    std::istringstream in("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n2 1 2.0\n");
    const WeightMatrix w = read_matrix_market(in);
    CHECK(w.size() == 2);
    REQUIRE(w.pattern().edge_count() == 1);
    CHECK(w.weights()(0) == 2.0);
  }

  TEST_CASE("matrix market: diagonal entries are counted and kept out of the pattern") {
    std::istringstream in("%%MatrixMarket matrix coordinate real symmetric\n3 3 3\n1 1 5.0\n2 1 1.0\n3 2 1.0\n");
    MatrixMarketInfo info;
    const WeightMatrix w = read_matrix_market(in, &info);
    CHECK(info.diagonal_dropped == 1);
    CHECK(w.pattern().edge_count() == 2);
    CHECK(w.nnz() == 5);
    CHECK((Eigen::MatrixXd(laplacian(w)) - Eigen::MatrixXd(laplacian(path3()))).norm() == 0.0);
  }

  TEST_CASE("matrix market: general header, duplicates summed, asymmetry and negatives rejected") {
    std::istringstream ok("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 2 1.0\n2 1 1.5\n1 2 0.5\n");
    MatrixMarketInfo info;
    const WeightMatrix w = read_matrix_market(ok, &info);
    CHECK(w.weights()(0) == doctest::Approx(1.5));
    CHECK(info.duplicates_summed == 1);

    std::istringstream asym("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 2 1.0\n2 1 2.0\n");
    CHECK_THROWS_AS(read_matrix_market(asym), StructuralError);
    std::istringstream neg("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n2 1 -1.0\n");
    CHECK_THROWS_AS(read_matrix_market(neg), StructuralError);
    std::istringstream bad("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n2 x 1.0\n");
    CHECK_THROWS_AS(read_matrix_market(bad), ParseError);
    std::istringstream header("not a matrix market file\n");
    CHECK_THROWS_AS(read_matrix_market(header), ParseError);
  }

  TEST_CASE("matrix market: pattern field gives unit weights") {
    std::istringstream in("%%MatrixMarket matrix coordinate pattern symmetric\n3 3 2\n2 1\n3 2\n");
    const WeightMatrix w = read_matrix_market(in);
    CHECK(w.weights().isOnes());
  }

  TEST_CASE("matrix market: save then load is bit-exact") {
    const WeightMatrix w = generate_sbm(3, 4, 99);
    const auto path = std::filesystem::temp_directory_path() / "clusterstab_roundtrip.mtx";
    save_matrix_market(path, w, "round trip");
    const WeightMatrix back = load_matrix_market(path);
    CHECK(back == w);
    CHECK(back.nnz() == w.nnz());
    std::filesystem::remove(path);
  }

  TEST_CASE("SBM: structure, size and determinism") {
    const WeightMatrix w = generate_sbm(8, 20, 0);
    CHECK(w.size() == 160);
    CHECK(w.nnz() == 3480);
    CHECK(component_count(w) == 1);
    CHECK(generate_sbm(8, 20, 0) == w);
    CHECK_FALSE(generate_sbm(8, 20, 1) == w);

    const Eigen::MatrixXd D = w.to_dense(true);
    const Eigen::MatrixXd J = D.block(0, 0, 20, 20);
    for (int b = 0; b < 8; ++b) {
      CHECK((D.block(b * 20, b * 20, 20, 20) - J).norm() == 0.0);
      if (b + 1 < 8) {
        CHECK((D.block(b * 20, (b + 1) * 20, 20, 20) - Eigen::MatrixXd::Identity(20, 20)).norm() == 0.0);
      }
      for (int c = b + 2; c < 8; ++c) CHECK(D.block(b * 20, c * 20, 20, 20).norm() == 0.0);
    }
    CHECK(J.minCoeff() > 0.0);
    CHECK(J.maxCoeff() < 1.0);
    const Eigen::VectorXd ev = oracle::eigenvalues(Eigen::MatrixXd(laplacian(w)));
    CHECK(std::abs(ev(0)) < 1e-10);
    CHECK(ev(1) > 1e-3);
  }

  TEST_CASE("SBM: smallest case p=2, q=1") {
    const WeightMatrix w = generate_sbm(2, 1, 5);
    CHECK(w.size() == 2);
    CHECK(w.weights()(0) == 1.0);
    REQUIRE(w.diagonal().size() == 2);
    CHECK(w.diagonal()(0) == w.diagonal()(1));
    CHECK(w.diagonal()(0) > 0.0);
  }

  TEST_CASE("compression: dimension and density") {
    const WeightMatrix w = oracle::random_graph(41, 0.25, 17);
    const WeightMatrix c = compress_halve(w);
    CHECK(c.size() == 20);
    const double d1 = static_cast<double>(w.nnz()) / (41.0 * 41.0);
    const double d2 = static_cast<double>(c.nnz()) / (20.0 * 20.0);
    CHECK(std::abs(d1 - d2) <= 2.0 / (20.0 * 20.0));
    CHECK(c.weights().minCoeff() >= 0.0);
  }

  TEST_CASE("compression: block averages of a hand example") {
    // n = 5 -> n2 = 2; blocks use rows/cols {0,1} and {2,3}.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(5, 5);
    A(0, 2) = A(2, 0) = 4.0;
    A(1, 3) = A(3, 1) = 8.0;
    A(0, 1) = A(1, 0) = 2.0;
    // Row/column 4 falls outside the halved index range but counts for density:
    // nnz = 12, budget round(12 * 4 / 25) = 2 keeps exactly one off-diagonal pair.
    A(0, 4) = A(4, 0) = A(1, 4) = A(4, 1) = A(2, 4) = A(4, 2) = 1.0;
    const WeightMatrix c = compress_halve(WeightMatrix::from_dense(A));
    REQUIRE(c.size() == 2);
    REQUIRE(c.pattern().edge_count() == 1);
    CHECK(c.weights()(0) == doctest::Approx(3.0));
    CHECK(c.nnz() == 2);
  }

  TEST_CASE("compression: equal-weight complete graph on 4 vertices") {
    Eigen::MatrixXd A = Eigen::MatrixXd::Ones(4, 4) - Eigen::MatrixXd::Identity(4, 4);
    const WeightMatrix c = compress_halve(WeightMatrix::from_dense(A));
    CHECK(c.size() == 1);
    CHECK(c.pattern().edge_count() == 0);
  }

  TEST_CASE("k-NN similarity: identical points and collinear triple") {
    Eigen::MatrixXd twins(3, 1);
    twins << 0.0, 0.0, 1.0;
    const WeightMatrix t = build_knn_similarity(twins, 1);
    CHECK(t.to_dense(false)(0, 1) == doctest::Approx(1.0));

    Eigen::MatrixXd line(3, 1);
    line << 0.0, 1.0, 2.0;
    const WeightMatrix w = build_knn_similarity(line, 1);
    const Eigen::MatrixXd D = w.to_dense(false);
    CHECK(D(0, 1) == doctest::Approx(std::exp(-4.0)));
    CHECK(D(1, 2) == doctest::Approx(std::exp(-4.0)));
    CHECK(D(0, 2) == 0.0);
  }

  TEST_CASE("k-NN similarity: disconnected input is rejected") {
    Eigen::MatrixXd pts(4, 1);
    pts << 0.0, 0.1, 10.0, 10.1;
    CHECK_THROWS_WITH_AS(build_knn_similarity(pts, 1), doctest::Contains("2 components"), StructuralError);
  }

  TEST_CASE("point table reader") {
    std::istringstream in("# x,y\n1,2\n3 4\n\n5,\t6\n");
    const Eigen::MatrixXd X = read_points(in);
    CHECK(X.rows() == 3);
    CHECK(X(2, 1) == 6.0);
    std::istringstream bad("1,2\n3\n");
    CHECK_THROWS_AS(read_points(bad), ParseError);
  }

  TEST_CASE("component counts") {
    CHECK(component_count(Pattern(5, {})) == 5);
    CHECK(component_count(Pattern(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}})) == 2);
    CHECK(component_labels(Pattern(4, {{2, 3}})) == std::vector<int>{0, 1, 2, 2});
  }

  TEST_CASE("principal minor keeps the leading block") {
    const WeightMatrix w = oracle::random_graph(12, 0.4, 21);
    const WeightMatrix m = w.principal_minor(7);
    CHECK(m.size() == 7);
    CHECK((m.to_dense() - w.to_dense().topLeftCorner(7, 7)).norm() == 0.0);
  }
}
