#include "clusterstab/clustering.hpp"

#include "clusterstab/generators.hpp"
#include "clusterstab/laplacian.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

namespace clusterstab {

namespace {

struct RunResult {
  std::vector<int> labels;
  Eigen::MatrixXd centroids;
  double inertia = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

Eigen::MatrixXd kmeanspp_seeds(const Eigen::MatrixXd& X, int k, std::mt19937_64& rng) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd C(k, X.cols());
  const auto first = static_cast<Eigen::Index>(uniform_open01(rng) * static_cast<double>(n));
  C.row(0) = X.row(std::min(first, n - 1));
  Eigen::VectorXd d2 = (X.rowwise() - C.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double target = uniform_open01(rng) * total;
      for (pick = 0; pick < n - 1; ++pick) {
        target -= d2(pick);
        if (target <= 0.0) break;
      }
    } else {
      pick = static_cast<Eigen::Index>(uniform_open01(rng) * static_cast<double>(n));
      pick = std::min(pick, n - 1);
    }
    C.row(c) = X.row(pick);
    d2 = d2.cwiseMin((X.rowwise() - C.row(c)).rowwise().squaredNorm());
  }
  return C;
}

double assign(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C, std::vector<int>& labels) {
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    Eigen::Index best = 0;
    const double d = (C.rowwise() - X.row(i)).rowwise().squaredNorm().minCoeff(&best);
    labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
    inertia += d;
  }
  return inertia;
}

RunResult lloyd(const Eigen::MatrixXd& X, int k, const KMeansOptions& opts, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  RunResult r;
  r.centroids = kmeanspp_seeds(X, k, rng);
  r.labels.assign(static_cast<std::size_t>(X.rows()), 0);
  r.inertia = assign(X, r.centroids, r.labels);
  for (int it = 1; it <= opts.max_iter; ++it) {
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, X.cols());
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(k);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      sums.row(r.labels[static_cast<std::size_t>(i)]) += X.row(i);
      ++counts(r.labels[static_cast<std::size_t>(i)]);
    }
    // Empty clusters keep their previous centroid.
    for (int c = 0; c < k; ++c) {
      if (counts(c) > 0) r.centroids.row(c) = sums.row(c) / counts(c);
    }
    const double next = assign(X, r.centroids, r.labels);
    r.iterations = it;
    const double drop = r.inertia - next;
    r.inertia = next;
    if (drop <= opts.rel_tol * std::max(next, std::numeric_limits<double>::min())) break;
  }
  return r;
}

}  // namespace

ClusterAssignment kmeans(const Eigen::MatrixXd& points, int k, const KMeansOptions& opts) {
  if (k < 1 || k > points.rows()) throw std::invalid_argument("k-means needs 1 <= k <= number of points");
  if (opts.restarts < 1) throw std::invalid_argument("k-means needs at least one restart");

  std::vector<RunResult> runs(static_cast<std::size_t>(opts.restarts));
  int threads = opts.threads > 0 ? opts.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, opts.restarts);
  auto work = [&](int t) {
    for (int r = t; r < opts.restarts; r += threads) {
      runs[static_cast<std::size_t>(r)] = lloyd(points, k, opts, opts.seed + static_cast<std::uint64_t>(r));
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }

  int best = 0;
  for (int r = 1; r < opts.restarts; ++r) {
    if (runs[static_cast<std::size_t>(r)].inertia < runs[static_cast<std::size_t>(best)].inertia) best = r;
  }
  RunResult& win = runs[static_cast<std::size_t>(best)];
  ClusterAssignment out;
  out.labels = std::move(win.labels);
  for (int& l : out.labels) ++l;
  out.centroids = std::move(win.centroids);
  out.inertia = win.inertia;
  out.restart = best;
  out.iterations = win.iterations;
  return out;
}

ClusterAssignment spectral_clustering(const WeightMatrix& w, int k, std::uint64_t seed, const EigenOptions& eig) {
  if (k < 1 || k > w.size()) throw std::invalid_argument("spectral clustering needs 1 <= k <= n");
  const EigenPairs pairs = smallest_eigenpairs(laplacian(w), k, eig);
  KMeansOptions opts;
  opts.seed = seed;
  return kmeans(pairs.vectors, k, opts);
}

double label_agreement(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("label vectors differ in length");
  if (predicted.empty()) return 1.0;
  std::map<int, int> pid;
  std::map<int, int> tid;
  for (int v : predicted) pid.emplace(v, static_cast<int>(pid.size()));
  for (int v : truth) tid.emplace(v, static_cast<int>(tid.size()));
  const int kp = static_cast<int>(pid.size());
  const int kt = static_cast<int>(tid.size());
  const int k = std::max(kp, kt);
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(k, k);
  for (std::size_t i = 0; i < truth.size(); ++i) ++counts(pid[predicted[i]], tid[truth[i]]);

  long best = 0;
  if (k <= 8) {
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    do {
      long hit = 0;
      for (int a = 0; a < k; ++a) hit += counts(a, perm[static_cast<std::size_t>(a)]);
      best = std::max(best, hit);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    Eigen::MatrixXi c = counts;
    for (int step = 0; step < k; ++step) {
      Eigen::Index a = 0;
      Eigen::Index b = 0;
      const int v = c.maxCoeff(&a, &b);
      if (v < 0) break;
      best += v;
      c.row(a).setConstant(-1);
      c.col(b).setConstant(-1);
    }
  }
  return static_cast<double>(best) / static_cast<double>(truth.size());
}

void write_labels_csv(std::ostream& out, const std::vector<int>& labels) {
  out << "vertex,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) out << i + 1 << ',' << labels[i] << '\n';
}

int zero_eigenvalue_multiplicity(const WeightMatrix& w) {
  const Eigen::MatrixXd L = Eigen::MatrixXd(laplacian(w));
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(L, Eigen::EigenvaluesOnly).eigenvalues();
  if (ev.size() == 0) return 0;
  const double top = ev(ev.size() - 1);
  if (top <= 0.0) return static_cast<int>(ev.size());
  const double tol = 1e-8 * top;
  return static_cast<int>((ev.array().abs() <= tol).count());
}

}  // namespace clusterstab
