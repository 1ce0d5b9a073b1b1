#include "clusterstab/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace clusterstab {
namespace {

double infinity_norm(const SparseMatrix& L) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(L.rows());
  for (Eigen::Index c = 0; c < L.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(L, c); it; ++it) rows[it.row()] += std::abs(it.value());
  }
  return rows.size() ? rows.maxCoeff() : 0.0;
}

class RandomColumns {
 public:
  explicit RandomColumns(std::uint64_t seed) : engine_(seed) {}
  Eigen::VectorXd next(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal_(engine_);
    return v;
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Orthogonalizes v against the first `cols` columns of V (two passes) and
/// normalizes it. Returns false if v lies numerically in their span.
bool orthonormalize_against(const Eigen::MatrixXd& V, Eigen::Index cols, Eigen::VectorXd& v) {
  const double before = v.norm();
  if (before == 0.0) return false;
  for (int pass = 0; pass < 2; ++pass) {
    if (cols > 0) v.noalias() -= V.leftCols(cols) * (V.leftCols(cols).transpose() * v);
  }
  const double after = v.norm();
  if (after <= 1e-10 * before) return false;
  v /= after;
  return true;
}

/// Appends candidate columns to V (from position `cols`), replacing dependent
/// ones with random directions. Returns the new column count.
Eigen::Index append_block(Eigen::MatrixXd& V, Eigen::Index cols, const Eigen::MatrixXd& block,
                          Eigen::Index count, RandomColumns& rng) {
  const Eigen::Index n = V.rows();
  for (Eigen::Index c = 0; c < count && cols < V.cols(); ++c) {
    Eigen::VectorXd v = block.col(c);
    int attempts = 0;
    while (!orthonormalize_against(V, cols, v)) {
      if (++attempts > 8) throw EigenSolverError("cannot extend the Krylov basis", 1.0);
      v = rng.next(n);
    }
    V.col(cols++) = v;
  }
  return cols;
}

EigenPairs lanczos(const SparseMatrix& L, int j, const EigenOptions& opts, const Eigen::MatrixXd* start) {
  const Eigen::Index n = L.rows();
  const Eigen::Index b = std::min<Eigen::Index>(n, j + std::max(opts.block_padding, 0));
  const Eigen::Index maxdim = std::min<Eigen::Index>(n, std::max<Eigen::Index>(4 * b, 96));
  const double norm = infinity_norm(L);
  const double scale = norm > 0.0 ? norm : 1.0;
  RandomColumns rng(opts.seed);

  Eigen::MatrixXd V(n, maxdim);
  Eigen::MatrixXd AV(n, maxdim);
  Eigen::MatrixXd init(n, b);
  Eigen::Index provided = 0;
  if (start != nullptr && start->rows() == n) {
    provided = std::min<Eigen::Index>(start->cols(), b);
    init.leftCols(provided) = start->leftCols(provided);
  }
  for (Eigen::Index c = provided; c < b; ++c) init.col(c) = rng.next(n);
  Eigen::Index cur = append_block(V, 0, init, b, rng);
  AV.leftCols(cur) = L * V.leftCols(cur);

  EigenPairs out;
  out.matvecs = static_cast<int>(cur);
  double worst = 1.0;
  for (int restart = 0; restart <= opts.max_restarts; ++restart) {
    Eigen::Index last_begin = 0;
    Eigen::Index last_count = cur;
    while (cur < maxdim) {
      const Eigen::Index take = std::min(last_count, maxdim - cur);
      const Eigen::MatrixXd block = AV.middleCols(last_begin, take);
      const Eigen::Index before = cur;
      cur = append_block(V, cur, block, take, rng);
      AV.middleCols(before, cur - before) = L * V.middleCols(before, cur - before);
      out.matvecs += static_cast<int>(cur - before);
      last_begin = before;
      last_count = cur - before;
    }

    Eigen::MatrixXd H = V.leftCols(cur).transpose() * AV.leftCols(cur);
    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    const Eigen::MatrixXd Q = es.eigenvectors().leftCols(b);
    Eigen::MatrixXd X = V.leftCols(cur) * Q;
    Eigen::MatrixXd AX = L * X;
    out.matvecs += static_cast<int>(b);

    worst = 0.0;
    for (int i = 0; i < j; ++i) {
      worst = std::max(worst, (AX.col(i) - es.eigenvalues()[i] * X.col(i)).norm() / scale);
    }
    out.restarts = restart;
    if (worst <= opts.tol || cur == n) {
      // Refine with the Rayleigh quotients of the extracted vectors.
      Eigen::MatrixXd Xj = X.leftCols(j);
      Eigen::MatrixXd Hj = Xj.transpose() * AX.leftCols(j);
      Hj = 0.5 * (Hj + Hj.transpose()).eval();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(Hj);
      out.values = ref.eigenvalues();
      out.vectors = Xj * ref.eigenvectors();
      const Eigen::MatrixXd AXj = AX.leftCols(j) * ref.eigenvectors();
      out.max_residual = 0.0;
      for (int i = 0; i < j; ++i) {
        out.max_residual = std::max(out.max_residual,
                                    (AXj.col(i) - out.values[i] * out.vectors.col(i)).norm() / scale);
      }
      return out;
    }

    // Thick restart: keep the b leading Ritz vectors.
    V.leftCols(b) = X;
    AV.leftCols(b) = AX;
    cur = b;
  }
  throw EigenSolverError("Lanczos did not converge after " + std::to_string(opts.max_restarts) +
                             " restarts (best relative residual " + std::to_string(worst) + ")",
                         worst);
}

}  // namespace

void normalize_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index idx = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      // Tiny slack keeps the choice stable against last-bit noise.
      if (std::abs(vectors(r, c)) > best * (1.0 + 1e-12)) {
        best = std::abs(vectors(r, c));
        idx = r;
      }
    }
    if (vectors(idx, c) < 0.0) vectors.col(c) *= -1.0;
  }
}

EigenPairs smallest_eigenpairs_dense(const Eigen::MatrixXd& L, int j) {
  const lapack_int n = static_cast<lapack_int>(L.rows());
  if (L.rows() != L.cols()) throw StructuralError("eigensolver input must be square");
  if (j < 1 || j > n) throw StructuralError("requested eigenpair count out of range");
  Eigen::MatrixXd A = L;
  Eigen::VectorXd w(n);
  Eigen::MatrixXd Z(n, j);
  std::vector<lapack_int> isuppz(static_cast<std::size_t>(2 * std::max(j, 1)));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, A.data(), n, 0.0, 0.0, 1, j,
                                         0.0, &found, w.data(), Z.data(), n, isuppz.data());
  if (info != 0 || found != j) {
    throw EigenSolverError("LAPACK dsyevr failed with info " + std::to_string(info), 1.0);
  }
  EigenPairs out;
  out.values = w.head(j);
  out.vectors = std::move(Z);
  normalize_signs(out.vectors);
  const double scale = std::max(L.cwiseAbs().rowwise().sum().maxCoeff(), 1e-300);
  const Eigen::MatrixXd R = L * out.vectors - out.vectors * out.values.asDiagonal();
  out.max_residual = R.colwise().norm().maxCoeff() / scale;
  return out;
}

EigenPairs smallest_eigenpairs(const SparseMatrix& L, int j, const EigenOptions& opts,
                               const Eigen::MatrixXd* start) {
  if (L.rows() != L.cols()) throw StructuralError("eigensolver input must be square");
  const int n = static_cast<int>(L.rows());
  if (j < 1 || j > n) throw StructuralError("requested eigenpair count out of range");
  const bool dense = opts.backend == EigenBackend::Dense ||
                     (opts.backend == EigenBackend::Auto && n <= opts.dense_max_n);
  if (dense) return smallest_eigenpairs_dense(Eigen::MatrixXd(L), j);
  EigenPairs out = lanczos(L, j, opts, start);
  normalize_signs(out.vectors);
  return out;
}

double simplicity_tolerance(double norm_bound) { return std::max(1e-10, 1e-8 * norm_bound); }

SpectralData spectral_data(const Pattern& pattern, const Eigen::VectorXd& edge_values, int k,
                           const EigenOptions& opts, const Eigen::MatrixXd* start) {
  const int n = pattern.size();
  if (k < 1 || k > n - 1) throw StructuralError("k must lie in [1, n-1]");
  const int j = std::min(n, k + 2);
  const SparseMatrix L = laplacian(pattern, edge_values);
  EigenPairs pairs = smallest_eigenpairs(L, j, opts, start);

  SpectralData sd;
  sd.k = k;
  sd.lambda = pairs.values[k];
  sd.mu = pairs.values[k - 1];
  sd.x = pairs.vectors.col(k);
  sd.y = pairs.vectors.col(k - 1);
  sd.z = sd.x.cwiseProduct(sd.x) - sd.y.cwiseProduct(sd.y);
  sd.norm_bound = laplacian_norm_bound(pattern, edge_values);
  sd.simple_tol = simplicity_tolerance(sd.norm_bound);
  sd.coalesced = sd.lambda - sd.mu <= sd.simple_tol;
  bool simple = !sd.coalesced;
  if (k >= 2) simple = simple && sd.mu - pairs.values[k - 2] > sd.simple_tol;
  if (k + 2 <= n) simple = simple && pairs.values[k + 1] - sd.lambda > sd.simple_tol;
  sd.gapsimple = simple;
  sd.eigenvalues = std::move(pairs.values);
  sd.eigenvectors = std::move(pairs.vectors);
  return sd;
}

SpectralData spectral_data(const WeightMatrix& w, double eps, const PatternMatrix& E, int k,
                           const EigenOptions& opts, const Eigen::MatrixXd* start) {
  return spectral_data(w.pattern(), w.perturbed(eps, E), k, opts, start);
}

double spectral_gap(const WeightMatrix& w, int k, const EigenOptions& opts) {
  return spectral_gaps(w, k, k, opts).front();
}

std::vector<double> spectral_gaps(const WeightMatrix& w, int kmin, int kmax, const EigenOptions& opts) {
  const int n = w.size();
  if (kmin < 1 || kmax > n - 1 || kmin > kmax) throw StructuralError("k range must lie in [1, n-1]");
  const EigenPairs pairs = smallest_eigenpairs(laplacian(w), kmax + 1, opts);
  std::vector<double> gaps;
  for (int k = kmin; k <= kmax; ++k) gaps.push_back(std::max(0.0, pairs.values[k] - pairs.values[k - 1]));
  return gaps;
}

}  // namespace clusterstab
