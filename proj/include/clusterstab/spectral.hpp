#pragma once

#include "clusterstab/graph.hpp"
#include "clusterstab/laplacian.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace clusterstab {

/// The eigensolver hit its iteration cap. best_residual is the largest
/// relative residual among the requested pairs at the last Rayleigh-Ritz step.
class EigenSolverError : public std::runtime_error {
 public:
  EigenSolverError(const std::string& what, double best_residual)
      : std::runtime_error(what), best_residual_(best_residual) {}
  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

enum class EigenBackend { Auto, Dense, Lanczos };

struct EigenOptions {
  EigenBackend backend = EigenBackend::Auto;
  /// Auto uses the dense solver up to this dimension.
  int dense_max_n = 512;
  /// Residual target |Lv - θv| <= tol * |L| (|L| estimated by its infinity norm).
  double tol = 1e-11;
  int max_restarts = 400;
  /// Extra block columns beyond the requested count.
  int block_padding = 8;
  std::uint64_t seed = 0;
};

struct EigenPairs {
  Eigen::VectorXd values;   ///< ascending
  Eigen::MatrixXd vectors;  ///< orthonormal columns, largest-|entry| positive
  double max_residual = 0;  ///< relative to the norm estimate
  int restarts = 0;
  int matvecs = 0;
};

/// Flips signs so that the entry of largest magnitude in each column is
/// positive (first such index on ties).
void normalize_signs(Eigen::MatrixXd& vectors);

/**
 * The j smallest eigenpairs of a symmetric matrix.
 *
 * Dense backend: LAPACK dsyevr restricted to indices 1..j. Lanczos backend:
 * thick-restart block Krylov iteration on L itself (no shift, no
 * factorization) with full reorthogonalization, block size j + padding, and
 * Rayleigh-Ritz extraction. `start` optionally supplies initial vectors
 * (e.g. the previous solution in a continuation); missing columns are filled
 * from the seeded generator.
 */
EigenPairs smallest_eigenpairs(const SparseMatrix& L, int j, const EigenOptions& opts = {},
                               const Eigen::MatrixXd* start = nullptr);
EigenPairs smallest_eigenpairs_dense(const Eigen::MatrixXd& L, int j);

/**
 * Eigen-information at index k of L(W + eps E).
 *
 * lambda = λ_{k+1} with eigenvector x, mu = λ_k with eigenvector y, and
 * z = x∘x - y∘y. gapsimple is true when λ_{k-1}, λ_k, λ_{k+1}, λ_{k+2} are
 * pairwise separated by more than `simple_tol`; coalesced is true when
 * lambda - mu <= simple_tol.
 */
struct SpectralData {
  int k = 0;
  double lambda = 0;
  double mu = 0;
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd z;
  bool gapsimple = true;
  bool coalesced = false;
  double simple_tol = 0;
  double norm_bound = 0;
  /// λ_1..λ_{k+2} (or up to λ_n) as computed.
  Eigen::VectorXd eigenvalues;
  /// Eigenvectors matching `eigenvalues`, kept for warm starts.
  Eigen::MatrixXd eigenvectors;

  double gap() const { return lambda - mu; }
};

/// Threshold below which neighbouring eigenvalues count as equal.
double simplicity_tolerance(double norm_bound);

SpectralData spectral_data(const Pattern& pattern, const Eigen::VectorXd& edge_values, int k,
                           const EigenOptions& opts = {}, const Eigen::MatrixXd* start = nullptr);
SpectralData spectral_data(const WeightMatrix& w, double eps, const PatternMatrix& E, int k,
                           const EigenOptions& opts = {}, const Eigen::MatrixXd* start = nullptr);

/// g_k = λ_{k+1} - λ_k of L(W).
double spectral_gap(const WeightMatrix& w, int k, const EigenOptions& opts = {});

/// g_k for k = kmin..kmax from a single eigensolve.
std::vector<double> spectral_gaps(const WeightMatrix& w, int kmin, int kmax,
                                  const EigenOptions& opts = {});

}  // namespace clusterstab
