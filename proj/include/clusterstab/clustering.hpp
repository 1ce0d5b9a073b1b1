#pragma once

#include "clusterstab/graph.hpp"
#include "clusterstab/spectral.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace clusterstab {

struct KMeansOptions {
  int restarts = 10;
  int max_iter = 300;
  double rel_tol = 1e-6;  ///< stop when the inertia drops by less than this fraction
  std::uint64_t seed = 0;
  int threads = 0;  ///< 0 = hardware concurrency
};

struct ClusterAssignment {
  std::vector<int> labels;    ///< cluster of each vertex, 1..k
  Eigen::MatrixXd centroids;  ///< k x dim
  double inertia = 0;
  int restart = 0;     ///< index of the winning restart
  int iterations = 0;  ///< Lloyd iterations of the winning restart
};

/// Lloyd's algorithm with k-means++ seeding on the rows of `points`. Restart
/// r draws from std::mt19937_64 seeded with seed + r; the restart with the
/// smallest inertia wins, ties toward the lower index.
ClusterAssignment kmeans(const Eigen::MatrixXd& points, int k, const KMeansOptions& opts = {});

/// Unnormalized spectral clustering: k-means on the rows of the n x k matrix
/// of eigenvectors for the k smallest eigenvalues of L(W).
ClusterAssignment spectral_clustering(const WeightMatrix& w, int k, std::uint64_t seed = 0,
                                      const EigenOptions& eig = {});

/// Fraction of vertices labelled correctly under the best one-to-one matching
/// of predicted to true labels (brute force over k! for k <= 8, greedy beyond).
double label_agreement(const std::vector<int>& predicted, const std::vector<int>& truth);

/// "vertex,label" rows with 1-based vertices.
void write_labels_csv(std::ostream& out, const std::vector<int>& labels);

/// Multiplicity of the zero eigenvalue of L(W) at tolerance 1e-8 * λ_n.
int zero_eigenvalue_multiplicity(const WeightMatrix& w);

}  // namespace clusterstab
