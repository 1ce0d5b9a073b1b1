#pragma once

#include "clusterstab/graph.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace clusterstab {

/// Name of the pseudo-random generator used by every seeded routine.
inline constexpr const char* kGeneratorName = "std::mt19937_64";

/// Uniform double in the open interval (0, 1) from the top 53 bits of a
/// 64-bit draw; a zero draw is rejected and redrawn.
template <class Engine>
double uniform_open01(Engine& engine) {
  for (;;) {
    const std::uint64_t bits = engine() >> 11;
    if (bits != 0) return static_cast<double>(bits) * 0x1.0p-53;
  }
}

/**
 * Stochastic block model W = kron(I_p, J) + kron(B_p, I_q).
 *
 * J is one symmetric q x q block shared by all diagonal blocks. Its entries
 * J(a, b), a <= b, are drawn in row-major order over the upper triangle
 * (diagonal included) with uniform_open01 from std::mt19937_64(seed). B_p is
 * the adjacency matrix of the path on p vertices. Vertex b*q + r is member r
 * of block b. The diagonal of J is kept in WeightMatrix::diagonal().
 */
WeightMatrix generate_sbm(int p, int q, std::uint64_t seed);

/// Ground-truth block of every SBM vertex.
std::vector<int> sbm_block_labels(int p, int q);

/**
 * Halves the dimension by 2 x 2 block averaging, n2 = floor((n - 1) / 2), then
 * zeroes the smallest entries so that nnz / n² matches the input.
 *
 * The retained entries are picked greedily over the upper triangle (diagonal
 * included) by decreasing value, ties toward lexicographically smaller (i, j);
 * an off-diagonal pair costs two stored entries, a diagonal entry one. The
 * budget is round(nnz(W) * n2² / n²).
 */
WeightMatrix compress_halve(const WeightMatrix& w);

enum class SigmaRule {
  Closest,  ///< distance to the nearest of the k neighbours
  Kth,      ///< distance to the k-th neighbour
};

SigmaRule parse_sigma_rule(const std::string& name);
std::string to_string(SigmaRule rule);

/**
 * Gaussian similarity graph on the k-nearest-neighbour connectivity pattern.
 *
 * Rows of `points` are samples. C(i, j) = 1 when j is among the k nearest
 * neighbours of i or vice versa (distance ties broken by smaller index).
 * s_i(j) = exp(-4 |x_i - x_j|² / sigma_i²), s_ij = max(s_i(j), s_j(i)), and
 * W = C ∘ S. A zero sigma_i yields s_i(j) = 1 at distance 0 and 0 otherwise.
 * A disconnected pattern raises StructuralError naming the component count.
 */
WeightMatrix build_knn_similarity(const Eigen::MatrixXd& points, int knn,
                                  SigmaRule rule = SigmaRule::Closest);

/// Numeric table, one sample per line; fields separated by commas or
/// whitespace; blank lines and lines starting with '#' are skipped. All rows
/// must have the same number of fields.
Eigen::MatrixXd read_points(std::istream& in);

}  // namespace clusterstab
