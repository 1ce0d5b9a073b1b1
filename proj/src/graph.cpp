#include "clusterstab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace clusterstab {

Pattern::Pattern(int n, std::vector<Edge> edges) : n_(n) {
  if (n < 0) throw StructuralError("pattern size must be nonnegative");
  for (auto& e : edges) {
    if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n) {
      throw StructuralError("edge (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                            ") out of range for n=" + std::to_string(n));
    }
    if (e.i == e.j) throw StructuralError("self-loop at vertex " + std::to_string(e.i));
    if (e.i > e.j) std::swap(e.i, e.j);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);

  offsets_.assign(static_cast<std::size_t>(n_) + 1, 0);
  for (const auto& e : edges_) {
    ++offsets_[e.i + 1];
    ++offsets_[e.j + 1];
  }
  std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
  incidence_.resize(2 * edges_.size());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t idx = 0; idx < edges_.size(); ++idx) {
    const auto& e = edges_[idx];
    incidence_[fill[e.i]++] = {e.j, static_cast<int>(idx)};
    incidence_[fill[e.j]++] = {e.i, static_cast<int>(idx)};
  }
  for (int v = 0; v < n_; ++v) {
    std::sort(incidence_.begin() + static_cast<std::ptrdiff_t>(offsets_[v]),
              incidence_.begin() + static_cast<std::ptrdiff_t>(offsets_[v + 1]),
              [](const Incidence& a, const Incidence& b) { return a.neighbor < b.neighbor; });
  }
}

std::span<const Pattern::Incidence> Pattern::incident(int v) const {
  return {incidence_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
}

std::optional<std::size_t> Pattern::find(int i, int j) const {
  if (i == j || i < 0 || j < 0 || i >= n_ || j >= n_) return std::nullopt;
  auto row = incident(i);
  auto it = std::lower_bound(row.begin(), row.end(), j,
                             [](const Incidence& a, int v) { return a.neighbor < v; });
  if (it == row.end() || it->neighbor != j) return std::nullopt;
  return static_cast<std::size_t>(it->edge);
}

// ---------------------------------------------------------------------------

PatternMatrix::PatternMatrix(PatternPtr pattern)
    : pattern_(std::move(pattern)),
      values_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pattern_->edge_count()))) {}

PatternMatrix::PatternMatrix(PatternPtr pattern, Eigen::VectorXd values)
    : pattern_(std::move(pattern)), values_(std::move(values)) {
  if (!pattern_) throw StructuralError("PatternMatrix requires a pattern");
  if (static_cast<std::size_t>(values_.size()) != pattern_->edge_count()) {
    throw StructuralError("PatternMatrix value count does not match edge count");
  }
}

double PatternMatrix::operator()(int i, int j) const {
  auto idx = pattern_->find(i, j);
  return idx ? values_[static_cast<Eigen::Index>(*idx)] : 0.0;
}

double PatternMatrix::frobenius_norm() const { return std::sqrt(2.0 * values_.squaredNorm()); }

double PatternMatrix::dot(const PatternMatrix& other) const {
  check_compatible(other);
  return 2.0 * values_.dot(other.values_);
}

PatternMatrix PatternMatrix::normalized() const {
  const double nrm = frobenius_norm();
  if (nrm == 0.0) throw StructuralError("cannot normalize the zero matrix");
  return {pattern_, values_ / nrm};
}

Eigen::MatrixXd PatternMatrix::to_dense() const {
  const int n = size();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  const auto& edges = pattern_->edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    out(edges[e].i, edges[e].j) = values_[static_cast<Eigen::Index>(e)];
    out(edges[e].j, edges[e].i) = values_[static_cast<Eigen::Index>(e)];
  }
  return out;
}

PatternMatrix& PatternMatrix::operator+=(const PatternMatrix& other) {
  check_compatible(other);
  values_ += other.values_;
  return *this;
}

PatternMatrix& PatternMatrix::operator-=(const PatternMatrix& other) {
  check_compatible(other);
  values_ -= other.values_;
  return *this;
}

PatternMatrix& PatternMatrix::operator*=(double s) {
  values_ *= s;
  return *this;
}

void PatternMatrix::check_compatible(const PatternMatrix& other) const {
  if (pattern_ == other.pattern_) return;
  if (!pattern_ || !other.pattern_ || !(*pattern_ == *other.pattern_)) {
    throw StructuralError("pattern matrices live on different patterns");
  }
}

// ---------------------------------------------------------------------------

WeightMatrix::WeightMatrix(PatternPtr pattern, Eigen::VectorXd weights, Eigen::VectorXd diagonal)
    : pattern_(std::move(pattern)), weights_(std::move(weights)), diagonal_(std::move(diagonal)) {
  if (!pattern_) throw StructuralError("WeightMatrix requires a pattern");
  if (static_cast<std::size_t>(weights_.size()) != pattern_->edge_count()) {
    throw StructuralError("weight count does not match edge count");
  }
  if (diagonal_.size() != 0 && diagonal_.size() != pattern_->size()) {
    throw StructuralError("diagonal must be empty or have n entries");
  }
  if (weights_.size() > 0 && weights_.minCoeff() < 0.0) {
    throw StructuralError("negative edge weight");
  }
  if (diagonal_.size() > 0 && diagonal_.minCoeff() < 0.0) {
    throw StructuralError("negative diagonal weight");
  }
}

WeightMatrix WeightMatrix::from_dense(const Eigen::MatrixXd& dense, double symmetry_tol,
                                      double drop_below) {
  if (dense.rows() != dense.cols()) throw StructuralError("weight matrix must be square");
  const int n = static_cast<int>(dense.rows());
  const double scale = std::max(1.0, dense.cwiseAbs().maxCoeff());
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(dense(i, j) - dense(j, i)) > symmetry_tol * scale) {
        throw StructuralError("weight matrix is not symmetric");
      }
      if (std::abs(dense(i, j)) > drop_below && dense(i, j) != 0.0) edges.push_back({i, j});
    }
  }
  auto pattern = std::make_shared<const Pattern>(n, edges);
  Eigen::VectorXd w(static_cast<Eigen::Index>(pattern->edge_count()));
  for (std::size_t e = 0; e < pattern->edge_count(); ++e) {
    const auto& ed = pattern->edges()[e];
    w[static_cast<Eigen::Index>(e)] = 0.5 * (dense(ed.i, ed.j) + dense(ed.j, ed.i));
  }
  Eigen::VectorXd diag;
  if ((dense.diagonal().array().abs() > drop_below).any() &&
      (dense.diagonal().array() != 0.0).any()) {
    diag = dense.diagonal();
  }
  return {std::move(pattern), std::move(w), std::move(diag)};
}

std::size_t WeightMatrix::nnz() const {
  std::size_t count = 2 * pattern_->edge_count();
  for (Eigen::Index i = 0; i < diagonal_.size(); ++i) count += diagonal_[i] != 0.0 ? 1 : 0;
  return count;
}

double WeightMatrix::frobenius_norm() const { return std::sqrt(2.0 * weights_.squaredNorm()); }

Eigen::VectorXd WeightMatrix::perturbed(double eps, const PatternMatrix& E) const {
  if (E.pattern_ptr() != pattern_ && !(E.pattern() == *pattern_)) {
    throw StructuralError("perturbation is not on the weight pattern");
  }
  return weights_ + eps * E.values();
}

Eigen::MatrixXd WeightMatrix::to_dense(bool include_diagonal) const {
  Eigen::MatrixXd out = as_pattern_matrix().to_dense();
  if (include_diagonal && diagonal_.size() > 0) out.diagonal() = diagonal_;
  return out;
}

WeightMatrix WeightMatrix::principal_minor(int m) const {
  if (m < 0 || m > size()) throw StructuralError("principal minor size out of range");
  std::vector<Edge> edges;
  std::vector<double> vals;
  const auto& all = pattern_->edges();
  for (std::size_t e = 0; e < all.size(); ++e) {
    if (all[e].j < m) {
      edges.push_back(all[e]);
      vals.push_back(weights_[static_cast<Eigen::Index>(e)]);
    }
  }
  auto pattern = std::make_shared<const Pattern>(m, edges);
  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  Eigen::VectorXd diag;
  if (diagonal_.size() > 0) diag = diagonal_.head(m);
  return {std::move(pattern), std::move(w), std::move(diag)};
}

bool operator==(const WeightMatrix& a, const WeightMatrix& b) {
  if (!(a.pattern() == b.pattern())) return false;
  if (a.weights_ != b.weights_) return false;
  const bool ad = a.diagonal_.size() > 0 && (a.diagonal_.array() != 0.0).any();
  const bool bd = b.diagonal_.size() > 0 && (b.diagonal_.array() != 0.0).any();
  if (ad != bd) return false;
  return !ad || a.diagonal_ == b.diagonal_;
}

// ---------------------------------------------------------------------------

std::vector<int> component_labels(const Pattern& pattern) {
  const int n = pattern.size();
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  std::vector<int> stack;
  int next = 0;
  for (int s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    label[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (const auto& inc : pattern.incident(v)) {
        if (label[inc.neighbor] < 0) {
          label[inc.neighbor] = next;
          stack.push_back(inc.neighbor);
        }
      }
    }
    ++next;
  }
  return label;
}

int component_count(const Pattern& pattern) {
  const auto labels = component_labels(pattern);
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

int component_count(const WeightMatrix& w) { return component_count(w.pattern()); }

}  // namespace clusterstab
