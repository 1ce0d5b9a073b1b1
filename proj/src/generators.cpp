#include "clusterstab/generators.hpp"

#include "clusterstab/matrix_market.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <tuple>
#include <utility>

namespace clusterstab {

WeightMatrix generate_sbm(int p, int q, std::uint64_t seed) {
  if (p < 2 || q < 1) throw StructuralError("SBM needs p >= 2 and q >= 1");
  std::mt19937_64 engine(seed);
  Eigen::MatrixXd J(q, q);
  for (int a = 0; a < q; ++a) {
    for (int b = a; b < q; ++b) {
      J(a, b) = uniform_open01(engine);
      J(b, a) = J(a, b);
    }
  }

  const int n = p * q;
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(p) * q * (q - 1) / 2 + static_cast<std::size_t>(p - 1) * q);
  for (int blk = 0; blk < p; ++blk) {
    for (int a = 0; a < q; ++a) {
      for (int b = a + 1; b < q; ++b) edges.push_back({blk * q + a, blk * q + b});
      if (blk + 1 < p) edges.push_back({blk * q + a, (blk + 1) * q + a});
    }
  }
  auto pattern = std::make_shared<const Pattern>(n, edges);
  Eigen::VectorXd w(static_cast<Eigen::Index>(pattern->edge_count()));
  for (std::size_t e = 0; e < pattern->edge_count(); ++e) {
    const auto& ed = pattern->edges()[e];
    const int bi = ed.i / q;
    const int bj = ed.j / q;
    w[static_cast<Eigen::Index>(e)] = bi == bj ? J(ed.i % q, ed.j % q) : 1.0;
  }
  Eigen::VectorXd diag(n);
  for (int v = 0; v < n; ++v) diag[v] = J(v % q, v % q);
  return {std::move(pattern), std::move(w), std::move(diag)};
}

std::vector<int> sbm_block_labels(int p, int q) {
  std::vector<int> labels(static_cast<std::size_t>(p) * q);
  for (std::size_t v = 0; v < labels.size(); ++v) labels[v] = static_cast<int>(v) / q;
  return labels;
}

WeightMatrix compress_halve(const WeightMatrix& w) {
  const int n1 = w.size();
  if (n1 < 2) throw StructuralError("compression needs n >= 2");
  const int n2 = (n1 - 1) / 2;

  // Upper-triangle sums of the 2x2 blocks, diagonal blocks included.
  std::map<std::pair<int, int>, double> acc;
  const auto& edges = w.pattern().edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const int bi = edges[e].i / 2;
    const int bj = edges[e].j / 2;
    if (bi >= n2 || bj >= n2) continue;
    const double v = w.weights()[static_cast<Eigen::Index>(e)];
    // A diagonal block sees the pair twice ((i, j) and (j, i)).
    acc[{bi, bj}] += bi == bj ? 2.0 * v : v;
  }
  const auto& diag = w.diagonal();
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    const int b = static_cast<int>(i) / 2;
    if (b < n2 && diag[i] != 0.0) acc[{b, b}] += diag[i];
  }

  struct Candidate {
    int i;
    int j;
    double value;
  };
  std::vector<Candidate> cand;
  cand.reserve(acc.size());
  for (const auto& [key, sum] : acc) {
    if (sum != 0.0) cand.push_back({key.first, key.second, sum / 4.0});
  }
  std::sort(cand.begin(), cand.end(), [](const Candidate& a, const Candidate& b) {
    if (a.value != b.value) return a.value > b.value;
    return std::tie(a.i, a.j) < std::tie(b.i, b.j);
  });

  const double ratio = static_cast<double>(n2) / static_cast<double>(n1);
  const auto budget = static_cast<std::size_t>(std::llround(static_cast<double>(w.nnz()) * ratio * ratio));
  std::size_t used = 0;
  std::vector<Candidate> kept;
  for (const auto& c : cand) {
    const std::size_t cost = c.i == c.j ? 1 : 2;
    if (used + cost > budget) break;
    used += cost;
    kept.push_back(c);
  }

  std::vector<Edge> out_edges;
  std::vector<std::pair<Edge, double>> vals;
  Eigen::VectorXd out_diag = Eigen::VectorXd::Zero(n2);
  bool has_diag = false;
  for (const auto& c : kept) {
    if (c.i == c.j) {
      out_diag[c.i] = c.value;
      has_diag = true;
    } else {
      vals.push_back({{c.i, c.j}, c.value});
    }
  }
  std::sort(vals.begin(), vals.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  Eigen::VectorXd out_w(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t e = 0; e < vals.size(); ++e) {
    out_edges.push_back(vals[e].first);
    out_w[static_cast<Eigen::Index>(e)] = vals[e].second;
  }
  return {std::make_shared<const Pattern>(n2, out_edges), std::move(out_w),
          has_diag ? out_diag : Eigen::VectorXd{}};
}

SigmaRule parse_sigma_rule(const std::string& name) {
  if (name == "closest") return SigmaRule::Closest;
  if (name == "kth") return SigmaRule::Kth;
  throw StructuralError("unknown sigma rule '" + name + "' (expected closest or kth)");
}

std::string to_string(SigmaRule rule) { return rule == SigmaRule::Closest ? "closest" : "kth"; }

WeightMatrix build_knn_similarity(const Eigen::MatrixXd& points, int knn, SigmaRule rule) {
  const int n = static_cast<int>(points.rows());
  if (knn < 1 || knn >= n) throw StructuralError("knn must lie in [1, n-1]");

  Eigen::MatrixXd dist2(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) dist2(i, j) = (points.row(i) - points.row(j)).squaredNorm();
  }

  std::vector<std::vector<int>> nbrs(static_cast<std::size_t>(n));
  Eigen::VectorXd sigma(n);
  std::vector<int> order;
  for (int i = 0; i < n; ++i) {
    order.resize(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    order.erase(order.begin() + i);
    std::partial_sort(order.begin(), order.begin() + knn, order.end(), [&](int a, int b) {
      if (dist2(i, a) != dist2(i, b)) return dist2(i, a) < dist2(i, b);
      return a < b;
    });
    nbrs[i].assign(order.begin(), order.begin() + knn);
    const int ref = rule == SigmaRule::Closest ? nbrs[i].front() : nbrs[i].back();
    sigma[i] = std::sqrt(dist2(i, ref));
  }

  auto s_dir = [&](int i, int j) {
    if (sigma[i] == 0.0) return dist2(i, j) == 0.0 ? 1.0 : 0.0;
    return std::exp(-4.0 * dist2(i, j) / (sigma[i] * sigma[i]));
  };

  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j : nbrs[i]) edges.push_back({std::min(i, j), std::max(i, j)});
  }
  auto pattern = std::make_shared<const Pattern>(n, edges);
  const int comps = component_count(*pattern);
  if (comps != 1) {
    throw StructuralError("k-NN graph is disconnected (" + std::to_string(comps) +
                          " components); increase knn");
  }
  Eigen::VectorXd w(static_cast<Eigen::Index>(pattern->edge_count()));
  for (std::size_t e = 0; e < pattern->edge_count(); ++e) {
    const auto& ed = pattern->edges()[e];
    w[static_cast<Eigen::Index>(e)] = std::max(s_dir(ed.i, ed.j), s_dir(ed.j, ed.i));
  }
  return {std::move(pattern), std::move(w)};
}

Eigen::MatrixXd read_points(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::replace(line.begin(), line.end(), ',', ' ');
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::vector<double> row;
    std::string tok;
    while (fields >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) throw ParseError("non-numeric field '" + tok + "'", lineno);
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw ParseError("inconsistent field count", lineno);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("no samples", 0);
  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return X;
}

}  // namespace clusterstab
