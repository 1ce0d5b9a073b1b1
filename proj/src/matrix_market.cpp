#include "clusterstab/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>
#include <vector>

namespace clusterstab {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

struct Entry {
  int row;
  int col;
  double value;
};

}  // namespace

WeightMatrix read_matrix_market(std::istream& in, MatrixMarketInfo* info) {
  MatrixMarketInfo local;
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) throw ParseError("empty input", 0);
  ++lineno;
  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (lower(banner) != "%%matrixmarket") throw ParseError("missing %%MatrixMarket banner", lineno);
  if (lower(object) != "matrix" || lower(format) != "coordinate") {
    throw ParseError("only 'matrix coordinate' files are supported", lineno);
  }
  field = lower(field);
  symmetry = lower(symmetry);
  const bool pattern_field = field == "pattern";
  if (field != "real" && field != "integer" && field != "double" && !pattern_field) {
    throw ParseError("unsupported field '" + field + "'", lineno);
  }
  if (symmetry != "symmetric" && symmetry != "general") {
    throw ParseError("unsupported symmetry '" + symmetry + "'", lineno);
  }
  local.symmetric_header = symmetry == "symmetric";

  long long rows = -1, cols = -1, count = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream size_line(line);
    if (!(size_line >> rows >> cols >> count)) throw ParseError("malformed size line", lineno);
    break;
  }
  if (rows < 0) throw ParseError("missing size line", lineno);
  if (rows != cols) throw StructuralError("matrix is not square");
  if (count < 0) throw ParseError("negative entry count", lineno);
  const int n = static_cast<int>(rows);

  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(local.symmetric_header ? 2 * count : count));
  while (static_cast<long long>(local.entries_read) < count && std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    std::istringstream data(line);
    long long i = 0, j = 0;
    double v = 1.0;
    if (!(data >> i >> j)) throw ParseError("malformed entry", lineno);
    if (!pattern_field && !(data >> v)) throw ParseError("missing value", lineno);
    if (!std::isfinite(v)) throw ParseError("non-finite value", lineno);
    if (i < 1 || j < 1 || i > rows || j > cols) throw ParseError("index out of range", lineno);
    ++local.entries_read;
    const int r = static_cast<int>(i - 1);
    const int c = static_cast<int>(j - 1);
    entries.push_back({r, c, v});
    if (local.symmetric_header && r != c) entries.push_back({c, r, v});
  }
  if (static_cast<long long>(local.entries_read) != count) {
    throw ParseError("expected " + std::to_string(count) + " entries, found " +
                         std::to_string(local.entries_read),
                     lineno);
  }

  auto by_coord = [](const Entry& a, const Entry& b) {
    return std::tie(a.row, a.col) < std::tie(b.row, b.col);
  };
  std::sort(entries.begin(), entries.end(), by_coord);
  std::vector<Entry> merged;
  merged.reserve(entries.size());
  for (const auto& e : entries) {
    if (!merged.empty() && merged.back().row == e.row && merged.back().col == e.col) {
      merged.back().value += e.value;
      // Mirrored coordinates of a symmetric file would be counted twice.
      if (!local.symmetric_header || e.row >= e.col) ++local.duplicates_summed;
    } else {
      merged.push_back(e);
    }
  }

  double scale = 0.0;
  for (const auto& e : merged) scale = std::max(scale, std::abs(e.value));
  const double tol = 1e-12 * std::max(scale, 1.0);

  auto lookup = [&](int r, int c) -> double {
    const Entry key{r, c, 0.0};
    auto it = std::lower_bound(merged.begin(), merged.end(), key, by_coord);
    return it != merged.end() && it->row == r && it->col == c ? it->value : 0.0;
  };

  std::vector<Edge> edges;
  std::vector<double> weights;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  bool has_diag = false;
  for (const auto& e : merged) {
    if (e.value < 0.0) {
      throw StructuralError("negative weight at (" + std::to_string(e.row + 1) + "," +
                            std::to_string(e.col + 1) + ")");
    }
    if (e.row == e.col) {
      if (e.value != 0.0) {
        diag[e.row] = e.value;
        has_diag = true;
        ++local.diagonal_dropped;
      }
      continue;
    }
    const double mirror = lookup(e.col, e.row);
    if (std::abs(e.value - mirror) > tol) {
      throw StructuralError("asymmetric content at (" + std::to_string(e.row + 1) + "," +
                            std::to_string(e.col + 1) + ")");
    }
    // Each unordered pair is emitted once, from its upper coordinate when stored.
    if (e.row > e.col &&
        std::binary_search(merged.begin(), merged.end(), Entry{e.col, e.row, 0.0}, by_coord)) {
      continue;
    }
    if (e.value == 0.0 && mirror == 0.0) {
      ++local.explicit_zeros;
      continue;
    }
    edges.push_back({std::min(e.row, e.col), std::max(e.row, e.col)});
    weights.push_back(e.value == mirror ? e.value : 0.5 * (e.value + mirror));
  }

  auto pattern = std::make_shared<const Pattern>(n, edges);
  // Pattern sorts edges; align weights with the sorted order.
  std::vector<std::size_t> order(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) order[e] = e;
  std::sort(order.begin(), order.end(), [&edges](std::size_t a, std::size_t b) { return edges[a] < edges[b]; });
  Eigen::VectorXd w(static_cast<Eigen::Index>(edges.size()));
  for (std::size_t e = 0; e < order.size(); ++e) w[static_cast<Eigen::Index>(e)] = weights[order[e]];
  if (pattern->edge_count() != edges.size()) throw StructuralError("duplicate edges after merging");

  if (info) *info = local;
  return {std::move(pattern), std::move(w), has_diag ? diag : Eigen::VectorXd{}};
}

WeightMatrix load_matrix_market(const std::filesystem::path& path, MatrixMarketInfo* info) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  return read_matrix_market(in, info);
}

void write_matrix_market(std::ostream& out, const WeightMatrix& w, const std::string& comment) {
  const int n = w.size();
  const auto& edges = w.pattern().edges();
  const auto& diag = w.diagonal();
  std::size_t count = edges.size();
  for (Eigen::Index i = 0; i < diag.size(); ++i) count += diag[i] != 0.0 ? 1 : 0;

  // Lower triangle in column-major order: column j, rows i >= j.
  std::vector<Entry> lowerpart;
  lowerpart.reserve(count);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    lowerpart.push_back({edges[e].j, edges[e].i, w.weights()[static_cast<Eigen::Index>(e)]});
  }
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (diag[i] != 0.0) lowerpart.push_back({static_cast<int>(i), static_cast<int>(i), diag[i]});
  }
  std::sort(lowerpart.begin(), lowerpart.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.col, a.row) < std::tie(b.col, b.row);
  });

  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  if (!comment.empty()) {
    std::istringstream lines(comment);
    std::string l;
    while (std::getline(lines, l)) out << "% " << l << '\n';
  }
  out << n << ' ' << n << ' ' << count << '\n';
  char buf[64];
  for (const auto& e : lowerpart) {
    std::snprintf(buf, sizeof buf, "%.17g", e.value);
    out << e.row + 1 << ' ' << e.col + 1 << ' ' << buf << '\n';
  }
}

void save_matrix_market(const std::filesystem::path& path, const WeightMatrix& w,
                        const std::string& comment) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string(), 0);
  write_matrix_market(out, w, comment);
  if (!out) throw ParseError("write failed for " + path.string(), 0);
}

}  // namespace clusterstab
