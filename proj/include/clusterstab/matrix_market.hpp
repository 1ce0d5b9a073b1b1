#pragma once

#include "clusterstab/graph.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace clusterstab {

/// Malformed input text (Matrix Market or point table). Carries the offending line number (0 if
/// the problem is not tied to a line).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Bookkeeping collected while reading a file.
struct MatrixMarketInfo {
  bool symmetric_header = false;
  std::size_t entries_read = 0;       ///< data lines in the file
  std::size_t duplicates_summed = 0;  ///< repeated coordinates merged by summation
  std::size_t diagonal_dropped = 0;   ///< nonzero diagonal entries kept out of the pattern
  std::size_t explicit_zeros = 0;     ///< off-diagonal pairs whose summed value is 0
};

/**
 * Reads a real, integer or pattern coordinate file with a symmetric or general
 * header. Indices are 1-based on disk. Duplicates are summed, the diagonal is
 * kept out of the pattern (but retained in WeightMatrix::diagonal()), general
 * files must have symmetric content to 1e-12 relative, and negative weights
 * are rejected with StructuralError.
 */
WeightMatrix load_matrix_market(const std::filesystem::path& path, MatrixMarketInfo* info = nullptr);
WeightMatrix read_matrix_market(std::istream& in, MatrixMarketInfo* info = nullptr);

/// Writes the lower triangle with a symmetric header; values use 17
/// significant digits so that a reload is bit-exact.
void save_matrix_market(const std::filesystem::path& path, const WeightMatrix& w,
                        const std::string& comment = {});
void write_matrix_market(std::ostream& out, const WeightMatrix& w, const std::string& comment = {});

}  // namespace clusterstab
