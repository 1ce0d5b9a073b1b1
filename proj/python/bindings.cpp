#include "clusterstab/clustering.hpp"
#include "clusterstab/generators.hpp"
#include "clusterstab/matrix_market.hpp"
#include "clusterstab/outer.hpp"
#include "clusterstab/report.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
namespace cs = clusterstab;

namespace {

cs::OuterConfig make_config(const std::string& method, double outer_tol, double inner_tol, std::uint64_t seed,
                            bool compare) {
  cs::OuterConfig cfg;
  cfg.method = cs::parse_method(method);
  cfg.toler = outer_tol;
  cfg.inner.tol = inner_tol;
  cfg.seed = seed;
  cfg.inner.eig.seed = seed;
  cfg.compare_methods = compare;
  return cfg;
}

// Results cross the boundary as JSON text and are decoded on the Python side.
std::string row_json(const cs::StabilityRow& row) { return cs::to_json(row).dump(); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Structured distance to ambiguity for spectral clustering";

  py::register_exception<cs::ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<cs::StructuralError>(m, "StructuralError", PyExc_ValueError);

  py::class_<cs::WeightMatrix>(m, "WeightMatrix")
      .def_static("from_dense", &cs::WeightMatrix::from_dense, py::arg("dense"), py::arg("symmetry_tol") = 1e-12, py::arg("drop_below") = 0.0,
                  "Symmetric nonnegative matrix; entries with magnitude <= drop_below are structural zeros.")
      .def_property_readonly("n", &cs::WeightMatrix::size)
      .def_property_readonly("nnz", &cs::WeightMatrix::nnz)
      .def_property_readonly("weights", &cs::WeightMatrix::weights, "Edge weights in edge order.")
      .def_property_readonly("edges",
                             [](const cs::WeightMatrix& w) {
                               std::vector<std::pair<int, int>> out;
                               for (const cs::Edge& e : w.pattern().edges()) out.emplace_back(e.i, e.j);
                               return out;
                             })
      .def("frobenius_norm", &cs::WeightMatrix::frobenius_norm)
      .def("to_dense", &cs::WeightMatrix::to_dense, py::arg("include_diagonal") = true)
      .def("principal_minor", &cs::WeightMatrix::principal_minor, py::arg("m"))
      .def("__repr__", [](const cs::WeightMatrix& w) {
        return "<WeightMatrix n=" + std::to_string(w.size()) + " nnz=" + std::to_string(w.nnz()) + ">";
      });

  m.def("load_matrix_market", [](const std::string& path) { return cs::load_matrix_market(path); }, py::arg("path"));
  m.def("save_matrix_market",
        [](const std::string& path, const cs::WeightMatrix& w) { cs::save_matrix_market(path, w); }, py::arg("path"),
        py::arg("w"));
  m.def("read_matrix_market_text",
        [](const std::string& text) {
          std::istringstream in(text);
          return cs::read_matrix_market(in);
        },
        py::arg("text"));

  m.def("laplacian", [](const cs::WeightMatrix& w) { return Eigen::MatrixXd(cs::laplacian(w)); }, py::arg("w"),
        "Dense L(W) = diag(W1) - W.");
  m.def("spectral_gap", [](const cs::WeightMatrix& w, int k) { return cs::spectral_gap(w, k); }, py::arg("w"),
        py::arg("k"));
  m.def("spectral_gaps", [](const cs::WeightMatrix& w, int kmin, int kmax) { return cs::spectral_gaps(w, kmin, kmax); },
        py::arg("w"), py::arg("kmin"), py::arg("kmax"));
  m.def("unstructured_coalescer", [](const cs::WeightMatrix& w, int k) { return cs::unstructured_coalescer(w, k); },
        py::arg("w"), py::arg("k"));

  m.def("_structured_distance",
        [](const cs::WeightMatrix& w, int k, const std::string& method, double outer_tol, double inner_tol,
           std::uint64_t seed, bool compare) {
          const cs::OuterConfig cfg = make_config(method, outer_tol, inner_tol, seed, compare);
          cs::StabilityRow row;
          {
            py::gil_scoped_release release;
            row = cs::structured_distance(w, k, cfg);
          }
          return row_json(row);
        },
        py::arg("w"), py::arg("k"), py::arg("method"), py::arg("outer_tol"), py::arg("inner_tol"), py::arg("seed"),
        py::arg("compare"));
  m.def("_select_k",
        [](const cs::WeightMatrix& w, int kmin, int kmax, const std::string& method, double outer_tol,
           double inner_tol, std::uint64_t seed, bool compare, int jobs) {
          const cs::OuterConfig cfg = make_config(method, outer_tol, inner_tol, seed, compare);
          cs::StabilityReport rep;
          {
            py::gil_scoped_release release;
            rep = cs::select_k(w, kmin, kmax, cfg, jobs);
          }
          return cs::to_json(rep).dump();
        },
        py::arg("w"), py::arg("kmin"), py::arg("kmax"), py::arg("method"), py::arg("outer_tol"), py::arg("inner_tol"),
        py::arg("seed"), py::arg("compare"), py::arg("jobs"));

  m.def("generate_sbm", &cs::generate_sbm, py::arg("p"), py::arg("q"), py::arg("seed") = 0);
  m.def("sbm_block_labels", &cs::sbm_block_labels, py::arg("p"), py::arg("q"));
  m.def("compress_halve", &cs::compress_halve, py::arg("w"));
  m.def("knn_similarity",
        [](const Eigen::MatrixXd& points, int knn, const std::string& sigma) {
          if (sigma != "closest" && sigma != "kth") throw py::value_error("sigma must be 'closest' or 'kth'");
          return cs::build_knn_similarity(points, knn, sigma == "kth" ? cs::SigmaRule::Kth : cs::SigmaRule::Closest);
        },
        py::arg("points"), py::arg("knn"), py::arg("sigma") = "closest");
  m.def("component_count", [](const cs::WeightMatrix& w) { return cs::component_count(w); }, py::arg("w"));

  m.def("spectral_clustering",
        [](const cs::WeightMatrix& w, int k, std::uint64_t seed) { return cs::spectral_clustering(w, k, seed).labels; },
        py::arg("w"), py::arg("k"), py::arg("seed") = 0, "Cluster labels 1..k.");
  m.def("label_agreement", &cs::label_agreement, py::arg("predicted"), py::arg("truth"));

  m.attr("__version__") = cs::version();
}
