#include "clusterstab/clustering.hpp"
#include "clusterstab/generators.hpp"
#include "clusterstab/matrix_market.hpp"
#include "clusterstab/outer.hpp"
#include "clusterstab/report.hpp"
#include "clusterstab/spectral.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

namespace cs = clusterstab;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

/// Raised for invalid argument combinations found after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string input;
  int kmin = 2;
  int kmax = 8;
  int k = 0;
  std::string method = "auto";
  double inner_tol = 1e-9;
  double outer_tol = 1e-2;
  std::uint64_t seed = 0;
  std::string out;
  bool log_trajectory = false;
  int jobs = 0;
  bool no_compare = false;
  int p = 8;
  int q = 20;
  int knn = 10;
  std::string sigma = "closest";
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw cs::ParseError("cannot write " + path, 0);
  f << text;
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json sidecar(const std::string& command, const json& args) {
  json j = cs::build_info();
  j["command"] = command;
  j["arguments"] = args;
  return j;
}

cs::WeightMatrix load(const Options& o, json& meta) {
  cs::MatrixMarketInfo info;
  cs::WeightMatrix w = cs::load_matrix_market(o.input, &info);
  meta["input"] = {{"path", o.input},
                   {"n", w.size()},
                   {"edges", w.pattern().edge_count()},
                   {"nnz", w.nnz()},
                   {"symmetric_header", info.symmetric_header},
                   {"duplicates_summed", info.duplicates_summed},
                   {"diagonal_dropped", info.diagonal_dropped},
                   {"explicit_zeros", info.explicit_zeros}};
  if (info.diagonal_dropped > 0) {
    std::cerr << "note: " << info.diagonal_dropped << " diagonal entries do not enter the Laplacian\n";
  }
  return w;
}

void check_range(const Options& o, int n) {
  if (o.kmin < 1 || o.kmax < o.kmin || o.kmax > n - 1) {
    throw UsageError("k range must satisfy 1 <= kmin <= kmax <= n-1 (n = " + std::to_string(n) + ")");
  }
}

int cmd_gaps(const Options& o) {
  json meta = sidecar("gaps", {{"input", o.input}, {"kmin", o.kmin}, {"kmax", o.kmax}, {"seed", o.seed}});
  const cs::WeightMatrix w = load(o, meta);
  check_range(o, w.size());
  cs::EigenOptions eig;
  eig.seed = o.seed;
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> g = cs::spectral_gaps(w, o.kmin, o.kmax, eig);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::string csv = "k,g_k\n";
  json rows = json::array();
  std::printf("%4s  %12s\n", "k", "g_k");
  int best = o.kmin;
  for (int k = o.kmin; k <= o.kmax; ++k) {
    const double v = g[static_cast<std::size_t>(k - o.kmin)];
    if (v > g[static_cast<std::size_t>(best - o.kmin)]) best = k;
    std::printf("%4d  %12.4f\n", k, v);
    char line[64];
    std::snprintf(line, sizeof line, "%d,%.12g\n", k, v);
    csv += line;
    rows.push_back({{"k", k}, {"g_k", v}});
  }
  std::printf("argmax g_k = %d\n", best);
  meta["rows"] = rows;
  meta["k_gap"] = best;
  meta["seconds"] = seconds;
  const std::string prefix = o.out.empty() ? "gaps" : o.out;
  write_text(prefix + ".csv", csv);
  write_json(prefix + ".json", meta);
  return kExitOk;
}

int cmd_stability(const Options& o) {
  cs::OuterConfig cfg;
  cfg.method = cs::parse_method(o.method);
  cfg.inner.tol = o.inner_tol;
  cfg.toler = o.outer_tol;
  cfg.seed = o.seed;
  cfg.inner.eig.seed = o.seed;
  cfg.inner.record_trajectory = o.log_trajectory;
  cfg.compare_methods = !o.no_compare;
  json meta = sidecar("stability", {{"input", o.input},
                                    {"kmin", o.kmin},
                                    {"kmax", o.kmax},
                                    {"method", o.method},
                                    {"inner_tol", o.inner_tol},
                                    {"outer_tol", o.outer_tol},
                                    {"seed", o.seed},
                                    {"jobs", o.jobs},
                                    {"compare", cfg.compare_methods},
                                    {"log_trajectory", o.log_trajectory}});
  const cs::WeightMatrix w = load(o, meta);
  if (o.kmin < 2) throw UsageError("stability needs kmin >= 2");
  check_range(o, w.size());

  const cs::StabilityReport report = cs::select_k(w, o.kmin, o.kmax, cfg, o.jobs);
  std::cout << cs::format_table(report);
  for (const auto& msg : report.warnings) std::cerr << "warning: " << msg << '\n';

  const std::string prefix = o.out.empty() ? "stability" : o.out;
  {
    std::ofstream f(prefix + ".csv");
    cs::write_report_csv(f, report);
  }
  if (o.log_trajectory) {
    std::ofstream f(prefix + ".trajectory.csv");
    cs::write_trajectory_csv(f, report);
  }
  meta["report"] = cs::to_json(report);
  write_json(prefix + ".json", meta);

  for (const auto& r : report.rows) {
    if (r.failed) return kExitNumerical;
  }
  return kExitOk;
}

int cmd_cluster(const Options& o) {
  json meta = sidecar("cluster", {{"input", o.input}, {"k", o.k}, {"seed", o.seed}});
  const cs::WeightMatrix w = load(o, meta);
  if (o.k < 1 || o.k > w.size()) throw UsageError("--k must lie in [1, n]");
  cs::EigenOptions eig;
  eig.seed = o.seed;
  const cs::ClusterAssignment a = cs::spectral_clustering(w, o.k, o.seed, eig);
  const std::string prefix = o.out.empty() ? "clusters" : o.out;
  {
    std::ofstream f(prefix + ".csv");
    cs::write_labels_csv(f, a.labels);
  }
  std::vector<int> sizes(static_cast<std::size_t>(o.k), 0);
  for (int l : a.labels) ++sizes[static_cast<std::size_t>(l - 1)];
  std::printf("%d clusters, inertia %.6g\n", o.k, a.inertia);
  for (int c = 0; c < o.k; ++c) std::printf("  cluster %d: %d vertices\n", c + 1, sizes[static_cast<std::size_t>(c)]);
  meta["inertia"] = a.inertia;
  meta["cluster_sizes"] = sizes;
  meta["components"] = cs::component_count(w);
  write_json(prefix + ".json", meta);
  return kExitOk;
}

std::string require_out(const Options& o) {
  if (o.out.empty()) throw UsageError("--out is required");
  return o.out;
}

int cmd_gen_sbm(const Options& o) {
  const std::string out = require_out(o);
  const cs::WeightMatrix w = cs::generate_sbm(o.p, o.q, o.seed);
  cs::save_matrix_market(out, w, "SBM p=" + std::to_string(o.p) + " q=" + std::to_string(o.q) +
                                     " seed=" + std::to_string(o.seed));
  json meta = sidecar("gen sbm", {{"p", o.p}, {"q", o.q}, {"seed", o.seed}, {"out", out}});
  meta["n"] = w.size();
  meta["nnz"] = w.nnz();
  write_json(out + ".json", meta);
  std::printf("wrote %s: n=%d nnz=%ld\n", out.c_str(), w.size(), static_cast<long>(w.nnz()));
  return kExitOk;
}

int cmd_gen_compress(const Options& o) {
  const std::string out = require_out(o);
  json meta = sidecar("gen compress", {{"input", o.input}, {"out", out}});
  const cs::WeightMatrix w = load(o, meta);
  const cs::WeightMatrix c = cs::compress_halve(w);
  cs::save_matrix_market(out, c, "compressed from " + o.input);
  meta["n"] = c.size();
  meta["nnz"] = c.nnz();
  write_json(out + ".json", meta);
  std::printf("wrote %s: n=%d nnz=%ld\n", out.c_str(), c.size(), static_cast<long>(c.nnz()));
  return kExitOk;
}

int cmd_gen_knn(const Options& o) {
  const std::string out = require_out(o);
  std::ifstream in(o.input);
  if (!in) throw cs::ParseError("cannot open " + o.input, 0);
  const Eigen::MatrixXd X = cs::read_points(in);
  const cs::SigmaRule rule = cs::parse_sigma_rule(o.sigma);
  const cs::WeightMatrix w = cs::build_knn_similarity(X, o.knn, rule);
  cs::save_matrix_market(out, w, "k-NN similarity knn=" + std::to_string(o.knn) + " sigma=" + o.sigma);
  json meta = sidecar("gen knn", {{"input", o.input}, {"knn", o.knn}, {"sigma", o.sigma}, {"out", out}});
  meta["n"] = w.size();
  meta["nnz"] = w.nnz();
  write_json(out + ".json", meta);
  std::printf("wrote %s: n=%d nnz=%ld\n", out.c_str(), w.size(), static_cast<long>(w.nnz()));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured distance to ambiguity for spectral clustering"};
  app.require_subcommand(1);
  Options o;

  auto* gaps = app.add_subcommand("gaps", "Spectral gaps g_k = λ_{k+1} - λ_k");
  gaps->add_option("--input", o.input, "Matrix Market file")->required()->check(CLI::ExistingFile);
  gaps->add_option("--kmin", o.kmin, "Smallest k")->capture_default_str();
  gaps->add_option("--kmax", o.kmax, "Largest k")->capture_default_str();
  gaps->add_option("--seed", o.seed, "Eigensolver seed")->capture_default_str();
  gaps->add_option("--out", o.out, "Output prefix for .csv and .json");

  auto* stab = app.add_subcommand("stability", "Structured distances d_k and the most stable k");
  stab->add_option("--input", o.input, "Matrix Market file")->required()->check(CLI::ExistingFile);
  stab->add_option("--kmin", o.kmin, "Smallest k")->capture_default_str();
  stab->add_option("--kmax", o.kmax, "Largest k")->capture_default_str();
  stab->add_option("--method", o.method, "Inner solver")
      ->check(CLI::IsMember({"lowrank", "full", "auto"}))
      ->capture_default_str();
  stab->add_option("--inner-tol", o.inner_tol, "Inner stopping tolerance on |F change|")->capture_default_str();
  stab->add_option("--outer-tol", o.outer_tol, "Outer tolerance on φ and the bracket")->capture_default_str();
  stab->add_option("--seed", o.seed, "Seed for every randomized component")->capture_default_str();
  stab->add_option("--out", o.out, "Output prefix for .csv and .json");
  stab->add_flag("--log-trajectory", o.log_trajectory, "Also write <out>.trajectory.csv");
  stab->add_option("--jobs", o.jobs, "Worker threads over k (0 = all cores)")->capture_default_str();
  stab->add_flag("--no-compare", o.no_compare, "Skip the second method used for the d_LOW / d_FULL table");

  auto* clus = app.add_subcommand("cluster", "Unnormalized spectral clustering");
  clus->add_option("--input", o.input, "Matrix Market file")->required()->check(CLI::ExistingFile);
  clus->add_option("--k", o.k, "Number of clusters")->required();
  clus->add_option("--seed", o.seed, "k-means seed")->capture_default_str();
  clus->add_option("--out", o.out, "Output prefix for the labels .csv and .json");

  auto* gen = app.add_subcommand("gen", "Generate or transform graphs");
  gen->require_subcommand(1);
  auto* sbm = gen->add_subcommand("sbm", "Stochastic block model");
  sbm->add_option("--p", o.p, "Number of blocks")->capture_default_str();
  sbm->add_option("--q", o.q, "Block size")->capture_default_str();
  sbm->add_option("--seed", o.seed, "Generator seed")->capture_default_str();
  sbm->add_option("--out", o.out, "Output .mtx path")->required();
  auto* comp = gen->add_subcommand("compress", "Halve the dimension by block averaging");
  comp->add_option("--input", o.input, "Matrix Market file")->required()->check(CLI::ExistingFile);
  comp->add_option("--out", o.out, "Output .mtx path")->required();
  auto* knn = gen->add_subcommand("knn", "Gaussian k-NN similarity graph from a point table");
  knn->add_option("--input", o.input, "Points, one per line")->required()->check(CLI::ExistingFile);
  knn->add_option("--knn", o.knn, "Neighbours per point")->capture_default_str();
  knn->add_option("--sigma", o.sigma, "Local scale: closest or kth neighbour distance")
      ->check(CLI::IsMember({"closest", "kth"}))
      ->capture_default_str();
  knn->add_option("--out", o.out, "Output .mtx path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (gaps->parsed()) return cmd_gaps(o);
    if (stab->parsed()) return cmd_stability(o);
    if (clus->parsed()) return cmd_cluster(o);
    if (sbm->parsed()) return cmd_gen_sbm(o);
    if (comp->parsed()) return cmd_gen_compress(o);
    if (knn->parsed()) return cmd_gen_knn(o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const cs::ParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const cs::StructuralError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitInput;
}
