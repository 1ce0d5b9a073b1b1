#include "clusterstab/report.hpp"

#include "clusterstab/generators.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#ifndef CLUSTERSTAB_VERSION
#define CLUSTERSTAB_VERSION "unknown"
#endif

namespace clusterstab {

const char* version() { return CLUSTERSTAB_VERSION; }

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string backend_name(EigenBackend b) {
  switch (b) {
    case EigenBackend::Auto: return "auto";
    case EigenBackend::Dense: return "dense";
    case EigenBackend::Lanczos: return "lanczos";
  }
  return "?";
}

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

// JSON has no representation for non-finite numbers.
nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

void write_report_csv(std::ostream& out, const StabilityReport& report) {
  out << kReportCsvHeader << '\n';
  for (const auto& r : report.rows) {
    out << r.k << ',' << num(r.g_k) << ',' << num(r.d_k) << ',' << r.method << ',' << num(r.eps_star) << ','
        << num(r.phi) << ',' << (r.admissible ? "true" : "false") << ',' << num(r.neg_norm) << ',' << r.inner_iters
        << ',' << r.outer_iters << ',' << num(r.seconds) << '\n';
  }
}

void write_trajectory_csv(std::ostream& out, const StabilityReport& report) {
  out << "k,outer_step,iter,h,F,grad_norm,penalty,cond_S\n";
  for (const auto& r : report.rows) {
    for (const auto& [l, s] : r.trajectory) {
      out << r.k << ',' << l << ',' << s.iter << ',' << num(s.h) << ',' << num(s.F) << ',' << num(s.grad_norm)
          << ',' << num(s.penalty) << ',' << (std::isfinite(s.cond_S) ? num(s.cond_S) : "") << '\n';
    }
  }
}

std::string format_table(const StabilityReport& report) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%4s  %10s  %10s  %10s  %10s\n", "k", "g_k", "d_k^LOW", "d_k^FULL", "|diff|");
  out += line;
  auto cell = [](const std::optional<double>& v) { return v ? num(*v) : std::string("-"); };
  for (const auto& r : report.rows) {
    std::string diff = "-";
    if (r.d_low && r.d_full) diff = num(std::abs(*r.d_low - *r.d_full));
    std::snprintf(line, sizeof line, "%4d  %10.4f  %10s  %10s  %10s%s\n", r.k, r.g_k, cell(r.d_low).c_str(),
                  cell(r.d_full).c_str(), diff.c_str(), r.failed ? "  (failed)" : "");
    out += line;
  }
  if (report.k_opt > 0) out += "k_opt = " + std::to_string(report.k_opt) + "\n";
  if (report.k_gap > 0) out += "argmax g_k = " + std::to_string(report.k_gap) + "\n";
  return out;
}

nlohmann::json to_json(const EigenOptions& o) {
  return {{"backend", backend_name(o.backend)}, {"dense_max_n", o.dense_max_n}, {"tol", o.tol},
          {"max_restarts", o.max_restarts},     {"block_padding", o.block_padding}, {"seed", o.seed}};
}

nlohmann::json to_json(const FlowConfig& c) {
  return {{"h0", c.h0},
          {"tol", c.tol},
          {"maxit", c.maxit},
          {"armijo",
           {{"decrease", c.armijo.decrease},
            {"backtrack", c.armijo.backtrack},
            {"growth", c.armijo.growth},
            {"h_max", c.armijo.h_max},
            {"max_backtracks", c.armijo.max_backtracks}}},
          {"penalty", {{"start", c.penalty.start}, {"increment", c.penalty.increment}}},
          {"stop_rule", c.stop_rule == StopRule::ObjectiveChange ? "objective_change" : "gradient_alignment"},
          {"alignment_tol", c.alignment_tol},
          {"max_crossing_halvings", c.max_crossing_halvings},
          {"use_direct_us", c.use_direct_us},
          {"cond_limit", c.cond_limit},
          {"cond_patience", c.cond_patience},
          {"eig", to_json(c.eig)}};
}

nlohmann::json to_json(const OuterConfig& c) {
  return {{"eps_lb", c.eps_lb},
          {"eps_ub", c.eps_ub},
          {"eps0", c.eps0},
          {"toler", c.toler},
          {"niter", c.niter},
          {"method", to_string(c.method)},
          {"early_stop_inner", c.early_stop_inner},
          {"admissibility_tol", c.admissibility_tol},
          {"clip_tol", c.clip_tol},
          {"compare_methods", c.compare_methods},
          {"seed", c.seed},
          {"inner", to_json(c.inner)}};
}

nlohmann::json to_json(const StabilityRow& r) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& s : r.trace) {
    trace.push_back({{"l", s.l},
                     {"eps", s.eps},
                     {"phi", s.phi},
                     {"lb", s.lb},
                     {"ub", s.ub},
                     {"c", s.c},
                     {"kind", s.kind},
                     {"inner_iterations", s.inner_iterations}});
  }
  return {{"k", r.k},
          {"g_k", r.g_k},
          {"d_k", r.d_k},
          {"method", r.method},
          {"eps_star", r.eps_star},
          {"phi", r.phi},
          {"admissible", r.admissible},
          {"neg_norm", r.neg_norm},
          {"min_entry", r.min_entry},
          {"clipped", r.clipped},
          {"penalized", r.penalized},
          {"low_rank_inadmissible", r.low_rank_inadmissible},
          {"inner_iters", r.inner_iters},
          {"outer_iters", r.outer_iters},
          {"seconds", r.seconds},
          {"failed", r.failed},
          {"d_low", optional_number(r.d_low)},
          {"d_full", optional_number(r.d_full)},
          {"certificate_gap", finite_or_null(r.certificate_gap)},
          {"diagnostics", r.diagnostics},
          {"outer_trace", trace}};
}

nlohmann::json to_json(const StabilityReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) rows.push_back(to_json(r));
  return {{"rows", rows},
          {"k_opt", report.k_opt > 0 ? nlohmann::json(report.k_opt) : nlohmann::json(nullptr)},
          {"k_gap", report.k_gap > 0 ? nlohmann::json(report.k_gap) : nlohmann::json(nullptr)},
          {"warnings", report.warnings},
          {"config", to_json(report.config)}};
}

nlohmann::json build_info() {
  return {{"library", "clusterstab"}, {"version", version()}, {"generator", kGeneratorName}};
}

}  // namespace clusterstab
