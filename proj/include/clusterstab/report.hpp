#pragma once

#include "clusterstab/outer.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace clusterstab {

/// Library version string.
const char* version();

inline constexpr const char* kReportCsvHeader =
    "k,g_k,d_k,method,eps_star,phi,admissible,neg_norm,inner_iters,outer_iters,seconds";

/// One CSV row per k under kReportCsvHeader.
void write_report_csv(std::ostream& out, const StabilityReport& report);

/// Inner trajectories: k,outer_step,iter,h,F,grad_norm,penalty,cond_S.
void write_trajectory_csv(std::ostream& out, const StabilityReport& report);

/// Plain-text table: k, g_k, d_k^LOW, d_k^FULL, |difference| ("-" where a
/// method was not run).
std::string format_table(const StabilityReport& report);

nlohmann::json to_json(const EigenOptions& opts);
nlohmann::json to_json(const FlowConfig& config);
nlohmann::json to_json(const OuterConfig& config);
nlohmann::json to_json(const StabilityRow& row);

/// Rows, k_opt, k_gap, warnings and the configuration echo.
nlohmann::json to_json(const StabilityReport& report);

/// {"library": ..., "version": ..., "generator": ...}
nlohmann::json build_info();

}  // namespace clusterstab
