#pragma once

#include "clusterstab/flow.hpp"
#include "clusterstab/flow_full.hpp"
#include "clusterstab/flow_lowrank.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace clusterstab {

enum class Method { LowRank, Full, Auto };

Method parse_method(const std::string& name);
std::string to_string(Method m);

/// Inner solver actually used for a run.
enum class InnerKind { LowRank, Full, FullPenalized };
std::string to_string(InnerKind kind);

struct OuterConfig {
  double eps_lb = 0.0;
  /// Negative selects |W|_F (the perturbation -W removes every edge).
  double eps_ub = -1.0;
  /// Negative selects the Newton step from ε = 0: g_k / |G_0|_F.
  double eps0 = -1.0;
  double toler = 1e-2;
  int niter = 60;
  Method method = Method::Auto;
  FlowConfig inner;
  /// Inner runs stop once F falls below toler (only φ < toler matters there).
  bool early_stop_inner = true;
  double admissibility_tol = 1e-8;
  /// Negativity up to this Frobenius norm is removed by clipping.
  double clip_tol = 1e-5;
  /// Also compute the distance with the other method for comparison.
  bool compare_methods = false;
  std::uint64_t seed = 0;
};

/// Starting point for an inner run.
struct WarmStart {
  std::optional<PatternMatrix> E;
  std::optional<SvsdFactors> factors;
};

struct PhiResult {
  double value = 0;  ///< φ(ε) = F_{ε,c}(E⋆)
  StationaryPoint point;
};

/// φ(ε) by the selected inner iteration. Without a warm start the
/// low-rank run starts from init_factors and the full-rank run from -G0/|G0|.
/// `c` is the penalty, used by InnerKind::FullPenalized only.
PhiResult phi(const WeightMatrix& w, double eps, int k, const WarmStart& warm, InnerKind kind,
              const FlowConfig& config, double c = 0.0);

/// φ'(ε) = -|G_{ε,c}(E⋆)|_F; requires a converged inner run.
double phi_derivative(const StationaryPoint& point);

struct OuterStep {
  int l = 0;
  double eps = 0;
  double phi = 0;
  double lb = 0;
  double ub = 0;
  double c = 0;
  std::string kind;  ///< initial, newton, bisection, midpoint
  int inner_iterations = 0;
};

struct OuterResult {
  double eps_star = 0;
  PatternMatrix E_star;
  GradientBundle bundle;
  std::optional<SvsdFactors> factors;
  bool certified = false;  ///< φ(eps_star) < toler
  int outer_iterations = 0;
  int inner_iterations = 0;
  bool fallback = false;   ///< low-rank run switched to full rank
  InnerKind final_kind = InnerKind::LowRank;
  std::string diagnostics;
  std::vector<OuterStep> trace;
  /// Inner trajectories, tagged by outer step, when recording is enabled.
  std::vector<std::pair<int, StepRecord>> trajectory;
};

/**
 * Newton-bisection on φ: bisection when φ(ε_l) < toler (lowering ub),
 * Newton with φ' = -|G| otherwise (raising lb), midpoint when the Newton
 * iterate leaves [lb, ub]; each inner run is warm-started from the previous
 * optimizer. The penalized variant uses c_l = schedule(l) at outer step l.
 * Reports the last iterate if φ < toler there, else the smallest ε seen with
 * φ < toler.
 */
OuterResult outer_iteration(const WeightMatrix& w, int k, InnerKind kind, const OuterConfig& config,
                            double g_k = -1.0);

struct StabilityRow {
  int k = 0;
  double g_k = 0;
  double d_k = 0;
  std::string method;
  double eps_star = 0;
  double phi = 0;
  bool admissible = false;
  double neg_norm = 0;        ///< |(W + ε⋆E⋆)₋|_F before clipping
  double min_entry = 0;       ///< min of W + Δ after clipping
  bool clipped = false;
  int inner_iters = 0;
  int outer_iters = 0;
  double seconds = 0;
  bool failed = false;
  bool penalized = false;
  bool low_rank_inadmissible = false;  ///< auto mode had to switch to penalized full rank
  std::string diagnostics;
  std::optional<double> d_low;
  std::optional<double> d_full;
  double certificate_gap = 0;  ///< λ_{k+1} - λ_k of L(W + Δ), fresh solve
  PatternMatrix delta;         ///< the (clipped) perturbation Δ
  std::vector<OuterStep> trace;
  std::vector<std::pair<int, StepRecord>> trajectory;
};

/// d_k for one k: low-rank, full or auto dispatch, admissibility check,
/// clipping of residual negativity, and an independent certificate solve.
StabilityRow structured_distance(const WeightMatrix& w, int k, const OuterConfig& config);

struct StabilityReport {
  std::vector<StabilityRow> rows;
  int k_opt = 0;  ///< argmax d_k over non-failed rows, ties toward smaller k
  int k_gap = 0;  ///< argmax g_k, ties toward smaller k
  OuterConfig config;
  std::vector<std::string> warnings;
};

/// Rows for k = kmin..kmax computed by `jobs` workers (0 = hardware threads).
StabilityReport select_k(const WeightMatrix& w, int kmin, int kmax, const OuterConfig& config, int jobs = 0);

/// Unstructured baseline: L̂ = L - (g/2)(xxᵀ - yyᵀ) coalesces λ_k and λ_{k+1}
/// with |L - L̂|_F = g/√2. Dense, for verification.
Eigen::MatrixXd unstructured_coalescer(const WeightMatrix& w, int k, const EigenOptions& opts = {});

}  // namespace clusterstab
