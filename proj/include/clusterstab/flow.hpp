#pragma once

#include "clusterstab/functional.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace clusterstab {

/// Backtracking line search constants.
struct ArmijoParams {
  double decrease = 1e-4;  ///< sufficient-decrease constant
  double backtrack = 0.5;  ///< step reduction on rejection
  double growth = 1.25;    ///< step enlargement after a first-try acceptance
  double h_max = 1.0;
  int max_backtracks = 20;
};

/// c_j = start + increment * j for the inner run at outer step j.
struct PenaltySchedule {
  double start = 0.0;
  double increment = 0.5;
  double at(int j) const { return start + increment * j; }
};

enum class StopRule {
  ObjectiveChange,    ///< |F_j - F_{j-1}| <= tol
  GradientAlignment,  ///< |-G + <G,E>E| / |G| <= alignment_tol
};

struct FlowConfig {
  double h0 = 0.5;
  double tol = 1e-9;
  int maxit = 2000;
  ArmijoParams armijo;
  PenaltySchedule penalty;
  StopRule stop_rule = StopRule::ObjectiveChange;
  double alignment_tol = 1e-4;
  /// Stop as soon as F drops to this value (disabled when negative). The
  /// outer iteration only needs to know that φ is below its tolerance.
  double stop_below = -1.0;
  /// Step halvings allowed when an eigenvalue crossing is detected.
  int max_crossing_halvings = 20;
  EigenOptions eig;
  bool record_trajectory = false;

  // Low-rank only.
  bool use_direct_us = false;  ///< Euler on (U, S) instead of the splitting step
  double cond_limit = 1e8;
  int cond_patience = 3;
};

struct StepRecord {
  int iter = 0;
  double h = 0;
  double F = 0;
  double grad_norm = 0;
  double penalty = 0;
  double cond_S = 0;  ///< NaN for the full-rank flow
};

/// Rank-4 factors of Y = U S Uᵀ.
struct SvsdFactors {
  Eigen::MatrixXd U;  ///< n x 4, orthonormal columns
  Eigen::MatrixXd S;  ///< 4 x 4 symmetric
};

/// Result of an inner iteration at fixed eps.
struct StationaryPoint {
  PatternMatrix E;
  GradientBundle bundle;
  int iterations = 0;
  int eigensolves = 0;
  bool converged = false;
  bool stopped_below = false;  ///< F reached FlowConfig::stop_below
  int monotone_violations = 0;
  double c = 0;
  std::string diagnostics;
  std::optional<SvsdFactors> factors;
  /// The low-rank flow could not proceed (rank loss, ill-conditioned S).
  bool fallback = false;
  std::vector<StepRecord> trajectory;
};

/// Alignment residual |-G + <G,E>E|_F / |G|_F (0 for G = 0).
double alignment_residual(const PatternMatrix& G, const PatternMatrix& E);

}  // namespace clusterstab
