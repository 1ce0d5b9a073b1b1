#pragma once

#include "clusterstab/flow.hpp"
#include "clusterstab/laplacian.hpp"

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace clusterstab {

/// Rank loss in the low-rank representation (dependent x, y, z or a
/// rank-deficient QR input). Callers fall back to the full-rank flow.
class LowRankBreakdown : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * R = (z1ᵀ + 1zᵀ)/2 - xxᵀ + yyᵀ in the factored form RU RS RUᵀ with
 * RU = [z+1, z-1, x, y] and RS = diag(1/4, -1/4, -1, 1).
 *
 * With `orthonormalize`, also B (n x 4, orthonormal) and Lambda (4 x 4
 * symmetric) such that R = B Lambda Bᵀ.
 */
struct RFactors {
  Eigen::MatrixXd RU;
  Eigen::MatrixXd RS;
  int rank = 4;
  Eigen::MatrixXd B;
  Eigen::MatrixXd Lambda;

  LowRankSym as_lowrank() const { return {RU, RS}; }
  /// R V for an n x r block V, in O(n r).
  Eigen::MatrixXd apply(const Eigen::MatrixXd& V) const { return RU * (RS * (RU.transpose() * V)); }
};

RFactors assemble_R(const SpectralData& sd, bool orthonormalize = false);

/// P_Y A = A U Uᵀ + U Uᵀ A - U Uᵀ A U Uᵀ for factored A; the result has rank
/// at most 2r and is returned as [U, AU] [[-UᵀAU, I], [I, 0]] [U, AU]ᵀ.
LowRankSym tangent_project(const SvsdFactors& f, const LowRankSym& A);
/// Dense variant, O(n² r); for tests.
Eigen::MatrixXd tangent_project(const SvsdFactors& f, const Eigen::MatrixXd& A);

/// Π_S(U S Uᵀ) as a pattern matrix, O(m r).
PatternMatrix factors_to_pattern(const SvsdFactors& f, const PatternPtr& pattern);

/// Rescales S so that |Π_S(U S Uᵀ)|_F = 1. Throws LowRankBreakdown if the
/// projection vanishes.
void normalize_factors(SvsdFactors& f, const PatternPtr& pattern);

/// |d|_max / |d|_min over the eigenvalues of S (infinity if singular).
double condition_number(const Eigen::MatrixXd& S);

/// Orthonormal basis of the columns of K (thin Householder QR); also returns
/// the triangular factor. Throws LowRankBreakdown on numerical rank loss.
Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& K, Eigen::MatrixXd* triangular = nullptr);

/**
 * Starting factors from the unperturbed spectral data: [U0, D0] = qr(RU),
 * S0 = -D0 RS D0ᵀ, so that U0 S0 U0ᵀ = -R0; then rescaled so that
 * |Π_S Y0|_F = 1 (equivalently Π_S Y0 = -G0 / |G0|).
 */
SvsdFactors init_factors(const SpectralData& sd, const PatternPtr& pattern);
SvsdFactors init_factors(const WeightMatrix& w, int k, const EigenOptions& opts = {});

/// η = <P_Y R, Π_S Y> for normalized factors, in factored form.
double eta_coefficient(const SvsdFactors& f, const RFactors& R, const PatternMatrix& E);

/**
 * One step of the splitting integrator for Ẏ = -P_Y R + ηY.
 *
 * K1 = U0 S0 + h(-R0 U0 + η0 U0 S0); U1 = qr(K1); M = U1ᵀU0; Ŝ0 = M S0 Mᵀ,
 * rescaled to S̃0; R̃0 and η are evaluated at Ỹ0 = U1 S̃0 U1ᵀ;
 * S̃1 = S̃0 + h(-U1ᵀR̃0U1 + ηS̃0), rescaled to S1. `R0` must be R at
 * Π_S(U0 S0 U0ᵀ). Every product with R uses its n x 4 factors.
 */
SvsdFactors splitting_step(const SvsdFactors& f0, const RFactors& R0, const WeightMatrix& w, double eps,
                           int k, double h, const EigenOptions& opts = {}, int* eigensolves = nullptr);
/// Convenience overload that evaluates R0 first.
SvsdFactors splitting_step(const SvsdFactors& f0, const WeightMatrix& w, double eps, int k, double h,
                           const EigenOptions& opts = {});

/// Explicit Euler step of U̇ = -(I - UUᵀ) R U S⁻¹, Ṡ = -UᵀRU + ηS followed by
/// QR retraction and rescaling.
SvsdFactors direct_us_step(const SvsdFactors& f0, const RFactors& R0, const PatternPtr& pattern, double eta,
                           double h);

/**
 * Low-rank inner iteration: Armijo-controlled splitting steps until
 * |F change| <= tol (or the configured rule), F <= stop_below, or maxit.
 * The result carries E = Π_S(U S Uᵀ) and the final factors for warm starts.
 * Rank loss or a persistently ill-conditioned S sets `fallback`.
 */
StationaryPoint inner_iteration_lowrank(const WeightMatrix& w, double eps, int k, const SvsdFactors& f0,
                                        const FlowConfig& config);

}  // namespace clusterstab
