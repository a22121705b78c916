#pragma once

#include <cstdint>
#include <vector>

#include "balsel/balancing.hpp"
#include "balsel/gramian.hpp"
#include "balsel/selection.hpp"
#include "balsel/statespace.hpp"

namespace balsel {

/// Seeded random stable system with standard-normal B and C.
///
/// Continuous: a Gaussian matrix mapped affinely so Re(eig) spans
/// [-2, -0.05]. Discrete: a Gaussian matrix rescaled to spectral radius
/// 0.95·U(0.5, 1).
StateSpaceModel random_stable_system(Index n, Index p, Index q, std::uint64_t seed,
                                     TimeDomain domain = TimeDomain::continuous);

/// Roots of the physicists' Hermite polynomial H_n, ascending (Golub-Welsch).
RealVector hermite_roots(Index n);

/// First and second differentiation matrices on a node set.
struct DiffMatrices {
    Eigen::MatrixXd d1;
    Eigen::MatrixXd d2;
};

/// Differentiation of interpolants w(x)·p(x) with p a polynomial of degree
/// < n through the nodes. `weighted = false` uses w ≡ 1; otherwise
/// w(x) = exp(-x²/2), the Hermite-function basis. Weights are evaluated in
/// log space so large n does not overflow.
DiffMatrices differentiation_matrices(const RealVector& nodes, bool weighted);

/// Hermite-function differentiation on the grid roots(H_n)/scale, with D1
/// and D2 rescaled to that grid.
DiffMatrices hermite_differentiation(Index n, double scale, RealVector* grid = nullptr);

/// Trapezoidal weights on a strictly increasing, possibly nonuniform grid.
RealVector trapezoid_weights(const RealVector& grid);

/// Linearized Ginzburg-Landau parameters. μ(ξ) = mu0 + mu1 ξ + mu2 ξ².
struct GinzburgLandauParams {
    Index n = 100;
    Complex nu{2.0, 0.4};
    Complex beta_diff{1.0, -1.0};
    double mu0 = 0.37;
    double mu1 = 0.0;
    double mu2 = -0.005;
    double kernel_width = 0.4;
    double grid_scale = 0.5;  // ξ = roots(H_n) / grid_scale

    // LQG weights and noise levels (scalar multiples of identity)
    double q_weight = 1.0;
    double r_weight = 1.0;
    double w_cov = 1.0;   // state disturbance
    double v_cov = 4e-8;  // measurement noise
    bool swap_noise = false;

    /// Throws DomainError when n < 4 or kernel_width ≤ 0.
    void validate() const;
};

struct GinzburgLandauPlant {
    Matrix a;         // n×n
    Matrix b2;        // n×n, column i centred at ξ_i
    Matrix c2;        // n×n, row i centred at ξ_i
    RealVector grid;  // ξ, ascending
    RealVector trap_weights;
};

/// A = -ν D1 + diag(μ(ξ)) + β D2, with B2(:, i) = exp(-(ξ-ξ_i)²/(√2σ)) and
/// C2(i, :) = B2(:, i)ᵀ M.
GinzburgLandauPlant ginzburg_landau_plant(const GinzburgLandauParams& params);

/// Kernel matrices only, for arbitrary grids (used by the σ → 0 tests).
Matrix gaussian_kernels(const RealVector& grid, double width);

struct LQGController {
    Matrix f_gain;                // q×n
    Matrix l_gain;                // n×p
    StateSpaceModel controller;   // (A - B2 F - L C2, L, -F)
    Matrix q_hat, r_hat, w_cov, v_cov;
    Matrix x_care, y_care;        // regulator and filter Riccati solutions
};

/// Regulator F = R̂⁻¹ B2* X and estimator L = Y C2* V⁻¹ from the two CAREs.
/// Throws SynthesisError when a CARE has no stabilizing solution, when
/// A - B2 F or A - L C2 is not Hurwitz, or (if requested) when the
/// controller itself is unstable.
LQGController lqg_synthesize(const Matrix& a, const Matrix& b2, const Matrix& c2, const Matrix& q_hat,
                             const Matrix& r_hat, const Matrix& w_cov, const Matrix& v_cov,
                             bool require_stable_controller = true);

/// How a subset controller is formed.
enum class RestrictionMode {
    resynthesize,  // optimal LQG for the restricted plant (default)
    restrict,      // full-state controller with gains gathered to the subset
};

struct ClosedLoop {
    StateSpaceModel model;  // inputs [d; n], outputs [Q̂^{1/2} x; R̂^{1/2} u]
    bool stable = false;
    Matrix a_k, b_k, c_k;   // subset controller
};

/// 2n-state interconnection of the plant (B2 𝕊_B, 𝕊_C C2) with a subset
/// controller. Index sets refer to columns of B2 (beta) and rows of C2
/// (gamma). An empty beta and gamma gives the open-loop plant with zero
/// controller. Instability is reported through `stable`, not thrown.
ClosedLoop closed_loop_assemble(const GinzburgLandauPlant& plant, const LQGController& full,
                                std::span<const Index> gamma, std::span<const Index> beta,
                                RestrictionMode mode = RestrictionMode::resynthesize);

/// Closed-loop H2 norm; +inf when the loop is unstable.
double closed_loop_h2(const ClosedLoop& loop);

/// LQG cost identity tr(X W) + tr(R̂ F Y F*), valid for the optimal
/// controller of the given plant.
double lqg_h2_trace_formula(const LQGController& k);

/// Controller gain |K(jω)| in dB. Rows are actuators and columns sensors,
/// both ordered by grid coordinate (upstream to downstream).
struct GainGrid {
    std::vector<Index> sensors;    // gamma sorted by coordinate
    std::vector<Index> actuators;  // beta sorted by coordinate
    std::vector<double> omegas;
    std::vector<Eigen::MatrixXd> gains_db;  // one |actuators|×|sensors| block per ω
};

GainGrid lqg_gain_grid(const ClosedLoop& loop, const RealVector& grid, std::span<const Index> gamma,
                       std::span<const Index> beta, const FrequencyGrid& omegas);

/// Output of the balanced-controller placement for one budget.
struct GLPlacement {
    Index rank = 0;
    std::vector<Index> sensors;    // rows of C2 (columns of L)
    std::vector<Index> actuators;  // columns of B2 (rows of F)
    std::vector<double> sensor_coords;
    std::vector<double> actuator_coords;
    double h2 = 0.0;
    bool stable = false;
};

/// Balances the full controller (A_K, L, -F), picks actuators from rows of
/// -F with Ψ_r and sensors from columns of L with Φ_r, then evaluates the
/// closed loop. `no_collocate` forbids sensors at chosen actuator locations.
struct GLPipeline {
    GinzburgLandauParams params;
    GinzburgLandauPlant plant;
    LQGController full;
    GramianPair controller_gramians;
    double full_h2 = 0.0;
};

GLPipeline gl_prepare(const GinzburgLandauParams& params);

GLPlacement gl_place(const GLPipeline& pipe, Index r, bool no_collocate = false,
                     RestrictionMode mode = RestrictionMode::resynthesize);

/// H2 of a given placement; +inf when synthesis fails or the loop is unstable.
double gl_placement_h2(const GLPipeline& pipe, std::span<const Index> sensors, std::span<const Index> actuators,
                       RestrictionMode mode = RestrictionMode::resynthesize);

/// Builds the identity-multiple weight matrices of the parameter set.
void gl_weights(const GinzburgLandauParams& p, Index n, Matrix& q_hat, Matrix& r_hat, Matrix& w_cov, Matrix& v_cov);

}  // namespace balsel
