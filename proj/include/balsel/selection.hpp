#pragma once

#include <optional>
#include <span>
#include <vector>

#include "balsel/matkernel.hpp"

namespace balsel {

/// Indices chosen on one side plus the |T_ii| of the pivoted factorization.
struct SideSelection {
    std::vector<Index> indices;  // pivot order
    std::vector<double> r_diag;  // |T_ii|, i < r
};

/// Sensor (row of C) and actuator (column of B) subsets of size r.
struct SelectionResult {
    std::vector<Index> gamma;  // sensors, in pivot order
    std::vector<Index> beta;   // actuators, in pivot order
    std::vector<double> r_diag_sensors;
    std::vector<double> r_diag_actuators;
    bool collocation_forbidden = false;

    /// 𝕊_C: r×p row gather.
    Matrix sensor_selector(Index p) const;
    /// 𝕊_B: q×r column gather.
    Matrix actuator_selector(Index q) const;
};

/// First r pivots of pivoted_qr((C Ψ_r)*). Rows flagged in `excluded` are
/// never chosen. Throws RankError if C Ψ_r (restricted to eligible rows) has
/// rank below r, FeasibilityError if fewer than r rows are eligible.
SideSelection select_sensors(const Matrix& c, const Matrix& psi_r, std::span<const bool> excluded = {});

/// First r pivots of pivoted_qr(Φ_r* B), with the same exclusion semantics
/// over columns of B.
SideSelection select_actuators(const Matrix& b, const Matrix& phi_r, std::span<const bool> excluded = {});

/// Sensors and actuators selected independently (collocation allowed).
SelectionResult select_collocated(const Matrix& c, const Matrix& b, const Matrix& psi_r, const Matrix& phi_r);

/// Actuators first, then sensors, skipping every sensor whose location
/// matches a chosen actuator. `actuator_location[j]` is the sensor index at
/// the spatial location of actuator j (identity when omitted). Throws
/// FeasibilityError when fewer than r sensors remain.
SelectionResult select_noncollocated(const Matrix& c, const Matrix& b, const Matrix& psi_r, const Matrix& phi_r,
                                     std::span<const Index> actuator_location = {});

/// Oblique interpolation projector basis (sampler basis)^{-1} sampler.
struct ProjectionOperator {
    enum class Side { sensor, actuator };

    Matrix basis;         // n×r, Ψ_r or Φ_r
    Matrix sampler;       // r×n, Ĉ or B̂*
    Matrix sampled_rows;  // r×r, sampler·basis
    double condition = 0.0;
    Side side = Side::sensor;
};

/// ℙ_C = Ψ_r (Ĉ Ψ_r)^{-1} Ĉ with Ĉ = 𝕊_C C.
ProjectionOperator sensor_projection(const Matrix& c, const Matrix& psi_r, std::span<const Index> gamma);

/// ℙ_B = Φ_r (B̂* Φ_r)^{-1} B̂* with B̂ = B 𝕊_B.
ProjectionOperator actuator_projection(const Matrix& b, const Matrix& phi_r, std::span<const Index> beta);

/// Applies the projector. Throws SingularityError when the sampled rows
/// are singular to working precision.
Vector project_state(const ProjectionOperator& op, const Vector& x);

/// Upper bound on ‖(𝕊U)^{-1}‖₂ for a pivoted-QR selection of r rows of the
/// p×r matrix U: √(p-r+1)/σ_min(U) · √(4^r+6r-1)/3.
double lemma2_bound(const Matrix& u);

/// ‖C‖₂‖Ψ_r‖₂/σ_min(CΨ_r) · √(p-r+1) · √(4^r+6r-1)/3 · 2Σ_{i>r}σ_i.
double theorem2_bound(const Matrix& c, const Matrix& psi_r, const std::vector<double>& hankel);

/// Same constant with √p in place of √(p-r+1).
double theorem2_bound_sqrt_p(const Matrix& c, const Matrix& psi_r, const std::vector<double>& hankel);

/// Dual of theorem2_bound with (Φ_r, B, q).
double corollary1_bound(const Matrix& b, const Matrix& phi_r, const std::vector<double>& hankel);

/// r log(9σ_min²(CΨ_r)/((p-r+1)(4^r+6r-1))) + Σ_{i≤r} log σ_i.
double theorem3_lower_bound(const Matrix& c, const Matrix& psi_r, const std::vector<double>& hankel);

/// Dual with (Φ_r* B, q).
double corollary2_lower_bound(const Matrix& b, const Matrix& phi_r, const std::vector<double>& hankel);

/// log|Ĉ Ψ_r Σ_r Ψ_r* Ĉ*|, the objective the lower bounds refer to.
double balanced_logdet_sensors(const Matrix& c, const Matrix& psi_r, const std::vector<double>& hankel,
                               std::span<const Index> gamma);

/// log|B̂* Φ_r Σ_r Φ_r* B̂|.
double balanced_logdet_actuators(const Matrix& b, const Matrix& phi_r, const std::vector<double>& hankel,
                                 std::span<const Index> beta);

/// log(4^r + 6r - 1) without overflow.
double log_lemma2_growth(Index r);

}  // namespace balsel
