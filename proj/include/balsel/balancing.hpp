#pragma once

#include <vector>

#include "balsel/gramian.hpp"
#include "balsel/statespace.hpp"

namespace balsel {

/// Leading r direct and adjoint balancing modes.
///
/// psi_r holds the first r columns of T^{-1}; phi_r holds the first r
/// columns of T*, so phi_r* psi_r = I and x ≈ psi_r phi_r* x. Each psi column
/// is phased so its largest-magnitude entry is real and positive; the same
/// phase is applied to the matching phi column.
struct BalancedRealization {
    Matrix psi_r;
    Matrix phi_r;
    std::vector<double> hankel;  // all n values, non-increasing
    Index rank = 0;
};

/// Square-root balancing of a gramian pair at rank r. Throws RankError
/// naming the largest admissible rank when σ_r ≤ 1e-12 σ_1, and
/// DomainError when r is outside [1, n].
BalancedRealization balance(const GramianPair& w, Index r);

/// Number of Hankel values above 1e-12 σ_1.
Index admissible_rank(const std::vector<double>& hankel);

/// Cholesky-like factor W = L L*. Falls back to a Hermitian eigen
/// decomposition (dropping eigenvalues below 1e-12 λ_max) when W is only
/// semidefinite, in which case L has fewer columns than rows.
Matrix gramian_factor(const Matrix& w);

/// Balanced truncation (Φ_r* A Ψ_r, Φ_r* B, C Ψ_r).
struct ReducedModel {
    StateSpaceModel model;
    double error_bound = 0.0;  // 2 Σ_{i>r} σ_i
};

ReducedModel truncate(const StateSpaceModel& m, const BalancedRealization& bal);

/// 2 (σ_{r+1} + ... + σ_n); zero when r = n.
double truncation_error_bound(const std::vector<double>& hankel, Index r);

}  // namespace balsel
