#pragma once

#include "balsel/statespace.hpp"

namespace balsel {

/// Controllability and observability gramians of one realization.
struct GramianPair {
    enum class Source { exact, empirical };

    Matrix w_c;
    Matrix w_o;
    double residual_c = 0.0;  // relative solver residual, 0 for empirical
    double residual_o = 0.0;
    Source source = Source::exact;
};

/// Solves A W + W A* + M = 0 by Bartels-Stewart on the complex Schur form.
/// Throws DomainError if A is not Hurwitz and NumericError if some
/// λ_i + conj(λ_j) is numerically zero.
Matrix solve_lyapunov_continuous(const Matrix& a, const Matrix& m);

/// Solves A W A* - W + M = 0. Throws DomainError unless ρ(A) < 1.
Matrix solve_stein(const Matrix& a, const Matrix& m);

/// ‖A W + W A* + M‖_F / ‖M‖_F (0 when M = 0 and the residual vanishes).
double lyapunov_residual(const Matrix& a, const Matrix& w, const Matrix& m);

/// ‖A W A* - W + M‖_F / ‖M‖_F.
double stein_residual(const Matrix& a, const Matrix& w, const Matrix& m);

/// Exact gramians, dispatched on the model's time domain.
GramianPair compute_gramians(const StateSpaceModel& m);

/// W ≈ X diag(w) X* from impulse snapshots. The last snapshot's energy must
/// have decayed to 1e-6 of the first (HorizonError otherwise).
GramianPair empirical_gramians(const ImpulseSnapshots& snaps);

/// Stabilizing solution of A* X + X A - X B R^{-1} B* X + Q = 0 via the
/// ordered Schur form of the Hamiltonian, followed by one Newton-Kleinman
/// correction when the relative residual exceeds 1e-8. Throws SynthesisError
/// when no stabilizing solution exists.
Matrix solve_care(const Matrix& a, const Matrix& b, const Matrix& q_weight, const Matrix& r_weight);

/// Relative CARE residual: ‖Res‖_F / (‖A*X‖_F + ‖XA‖_F + ‖XBR⁻¹B*X‖_F + ‖Q‖_F).
double care_residual(const Matrix& a, const Matrix& b, const Matrix& q_weight, const Matrix& r_weight,
                     const Matrix& x);

}  // namespace balsel
