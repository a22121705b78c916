#pragma once

#include <vector>

#include "balsel/matkernel.hpp"

namespace balsel {

enum class TimeDomain { continuous, discrete };

/// x' = A x + B u, y = C x (no feedthrough).
class StateSpaceModel {
public:
    StateSpaceModel() = default;
    StateSpaceModel(Matrix a, Matrix b, Matrix c, TimeDomain domain = TimeDomain::continuous);

    const Matrix& a() const noexcept { return a_; }
    const Matrix& b() const noexcept { return b_; }
    const Matrix& c() const noexcept { return c_; }
    TimeDomain time_domain() const noexcept { return domain_; }

    Index states() const noexcept { return a_.rows(); }
    Index outputs() const noexcept { return c_.rows(); }
    Index inputs() const noexcept { return b_.cols(); }

    /// `real` iff A, B and C all have zero imaginary parts.
    Field field() const;

    /// The adjoint realization (A*, C*, B*).
    StateSpaceModel adjoint() const;

private:
    Matrix a_, b_, c_;
    TimeDomain domain_ = TimeDomain::continuous;
};

/// Radian frequencies, strictly increasing and positive. For discrete models
/// the points are read as angles on the unit circle and clipped to (0, π].
struct FrequencyGrid {
    enum class Spacing { log, linear };

    std::vector<double> points;
    Spacing spacing = Spacing::log;

    static FrequencyGrid logspace(double lo, double hi, std::size_t count);
    static FrequencyGrid linspace(double lo, double hi, std::size_t count);
    /// 400 log-spaced points in [1e-3, 1e3].
    static FrequencyGrid standard();
};

/// Continuous: every Re λ < 0. Discrete: spectral radius < 1.
bool is_stable(const StateSpaceModel& m);
bool is_stable_matrix(const Matrix& a, TimeDomain domain);

/// C (sI - A)^{-1} B through an LU solve. Throws SingularityError when s is
/// within 1e-12 of an eigenvalue.
Matrix transfer_eval(const StateSpaceModel& m, Complex s);

/// G at frequency ω: s = jω for continuous models, z = e^{jω} for discrete.
Matrix frequency_response(const StateSpaceModel& m, double omega);

struct GramianPair;

/// sqrt(tr(C W_c C*)). Cross-checks sqrt(tr(B* W_o B)) and throws NumericError
/// if the two disagree by more than 1e-8 relative. Unstable → DomainError.
double h2_norm_gramian(const StateSpaceModel& m, const GramianPair& w);

/// Both trace forms of the squared H2 norm, for callers that report them.
struct H2Traces {
    double controllability;  // tr(C W_c C*)
    double observability;    // tr(B* W_o B)
};
H2Traces h2_traces(const StateSpaceModel& m, const GramianPair& w);

/// Trapezoidal quadrature of (1/2π)∫ tr(G*G) over ±grid, returned as the
/// square root. Conjugate symmetry is used for real models. The interval
/// below the first grid point uses the DC value; above the last point a
/// 1/ω² tail is assumed (continuous) or the integral is closed at π
/// (discrete).
double h2_norm_frequency(const StateSpaceModel& m, const FrequencyGrid& grid);

/// Grid estimate of the H∞ norm: max of σ_max(G) over the grid, DC, and (for
/// complex models) negative frequencies. This is a lower bound on the true
/// norm.
double hinf_estimate(const StateSpaceModel& m, const FrequencyGrid& grid);

/// Impulse responses sampled at t_k = k·dt, k = 0..steps-1.
struct ImpulseSnapshots {
    Matrix direct;   // n × (q·steps): e^{A t_k} B, block k in columns [k·q, (k+1)·q)
    Matrix adjoint;  // n × (p·steps): e^{A* t_k} C*
    std::vector<double> weights;  // trapezoidal weight per time sample
    Index inputs = 0;
    Index outputs = 0;
    double dt = 0.0;
};

/// Requires a stable continuous model and dt > 0. For discrete models the
/// snapshots are A^k B and (A*)^k C* with unit weights.
ImpulseSnapshots impulse_snapshots(const StateSpaceModel& m, double dt, Index steps);

/// Difference system G1 - G2 as a block-diagonal realization.
StateSpaceModel difference(const StateSpaceModel& g1, const StateSpaceModel& g2);

}  // namespace balsel
