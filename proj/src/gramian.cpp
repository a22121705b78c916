#include "balsel/gramian.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>

namespace balsel {

namespace {

// Keep the solution real when the data are real, Hermitian when M is.
Matrix finish(Matrix w, const Matrix& a, const Matrix& m) {
    w = hermitian_part(w);
    if (field_of(a) == Field::real && field_of(m) == Field::real) w = w.real().cast<Complex>();
    return w;
}

void require_square(const Matrix& a, const Matrix& m, const char* who) {
    if (a.rows() != a.cols() || m.rows() != m.cols() || a.rows() != m.rows())
        throw DimensionError(std::string(who) + ": A and M must be square and of equal size");
}

}  // namespace

Matrix solve_lyapunov_continuous(const Matrix& a, const Matrix& m) {
    require_square(a, m, "solve_lyapunov_continuous");
    const Index n = a.rows();
    if (n == 0) return Matrix(0, 0);

    const SchurResult s = schur(a);
    const Matrix& t = s.t;
    for (Index i = 0; i < n; ++i)
        if (!(t(i, i).real() < 0.0)) throw DomainError("solve_lyapunov_continuous: A is not Hurwitz");

    const double tnorm = std::max(t.norm(), 1e-300);
    const Matrix f = s.u.adjoint() * m * s.u;
    Matrix y = Matrix::Zero(n, n);

    // T Y + Y T* + F = 0, columns from last to first
    for (Index k = n - 1; k >= 0; --k) {
        Vector rhs = -f.col(k);
        if (k + 1 < n) rhs.noalias() -= y.rightCols(n - k - 1) * t.row(k).tail(n - k - 1).adjoint();
        Matrix shifted = t;
        const Complex shift = std::conj(t(k, k));
        shifted.diagonal().array() += shift;
        for (Index i = 0; i < n; ++i)
            if (std::abs(shifted(i, i)) <= 1e-14 * tnorm)
                throw NumericError("solve_lyapunov_continuous: eigenvalues sum to zero, equation is ill-posed");
        y.col(k) = shifted.triangularView<Eigen::Upper>().solve(rhs);
    }
    return finish(s.u * y * s.u.adjoint(), a, m);
}

Matrix solve_stein(const Matrix& a, const Matrix& m) {
    require_square(a, m, "solve_stein");
    const Index n = a.rows();
    if (n == 0) return Matrix(0, 0);

    const SchurResult s = schur(a);
    const Matrix& t = s.t;
    for (Index i = 0; i < n; ++i)
        if (!(std::abs(t(i, i)) < 1.0)) throw DomainError("solve_stein: spectral radius of A is not below one");

    const Matrix f = s.u.adjoint() * m * s.u;
    Matrix y = Matrix::Zero(n, n);

    // T Y T* - Y + F = 0: (conj(t_kk) T - I) y_k = -f_k - T Σ_{j>k} conj(t_kj) y_j
    for (Index k = n - 1; k >= 0; --k) {
        Vector rhs = -f.col(k);
        if (k + 1 < n) {
            const Vector acc = y.rightCols(n - k - 1) * t.row(k).tail(n - k - 1).adjoint();
            rhs.noalias() -= t.triangularView<Eigen::Upper>() * acc;
        }
        Matrix lhs = std::conj(t(k, k)) * t;
        lhs.diagonal().array() -= 1.0;
        y.col(k) = lhs.triangularView<Eigen::Upper>().solve(rhs);
    }
    return finish(s.u * y * s.u.adjoint(), a, m);
}

double lyapunov_residual(const Matrix& a, const Matrix& w, const Matrix& m) {
    const double res = (a * w + w * a.adjoint() + m).norm();
    const double ref = m.norm();
    return ref > 0.0 ? res / ref : res;
}

double stein_residual(const Matrix& a, const Matrix& w, const Matrix& m) {
    const double res = (a * w * a.adjoint() - w + m).norm();
    const double ref = m.norm();
    return ref > 0.0 ? res / ref : res;
}

GramianPair compute_gramians(const StateSpaceModel& m) {
    if (!is_stable(m)) throw DomainError("compute_gramians: model is not stable");
    const Matrix bb = m.b() * m.b().adjoint();
    const Matrix cc = m.c().adjoint() * m.c();
    const Matrix a_adj = m.a().adjoint();
    GramianPair g;
    g.source = GramianPair::Source::exact;
    if (m.time_domain() == TimeDomain::continuous) {
        g.w_c = solve_lyapunov_continuous(m.a(), bb);
        g.w_o = solve_lyapunov_continuous(a_adj, cc);
        g.residual_c = lyapunov_residual(m.a(), g.w_c, bb);
        g.residual_o = lyapunov_residual(a_adj, g.w_o, cc);
    } else {
        g.w_c = solve_stein(m.a(), bb);
        g.w_o = solve_stein(a_adj, cc);
        g.residual_c = stein_residual(m.a(), g.w_c, bb);
        g.residual_o = stein_residual(a_adj, g.w_o, cc);
    }
    return g;
}

GramianPair empirical_gramians(const ImpulseSnapshots& snaps) {
    const auto steps = static_cast<Index>(snaps.weights.size());
    if (steps == 0) throw DimensionError("empirical_gramians: no snapshots");
    if (snaps.direct.cols() != snaps.inputs * steps || snaps.adjoint.cols() != snaps.outputs * steps)
        throw DimensionError("empirical_gramians: snapshot blocks do not match weights");

    auto check_decay = [&](const Matrix& x, Index width, const char* which) {
        if (width == 0 || steps < 2) return;
        const double first = x.leftCols(width).squaredNorm();
        const double last = x.rightCols(width).squaredNorm();
        if (first > 0.0 && last > 1e-6 * first)
            throw HorizonError(std::string("empirical_gramians: ") + which +
                               " snapshots have not decayed; lengthen the horizon");
    };
    check_decay(snaps.direct, snaps.inputs, "direct");
    check_decay(snaps.adjoint, snaps.outputs, "adjoint");

    auto assemble = [&](const Matrix& x, Index width) {
        RealVector w(x.cols());
        for (Index k = 0; k < steps; ++k) w.segment(k * width, width).setConstant(snaps.weights[static_cast<std::size_t>(k)]);
        const Matrix xs = x * w.cwiseSqrt().cast<Complex>().asDiagonal();
        return hermitian_part(xs * xs.adjoint());
    };

    GramianPair g;
    g.source = GramianPair::Source::empirical;
    g.w_c = assemble(snaps.direct, snaps.inputs);
    g.w_o = assemble(snaps.adjoint, snaps.outputs);
    return g;
}

double care_residual(const Matrix& a, const Matrix& b, const Matrix& q_weight, const Matrix& r_weight,
                     const Matrix& x) {
    const Matrix g = b * r_weight.partialPivLu().solve(b.adjoint());
    const Matrix ax = a.adjoint() * x;
    const Matrix xa = x * a;
    const Matrix quad = x * g * x;
    const double res = (ax + xa - quad + q_weight).norm();
    const double ref = ax.norm() + xa.norm() + quad.norm() + q_weight.norm();
    return ref > 0.0 ? res / ref : res;
}

Matrix solve_care(const Matrix& a, const Matrix& b, const Matrix& q_weight, const Matrix& r_weight) {
    const Index n = a.rows();
    if (a.cols() != n || b.rows() != n || q_weight.rows() != n || q_weight.cols() != n ||
        r_weight.rows() != b.cols() || r_weight.cols() != b.cols())
        throw DimensionError("solve_care: inconsistent dimensions");
    if (n == 0) return Matrix(0, 0);

    Eigen::PartialPivLU<Matrix> r_lu(r_weight);
    if (!(r_lu.rcond() > 1e-14)) throw SynthesisError("solve_care: R is singular");
    const Matrix g = hermitian_part(b * r_lu.solve(b.adjoint()));

    Matrix h(2 * n, 2 * n);
    h << a, -g, -q_weight, -a.adjoint();

    SchurResult s = schur(h);
    const double hnorm = std::max(h.norm(), 1e-300);
    for (Index i = 0; i < 2 * n; ++i)
        if (std::abs(s.t(i, i).real()) <= 1e-12 * hnorm)
            throw SynthesisError("solve_care: Hamiltonian has eigenvalues on the imaginary axis");

    const Index stable = reorder_schur(s, [](Complex l) { return l.real() < 0.0; });
    if (stable != n)
        throw SynthesisError("solve_care: stable invariant subspace has dimension " + std::to_string(stable) +
                             ", expected " + std::to_string(n));

    const Matrix u11 = s.u.topLeftCorner(n, n);
    const Matrix u21 = s.u.bottomLeftCorner(n, n);
    Eigen::PartialPivLU<Matrix> u_lu(u11.adjoint());
    if (u_lu.rcond() < 1e-14) throw SynthesisError("solve_care: stable subspace is not a graph; no stabilizing solution");
    Matrix x = u_lu.solve(u21.adjoint()).adjoint();
    x = hermitian_part(x);

    if (care_residual(a, b, q_weight, r_weight, x) > 1e-8) {
        // one Newton-Kleinman step from the Schur estimate
        const Matrix k = r_lu.solve(b.adjoint() * x);
        const Matrix acl = a - b * k;
        if (is_stable_matrix(acl, TimeDomain::continuous)) {
            const Matrix rhs = hermitian_part(q_weight + k.adjoint() * r_weight * k);
            Matrix refined = hermitian_part(solve_lyapunov_continuous(acl.adjoint(), rhs));
            if (care_residual(a, b, q_weight, r_weight, refined) < care_residual(a, b, q_weight, r_weight, x))
                x = std::move(refined);
        }
    }

    if (field_of(a) == Field::real && field_of(b) == Field::real && field_of(q_weight) == Field::real &&
        field_of(r_weight) == Field::real)
        x = x.real().cast<Complex>();

    if (!is_stable_matrix(a - g * x, TimeDomain::continuous))
        throw SynthesisError("solve_care: closed loop is not stable; (A, B) may not be stabilizable");
    return x;
}

}  // namespace balsel
