#include "balsel/matkernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

namespace balsel {

namespace {

// Relative threshold below which a downdated column norm is recomputed from
// scratch rather than trusted.
constexpr double kDowndateRecompute = 1e-7;

}  // namespace

Field field_of(const Matrix& m) {
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i)
            if (m(i, j).imag() != 0.0) return Field::complex;
    return Field::real;
}

Matrix PivotedQR::permutation() const {
    const auto n = static_cast<Index>(pivot_order.size());
    Matrix p = Matrix::Zero(n, n);
    for (Index k = 0; k < n; ++k) p(pivot_order[static_cast<std::size_t>(k)], k) = 1.0;
    return p;
}

PivotedQR pivoted_qr(const Matrix& v) {
    const auto n = static_cast<std::size_t>(v.cols());
    auto none = std::make_unique<bool[]>(n);  // value-initialized to false
    return pivoted_qr(v, std::span<const bool>(none.get(), n));
}

PivotedQR pivoted_qr(const Matrix& v, std::span<const bool> excluded) {
    const Index m = v.rows();
    const Index n = v.cols();
    if (m == 0 || n == 0) throw DimensionError("pivoted_qr: empty matrix");
    if (static_cast<Index>(excluded.size()) != n)
        throw DimensionError("pivoted_qr: exclusion mask length " + std::to_string(excluded.size()) +
                             " does not match " + std::to_string(n) + " columns");

    Matrix work = v;
    std::vector<Index> perm(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) perm[static_cast<std::size_t>(j)] = j;
    std::vector<char> blocked(excluded.begin(), excluded.end());

    // squared residual norm (running) and its value at the last recomputation
    std::vector<double> resid(static_cast<std::size_t>(n));
    std::vector<double> ref(static_cast<std::size_t>(n));

    // argmax of the residual among eligible columns, lowest original index on
    // ties. Tracked while the norms are updated, so no separate scan is needed.
    Index best = -1;
    double best_norm = -1.0;
    Index best_orig = std::numeric_limits<Index>::max();
    auto reset_best = [&] {
        best = -1;
        best_norm = -1.0;
        best_orig = std::numeric_limits<Index>::max();
    };
    auto consider = [&](Index j) {
        const auto uj = static_cast<std::size_t>(j);
        if (blocked[uj]) return;
        const double r = resid[uj];
        if (r > best_norm || (r == best_norm && perm[uj] < best_orig)) {
            best = j;
            best_norm = r;
            best_orig = perm[uj];
        }
    };

    for (Index j = 0; j < n; ++j) {
        resid[static_cast<std::size_t>(j)] = work.col(j).squaredNorm();
        ref[static_cast<std::size_t>(j)] = resid[static_cast<std::size_t>(j)];
        consider(j);
    }

    // row k of column j is final: remove it from the residual, recomputing
    // once cancellation has eaten most of the reference norm
    auto downdate = [&](Index k, Index j, double rkj2) {
        const auto uj = static_cast<std::size_t>(j);
        if (resid[uj] != 0.0) {
            resid[uj] -= rkj2;
            if (resid[uj] <= kDowndateRecompute * ref[uj]) {
                resid[uj] = k + 1 < m ? work.col(j).tail(m - k - 1).squaredNorm() : 0.0;
                ref[uj] = resid[uj];
            }
        }
        consider(j);
    };

    // Columns [from, n) in ascending original index, eligible ones first when
    // `eligible_first`. perm is a permutation, so a walk over original indices
    // replaces a sort.
    auto trailing_order = [&](Index from, bool eligible_first) {
        std::vector<Index> pos(static_cast<std::size_t>(n), -1);
        for (Index j = from; j < n; ++j) pos[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])] = j;
        std::vector<Index> idx;
        idx.reserve(static_cast<std::size_t>(n - from));
        const int passes = eligible_first ? 2 : 1;
        for (int pass = 0; pass < passes; ++pass)
            for (Index o = 0; o < n; ++o) {
                const Index j = pos[static_cast<std::size_t>(o)];
                if (j < 0) continue;
                if (eligible_first && (blocked[static_cast<std::size_t>(j)] != 0) != (pass == 1)) continue;
                idx.push_back(j);
            }
        return idx;
    };

    Matrix q = Matrix::Identity(m, m);
    const Index steps = std::min(m, n);
    PivotedQR out;
    out.r_diagonal.assign(static_cast<std::size_t>(n), 0.0);

    Index allowed = 0;
    for (char b : blocked) allowed += b ? 0 : 1;
    const Index pivot_steps = std::min(steps, allowed);

    for (Index k = 0; k < steps; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        if (k < pivot_steps) {
            if (best != k) {
                work.col(k).swap(work.col(best));
                std::swap(perm[uk], perm[static_cast<std::size_t>(best)]);
                std::swap(resid[uk], resid[static_cast<std::size_t>(best)]);
                std::swap(ref[uk], ref[static_cast<std::size_t>(best)]);
                std::swap(blocked[uk], blocked[static_cast<std::size_t>(best)]);
            }
        } else if (k == pivot_steps) {
            // only excluded columns remain; keep them in ascending original order
            const std::vector<Index> idx = trailing_order(k, false);
            const Matrix cols = work.rightCols(n - k);
            const std::vector<Index> p0 = perm;
            const std::vector<double> r0 = resid, f0 = ref;
            for (std::size_t i = 0; i < idx.size(); ++i) {
                const auto src = static_cast<std::size_t>(idx[i]);
                const auto dst = uk + i;
                work.col(static_cast<Index>(dst)) = cols.col(idx[i] - k);
                perm[dst] = p0[src];
                resid[dst] = r0[src];
                ref[dst] = f0[src];
                blocked[dst] = 1;
            }
        }
        reset_best();

        // Householder reflector zeroing work(k+1:m, k)
        auto x = work.col(k).tail(m - k);
        const double xnorm = x.norm();
        bool applied = false;
        if (xnorm > 0.0) {
            const Complex x0 = x(0);
            const Complex phase = std::abs(x0) > 0.0 ? x0 / std::abs(x0) : Complex(1.0, 0.0);
            const Complex alpha = -phase * xnorm;
            Vector h = x;
            h(0) -= alpha;
            const double hh = h.squaredNorm();
            if (hh > 0.0) {
                // apply I - 2 h h*/h*h column by column, fused with the downdate
                // (short columns: this beats a GEMV plus a rank-1 update)
                const double tau = 2.0 / hh;
                const Index len = m - k;
                const double* hp = reinterpret_cast<const double*>(h.data());
                for (Index j = k + 1; j < n; ++j) {
                    double* c = reinterpret_cast<double*>(work.data() + j * m + k);
                    double sr = 0.0, si = 0.0;
                    for (Index i = 0; i < len; ++i) {
                        sr += hp[2 * i] * c[2 * i] + hp[2 * i + 1] * c[2 * i + 1];
                        si += hp[2 * i] * c[2 * i + 1] - hp[2 * i + 1] * c[2 * i];
                    }
                    sr *= tau;
                    si *= tau;
                    for (Index i = 0; i < len; ++i) {
                        c[2 * i] -= sr * hp[2 * i] - si * hp[2 * i + 1];
                        c[2 * i + 1] -= sr * hp[2 * i + 1] + si * hp[2 * i];
                    }
                    downdate(k, j, c[0] * c[0] + c[1] * c[1]);
                }
                auto qb = q.rightCols(m - k);
                const Vector qw = qb * h;
                qb.noalias() -= tau * qw * h.adjoint();
                applied = true;
            }
            work(k, k) = alpha;
            work.col(k).tail(m - k - 1).setZero();
        }
        if (!applied)
            for (Index j = k + 1; j < n; ++j) downdate(k, j, std::norm(work(k, j)));
        out.r_diagonal[uk] = std::abs(work(k, k));
    }

    // Beyond min(m, n) steps the residual space is empty: remaining columns
    // all have zero residual and follow in ascending original index order,
    // excluded ones last. R is assembled directly in that order.
    const std::vector<Index> tail = n > steps ? trailing_order(steps, true) : std::vector<Index>{};
    out.r_factor.resize(m, n);
    for (Index k = 0; k < steps; ++k) {
        out.r_factor.col(k).head(k + 1) = work.col(k).head(k + 1);
        out.r_factor.col(k).tail(m - k - 1).setZero();
    }
    out.pivot_order.assign(perm.begin(), perm.begin() + steps);
    for (std::size_t i = 0; i < tail.size(); ++i) {
        out.r_factor.col(steps + static_cast<Index>(i)) = work.col(tail[i]);
        out.pivot_order.push_back(perm[static_cast<std::size_t>(tail[i])]);
    }
    out.q_factor = std::move(q);
    return out;
}

SvdResult svd(const Matrix& a) {
    if (a.size() == 0) return {Matrix::Identity(a.rows(), a.rows()), RealVector(), Matrix::Identity(a.cols(), a.cols())};
    Eigen::BDCSVD<Matrix> dec(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return {dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

SchurResult schur(const Matrix& a) {
    if (a.rows() != a.cols()) throw DimensionError("schur: matrix must be square");
    if (a.rows() == 0) return {Matrix(0, 0), Matrix(0, 0)};
    Eigen::ComplexSchur<Matrix> dec(a.rows());
    dec.setMaxIterations(100 * a.rows());
    dec.compute(a, true);
    if (dec.info() != Eigen::Success)
        throw NumericError("schur: QR iteration did not converge");
    return {dec.matrixU(), dec.matrixT()};
}

void swap_schur_adjacent(SchurResult& s, Index k) {
    const Index n = s.t.rows();
    const Complex a = s.t(k, k);
    const Complex c = s.t(k + 1, k + 1);
    const Complex b = s.t(k, k + 1);
    if (a == c) return;
    // eigenvector of the 2x2 block for eigenvalue c becomes the first basis vector
    Complex v0 = b;
    Complex v1 = c - a;
    const double nv = std::hypot(std::abs(v0), std::abs(v1));
    v0 /= nv;
    v1 /= nv;
    Eigen::Matrix2cd g;
    g << v0, -std::conj(v1), v1, std::conj(v0);

    s.t.block(k, k, 2, n - k) = g.adjoint() * s.t.block(k, k, 2, n - k);
    s.t.block(0, k, k + 2, 2) = s.t.block(0, k, k + 2, 2) * g;
    s.u.middleCols(k, 2) = s.u.middleCols(k, 2) * g;
    s.t(k, k) = c;
    s.t(k + 1, k + 1) = a;
    s.t(k + 1, k) = 0.0;
}

double logdet_abs(const Matrix& a) {
    if (a.rows() != a.cols() || a.rows() == 0) throw DimensionError("logdet_abs: matrix must be square and non-empty");
    const PivotedQR f = pivoted_qr(a);
    const double lead = f.r_diagonal.front();
    double sum = 0.0;
    for (double d : f.r_diagonal) {
        if (!(d >= 1e-14 * lead) || d == 0.0) throw SingularityError("logdet_abs: matrix is singular to working precision");
        sum += std::log(d);
    }
    return sum;
}

Matrix matrix_exponential(const Matrix& a, double t) {
    if (a.rows() != a.cols()) throw DimensionError("matrix_exponential: matrix must be square");
    if (t == 0.0) return Matrix::Identity(a.rows(), a.cols());
    const Matrix at = a * t;
    return at.exp();
}

Vector matrix_exponential_apply(const Matrix& a, double t, const Vector& x) {
    if (a.cols() != x.size()) throw DimensionError("matrix_exponential_apply: size mismatch");
    if (t < 0.0) throw DomainError("matrix_exponential_apply: t must be non-negative");
    if (t == 0.0) return x;
    return matrix_exponential(a, t) * x;
}

double norm2(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    Eigen::BDCSVD<Matrix> dec(a);
    return dec.singularValues()(0);
}

double sigma_min(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    Eigen::BDCSVD<Matrix> dec(a);
    return dec.singularValues()(dec.singularValues().size() - 1);
}

Vector eigenvalues(const Matrix& a) {
    if (a.rows() != a.cols()) throw DimensionError("eigenvalues: matrix must be square");
    if (a.rows() == 0) return Vector();
    Eigen::ComplexSchur<Matrix> dec(a.rows());
    dec.setMaxIterations(100 * a.rows());
    dec.compute(a, false);
    if (dec.info() != Eigen::Success) throw NumericError("eigenvalues: QR iteration did not converge");
    return dec.matrixT().diagonal();
}

Matrix hermitian_part(const Matrix& a) { return 0.5 * (a + a.adjoint()); }

}  // namespace balsel
