#include "balsel/balancing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace balsel {

namespace {

constexpr double kRankTol = 1e-12;

}  // namespace

Matrix gramian_factor(const Matrix& w) {
    const Index n = w.rows();
    if (w.cols() != n) throw DimensionError("gramian_factor: gramian must be square");
    const Matrix h = hermitian_part(w);
    Eigen::LLT<Matrix> llt(h);
    if (llt.info() == Eigen::Success) {
        const Matrix l = llt.matrixL();
        const auto d = l.diagonal().cwiseAbs();
        // accept only a well-conditioned Cholesky factor
        if (d.minCoeff() > std::sqrt(kRankTol) * d.maxCoeff()) return l;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
    if (eig.info() != Eigen::Success) throw NumericError("gramian_factor: eigen decomposition failed");
    const RealVector& lam = eig.eigenvalues();  // ascending
    const double top = lam.size() ? lam(lam.size() - 1) : 0.0;
    Index keep = 0;
    for (Index i = 0; i < lam.size(); ++i)
        if (lam(i) > kRankTol * top && lam(i) > 0.0) ++keep;
    Matrix l(n, keep);
    for (Index j = 0; j < keep; ++j) {
        const Index src = lam.size() - 1 - j;
        l.col(j) = eig.eigenvectors().col(src) * std::sqrt(lam(src));
    }
    return l;
}

Index admissible_rank(const std::vector<double>& hankel) {
    if (hankel.empty() || !(hankel.front() > 0.0)) return 0;
    Index r = 0;
    for (double s : hankel)
        if (s > kRankTol * hankel.front()) ++r;
    return r;
}

BalancedRealization balance(const GramianPair& w, Index r) {
    const Index n = w.w_c.rows();
    if (w.w_o.rows() != n) throw DimensionError("balance: gramians differ in size");
    if (r < 1 || r > n)
        throw DomainError("balance: rank " + std::to_string(r) + " outside [1, " + std::to_string(n) + "]");

    const Matrix lc = gramian_factor(w.w_c);
    const Matrix lo = gramian_factor(w.w_o);
    const SvdResult dec = svd(lo.adjoint() * lc);

    BalancedRealization bal;
    bal.hankel.assign(static_cast<std::size_t>(n), 0.0);
    for (Index i = 0; i < dec.singular_values.size() && i < n; ++i)
        bal.hankel[static_cast<std::size_t>(i)] = dec.singular_values(i);

    const Index max_rank = admissible_rank(bal.hankel);
    if (r > max_rank)
        throw RankError("balance: rank " + std::to_string(r) + " crosses the numerical rank of the gramian product; "
                        "largest admissible rank is " + std::to_string(max_rank),
                        static_cast<std::size_t>(max_rank));

    RealVector inv_sqrt(r);
    for (Index i = 0; i < r; ++i) inv_sqrt(i) = 1.0 / std::sqrt(dec.singular_values(i));
    bal.psi_r = lc * dec.v.leftCols(r) * inv_sqrt.cast<Complex>().asDiagonal();
    bal.phi_r = lo * dec.u.leftCols(r) * inv_sqrt.cast<Complex>().asDiagonal();
    bal.rank = r;

    for (Index j = 0; j < r; ++j) {
        Index arg = 0;
        bal.psi_r.col(j).cwiseAbs().maxCoeff(&arg);
        const Complex lead = bal.psi_r(arg, j);
        if (std::abs(lead) == 0.0) continue;
        const Complex phase = std::conj(lead) / std::abs(lead);
        bal.psi_r.col(j) *= phase;
        bal.phi_r.col(j) *= phase;
        bal.psi_r(arg, j) = std::abs(bal.psi_r(arg, j));
    }
    return bal;
}

ReducedModel truncate(const StateSpaceModel& m, const BalancedRealization& bal) {
    if (bal.psi_r.rows() != m.states() || bal.phi_r.rows() != m.states())
        throw DimensionError("truncate: balancing modes do not match the model");
    ReducedModel out;
    const Matrix phi_adj = bal.phi_r.adjoint();
    out.model = StateSpaceModel(phi_adj * m.a() * bal.psi_r, phi_adj * m.b(), m.c() * bal.psi_r, m.time_domain());
    out.error_bound = truncation_error_bound(bal.hankel, bal.rank);
    return out;
}

double truncation_error_bound(const std::vector<double>& hankel, Index r) {
    if (r < 0 || r > static_cast<Index>(hankel.size()))
        throw DomainError("truncation_error_bound: rank exceeds the number of Hankel values");
    double tail = 0.0;
    for (auto i = static_cast<std::size_t>(r); i < hankel.size(); ++i) tail += hankel[i];
    return 2.0 * tail;
}

}  // namespace balsel
