#include "balsel/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include <Eigen/LU>

namespace balsel {

namespace {

constexpr double kRankTol = 1e-12;

SideSelection select_columns(const Matrix& v, std::span<const bool> excluded, const char* who) {
    const Index r = v.rows();
    const Index candidates = v.cols();
    if (r < 1) throw DimensionError(std::string(who) + ": rank must be at least 1");

    auto mask = std::make_unique<bool[]>(static_cast<std::size_t>(candidates));
    Index eligible = candidates;
    if (!excluded.empty()) {
        if (static_cast<Index>(excluded.size()) != candidates)
            throw DimensionError(std::string(who) + ": exclusion mask has wrong length");
        eligible = 0;
        for (Index j = 0; j < candidates; ++j) {
            mask[static_cast<std::size_t>(j)] = excluded[static_cast<std::size_t>(j)];
            eligible += excluded[static_cast<std::size_t>(j)] ? 0 : 1;
        }
    }
    if (eligible < r) {
        if (!excluded.empty())
            throw FeasibilityError(std::string(who) + ": only " + std::to_string(eligible) +
                                   " candidates remain after exclusion, need " + std::to_string(r));
        throw RankError(std::string(who) + ": " + std::to_string(candidates) + " candidates cannot support rank " +
                            std::to_string(r),
                        static_cast<std::size_t>(candidates));
    }

    const PivotedQR f = pivoted_qr(v, std::span<const bool>(mask.get(), static_cast<std::size_t>(candidates)));
    SideSelection out;
    out.indices.assign(f.pivot_order.begin(), f.pivot_order.begin() + r);
    out.r_diag.assign(f.r_diagonal.begin(), f.r_diagonal.begin() + r);

    const double lead = out.r_diag.front();
    Index numerical_rank = 0;
    for (double d : out.r_diag)
        if (lead > 0.0 && d > kRankTol * lead) ++numerical_rank;
    if (numerical_rank < r)
        throw RankError(std::string(who) + ": sampled modes have numerical rank " + std::to_string(numerical_rank) +
                            " < " + std::to_string(r) + "; largest admissible rank is " +
                            std::to_string(numerical_rank),
                        static_cast<std::size_t>(numerical_rank));
    return out;
}

Matrix gather_rows(const Matrix& m, std::span<const Index> idx) {
    Matrix out(static_cast<Index>(idx.size()), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = m.row(idx[i]);
    return out;
}

Matrix gather_cols(const Matrix& m, std::span<const Index> idx) {
    Matrix out(m.rows(), static_cast<Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out.col(static_cast<Index>(i)) = m.col(idx[i]);
    return out;
}

double tail_sum(const std::vector<double>& hankel, Index r) {
    double s = 0.0;
    for (auto i = static_cast<std::size_t>(r); i < hankel.size(); ++i) s += hankel[i];
    return s;
}

double inverse_norm_constant(Index candidates, Index r) {
    return std::sqrt(static_cast<double>(candidates - r + 1)) * std::exp(0.5 * log_lemma2_growth(r)) / 3.0;
}

double sum_log_hankel(const std::vector<double>& hankel, Index r) {
    double s = 0.0;
    for (Index i = 0; i < r; ++i) s += std::log(hankel[static_cast<std::size_t>(i)]);
    return s;
}

ProjectionOperator make_projection(Matrix basis, Matrix sampler, ProjectionOperator::Side side) {
    ProjectionOperator op;
    op.sampled_rows = sampler * basis;
    op.basis = std::move(basis);
    op.sampler = std::move(sampler);
    op.side = side;
    const SvdResult s = svd(op.sampled_rows);
    const double smin = s.singular_values.size() ? s.singular_values(s.singular_values.size() - 1) : 0.0;
    op.condition = smin > 0.0 ? s.singular_values(0) / smin : std::numeric_limits<double>::infinity();
    return op;
}

}  // namespace

Matrix SelectionResult::sensor_selector(Index p) const {
    Matrix s = Matrix::Zero(static_cast<Index>(gamma.size()), p);
    for (std::size_t i = 0; i < gamma.size(); ++i) s(static_cast<Index>(i), gamma[i]) = 1.0;
    return s;
}

Matrix SelectionResult::actuator_selector(Index q) const {
    Matrix s = Matrix::Zero(q, static_cast<Index>(beta.size()));
    for (std::size_t i = 0; i < beta.size(); ++i) s(beta[i], static_cast<Index>(i)) = 1.0;
    return s;
}

SideSelection select_sensors(const Matrix& c, const Matrix& psi_r, std::span<const bool> excluded) {
    if (c.cols() != psi_r.rows()) throw DimensionError("select_sensors: C and Ψ_r disagree on state dimension");
    return select_columns((c * psi_r).adjoint(), excluded, "select_sensors");
}

SideSelection select_actuators(const Matrix& b, const Matrix& phi_r, std::span<const bool> excluded) {
    if (b.rows() != phi_r.rows()) throw DimensionError("select_actuators: B and Φ_r disagree on state dimension");
    return select_columns(phi_r.adjoint() * b, excluded, "select_actuators");
}

SelectionResult select_collocated(const Matrix& c, const Matrix& b, const Matrix& psi_r, const Matrix& phi_r) {
    SideSelection s = select_sensors(c, psi_r);
    SideSelection a = select_actuators(b, phi_r);
    SelectionResult out;
    out.gamma = std::move(s.indices);
    out.r_diag_sensors = std::move(s.r_diag);
    out.beta = std::move(a.indices);
    out.r_diag_actuators = std::move(a.r_diag);
    return out;
}

SelectionResult select_noncollocated(const Matrix& c, const Matrix& b, const Matrix& psi_r, const Matrix& phi_r,
                                     std::span<const Index> actuator_location) {
    const Index p = c.rows();
    const Index r = psi_r.cols();
    if (!actuator_location.empty() && static_cast<Index>(actuator_location.size()) != b.cols())
        throw DimensionError("select_noncollocated: location map must have one entry per actuator");
    if (p < 2 * r)
        throw FeasibilityError("select_noncollocated: " + std::to_string(p) + " sensors cannot host " +
                               std::to_string(r) + " sensors away from " + std::to_string(r) + " actuators");

    SideSelection act = select_actuators(b, phi_r);
    auto blocked = std::make_unique<bool[]>(static_cast<std::size_t>(p));
    for (Index j : act.indices) {
        const Index loc = actuator_location.empty() ? j : actuator_location[static_cast<std::size_t>(j)];
        if (loc >= 0 && loc < p) blocked[static_cast<std::size_t>(loc)] = true;
    }
    SideSelection sen = select_sensors(c, psi_r, std::span<const bool>(blocked.get(), static_cast<std::size_t>(p)));

    SelectionResult out;
    out.gamma = std::move(sen.indices);
    out.r_diag_sensors = std::move(sen.r_diag);
    out.beta = std::move(act.indices);
    out.r_diag_actuators = std::move(act.r_diag);
    out.collocation_forbidden = true;
    return out;
}

ProjectionOperator sensor_projection(const Matrix& c, const Matrix& psi_r, std::span<const Index> gamma) {
    if (static_cast<Index>(gamma.size()) != psi_r.cols())
        throw DimensionError("sensor_projection: need exactly r sensor indices");
    return make_projection(psi_r, gather_rows(c, gamma), ProjectionOperator::Side::sensor);
}

ProjectionOperator actuator_projection(const Matrix& b, const Matrix& phi_r, std::span<const Index> beta) {
    if (static_cast<Index>(beta.size()) != phi_r.cols())
        throw DimensionError("actuator_projection: need exactly r actuator indices");
    return make_projection(phi_r, gather_cols(b, beta).adjoint(), ProjectionOperator::Side::actuator);
}

Vector project_state(const ProjectionOperator& op, const Vector& x) {
    if (x.size() != op.basis.rows()) throw DimensionError("project_state: state has wrong dimension");
    if (!std::isfinite(op.condition) || op.condition > 1e14)
        throw SingularityError("project_state: sampled rows are singular to working precision");
    Eigen::PartialPivLU<Matrix> lu(op.sampled_rows);
    return op.basis * lu.solve(op.sampler * x);
}

double log_lemma2_growth(Index r) {
    const double rr = static_cast<double>(r);
    // 4^r + 6r - 1 = 4^r (1 + (6r-1) 4^{-r})
    return rr * std::log(4.0) + std::log1p((6.0 * rr - 1.0) * std::exp(-rr * std::log(4.0)));
}

double lemma2_bound(const Matrix& u) {
    const Index p = u.rows();
    const Index r = u.cols();
    if (r < 1 || p < r) throw DimensionError("lemma2_bound: need p >= r >= 1");
    const double smin = sigma_min(u);
    if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
    return inverse_norm_constant(p, r) / smin;
}

double theorem2_bound(const Matrix& c, const Matrix& psi_r, const std::vector<double>& hankel) {
    const Index r = psi_r.cols();
    const double tail = tail_sum(hankel, r);
    if (tail == 0.0) return 0.0;
    const Matrix cpsi = c * psi_r;
    return norm2(c) * norm2(psi_r) * lemma2_bound(cpsi) * 2.0 * tail;
}

double theorem2_bound_sqrt_p(const Matrix& c, const Matrix& psi_r, const std::vector<double>& hankel) {
    const Index p = c.rows();
    const Index r = psi_r.cols();
    const double explicit_form = theorem2_bound(c, psi_r, hankel);
    return explicit_form * std::sqrt(static_cast<double>(p) / static_cast<double>(p - r + 1));
}

double corollary1_bound(const Matrix& b, const Matrix& phi_r, const std::vector<double>& hankel) {
    const Index r = phi_r.cols();
    const double tail = tail_sum(hankel, r);
    if (tail == 0.0) return 0.0;
    const Matrix bphi = b.adjoint() * phi_r;  // q×r; same singular values as Φ_r* B
    return norm2(b) * norm2(phi_r) * lemma2_bound(bphi) * 2.0 * tail;
}

double theorem3_lower_bound(const Matrix& c, const Matrix& psi_r, const std::vector<double>& hankel) {
    const Index p = c.rows();
    const Index r = psi_r.cols();
    const double smin = sigma_min(c * psi_r);
    const double log_ratio = std::log(9.0) + 2.0 * std::log(smin) - std::log(static_cast<double>(p - r + 1)) -
                             log_lemma2_growth(r);
    return static_cast<double>(r) * log_ratio + sum_log_hankel(hankel, r);
}

double corollary2_lower_bound(const Matrix& b, const Matrix& phi_r, const std::vector<double>& hankel) {
    return theorem3_lower_bound(b.adjoint(), phi_r, hankel);
}

double balanced_logdet_sensors(const Matrix& c, const Matrix& psi_r, const std::vector<double>& hankel,
                               std::span<const Index> gamma) {
    const Index r = psi_r.cols();
    RealVector sig(r);
    for (Index i = 0; i < r; ++i) sig(i) = hankel[static_cast<std::size_t>(i)];
    const Matrix chat_psi = gather_rows(c, gamma) * psi_r;
    return logdet_abs(chat_psi * sig.cast<Complex>().asDiagonal() * chat_psi.adjoint());
}

double balanced_logdet_actuators(const Matrix& b, const Matrix& phi_r, const std::vector<double>& hankel,
                                 std::span<const Index> beta) {
    return balanced_logdet_sensors(b.adjoint(), phi_r, hankel, beta);
}

}  // namespace balsel
