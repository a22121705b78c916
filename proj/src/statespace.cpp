#include "balsel/statespace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "balsel/gramian.hpp"
#include "schur_transfer.hpp"

namespace balsel {

StateSpaceModel::StateSpaceModel(Matrix a, Matrix b, Matrix c, TimeDomain domain)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), domain_(domain) {
    if (a_.rows() != a_.cols()) throw DimensionError("StateSpaceModel: A must be square");
    if (b_.rows() != a_.rows())
        throw DimensionError("StateSpaceModel: B has " + std::to_string(b_.rows()) + " rows, expected " +
                             std::to_string(a_.rows()));
    if (c_.cols() != a_.rows())
        throw DimensionError("StateSpaceModel: C has " + std::to_string(c_.cols()) + " columns, expected " +
                             std::to_string(a_.rows()));
}

Field StateSpaceModel::field() const {
    if (field_of(a_) == Field::real && field_of(b_) == Field::real && field_of(c_) == Field::real) return Field::real;
    return Field::complex;
}

StateSpaceModel StateSpaceModel::adjoint() const {
    return StateSpaceModel(a_.adjoint(), c_.adjoint(), b_.adjoint(), domain_);
}

FrequencyGrid FrequencyGrid::logspace(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2) throw DomainError("FrequencyGrid: need 0 < lo < hi and count >= 2");
    FrequencyGrid g;
    g.spacing = Spacing::log;
    g.points.resize(count);
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (std::size_t i = 0; i < count; ++i)
        g.points[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    return g;
}

FrequencyGrid FrequencyGrid::linspace(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2) throw DomainError("FrequencyGrid: need 0 < lo < hi and count >= 2");
    FrequencyGrid g;
    g.spacing = Spacing::linear;
    g.points.resize(count);
    for (std::size_t i = 0; i < count; ++i)
        g.points[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    return g;
}

FrequencyGrid FrequencyGrid::standard() { return logspace(1e-3, 1e3, 400); }

bool is_stable_matrix(const Matrix& a, TimeDomain domain) {
    if (a.rows() == 0) return true;
    const Vector ev = eigenvalues(a);
    for (Index i = 0; i < ev.size(); ++i) {
        if (domain == TimeDomain::continuous ? !(ev(i).real() < 0.0) : !(std::abs(ev(i)) < 1.0)) return false;
    }
    return true;
}

bool is_stable(const StateSpaceModel& m) { return is_stable_matrix(m.a(), m.time_domain()); }

Matrix transfer_eval(const StateSpaceModel& m, Complex s) {
    if (m.states() == 0) return Matrix::Zero(m.outputs(), m.inputs());
    const detail::SchurTransfer tf(m);
    return tf.eval(s);
}

Matrix frequency_response(const StateSpaceModel& m, double omega) {
    return transfer_eval(m, detail::frequency_point(m.time_domain(), omega));
}

H2Traces h2_traces(const StateSpaceModel& m, const GramianPair& w) {
    const Index n = m.states();
    if (w.w_c.rows() != n || w.w_o.rows() != n) throw DimensionError("h2_traces: gramian size does not match model");
    return {(m.c() * w.w_c * m.c().adjoint()).trace().real(), (m.b().adjoint() * w.w_o * m.b()).trace().real()};
}

double h2_norm_gramian(const StateSpaceModel& m, const GramianPair& w) {
    if (!is_stable(m)) throw DomainError("h2_norm_gramian: model is not stable");
    const H2Traces t = h2_traces(m, w);
    const double scale = std::max(std::abs(t.controllability), std::abs(t.observability));
    if (scale > 0.0 && std::abs(t.controllability - t.observability) > 1e-8 * scale)
        throw NumericError("h2_norm_gramian: trace forms disagree (" + std::to_string(t.controllability) + " vs " +
                           std::to_string(t.observability) + ")");
    return std::sqrt(std::max(t.controllability, 0.0));
}

namespace {

double trace_gain(const Matrix& g) { return g.squaredNorm(); }

std::vector<double> usable_points(const StateSpaceModel& m, const FrequencyGrid& grid) {
    std::vector<double> pts;
    for (double w : grid.points) {
        if (!(w > 0.0)) continue;
        if (m.time_domain() == TimeDomain::discrete && w > std::numbers::pi) continue;
        pts.push_back(w);
    }
    if (m.time_domain() == TimeDomain::discrete && (pts.empty() || pts.back() < std::numbers::pi))
        pts.push_back(std::numbers::pi);
    return pts;
}

}  // namespace

double h2_norm_frequency(const StateSpaceModel& m, const FrequencyGrid& grid) {
    if (!is_stable(m)) throw DomainError("h2_norm_frequency: model is not stable");
    if (m.states() == 0) return 0.0;
    const detail::SchurTransfer tf(m);
    const std::vector<double> pts = usable_points(m, grid);
    if (pts.empty()) throw DomainError("h2_norm_frequency: empty frequency grid");
    const bool discrete = m.time_domain() == TimeDomain::discrete;
    const bool real = m.field() == Field::real;

    auto half_line = [&](double sign) {
        auto f = [&](double w) { return trace_gain(tf.eval(detail::frequency_point(m.time_domain(), sign * w))); };
        const double f0 = trace_gain(tf.eval(detail::frequency_point(m.time_domain(), 0.0)));
        double prev_w = pts.front();
        double prev_f = f(prev_w);
        double sum = 0.5 * (f0 + prev_f) * prev_w;
        for (std::size_t i = 1; i < pts.size(); ++i) {
            const double fw = f(pts[i]);
            sum += 0.5 * (prev_f + fw) * (pts[i] - prev_w);
            prev_w = pts[i];
            prev_f = fw;
        }
        if (!discrete) sum += prev_f * prev_w;  // ∫_W^∞ K/ω² dω = f(W)·W
        return sum;
    };

    const double positive = half_line(1.0);
    const double negative = real ? positive : half_line(-1.0);
    return std::sqrt((positive + negative) / (2.0 * std::numbers::pi));
}

double hinf_estimate(const StateSpaceModel& m, const FrequencyGrid& grid) {
    if (!is_stable(m)) throw DomainError("hinf_estimate: model is not stable");
    if (m.states() == 0 || m.inputs() == 0 || m.outputs() == 0) return 0.0;
    const detail::SchurTransfer tf(m);
    const bool real = m.field() == Field::real;
    double best = norm2(tf.eval(detail::frequency_point(m.time_domain(), 0.0)));
    for (double w : usable_points(m, grid)) {
        best = std::max(best, norm2(tf.eval(detail::frequency_point(m.time_domain(), w))));
        if (!real) best = std::max(best, norm2(tf.eval(detail::frequency_point(m.time_domain(), -w))));
    }
    return best;
}

ImpulseSnapshots impulse_snapshots(const StateSpaceModel& m, double dt, Index steps) {
    if (!(dt > 0.0)) throw DomainError("impulse_snapshots: dt must be positive");
    if (steps < 1) throw DomainError("impulse_snapshots: need at least one step");
    if (!is_stable(m)) throw DomainError("impulse_snapshots: model is not stable");

    const Index n = m.states();
    const Index q = m.inputs();
    const Index p = m.outputs();
    const bool discrete = m.time_domain() == TimeDomain::discrete;

    const Matrix step = discrete ? m.a() : matrix_exponential(m.a(), dt);
    const Matrix step_adj = step.adjoint();

    ImpulseSnapshots s;
    s.inputs = q;
    s.outputs = p;
    s.dt = dt;
    s.direct.resize(n, q * steps);
    s.adjoint.resize(n, p * steps);
    Matrix x = m.b();
    Matrix z = m.c().adjoint();
    for (Index k = 0; k < steps; ++k) {
        s.direct.middleCols(k * q, q) = x;
        s.adjoint.middleCols(k * p, p) = z;
        if (k + 1 < steps) {
            x = step * x;
            z = step_adj * z;
        }
    }

    s.weights.assign(static_cast<std::size_t>(steps), discrete ? 1.0 : dt);
    if (!discrete && steps > 1) {
        s.weights.front() = 0.5 * dt;
        s.weights.back() = 0.5 * dt;
    }
    return s;
}

StateSpaceModel difference(const StateSpaceModel& g1, const StateSpaceModel& g2) {
    if (g1.inputs() != g2.inputs() || g1.outputs() != g2.outputs())
        throw DimensionError("difference: models must share input and output dimensions");
    if (g1.time_domain() != g2.time_domain()) throw DomainError("difference: time domains differ");
    const Index n1 = g1.states();
    const Index n2 = g2.states();
    Matrix a = Matrix::Zero(n1 + n2, n1 + n2);
    a.topLeftCorner(n1, n1) = g1.a();
    a.bottomRightCorner(n2, n2) = g2.a();
    Matrix b(n1 + n2, g1.inputs());
    b << g1.b(), g2.b();
    Matrix c(g1.outputs(), n1 + n2);
    c << g1.c(), -g2.c();
    return StateSpaceModel(std::move(a), std::move(b), std::move(c), g1.time_domain());
}

}  // namespace balsel
