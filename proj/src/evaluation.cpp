#include "balsel/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>

namespace balsel {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Schur complements at or below this fraction of the largest diagonal entry
// are treated as a rank drop.
constexpr double kPivotTol = 1e-14;

void check_square(const Matrix& gram, const char* who) {
    if (gram.rows() != gram.cols() || gram.rows() == 0)
        throw DimensionError(std::string(who) + ": gram must be square and non-empty");
}

double max_diag(const Matrix& gram) {
    double m = 0.0;
    for (Index i = 0; i < gram.rows(); ++i) m = std::max(m, gram(i, i).real());
    return m;
}

// Row-by-row Cholesky of a growing principal submatrix. Row d of L is held in
// l[d*cap .. d*cap + d], pivots (squared diagonal) in piv[d].
class IncrementalCholesky {
public:
    IncrementalCholesky(const Matrix& gram, Index cap)
        : g_(gram), cap_(cap), l_(static_cast<std::size_t>(cap * cap)), piv_(static_cast<std::size_t>(cap)),
          idx_(static_cast<std::size_t>(cap)), floor_(kPivotTol * max_diag(gram)) {}

    // Appends index i at depth d (rows 0..d-1 already present). Returns the
    // new pivot, or a non-positive value on rank drop.
    double push(Index d, Index i) {
        idx_[static_cast<std::size_t>(d)] = i;
        Complex* row = &l_[static_cast<std::size_t>(d * cap_)];
        double diag = g_(i, i).real();
        for (Index j = 0; j < d; ++j) {
            const Complex* rj = &l_[static_cast<std::size_t>(j * cap_)];
            Complex s = g_(i, idx_[static_cast<std::size_t>(j)]);
            for (Index k = 0; k < j; ++k) s -= row[k] * std::conj(rj[k]);
            row[j] = s / std::sqrt(piv_[static_cast<std::size_t>(j)]);
            diag -= std::norm(row[j]);
        }
        piv_[static_cast<std::size_t>(d)] = diag;
        return diag > floor_ ? diag : 0.0;
    }

private:
    const Matrix& g_;
    Index cap_;
    std::vector<Complex> l_;
    std::vector<double> piv_;
    std::vector<Index> idx_;
    double floor_;
};

}  // namespace

Matrix output_gram(const StateSpaceModel& m, const GramianPair& w, Side side) {
    if (side == Side::sensor) return hermitian_part(m.c() * w.w_c * m.c().adjoint());
    return hermitian_part(m.b().adjoint() * w.w_o * m.b());
}

LogdetValue logdet_objective(std::span<const Index> indices, const Matrix& gram, Side) {
    check_square(gram, "logdet_objective");
    const auto k = static_cast<Index>(indices.size());
    if (k == 0) return {};
    Matrix sub(k, k);
    for (Index a = 0; a < k; ++a) {
        const Index ia = indices[static_cast<std::size_t>(a)];
        if (ia < 0 || ia >= gram.rows()) throw DimensionError("logdet_objective: index out of range");
        for (Index b = 0; b < k; ++b) sub(a, b) = gram(ia, indices[static_cast<std::size_t>(b)]);
    }
    try {
        return {logdet_abs(sub), false};
    } catch (const SingularityError&) {
        return {kNegInf, true};
    }
}

ObjectiveReport evaluate_selection(const StateSpaceModel& m, const GramianPair& w, const SelectionResult& sel) {
    const Matrix gs = output_gram(m, w, Side::sensor);
    const Matrix ga = output_gram(m, w, Side::actuator);
    ObjectiveReport rep;
    rep.logdet_sensor = logdet_objective(sel.gamma, gs, Side::sensor).value;
    rep.logdet_actuator = logdet_objective(sel.beta, ga, Side::actuator).value;
    double tr = 0.0;
    for (Index i : sel.gamma) tr += gs(i, i).real();
    rep.trace_sensor = tr;
    return rep;
}

double cholesky_logdet(const Matrix& gram, std::span<const Index> sorted_indices) {
    check_square(gram, "cholesky_logdet");
    const auto k = static_cast<Index>(sorted_indices.size());
    IncrementalCholesky chol(gram, std::max<Index>(k, 1));
    double acc = 0.0;
    for (Index d = 0; d < k; ++d) {
        const double piv = chol.push(d, sorted_indices[static_cast<std::size_t>(d)]);
        if (!(piv > 0.0)) return kNegInf;
        acc += std::log(piv);
    }
    return acc;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        const std::uint64_t num = n - k + i;
        // r * num / i is exact at every step; guard the multiplication
        if (r > std::numeric_limits<std::uint64_t>::max() / num) return std::numeric_limits<std::uint64_t>::max();
        r = r * num / i;
    }
    return r;
}

std::uint64_t enumeration_cap() {
    if (const char* env = std::getenv("BALSEL_CAP")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0') return v;
    }
    return 1'000'000;
}

BruteForceResult brute_force(const Matrix& gram, Index budget, std::uint64_t cap) {
    check_square(gram, "brute_force");
    const Index p = gram.rows();
    if (budget < 1 || budget > p)
        throw DomainError("brute_force: budget " + std::to_string(budget) + " outside [1, " + std::to_string(p) + "]");
    const std::uint64_t total = binomial(static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(budget));
    if (total > cap)
        throw SizeError("brute_force: C(" + std::to_string(p) + "," + std::to_string(budget) + ") = " +
                        std::to_string(total) + " subsets exceeds the cap of " + std::to_string(cap) +
                        "; use the random ensemble instead or raise BALSEL_CAP");

    BruteForceResult out;
    out.values.reserve(static_cast<std::size_t>(total));
    out.best_value = kNegInf;

    IncrementalCholesky chol(gram, budget);
    std::vector<Index> cur(static_cast<std::size_t>(budget));
    std::vector<double> partial(static_cast<std::size_t>(budget) + 1, 0.0);  // partial[d]: logdet of first d

    // Iterative lexicographic enumeration; depth d holds cur[d].
    Index d = 0;
    cur[0] = 0;
    while (d >= 0) {
        const auto ud = static_cast<std::size_t>(d);
        if (cur[ud] > p - budget + d) {  // exhausted this level
            --d;
            if (d >= 0) ++cur[static_cast<std::size_t>(d)];
            continue;
        }
        const double prev = partial[ud];
        double here = kNegInf;
        if (prev != kNegInf) {
            const double piv = chol.push(d, cur[ud]);
            if (piv > 0.0) here = prev + std::log(piv);
        }
        partial[ud + 1] = here;
        if (d + 1 == budget) {
            out.values.push_back(here);
            if (here > out.best_value || out.best_indices.empty()) {
                out.best_value = here;
                out.best_indices = cur;
            }
            ++cur[ud];
        } else {
            ++d;
            cur[ud + 1] = cur[ud] + 1;
        }
    }
    return out;
}

double percentile_of(std::span<const double> values, double reference) {
    if (values.empty()) return 0.0;
    std::size_t below = 0;
    for (double v : values)
        if (v < reference) ++below;
    return 100.0 * static_cast<double>(below) / static_cast<double>(values.size());
}

SubsetSampler::SubsetSampler(std::uint64_t seed) : rng_(seed) {}

std::uint64_t SubsetSampler::below(std::uint64_t bound) {
    // rejection sampling keeps draws uniform and independent of the stdlib's
    // distribution implementation
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = 0;
    do x = rng_();
    while (x >= limit);
    return x % bound;
}

std::vector<Index> SubsetSampler::draw(Index n, Index budget) {
    if (budget < 0 || budget > n) throw DomainError("SubsetSampler: budget outside [0, n]");
    std::vector<Index> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), Index{0});
    for (Index i = 0; i < budget; ++i) {
        const auto j = static_cast<Index>(below(static_cast<std::uint64_t>(n - i))) + i;
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(budget));
    std::sort(pool.begin(), pool.end());
    return pool;
}

std::pair<double, double> mean_std(std::span<const double> values) {
    if (values.empty()) return {0.0, 0.0};
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / n)};
}

double median(std::vector<double> values) {
    if (values.empty()) throw DomainError("median: no values");
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double hi = values[mid];
    if (values.size() % 2 == 1) return hi;
    const double lo = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

namespace {

EnsembleStats finish_stats(std::vector<double> samples, double qr_value) {
    EnsembleStats st;
    st.percentile_of_qr = percentile_of(samples, qr_value);
    std::tie(st.mean, st.std) = mean_std(samples);
    st.samples = std::move(samples);
    return st;
}

}  // namespace

EnsembleStats random_ensemble(const Matrix& gram, Index budget, Index count, std::uint64_t seed, double qr_value) {
    check_square(gram, "random_ensemble");
    if (count < 1) throw DomainError("random_ensemble: count must be at least 1");
    SubsetSampler sampler(seed);
    std::vector<double> samples;
    samples.reserve(static_cast<std::size_t>(count));
    for (Index s = 0; s < count; ++s) samples.push_back(cholesky_logdet(gram, sampler.draw(gram.rows(), budget)));
    return finish_stats(std::move(samples), qr_value);
}

EnsembleStats random_joint_ensemble(const Matrix& sensor_gram, const Matrix& actuator_gram, Index budget, Index count,
                                    std::uint64_t seed, double qr_value) {
    check_square(sensor_gram, "random_joint_ensemble");
    check_square(actuator_gram, "random_joint_ensemble");
    if (count < 1) throw DomainError("random_joint_ensemble: count must be at least 1");
    SubsetSampler sampler(seed);
    std::vector<double> samples;
    samples.reserve(static_cast<std::size_t>(count));
    for (Index s = 0; s < count; ++s) {
        const double a = cholesky_logdet(sensor_gram, sampler.draw(sensor_gram.rows(), budget));
        const double b = cholesky_logdet(actuator_gram, sampler.draw(actuator_gram.rows(), budget));
        samples.push_back(a + b);
    }
    return finish_stats(std::move(samples), qr_value);
}

}  // namespace balsel
