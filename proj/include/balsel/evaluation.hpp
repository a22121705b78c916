#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <span>
#include <vector>

#include "balsel/gramian.hpp"
#include "balsel/selection.hpp"
#include "balsel/statespace.hpp"

namespace balsel {

enum class Side { sensor, actuator };

/// C W_c C* (sensor side, p×p) or B* W_o B (actuator side, q×q).
Matrix output_gram(const StateSpaceModel& m, const GramianPair& w, Side side);

/// Log-determinant of a principal submatrix; `singular` marks the -inf
/// sentinel.
struct LogdetValue {
    double value = 0.0;
    bool singular = false;
};

/// logdet_abs of gram[indices, indices]. Singular submatrices yield -inf
/// with the flag set instead of throwing.
LogdetValue logdet_objective(std::span<const Index> indices, const Matrix& gram, Side side);

/// Objectives of one selection against the full gramians.
struct ObjectiveReport {
    double logdet_sensor = 0.0;    // log|Ĉ W_c Ĉ*|
    double logdet_actuator = 0.0;  // log|B̂* W_o B̂|
    double trace_sensor = 0.0;     // tr(Ĉ W_c Ĉ*)
    std::optional<double> h2_closed;
};

ObjectiveReport evaluate_selection(const StateSpaceModel& m, const GramianPair& w, const SelectionResult& sel);

/// log det of gram[idx, idx] through a row-by-row Cholesky. This is the
/// kernel of brute_force, exposed so a reference subset is scored with the
/// exact same arithmetic as the enumeration. Returns -inf when not positive
/// definite.
double cholesky_logdet(const Matrix& gram, std::span<const Index> sorted_indices);

/// Number of k-subsets of n, saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// Default enumeration cap, overridden by the BALSEL_CAP environment variable.
std::uint64_t enumeration_cap();

struct BruteForceResult {
    std::vector<Index> best_indices;
    double best_value = 0.0;
    std::vector<double> values;  // one per subset, lexicographic order
};

/// Exhaustive search over all budget-subsets of gram's rows. Throws SizeError
/// when C(p, budget) exceeds the cap.
BruteForceResult brute_force(const Matrix& gram, Index budget, std::uint64_t cap);

/// 100 × fraction of values strictly below `reference`.
double percentile_of(std::span<const double> values, double reference);

struct EnsembleStats {
    std::vector<double> samples;
    double percentile_of_qr = 0.0;
    double mean = 0.0;
    double std = 0.0;
};

/// Deterministic sampler over index subsets.
class SubsetSampler {
public:
    explicit SubsetSampler(std::uint64_t seed);
    /// Uniform budget-subset of {0..n-1}, sorted ascending.
    std::vector<Index> draw(Index n, Index budget);

private:
    std::uint64_t below(std::uint64_t bound);
    std::mt19937_64 rng_;
};

/// `count` uniformly random budget-subsets scored with cholesky_logdet and
/// compared against `qr_value`.
EnsembleStats random_ensemble(const Matrix& gram, Index budget, Index count, std::uint64_t seed, double qr_value);

/// Joint sensor+actuator objective: each sample draws independent subsets
/// for both sides and sums the two log-determinants.
EnsembleStats random_joint_ensemble(const Matrix& sensor_gram, const Matrix& actuator_gram, Index budget, Index count,
                                    std::uint64_t seed, double qr_value);

/// Mean and (population) standard deviation.
std::pair<double, double> mean_std(std::span<const double> values);

/// Median of a copy of the values.
double median(std::vector<double> values);

}  // namespace balsel
