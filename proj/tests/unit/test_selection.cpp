#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "balsel/balancing.hpp"
#include "balsel/evaluation.hpp"
#include "balsel/models.hpp"
#include "balsel/selection.hpp"
#include "test_util.hpp"

using namespace balsel;
using testutil::random_matrix;
using testutil::real_matrix;

namespace {

Matrix unit_columns(Index n, std::initializer_list<Index> rows) {
    Matrix m = Matrix::Zero(n, static_cast<Index>(rows.size()));
    Index k = 0;
    for (Index r : rows) m(r, k++) = 1.0;
    return m;
}

// Hermitian negative definite A with B = C*, so direct and adjoint modes coincide.
StateSpaceModel symmetric_system(Index n, std::uint64_t seed) {
    const Matrix g = random_matrix(n, n, seed);
    const Matrix a = -(g * g.adjoint() / static_cast<double>(n) + Matrix::Identity(n, n) * Complex(0.1));
    return StateSpaceModel(a, Matrix::Identity(n, n), Matrix::Identity(n, n));
}

struct Plant {
    StateSpaceModel m;
    BalancedRealization bal;
};

Plant setup(Index n, Index p, Index q, Index r, std::uint64_t seed) {
    Plant s{random_stable_system(n, p, q, seed), {}};
    s.bal = balance(compute_gramians(s.m), r);
    return s;
}

Vector random_unit(Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = Complex(nd(rng), nd(rng));
    return v / v.norm();
}

double inverse_norm(const Matrix& m) { return 1.0 / sigma_min(m); }

}  // namespace

TEST(SelectSensors, OnlyNonzeroRows) {
    const SideSelection s = select_sensors(Matrix::Identity(4, 4), unit_columns(4, {1, 3}));
    std::vector<Index> got = s.indices;
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, (std::vector<Index>{1, 3}));
    EXPECT_EQ(s.r_diag.size(), 2u);
}

TEST(SelectSensors, RankOnePicksLargestEntry) {
    Matrix psi(5, 1);
    psi << 0.1, -0.7, 0.3, 0.69, 0.0;
    EXPECT_EQ(select_sensors(Matrix::Identity(5, 5), psi).indices, (std::vector<Index>{1}));
}

TEST(SelectSensors, RankDeficiencyRejected) {
    EXPECT_THROW(select_sensors(unit_columns(4, {0}).adjoint(), unit_columns(4, {0, 1})), RankError);
    Matrix c = Matrix::Zero(3, 4);
    c.row(0) = Matrix::Ones(1, 4);
    c.row(1) = Matrix::Ones(1, 4);
    EXPECT_THROW(select_sensors(c, unit_columns(4, {0, 1})), RankError);
}

TEST(SelectSensors, NearTopOfExhaustiveRanking) {
    const Plant s = setup(8, 8, 8, 3, 31);
    const SideSelection sel = select_sensors(s.m.c(), s.bal.psi_r);
    const Matrix gram = output_gram(s.m, compute_gramians(s.m), Side::sensor);
    const BruteForceResult bf = brute_force(gram, 3, 1000);
    ASSERT_EQ(bf.values.size(), 56u);
    std::vector<Index> sorted = sel.indices;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_GE(percentile_of(bf.values, cholesky_logdet(gram, sorted)), 90.0);
}

TEST(SelectActuators, OnlyNonzeroColumns) {
    const SideSelection s = select_actuators(Matrix::Identity(4, 4), unit_columns(4, {0, 2}));
    std::vector<Index> got = s.indices;
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, (std::vector<Index>{0, 2}));
}

TEST(SelectActuators, SymmetricSystemMatchesSensors) {
    const StateSpaceModel m = symmetric_system(10, 3);
    const BalancedRealization bal = balance(compute_gramians(m), 4);
    EXPECT_EQ(select_sensors(m.c(), bal.psi_r).indices, select_actuators(m.b(), bal.phi_r).indices);
}

TEST(Selection, PivotOrderAndUniqueness) {
    const Plant s = setup(15, 9, 7, 5, 8);
    const SelectionResult sel = select_collocated(s.m.c(), s.m.b(), s.bal.psi_r, s.bal.phi_r);
    ASSERT_EQ(sel.gamma.size(), 5u);
    ASSERT_EQ(sel.beta.size(), 5u);
    EXPECT_EQ(std::set<Index>(sel.gamma.begin(), sel.gamma.end()).size(), 5u);
    EXPECT_EQ(std::set<Index>(sel.beta.begin(), sel.beta.end()).size(), 5u);
    for (Index g : sel.gamma) EXPECT_LT(g, 9);
    for (Index b : sel.beta) EXPECT_LT(b, 7);
    const PivotedQR f = pivoted_qr((s.m.c() * s.bal.psi_r).adjoint());
    EXPECT_TRUE(std::equal(sel.gamma.begin(), sel.gamma.end(), f.pivot_order.begin()));
    EXPECT_LE((sel.sensor_selector(9) * s.m.c() - s.m.c()(sel.gamma, Eigen::all)).norm(), 0.0);
    EXPECT_LE((s.m.b() * sel.actuator_selector(7) - s.m.b()(Eigen::all, sel.beta)).norm(), 0.0);
}

TEST(Selection, GreedyOneStepOptimality) {
    const Plant s = setup(12, 10, 4, 4, 2);
    const Matrix v = (s.m.c() * s.bal.psi_r).adjoint();
    const PivotedQR f = pivoted_qr(v);
    for (Index k = 1; k <= 4; ++k) {
        double vol = 1.0;
        for (Index i = 0; i < k; ++i) vol *= f.r_diagonal[static_cast<std::size_t>(i)];
        for (Index cand = k; cand < 10; ++cand) {
            Matrix cols(v.rows(), k);
            for (Index i = 0; i + 1 < k; ++i) cols.col(i) = v.col(f.pivot_order[static_cast<std::size_t>(i)]);
            cols.col(k - 1) = v.col(f.pivot_order[static_cast<std::size_t>(cand)]);
            const double swapped = std::sqrt(std::abs((cols.adjoint() * cols).determinant()));
            EXPECT_GE(vol * (1 + 1e-10), swapped) << "k=" << k << " cand=" << cand;
        }
    }
}

TEST(Selection, GlobalScalingInvariance) {
    const Plant s = setup(10, 10, 3, 3, 17);
    const auto g1 = select_sensors(Matrix::Identity(10, 10), s.bal.psi_r).indices;
    const auto g2 = select_sensors(Matrix::Identity(10, 10), s.bal.psi_r * Complex(7.5)).indices;
    EXPECT_EQ(g1, g2);
}

TEST(NonCollocated, SymmetricFixture) {
    const StateSpaceModel m = symmetric_system(8, 5);
    const BalancedRealization bal = balance(compute_gramians(m), 3);
    const SelectionResult col = select_collocated(m.c(), m.b(), bal.psi_r, bal.phi_r);
    EXPECT_EQ(std::set<Index>(col.gamma.begin(), col.gamma.end()), std::set<Index>(col.beta.begin(), col.beta.end()));
    const SelectionResult non = select_noncollocated(m.c(), m.b(), bal.psi_r, bal.phi_r);
    EXPECT_TRUE(non.collocation_forbidden);
    for (Index g : non.gamma) EXPECT_EQ(std::count(non.beta.begin(), non.beta.end(), g), 0);
    EXPECT_EQ(non.beta, col.beta);
}

TEST(NonCollocated, LocationMap) {
    const Plant s = setup(10, 10, 3, 2, 4);
    const Index loc[3] = {9, 0, 5};
    const SelectionResult sel = select_noncollocated(s.m.c(), s.m.b(), s.bal.psi_r, s.bal.phi_r, loc);
    for (Index b : sel.beta)
        for (Index g : sel.gamma) EXPECT_NE(g, loc[b]);
}

TEST(NonCollocated, InfeasibleRejected) {
    const Plant s = setup(6, 3, 3, 3, 4);
    EXPECT_THROW(select_noncollocated(s.m.c(), s.m.b(), s.bal.psi_r, s.bal.phi_r), FeasibilityError);
}

TEST(Projection, ReproducesSubspaceAndIdempotent) {
    const Plant s = setup(20, 12, 5, 4, 9);
    const SideSelection sel = select_sensors(s.m.c(), s.bal.psi_r);
    const ProjectionOperator op = sensor_projection(s.m.c(), s.bal.psi_r, sel.indices);
    std::mt19937_64 rng(1);
    const Vector coeffs = random_unit(4, rng);
    const Vector in_span = s.bal.psi_r * coeffs;
    EXPECT_LE((project_state(op, in_span) - in_span).norm(), 1e-8 * in_span.norm());
    const Vector x = random_unit(20, rng);
    const Vector px = project_state(op, x);
    EXPECT_LE((project_state(op, px) - px).norm(), 1e-8 * px.norm());
    EXPECT_GE(op.condition, 1.0);
}

TEST(Projection, FullSelectionIsIdentity) {
    const Plant s = setup(6, 6, 6, 6, 10);
    std::vector<Index> all{0, 1, 2, 3, 4, 5};
    const ProjectionOperator op = sensor_projection(s.m.c(), s.bal.psi_r, all);
    std::mt19937_64 rng(2);
    const Vector x = random_unit(6, rng);
    EXPECT_LE((project_state(op, x) - x).norm(), 1e-8);
}

TEST(Projection, SingularSamplesRejected) {
    const ProjectionOperator op = sensor_projection(Matrix::Identity(4, 4), unit_columns(4, {0, 1}), std::vector<Index>{2, 3});
    EXPECT_THROW(project_state(op, Vector::Ones(4)), SingularityError);
}

TEST(Bounds, TrivialCases) {
    const Plant s = setup(5, 5, 5, 5, 3);
    EXPECT_EQ(theorem2_bound(s.m.c(), s.bal.psi_r, s.bal.hankel), 0.0);
    EXPECT_EQ(corollary1_bound(s.m.b(), s.bal.phi_r, s.bal.hankel), 0.0);
    const Matrix one = real_matrix({{1}});
    EXPECT_EQ(theorem2_bound(one, one, {0.5}), 0.0);
    EXPECT_NEAR(theorem3_lower_bound(one, one, {0.5}), std::log(0.5), 1e-15);
    EXPECT_NEAR(balanced_logdet_sensors(one, one, {0.5}, std::vector<Index>{0}), std::log(0.5), 1e-15);
    EXPECT_NEAR(log_lemma2_growth(3), std::log(64.0 + 17.0), 1e-14);
    EXPECT_TRUE(std::isfinite(log_lemma2_growth(2000)));
}

TEST(Bounds, SymmetricDualsCoincide) {
    const StateSpaceModel m = symmetric_system(10, 6);
    const BalancedRealization bal = balance(compute_gramians(m), 3);
    EXPECT_NEAR(corollary1_bound(m.b(), bal.phi_r, bal.hankel), theorem2_bound(m.c(), bal.psi_r, bal.hankel),
                1e-8 * theorem2_bound(m.c(), bal.psi_r, bal.hankel));
    EXPECT_NEAR(corollary2_lower_bound(m.b(), bal.phi_r, bal.hankel),
                theorem3_lower_bound(m.c(), bal.psi_r, bal.hankel), 1e-8);
}

TEST(Bounds, SqrtPVariantIsLooser) {
    const Plant s = setup(20, 8, 8, 4, 12);
    EXPECT_GE(theorem2_bound_sqrt_p(s.m.c(), s.bal.psi_r, s.bal.hankel),
              theorem2_bound(s.m.c(), s.bal.psi_r, s.bal.hankel));
}

TEST(Bounds, ProjectionChainAndInverseNormBound) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Plant s = setup(20, 10, 10, 4, 600 + seed);
        const SelectionResult sel = select_collocated(s.m.c(), s.m.b(), s.bal.psi_r, s.bal.phi_r);
        const ProjectionOperator op = sensor_projection(s.m.c(), s.bal.psi_r, sel.gamma);
        const double inv = inverse_norm(op.sampled_rows);
        EXPECT_LE(inv, lemma2_bound(s.m.c() * s.bal.psi_r) * (1 + 1e-10));
        const double factor = norm2(s.bal.psi_r) * inv * norm2(s.m.c());
        std::mt19937_64 rng(seed);
        for (int k = 0; k < 1000; ++k) {
            const Vector x = random_unit(20, rng);
            const Vector xstar = s.bal.psi_r * (s.bal.phi_r.adjoint() * x);
            ASSERT_LE((x - project_state(op, x)).norm(), factor * (x - xstar).norm() * (1 + 1e-10) + 1e-14);
        }
    }
}

TEST(Bounds, ProjectionErrorMonteCarloOnImpulseStates) {
    const Plant s = setup(20, 10, 10, 4, 44);
    const SelectionResult sel = select_collocated(s.m.c(), s.m.b(), s.bal.psi_r, s.bal.phi_r);
    const ProjectionOperator pc = sensor_projection(s.m.c(), s.bal.psi_r, sel.gamma);
    const ProjectionOperator pb = actuator_projection(s.m.b(), s.bal.phi_r, sel.beta);
    const double bound_c = theorem2_bound(s.m.c(), s.bal.psi_r, s.bal.hankel);
    const double bound_b = corollary1_bound(s.m.b(), s.bal.phi_r, s.bal.hankel);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> time(0.0, 20.0);
    for (int k = 0; k < 1000; ++k) {
        const double t = time(rng);
        const Vector x = matrix_exponential_apply(s.m.a(), t, Vector(s.m.b() * random_unit(10, rng)));
        ASSERT_LE((x - project_state(pc, x)).norm(), bound_c);
        const Vector z = matrix_exponential_apply(s.m.a().adjoint(), t, Vector(s.m.c().adjoint() * random_unit(10, rng)));
        ASSERT_LE((z - project_state(pb, z)).norm(), bound_b);
    }
}

TEST(Bounds, LowerBoundsNeverExceedAchieved) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const Plant s = setup(15, 8, 8, 1 + static_cast<Index>(seed % 5), 700 + seed);
        const SelectionResult sel = select_collocated(s.m.c(), s.m.b(), s.bal.psi_r, s.bal.phi_r);
        EXPECT_LE(theorem3_lower_bound(s.m.c(), s.bal.psi_r, s.bal.hankel),
                  balanced_logdet_sensors(s.m.c(), s.bal.psi_r, s.bal.hankel, sel.gamma));
        EXPECT_LE(corollary2_lower_bound(s.m.b(), s.bal.phi_r, s.bal.hankel),
                  balanced_logdet_actuators(s.m.b(), s.bal.phi_r, s.bal.hankel, sel.beta));
    }
}
