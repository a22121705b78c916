#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "balsel/matkernel.hpp"
#include "test_util.hpp"

using namespace balsel;
using testutil::random_matrix;
using testutil::real_matrix;

namespace {

// Pivot order by brute force: at each step, project every unchosen column
// onto the orthogonal complement of the chosen ones and take the largest.
std::vector<Index> argmax_oracle(const Matrix& v) {
    const Index n = v.cols();
    const Index steps = std::min(v.rows(), n);
    std::vector<Index> chosen;
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    for (Index k = 0; k < steps; ++k) {
        Matrix basis(v.rows(), static_cast<Index>(chosen.size()));
        for (std::size_t i = 0; i < chosen.size(); ++i) basis.col(static_cast<Index>(i)) = v.col(chosen[i]);
        Matrix proj = Matrix::Identity(v.rows(), v.rows());
        if (!chosen.empty()) {
            const Matrix qb = basis.householderQr().householderQ() * Matrix::Identity(v.rows(), basis.cols());
            proj -= qb * qb.adjoint();
        }
        Index best = -1;
        double best_norm = -1.0;
        for (Index j = 0; j < n; ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            const double nrm = (proj * v.col(j)).norm();
            if (nrm > best_norm) {
                best_norm = nrm;
                best = j;
            }
        }
        used[static_cast<std::size_t>(best)] = true;
        chosen.push_back(best);
    }
    return chosen;
}

void expect_valid_factorization(const Matrix& v, const PivotedQR& f) {
    const Matrix vp = v * f.permutation();
    EXPECT_LE((vp - f.q_factor * f.r_factor).norm(), 1e-10 * std::max(v.norm(), 1e-300));
    const Index m = f.q_factor.cols();
    EXPECT_LE((f.q_factor.adjoint() * f.q_factor - Matrix::Identity(m, m)).norm(), 1e-12 * m);
    for (Index j = 0; j < f.r_factor.cols(); ++j)
        for (Index i = j + 1; i < f.r_factor.rows(); ++i) EXPECT_EQ(f.r_factor(i, j), Complex(0.0));
    for (std::size_t i = 1; i < f.r_diagonal.size(); ++i)
        EXPECT_LE(f.r_diagonal[i], f.r_diagonal[i - 1] * (1.0 + 1e-12));
    // |R_ii|² ≥ Σ_{j=i..k} |R_jk|² for every column k ≥ i
    const Index steps = std::min(f.r_factor.rows(), f.r_factor.cols());
    for (Index i = 0; i < steps; ++i) {
        const double rii = std::norm(f.r_factor(i, i));
        for (Index k = i; k < f.r_factor.cols(); ++k) {
            double tail = 0.0;
            for (Index j = i; j <= std::min(k, f.r_factor.rows() - 1); ++j) tail += std::norm(f.r_factor(j, k));
            EXPECT_GE(rii * (1.0 + 1e-12) + 1e-300, tail) << "i=" << i << " k=" << k;
        }
    }
}

}  // namespace

TEST(PivotedQR, ForcedOrderFromColumnNorms) {
    const Matrix v = real_matrix({{1, 0, 2}, {0, 1, 0}});
    const PivotedQR f = pivoted_qr(v);
    EXPECT_EQ(f.pivot_order, (std::vector<Index>{2, 1, 0}));
    ASSERT_EQ(f.r_diagonal.size(), 3u);
    EXPECT_NEAR(f.r_diagonal[0], 2.0, 1e-14);
    EXPECT_NEAR(f.r_diagonal[1], 1.0, 1e-14);
    EXPECT_NEAR(f.r_diagonal[2], 0.0, 1e-14);
    expect_valid_factorization(v, f);
}

TEST(PivotedQR, IdentityUsesLowestIndexOnTies) {
    const PivotedQR f = pivoted_qr(Matrix::Identity(3, 3));
    EXPECT_EQ(f.pivot_order, (std::vector<Index>{0, 1, 2}));
}

TEST(PivotedQR, MatchesArgmaxOracleOnComplexInput) {
    const Matrix v = random_matrix(6, 10, 7, true);
    const PivotedQR f = pivoted_qr(v);
    const auto oracle = argmax_oracle(v);
    EXPECT_TRUE(std::equal(oracle.begin(), oracle.end(), f.pivot_order.begin()));
    expect_valid_factorization(v, f);
}

TEST(PivotedQR, MatchesArgmaxOracleOnSeededSweep) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Index rows = 2 + static_cast<Index>(seed % 7);
        const Index cols = 3 + static_cast<Index>((seed * 5) % 17);
        const Matrix v = random_matrix(rows, cols, 1000 + seed, seed % 2 == 1);
        const PivotedQR f = pivoted_qr(v);
        const auto oracle = argmax_oracle(v);
        ASSERT_TRUE(std::equal(oracle.begin(), oracle.end(), f.pivot_order.begin())) << "seed " << seed;
        expect_valid_factorization(v, f);
    }
}

TEST(PivotedQR, PivotOrderIsAPermutation) {
    const Matrix v = random_matrix(4, 9, 3);
    auto order = pivoted_qr(v).pivot_order;
    std::sort(order.begin(), order.end());
    std::vector<Index> expect(9);
    std::iota(expect.begin(), expect.end(), Index{0});
    EXPECT_EQ(order, expect);
}

TEST(PivotedQR, UnpivotedRefactorizationReproducesDiagonal) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Matrix v = random_matrix(7, 5, 50 + seed, true);
        const PivotedQR f = pivoted_qr(v);
        const Matrix vp = v * f.permutation();
        Eigen::HouseholderQR<Matrix> plain(vp);
        const Matrix r = plain.matrixQR().triangularView<Eigen::Upper>();
        for (Index i = 0; i < 5; ++i)
            EXPECT_NEAR(std::abs(r(i, i)), f.r_diagonal[static_cast<std::size_t>(i)], 1e-10 * v.norm());
    }
}

TEST(PivotedQR, LeadingBlockDeterminantEqualsDiagonalProduct) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Matrix v = random_matrix(5, 8, 900 + seed);
        const PivotedQR f = pivoted_qr(v);
        Matrix lead(5, 5);
        for (Index k = 0; k < 5; ++k) lead.col(k) = v.col(f.pivot_order[static_cast<std::size_t>(k)]);
        double prod = 1.0;
        for (Index k = 0; k < 5; ++k) prod *= f.r_diagonal[static_cast<std::size_t>(k)];
        EXPECT_NEAR(std::abs(lead.determinant()), prod, 1e-10 * prod);
    }
}

TEST(PivotedQR, EmptyInputIsRejected) {
    EXPECT_THROW(pivoted_qr(Matrix(0, 0)), DimensionError);
    EXPECT_THROW(pivoted_qr(Matrix(3, 0)), DimensionError);
}

TEST(PivotedQR, ExcludedColumnsAreNeverChosenAndTrail) {
    const Matrix v = random_matrix(3, 8, 11);
    bool excl[8] = {false, true, false, false, true, false, true, false};
    const PivotedQR f = pivoted_qr(v, std::span<const bool>(excl, 8));
    for (Index k = 0; k < 5; ++k) EXPECT_FALSE(excl[f.pivot_order[static_cast<std::size_t>(k)]]);
    EXPECT_EQ(f.pivot_order[5], 1);
    EXPECT_EQ(f.pivot_order[6], 4);
    EXPECT_EQ(f.pivot_order[7], 6);
    EXPECT_LE((v * f.permutation() - f.q_factor * f.r_factor).norm(), 1e-10 * v.norm());

    // choosing among eligible columns only matches the plain factorization of those columns
    std::vector<Index> keep{0, 2, 3, 5, 7};
    Matrix sub(3, 5);
    for (Index j = 0; j < 5; ++j) sub.col(j) = v.col(keep[static_cast<std::size_t>(j)]);
    const PivotedQR g = pivoted_qr(sub);
    for (Index k = 0; k < 3; ++k)
        EXPECT_EQ(f.pivot_order[static_cast<std::size_t>(k)], keep[static_cast<std::size_t>(g.pivot_order[static_cast<std::size_t>(k)])]);
}

TEST(PivotedQR, ReconstructionOnSeededSquareSweep) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Index n = 1 + static_cast<Index>((seed * 7) % 50);
        const Matrix v = random_matrix(n, n, 4000 + seed, seed % 3 == 0);
        const PivotedQR f = pivoted_qr(v);
        EXPECT_LE((v * f.permutation() - f.q_factor * f.r_factor).norm(), 1e-9 * v.norm());
    }
}

TEST(Svd, DiagonalAndZero) {
    const SvdResult d = svd(real_matrix({{3, 0}, {0, 1}}));
    EXPECT_NEAR(d.singular_values(0), 3.0, 1e-14);
    EXPECT_NEAR(d.singular_values(1), 1.0, 1e-14);
    const SvdResult z = svd(Matrix::Zero(3, 2));
    EXPECT_EQ(z.singular_values.size(), 2);
    EXPECT_EQ(z.singular_values.maxCoeff(), 0.0);
}

TEST(Svd, UnitaryFactorsAndEigenOracle) {
    const Matrix a = random_matrix(8, 5, 21);
    const SvdResult s = svd(a);
    EXPECT_LE((s.u.adjoint() * s.u - Matrix::Identity(s.u.cols(), s.u.cols())).norm(), 1e-10);
    EXPECT_LE((s.v.adjoint() * s.v - Matrix::Identity(s.v.cols(), s.v.cols())).norm(), 1e-10);
    Matrix sig = Matrix::Zero(s.u.cols(), s.v.cols());
    for (Index i = 0; i < s.singular_values.size(); ++i) sig(i, i) = s.singular_values(i);
    EXPECT_LE((a - s.u * sig * s.v.adjoint()).norm(), 1e-10 * a.norm());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a.adjoint() * a);
    for (Index i = 0; i < 5; ++i)
        EXPECT_NEAR(s.singular_values(i) * s.singular_values(i), eig.eigenvalues()(4 - i), 1e-10 * a.squaredNorm());
}

TEST(Svd, ReconstructionOnSeededSweep) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Index r = 1 + static_cast<Index>(seed % 50);
        const Index c = 1 + static_cast<Index>((seed * 13) % 50);
        const Matrix a = random_matrix(r, c, 6000 + seed, seed % 2 == 0);
        const SvdResult s = svd(a);
        Matrix sig = Matrix::Zero(s.u.cols(), s.v.cols());
        for (Index i = 0; i < s.singular_values.size(); ++i) sig(i, i) = s.singular_values(i);
        EXPECT_LE((a - s.u * sig * s.v.adjoint()).norm(), 1e-9 * a.norm());
    }
}

TEST(Schur, DiagonalInput) {
    const SchurResult s = schur(real_matrix({{-1, 0}, {0, -2}}));
    EXPECT_NEAR(std::abs(s.t(0, 0) - Complex(-1)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(s.t(1, 1) - Complex(-2)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(s.u(0, 0)), 1.0, 1e-14);
    EXPECT_NEAR(std::abs(s.u(1, 1)), 1.0, 1e-14);
}

TEST(Schur, RotationHasImaginaryPair) {
    const SchurResult s = schur(real_matrix({{0, 1}, {-1, 0}}));
    std::vector<double> im{s.t(0, 0).imag(), s.t(1, 1).imag()};
    std::sort(im.begin(), im.end());
    EXPECT_NEAR(im[0], -1.0, 1e-12);
    EXPECT_NEAR(im[1], 1.0, 1e-12);
    EXPECT_NEAR(s.t(0, 0).real(), 0.0, 1e-12);
}

TEST(Schur, ResidualOnSeededSweep) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Index n = 1 + static_cast<Index>((seed * 11) % 50);
        const Matrix a = random_matrix(n, n, 8000 + seed, seed % 2 == 1);
        const SchurResult s = schur(a);
        EXPECT_LE((a * s.u - s.u * s.t).norm(), 1e-9 * a.norm());
        EXPECT_LE((s.u.adjoint() * s.u - Matrix::Identity(n, n)).norm(), 1e-10 * n);
        for (Index j = 0; j < n; ++j)
            for (Index i = j + 1; i < n; ++i) EXPECT_EQ(s.t(i, j), Complex(0.0));
    }
}

TEST(Schur, ReorderPutsSelectedEigenvaluesFirst) {
    const Matrix a = random_matrix(12, 12, 17, true);
    SchurResult s = schur(a);
    const auto select = [](Complex l) { return l.real() < 0.0; };
    Index expected = 0;
    for (Index i = 0; i < 12; ++i) expected += select(s.t(i, i)) ? 1 : 0;
    const Index placed = reorder_schur(s, select);
    EXPECT_EQ(placed, expected);
    for (Index i = 0; i < 12; ++i) EXPECT_EQ(select(s.t(i, i)), i < placed);
    EXPECT_LE((a * s.u - s.u * s.t).norm(), 1e-10 * a.norm());
    EXPECT_LE((s.u.adjoint() * s.u - Matrix::Identity(12, 12)).norm(), 1e-12 * 12);
    for (Index j = 0; j < 12; ++j)
        for (Index i = j + 1; i < 12; ++i) EXPECT_LE(std::abs(s.t(i, j)), 1e-12 * a.norm());
}

TEST(LogdetAbs, ClosedForms) {
    EXPECT_NEAR(logdet_abs(Matrix::Identity(5, 5)), 0.0, 1e-14);
    EXPECT_NEAR(logdet_abs(real_matrix({{2, 0}, {0, 3}})), std::log(6.0), 1e-14);
    EXPECT_NEAR(logdet_abs(real_matrix({{1.0 / 2, 1.0 / 3}, {1.0 / 3, 1.0 / 4}})), std::log(1.0 / 72), 1e-12);
    EXPECT_NEAR(std::log(1.0 / 72), -4.2767, 1e-4);
}

TEST(LogdetAbs, MatchesLuOracle) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Matrix a = random_matrix(9, 9, 300 + seed, true);
        EXPECT_NEAR(logdet_abs(a), testutil::lu_logdet(a), 1e-10);
    }
}

TEST(LogdetAbs, SingularThrows) {
    EXPECT_THROW(logdet_abs(real_matrix({{1, 2}, {2, 4}})), SingularityError);
    EXPECT_THROW(logdet_abs(Matrix::Zero(3, 3)), SingularityError);
}

TEST(MatrixExponential, ClosedForms) {
    Vector x(1);
    x(0) = 1.0;
    EXPECT_NEAR(std::abs(matrix_exponential_apply(real_matrix({{-1}}), 0.0, x)(0) - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(matrix_exponential_apply(real_matrix({{-1}}), 1.0, x)(0).real(), 0.36788, 1e-5);
    Vector y(2);
    y << 1.0, 1.0;
    const Vector r = matrix_exponential_apply(real_matrix({{-1, 0}, {0, -2}}), 0.5, y);
    EXPECT_NEAR(r(0).real(), std::exp(-0.5), 1e-12);
    EXPECT_NEAR(r(1).real(), std::exp(-1.0), 1e-12);
}

TEST(MatrixExponential, SemigroupProperty) {
    const Matrix a = random_matrix(6, 6, 5) * Complex(0.3);
    const Matrix e1 = matrix_exponential(a, 0.7);
    const Matrix e2 = matrix_exponential(a, 1.4);
    EXPECT_LE(testutil::rel_diff(e1 * e1, e2), 1e-12);
}

TEST(FieldTag, RealIffZeroImaginary) {
    EXPECT_EQ(field_of(Matrix::Identity(2, 2)), Field::real);
    Matrix m = Matrix::Identity(2, 2);
    m(0, 1) = Complex(0.0, 1e-300);
    EXPECT_EQ(field_of(m), Field::complex);
}

TEST(Helpers, NormsAndEigenvalues) {
    const Matrix a = real_matrix({{3, 0}, {0, 4}});
    EXPECT_NEAR(norm2(a), 4.0, 1e-14);
    EXPECT_NEAR(sigma_min(a), 3.0, 1e-14);
    const Vector ev = eigenvalues(a);
    EXPECT_NEAR(std::min(ev(0).real(), ev(1).real()), 3.0, 1e-14);
    const Matrix h = hermitian_part(real_matrix({{0, 2}, {0, 0}}));
    EXPECT_EQ(h(0, 1), Complex(1.0));
    EXPECT_EQ(h(1, 0), Complex(1.0));
}
