#include "balsel/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace balsel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix identity_times(Index n, double s) { return Matrix::Identity(n, n) * Complex(s, 0.0); }

Matrix gather_cols(const Matrix& m, std::span<const Index> idx) {
    Matrix out(m.rows(), static_cast<Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out.col(static_cast<Index>(i)) = m.col(idx[i]);
    return out;
}

Matrix gather_rows(const Matrix& m, std::span<const Index> idx) {
    Matrix out(static_cast<Index>(idx.size()), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = m.row(idx[i]);
    return out;
}

Matrix gather(const Matrix& m, std::span<const Index> rows, std::span<const Index> cols) {
    return gather_cols(gather_rows(m, rows), cols);
}

// Hermitian PSD square root.
Matrix psd_sqrt(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(hermitian_part(m));
    RealVector lam = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * lam.cast<Complex>().asDiagonal() * eig.eigenvectors().adjoint();
}

void check_indices(std::span<const Index> idx, Index bound, const char* who) {
    for (Index i : idx)
        if (i < 0 || i >= bound) throw DimensionError(std::string(who) + ": index out of range");
}

}  // namespace

StateSpaceModel random_stable_system(Index n, Index p, Index q, std::uint64_t seed, TimeDomain domain) {
    if (n < 1 || p < 1 || q < 1) throw DimensionError("random_stable_system: n, p, q must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto fill = [&](Index r, Index c) {
        Matrix m(r, c);
        for (Index j = 0; j < c; ++j)
            for (Index i = 0; i < r; ++i) m(i, j) = normal(rng);
        return m;
    };
    Matrix g = fill(n, n);
    Matrix b = fill(n, q);
    Matrix c = fill(p, n);

    const Vector lam = eigenvalues(g);
    Matrix a;
    if (domain == TimeDomain::continuous) {
        const double lo = lam.real().minCoeff();
        const double hi = lam.real().maxCoeff();
        if (hi - lo < 1e-12) {
            a = g - identity_times(n, lo + 1.0);
        } else {
            const double alpha = 1.95 / (hi - lo);
            a = alpha * g - identity_times(n, 2.0 + alpha * lo);
        }
    } else {
        std::uniform_real_distribution<double> uni(0.5, 1.0);
        const double target = 0.95 * uni(rng);
        const double rho = lam.cwiseAbs().maxCoeff();
        a = rho > 0.0 ? Matrix(g * Complex(target / rho, 0.0)) : g;
    }
    return StateSpaceModel(std::move(a), std::move(b), std::move(c), domain);
}

RealVector hermite_roots(Index n) {
    if (n < 1) throw DimensionError("hermite_roots: n must be positive");
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (Index k = 1; k < n; ++k) jac(k - 1, k) = jac(k, k - 1) = std::sqrt(static_cast<double>(k) / 2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jac, Eigen::EigenvaluesOnly);
    RealVector x = eig.eigenvalues();
    // the spectrum is symmetric; enforce it exactly
    for (Index i = 0; i < n / 2; ++i) {
        const double s = 0.5 * (x(n - 1 - i) - x(i));
        x(i) = -s;
        x(n - 1 - i) = s;
    }
    if (n % 2 == 1) x(n / 2) = 0.0;
    return x;
}

DiffMatrices differentiation_matrices(const RealVector& x, bool weighted) {
    const Index n = x.size();
    if (n < 2) throw DimensionError("differentiation_matrices: need at least two nodes");
    for (Index i = 1; i < n; ++i)
        if (!(x(i) > x(i - 1))) throw DomainError("differentiation_matrices: nodes must be strictly increasing");

    // c_k = w(x_k) Π_{j≠k}(x_k - x_j), kept as sign and log magnitude
    RealVector logc(n);
    std::vector<double> sign(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k) {
        double s = weighted ? -0.5 * x(k) * x(k) : 0.0;
        for (Index j = 0; j < n; ++j)
            if (j != k) s += std::log(std::abs(x(k) - x(j)));
        logc(k) = s;
        sign[static_cast<std::size_t>(k)] = ((n - 1 - k) % 2 == 0) ? 1.0 : -1.0;
    }
    Eigen::MatrixXd cr(n, n), z = Eigen::MatrixXd::Zero(n, n);
    for (Index k = 0; k < n; ++k)
        for (Index j = 0; j < n; ++j) {
            cr(k, j) = sign[static_cast<std::size_t>(k)] * sign[static_cast<std::size_t>(j)] *
                       std::exp(logc(k) - logc(j));
            if (j != k) z(k, j) = 1.0 / (x(k) - x(j));
        }

    // w'/w and w''/w
    RealVector beta1 = RealVector::Zero(n), beta2 = RealVector::Zero(n);
    if (weighted) {
        beta1 = -x;
        beta2 = x.array().square() - 1.0;
    }

    // Recursion of Welfert for the diagonal, as in the standard poldif scheme.
    Eigen::MatrixXd y = Eigen::MatrixXd::Ones(n, n);  // running sums per column
    Eigen::MatrixXd d = Eigen::MatrixXd::Identity(n, n);
    DiffMatrices out;
    for (int ell = 1; ell <= 2; ++ell) {
        const RealVector& b = ell == 1 ? beta1 : beta2;
        Eigen::MatrixXd ny(n, n);
        for (Index k = 0; k < n; ++k) {
            double acc = b(k);
            ny(0, k) = acc;
            Index row = 1;
            for (Index j = 0; j < n; ++j) {
                if (j == k) continue;
                acc += ell * y(row - 1, k) * z(k, j);
                ny(row, k) = acc;
                ++row;
            }
        }
        y = ny;
        Eigen::MatrixXd nd(n, n);
        for (Index k = 0; k < n; ++k)
            for (Index j = 0; j < n; ++j)
                nd(k, j) = j == k ? y(n - 1, k) : ell * z(k, j) * (cr(k, j) * d(k, k) - d(k, j));
        d = nd;
        (ell == 1 ? out.d1 : out.d2) = d;
    }
    return out;
}

DiffMatrices hermite_differentiation(Index n, double scale, RealVector* grid) {
    if (!(scale > 0.0)) throw DomainError("hermite_differentiation: scale must be positive");
    const RealVector roots = hermite_roots(n);
    DiffMatrices dm = differentiation_matrices(roots, true);
    dm.d1 *= scale;
    dm.d2 *= scale * scale;
    if (grid) *grid = roots / scale;
    return dm;
}

RealVector trapezoid_weights(const RealVector& grid) {
    const Index n = grid.size();
    RealVector w = RealVector::Zero(n);
    for (Index i = 0; i + 1 < n; ++i) {
        const double h = grid(i + 1) - grid(i);
        if (!(h > 0.0)) throw DomainError("trapezoid_weights: grid must be strictly increasing");
        w(i) += 0.5 * h;
        w(i + 1) += 0.5 * h;
    }
    return w;
}

void GinzburgLandauParams::validate() const {
    if (n < 4) throw DomainError("GinzburgLandauParams: n must be at least 4");
    if (!(kernel_width > 0.0)) throw DomainError("GinzburgLandauParams: kernel_width must be positive");
    if (!(grid_scale > 0.0)) throw DomainError("GinzburgLandauParams: grid_scale must be positive");
    if (!(r_weight > 0.0) || !(v_cov > 0.0) || q_weight < 0.0 || w_cov < 0.0)
        throw DomainError("GinzburgLandauParams: weights must be non-negative and R, V positive");
}

Matrix gaussian_kernels(const RealVector& grid, double width) {
    if (!(width > 0.0)) throw DomainError("gaussian_kernels: width must be positive");
    const Index n = grid.size();
    const double denom = std::sqrt(2.0) * width;
    Matrix k(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) {
            const double d = grid(i) - grid(j);
            k(i, j) = std::exp(-d * d / denom);
        }
    return k;
}

GinzburgLandauPlant ginzburg_landau_plant(const GinzburgLandauParams& params) {
    params.validate();
    GinzburgLandauPlant pl;
    const DiffMatrices dm = hermite_differentiation(params.n, params.grid_scale, &pl.grid);
    const Index n = params.n;
    pl.a = -params.nu * dm.d1.cast<Complex>() + params.beta_diff * dm.d2.cast<Complex>();
    for (Index i = 0; i < n; ++i) {
        const double xi = pl.grid(i);
        pl.a(i, i) += params.mu0 + params.mu1 * xi + params.mu2 * xi * xi;
    }
    pl.trap_weights = trapezoid_weights(pl.grid);
    pl.b2 = gaussian_kernels(pl.grid, params.kernel_width);
    pl.c2 = pl.b2.transpose() * pl.trap_weights.cast<Complex>().asDiagonal();
    return pl;
}

void gl_weights(const GinzburgLandauParams& p, Index n, Matrix& q_hat, Matrix& r_hat, Matrix& w_cov, Matrix& v_cov) {
    q_hat = identity_times(n, p.q_weight);
    r_hat = identity_times(n, p.r_weight);
    w_cov = identity_times(n, p.swap_noise ? p.v_cov : p.w_cov);
    v_cov = identity_times(n, p.swap_noise ? p.w_cov : p.v_cov);
}

LQGController lqg_synthesize(const Matrix& a, const Matrix& b2, const Matrix& c2, const Matrix& q_hat,
                             const Matrix& r_hat, const Matrix& w_cov, const Matrix& v_cov,
                             bool require_stable_controller) {
    const Index n = a.rows();
    if (a.cols() != n || b2.rows() != n || c2.cols() != n || q_hat.rows() != n || w_cov.rows() != n ||
        r_hat.rows() != b2.cols() || v_cov.rows() != c2.rows())
        throw DimensionError("lqg_synthesize: inconsistent dimensions");

    LQGController k;
    k.q_hat = q_hat;
    k.r_hat = r_hat;
    k.w_cov = w_cov;
    k.v_cov = v_cov;
    try {
        k.x_care = solve_care(a, b2, q_hat, r_hat);
        k.y_care = solve_care(a.adjoint(), c2.adjoint(), w_cov, v_cov);
    } catch (const SynthesisError&) {
        throw;
    } catch (const Error& e) {
        throw SynthesisError(std::string("lqg_synthesize: ") + e.what());
    }
    k.f_gain = r_hat.partialPivLu().solve(b2.adjoint() * k.x_care);
    k.l_gain = v_cov.partialPivLu().solve(c2 * k.y_care).adjoint();  // Y C2* V⁻¹, V Hermitian

    if (!is_stable_matrix(a - b2 * k.f_gain, TimeDomain::continuous))
        throw SynthesisError("lqg_synthesize: regulator loop A - B2 F is not stable");
    if (!is_stable_matrix(a - k.l_gain * c2, TimeDomain::continuous))
        throw SynthesisError("lqg_synthesize: estimator loop A - L C2 is not stable");
    Matrix ak = a - b2 * k.f_gain - k.l_gain * c2;
    if (require_stable_controller && !is_stable_matrix(ak, TimeDomain::continuous))
        throw SynthesisError("lqg_synthesize: controller A - B2 F - L C2 is not stable");
    k.controller = StateSpaceModel(std::move(ak), k.l_gain, -k.f_gain, TimeDomain::continuous);
    return k;
}

ClosedLoop closed_loop_assemble(const GinzburgLandauPlant& plant, const LQGController& full,
                                std::span<const Index> gamma, std::span<const Index> beta, RestrictionMode mode) {
    const Index n = plant.a.rows();
    check_indices(gamma, plant.c2.rows(), "closed_loop_assemble");
    check_indices(beta, plant.b2.cols(), "closed_loop_assemble");
    const auto rs = static_cast<Index>(gamma.size());
    const auto ra = static_cast<Index>(beta.size());

    const Matrix b2s = gather_cols(plant.b2, beta);
    const Matrix c2s = gather_rows(plant.c2, gamma);
    const Matrix r_s = gather(full.r_hat, beta, beta);
    const Matrix v_s = gather(full.v_cov, gamma, gamma);

    ClosedLoop cl;
    if (rs == 0 && ra == 0) {
        cl.a_k = Matrix::Zero(n, n);
        cl.b_k = Matrix::Zero(n, 0);
        cl.c_k = Matrix::Zero(0, n);
    } else if (mode == RestrictionMode::resynthesize) {
        const LQGController ks = lqg_synthesize(plant.a, b2s, c2s, full.q_hat, r_s, full.w_cov, v_s, false);
        cl.a_k = ks.controller.a();
        cl.b_k = ks.controller.b();
        cl.c_k = ks.controller.c();
    } else {
        cl.b_k = gather_cols(full.l_gain, gamma);
        cl.c_k = -gather_rows(full.f_gain, beta);
        cl.a_k = plant.a + b2s * cl.c_k - cl.b_k * c2s;
    }

    // states [x; x̂], inputs [d; n], outputs [Q̂^{1/2} x; R̂^{1/2} u]
    Matrix acl(2 * n, 2 * n);
    acl << plant.a, b2s * cl.c_k, cl.b_k * c2s, cl.a_k;
    Matrix bcl = Matrix::Zero(2 * n, n + rs);
    bcl.topLeftCorner(n, n) = psd_sqrt(full.w_cov);
    if (rs > 0) bcl.bottomRightCorner(n, rs) = cl.b_k * psd_sqrt(v_s);
    Matrix ccl = Matrix::Zero(n + ra, 2 * n);
    ccl.topLeftCorner(n, n) = psd_sqrt(full.q_hat);
    if (ra > 0) ccl.bottomRightCorner(ra, n) = psd_sqrt(r_s) * cl.c_k;

    cl.stable = is_stable_matrix(acl, TimeDomain::continuous);
    cl.model = StateSpaceModel(std::move(acl), std::move(bcl), std::move(ccl), TimeDomain::continuous);
    return cl;
}

double closed_loop_h2(const ClosedLoop& loop) {
    if (!loop.stable) return kInf;
    const GramianPair w = compute_gramians(loop.model);
    const H2Traces t = h2_traces(loop.model, w);
    return std::sqrt(std::max(t.controllability, 0.0));
}

double lqg_h2_trace_formula(const LQGController& k) {
    const double a = (k.x_care * k.w_cov).trace().real();
    const double b = (k.r_hat * k.f_gain * k.y_care * k.f_gain.adjoint()).trace().real();
    return std::sqrt(std::max(a + b, 0.0));
}

GainGrid lqg_gain_grid(const ClosedLoop& loop, const RealVector& grid, std::span<const Index> gamma,
                       std::span<const Index> beta, const FrequencyGrid& omegas) {
    if (loop.b_k.cols() != static_cast<Index>(gamma.size()) || loop.c_k.rows() != static_cast<Index>(beta.size()))
        throw DimensionError("lqg_gain_grid: index sets do not match the controller");
    std::vector<std::size_t> sp(gamma.size()), ap(beta.size());
    std::iota(sp.begin(), sp.end(), std::size_t{0});
    std::iota(ap.begin(), ap.end(), std::size_t{0});
    std::stable_sort(sp.begin(), sp.end(), [&](std::size_t i, std::size_t j) { return grid(gamma[i]) < grid(gamma[j]); });
    std::stable_sort(ap.begin(), ap.end(), [&](std::size_t i, std::size_t j) { return grid(beta[i]) < grid(beta[j]); });

    GainGrid out;
    for (std::size_t i : sp) out.sensors.push_back(gamma[i]);
    for (std::size_t i : ap) out.actuators.push_back(beta[i]);
    const StateSpaceModel k(loop.a_k, loop.b_k, loop.c_k, TimeDomain::continuous);
    for (double w : omegas.points) {
        const Matrix g = transfer_eval(k, Complex(0.0, w));
        Eigen::MatrixXd db(static_cast<Index>(ap.size()), static_cast<Index>(sp.size()));
        for (std::size_t j = 0; j < ap.size(); ++j)
            for (std::size_t s = 0; s < sp.size(); ++s)
                db(static_cast<Index>(j), static_cast<Index>(s)) =
                    20.0 * std::log10(std::abs(g(static_cast<Index>(ap[j]), static_cast<Index>(sp[s]))));
        out.omegas.push_back(w);
        out.gains_db.push_back(std::move(db));
    }
    return out;
}

GLPipeline gl_prepare(const GinzburgLandauParams& params) {
    GLPipeline pipe;
    pipe.params = params;
    pipe.plant = ginzburg_landau_plant(params);
    Matrix q, r, w, v;
    gl_weights(params, params.n, q, r, w, v);
    pipe.full = lqg_synthesize(pipe.plant.a, pipe.plant.b2, pipe.plant.c2, q, r, w, v, true);
    pipe.controller_gramians = compute_gramians(pipe.full.controller);
    std::vector<Index> all(static_cast<std::size_t>(params.n));
    std::iota(all.begin(), all.end(), Index{0});
    pipe.full_h2 = closed_loop_h2(closed_loop_assemble(pipe.plant, pipe.full, all, all, RestrictionMode::restrict));
    return pipe;
}

double gl_placement_h2(const GLPipeline& pipe, std::span<const Index> sensors, std::span<const Index> actuators,
                       RestrictionMode mode) {
    try {
        if (mode == RestrictionMode::resynthesize && !sensors.empty() && !actuators.empty()) {
            // optimal LQG on the restricted plant: the closed loop is stable by
            // separation and its H2 norm equals the Riccati cost identity
            check_indices(sensors, pipe.plant.c2.rows(), "gl_placement_h2");
            check_indices(actuators, pipe.plant.b2.cols(), "gl_placement_h2");
            const LQGController ks =
                lqg_synthesize(pipe.plant.a, gather_cols(pipe.plant.b2, actuators), gather_rows(pipe.plant.c2, sensors),
                               pipe.full.q_hat, gather(pipe.full.r_hat, actuators, actuators), pipe.full.w_cov,
                               gather(pipe.full.v_cov, sensors, sensors), false);
            return lqg_h2_trace_formula(ks);
        }
        return closed_loop_h2(closed_loop_assemble(pipe.plant, pipe.full, sensors, actuators, mode));
    } catch (const SynthesisError&) {
        return kInf;
    }
}

GLPlacement gl_place(const GLPipeline& pipe, Index r, bool no_collocate, RestrictionMode mode) {
    const BalancedRealization bal = balance(pipe.controller_gramians, r);
    const Matrix& l = pipe.full.l_gain;
    const Matrix neg_f = -pipe.full.f_gain;

    GLPlacement out;
    out.rank = r;
    if (no_collocate) {
        // controller inputs are sensors (columns of L), outputs are actuators
        // (rows of -F); actuators are placed first
        const SelectionResult s = select_noncollocated(l.adjoint(), neg_f.adjoint(), bal.phi_r, bal.psi_r);
        out.sensors = s.gamma;
        out.actuators = s.beta;
    } else {
        out.actuators = select_sensors(neg_f, bal.psi_r).indices;
        out.sensors = select_actuators(l, bal.phi_r).indices;
    }
    for (Index i : out.sensors) out.sensor_coords.push_back(pipe.plant.grid(i));
    for (Index i : out.actuators) out.actuator_coords.push_back(pipe.plant.grid(i));
    out.h2 = gl_placement_h2(pipe, out.sensors, out.actuators, mode);
    out.stable = std::isfinite(out.h2);
    return out;
}

}  // namespace balsel
