#pragma once

// Transfer-function evaluation through one precomputed Schur form, so each
// frequency costs a triangular solve instead of a dense factorization.

#include <cmath>

#include "balsel/statespace.hpp"

namespace balsel::detail {

inline Complex frequency_point(TimeDomain domain, double omega) {
    if (domain == TimeDomain::discrete) return std::polar(1.0, omega);
    return {0.0, omega};
}

class SchurTransfer {
public:
    explicit SchurTransfer(const StateSpaceModel& m) {
        SchurResult s = schur(m.a());
        t_ = std::move(s.t);
        cu_ = m.c() * s.u;
        ub_ = s.u.adjoint() * m.b();
    }

    /// C (sI - A)^{-1} B. Throws SingularityError near an eigenvalue.
    Matrix eval(Complex s) const {
        const Index n = t_.rows();
        for (Index i = 0; i < n; ++i) {
            if (std::abs(s - t_(i, i)) <= 1e-12 * std::max(1.0, std::abs(s)))
                throw SingularityError("transfer_eval: s coincides with an eigenvalue of A");
        }
        Matrix shifted = -t_;
        shifted.diagonal().array() += s;
        const Matrix y = shifted.triangularView<Eigen::Upper>().solve(ub_);
        return cu_ * y;
    }

private:
    Matrix t_, cu_, ub_;
};

}  // namespace balsel::detail
