#include "lqsg/ode.hpp"

#include <Eigen/LU>
#include <cmath>

namespace lqsg {

Matrix InverseTracker::inverse(const Matrix& m, double t, const char* label) {
    Eigen::PartialPivLU<Matrix> lu(m);
    const Matrix inv = lu.inverse();
    if (!inv.allFinite())
        throw NumericalError(module_, op_, t, std::string("singular matrix ") + label);
    const double cond = m.cwiseAbs().rowwise().sum().maxCoeff() * inv.cwiseAbs().rowwise().sum().maxCoeff();
    if (!(cond < kConditionLimit))
        throw NumericalError(module_, op_, t,
                             std::string("ill-conditioned inverse ") + label + " (cond=" + std::to_string(cond) + ")");
    max_cond_ = std::max(max_cond_, cond);
    return inv;
}

Matrix MatrixPath::eval(double t) const {
    const double dt = grid_.dt();
    if (t <= 0.0) return values_.front();
    if (t >= grid_.T) return values_.back();
    int i = static_cast<int>(std::floor(t / dt));
    if (i >= grid_.N) i = grid_.N - 1;
    const double s = (t - grid_.t(i)) / dt;
    if (s == 0.0) return values_[static_cast<std::size_t>(i)];
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * values_[static_cast<std::size_t>(i)] + (h10 * dt) * derivs_[static_cast<std::size_t>(i)] +
           h01 * values_[static_cast<std::size_t>(i + 1)] + (h11 * dt) * derivs_[static_cast<std::size_t>(i + 1)];
}

MatrixPath integrate_matrix_ode(const MatrixRhs& rhs, double boundary_time, const Matrix& boundary_value,
                                const TimeGrid& grid, OdeDirection direction, const std::string& module,
                                const std::string& op, bool symmetrize) {
    MatrixPath path(grid, direction);
    InverseTracker tracker(module, op);
    const double dt = grid.dt();
    const bool backward = direction == OdeDirection::Backward;
    const double expected_boundary = backward ? grid.T : 0.0;
    if (std::abs(boundary_time - expected_boundary) > 1e-12 * std::max(1.0, grid.T))
        throw StructuralError(module + "." + op + ": boundary time does not match integration direction");

    auto check = [&](const Matrix& p, double t) {
        if (!p.allFinite()) throw NumericalError(module, op, t, "non-finite state");
        if (p.size() > 0 && p.cwiseAbs().maxCoeff() > 1e8) throw NumericalError(module, op, t, "Riccati escape");
    };

    const int start = backward ? grid.N : 0;
    const int stop = backward ? 0 : grid.N;
    const int step = backward ? -1 : 1;
    const double h = backward ? -dt : dt;

    path.at(start) = boundary_value;
    Matrix p = boundary_value;
    for (int i = start; i != stop; i += step) {
        const double t = grid.t(i);
        const Matrix k1 = rhs(t, p, tracker);
        path.deriv(i) = k1;
        const Matrix k2 = rhs(t + 0.5 * h, p + (0.5 * h) * k1, tracker);
        const Matrix k3 = rhs(t + 0.5 * h, p + (0.5 * h) * k2, tracker);
        const Matrix k4 = rhs(t + h, p + h * k3, tracker);
        p = p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (symmetrize) p = 0.5 * (p + p.transpose()).eval();
        check(p, t + h);
        path.at(i + step) = p;
    }
    path.deriv(stop) = rhs(grid.t(stop), p, tracker);
    path.max_condition_seen = tracker.max_condition();
    return path;
}

}  // namespace lqsg
