#pragma once

#include <functional>

#include "lqsg/types.hpp"

namespace lqsg {

enum class OdeDirection { Backward, Forward };

/// Computes inverses appearing inside Riccati right-hand sides, recording the
/// worst condition number seen and aborting on (near-)singular input.
class InverseTracker {
public:
    explicit InverseTracker(std::string module, std::string op) : module_(std::move(module)), op_(std::move(op)) {}

    Matrix inverse(const Matrix& m, double t, const char* label);

    double max_condition() const { return max_cond_; }
    void set_time(double t) { time_ = t; }

    static constexpr double kConditionLimit = 1e10;

private:
    std::string module_;
    std::string op_;
    double max_cond_ = 1.0;
    double time_ = 0.0;
};

/// Time-sampled solution of a matrix ODE with cubic-Hermite dense output.
/// Nodes are stored in increasing time order regardless of integration
/// direction; the boundary node holds the boundary matrix bit-for-bit.
class MatrixPath {
public:
    MatrixPath() = default;
    MatrixPath(TimeGrid grid, OdeDirection dir) : grid_(grid), direction_(dir) {
        values_.resize(grid_.nodes());
        derivs_.resize(grid_.nodes());
    }

    const TimeGrid& grid() const { return grid_; }
    OdeDirection direction() const { return direction_; }

    const Matrix& at(int i) const { return values_[static_cast<std::size_t>(i)]; }
    Matrix& at(int i) { return values_[static_cast<std::size_t>(i)]; }
    const Matrix& deriv(int i) const { return derivs_[static_cast<std::size_t>(i)]; }
    Matrix& deriv(int i) { return derivs_[static_cast<std::size_t>(i)]; }

    /// Dense output; O(dt^4) accurate between nodes, exact at nodes.
    Matrix eval(double t) const;

    double max_condition_seen = 1.0;

private:
    TimeGrid grid_;
    OdeDirection direction_ = OdeDirection::Backward;
    std::vector<Matrix> values_;
    std::vector<Matrix> derivs_;
};

using MatrixRhs = std::function<Matrix(double t, const Matrix& p, InverseTracker& inv)>;

/// Classical RK4 over the grid. Backward problems integrate from t = T down
/// to 0 (negative step); coefficients are evaluated at exact midpoints.
/// Aborts with NumericalError on non-finite values or ||P||_inf > 1e8.
MatrixPath integrate_matrix_ode(const MatrixRhs& rhs, double boundary_time, const Matrix& boundary_value,
                                const TimeGrid& grid, OdeDirection direction,
                                const std::string& module = "riccati", const std::string& op = "integrate_matrix_ode",
                                bool symmetrize = false);

}  // namespace lqsg
