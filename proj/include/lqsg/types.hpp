#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lqsg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Uniform grid on [0, T] with nodes t_i = i * dt, dt = T / N.
struct TimeGrid {
    double T = 1.0;
    int N = 2;

    TimeGrid() = default;
    TimeGrid(double horizon, int steps) : T(horizon), N(steps) {
        if (!(T > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be positive");
        if (N < 2) throw std::invalid_argument("TimeGrid: need at least 2 steps");
    }

    double dt() const { return T / static_cast<double>(N); }
    double t(int i) const { return static_cast<double>(i) * dt(); }
    int nodes() const { return N + 1; }
};

/// Numerical failure carrying the pipeline location (module, operation, grid time).
class NumericalError : public std::runtime_error {
public:
    NumericalError(std::string module, std::string op, double time, const std::string& what)
        : std::runtime_error(module + "." + op + " at t=" + std::to_string(time) + ": " + what),
          module_(std::move(module)), op_(std::move(op)), time_(time) {}

    const std::string& module_name() const { return module_; }
    const std::string& op_name() const { return op_; }
    double time() const { return time_; }

private:
    std::string module_;
    std::string op_;
    double time_;
};

/// Structural (shape/schema) error, raised before any numerics run.
class StructuralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Kahan compensated accumulator; reductions stay reproducible to the last bit
/// independent of worker count because per-path terms are added in index order.
class KahanSum {
public:
    void add(double x) {
        double y = x - c_;
        double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

inline double mean_of(const std::vector<double>& xs) {
    KahanSum s;
    for (double x : xs) s.add(x);
    return xs.empty() ? 0.0 : s.value() / static_cast<double>(xs.size());
}

/// Sample standard error of the mean (sd / sqrt(M)).
inline double standard_error_of(const std::vector<double>& xs) {
    const std::size_t m = xs.size();
    if (m < 2) return 0.0;
    const double mu = mean_of(xs);
    KahanSum q;
    for (double x : xs) q.add((x - mu) * (x - mu));
    return std::sqrt(q.value() / static_cast<double>(m - 1) / static_cast<double>(m));
}

}  // namespace lqsg
