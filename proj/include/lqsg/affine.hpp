#pragma once

#include <functional>
#include <memory>

#include "lqsg/ensemble.hpp"
#include "lqsg/ode.hpp"
#include "lqsg/simulate.hpp"

namespace lqsg {

using VectorFn = std::function<Vector(double)>;

/// Process of the form V(t) = a(t) + b(t) W(t) [+ c(t) Wt(t)], the closed
/// representation of G^1-adapted solutions of linear BSDEs with deterministic
/// coefficients. The dW integrand of such a process is b(t) by construction.
class AffineProcess {
public:
    AffineProcess() = default;
    AffineProcess(int dim, VectorFn a, VectorFn b, VectorFn c = nullptr)
        : dim_(dim), a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {}

    static AffineProcess zero(int dim) {
        return AffineProcess(
            dim, [dim](double) { return Vector::Zero(dim); }, [dim](double) { return Vector::Zero(dim); });
    }

    /// Wrap a solved coefficient path whose node values are the d x 2 blocks [a | b].
    static AffineProcess from_path(std::shared_ptr<MatrixPath> path) {
        const int d = static_cast<int>(path->at(0).rows());
        auto pa = path;
        return AffineProcess(
            d, [pa](double t) { return Vector(pa->eval(t).col(0)); },
            [pa](double t) { return Vector(pa->eval(t).col(1)); });
    }

    int dim() const { return dim_; }
    Vector a(double t) const { return a_(t); }
    Vector b(double t) const { return b_(t); }
    Vector c(double t) const { return c_ ? c_(t) : Vector::Zero(dim_); }
    bool has_wt_loading() const { return static_cast<bool>(c_); }

    Vector value(double t, double W, double Wt = 0.0) const {
        Vector v = a_(t) + b_(t) * W;
        if (c_) v += c_(t) * Wt;
        return v;
    }

private:
    int dim_ = 0;
    VectorFn a_, b_, c_;
};

using MatrixFn = std::function<Matrix(double)>;

/// Linear BSDE -dY = [M_Y(t) Y + M_Z(t) Z + forcing(t)] dt - Z dW with
/// deterministic matrices, affine forcing and affine terminal Y(T) = c0 + c1 W(T).
struct LinearBSDESpec {
    int dim = 0;
    MatrixFn M_Y;
    MatrixFn M_Z;
    AffineProcess forcing;  // default-constructed means zero
    Vector terminal_c0;
    Vector terminal_c1;
    Vector terminal_c2;  // must be empty or zero for the affine backend
};

/// Semi-analytic backend. Matching Y = a + b W into the BSDE gives the
/// coefficient ODEs
///   b' = -M_Y b - f_b,   a' = -M_Y a - M_Z b - f_a,
/// integrated backward from a(T) = c0, b(T) = c1 by RK4; Z(t) = b(t).
AffineProcess solve_affine_linear_bsde(const LinearBSDESpec& bsde, const TimeGrid& grid);

/// Monte Carlo backend: Euler-Maruyama backward induction with least-squares
/// regression on {1, W(t_i)} (plus Wt(t_i) when the terminal carries a Wt
/// loading). Returns per-path Y values; snapshots of Z on request.
struct LsmcResult {
    PathProcess Y;
    PathProcess Z;
};

LsmcResult lsmc_linear_bsde(const LinearBSDESpec& bsde, const BrownianEnsemble& ensemble);

}  // namespace lqsg
