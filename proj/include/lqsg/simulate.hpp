#pragma once

#include <functional>

#include "lqsg/ensemble.hpp"
#include "lqsg/types.hpp"

namespace lqsg {

/// Per-path, per-node values of a d-dimensional process on the grid.
class PathProcess {
public:
    PathProcess() = default;
    PathProcess(int paths, const TimeGrid& grid, int dim, std::uint64_t seed = 0)
        : M_(paths), dim_(dim), grid_(grid), seed_(seed),
          data_(static_cast<std::size_t>(paths) * static_cast<std::size_t>(grid.nodes()) * static_cast<std::size_t>(dim),
                0.0) {}

    int paths() const { return M_; }
    int dim() const { return dim_; }
    const TimeGrid& grid() const { return grid_; }
    std::uint64_t seed() const { return seed_; }

    double& at(int path, int node, int k) { return data_[index(path, node, k)]; }
    double at(int path, int node, int k) const { return data_[index(path, node, k)]; }

    Vector value(int path, int node) const {
        Vector v(dim_);
        for (int k = 0; k < dim_; ++k) v(k) = at(path, node, k);
        return v;
    }
    void set_value(int path, int node, const Vector& v) {
        for (int k = 0; k < dim_; ++k) at(path, node, k) = v(k);
    }

private:
    std::size_t index(int path, int node, int k) const {
        return (static_cast<std::size_t>(path) * static_cast<std::size_t>(grid_.nodes()) +
                static_cast<std::size_t>(node)) *
                   static_cast<std::size_t>(dim_) +
               static_cast<std::size_t>(k);
    }

    int M_ = 0;
    int dim_ = 0;
    TimeGrid grid_;
    std::uint64_t seed_ = 0;
    std::vector<double> data_;
};

/// Worker count from LQSG_WORKERS (default: hardware concurrency). Results are
/// identical for any worker count: paths write disjoint slots and reductions
/// happen afterwards in path order.
int worker_count();
void parallel_for_paths(int paths, const std::function<void(int path)>& body);

using SdeCoefficient = std::function<Vector(int node, double t, const Vector& state, int path)>;

/// Explicit Euler-Maruyama x_{i+1} = x_i + drift dt + diffW dW_i + diffWt dWt_i.
/// Aborts with NumericalError naming (path, t) if the state leaves R^d.
PathProcess euler_integrate(const SdeCoefficient& drift, const SdeCoefficient& diffW, const SdeCoefficient& diffWt,
                            const Vector& x0, const BrownianEnsemble& ensemble);

/// Linear SDE with node-tabulated coefficients, affine in the state and in W(t):
///   dx = (A x + f0 + fW W) dt + (Gw x + gw0 + gwW W) dW + (Gt x + gt0 + gtW W) dWt.
/// Missing vectors/matrices mean zero. This is the workhorse behind the filter
/// and diagnostic simulations; per-node data is precomputed once.
struct AffineSde {
    int dim = 0;
    std::vector<Matrix> A, Gw, Gt;
    std::vector<Vector> f0, fW, gw0, gwW, gt0, gtW;

    void resize(int dim_, int nodes);
};

PathProcess simulate_affine_sde(const AffineSde& sde, const Vector& x0, const BrownianEnsemble& ensemble,
                                const std::function<Vector(int path)>& x0_per_path = nullptr,
                                const char* op = "simulate_affine_sde");

/// Least-squares fit of per-path values on per-path features.
struct RegressionResult {
    Matrix coefficients;  // p x d
    Matrix fitted;        // M x d
    Vector r_squared;     // d
    bool reduced_basis = false;
};

RegressionResult regress(const Matrix& features, const Matrix& values);

/// Feature matrices for conditional expectations given the follower's (resp.
/// the full) filtration at node i: columns {1, W} or {1, W, Wt}.
Matrix features_const_w(const BrownianEnsemble& ens, int node);
Matrix features_const_w_wt(const BrownianEnsemble& ens, int node);

/// Numerical projection E[. | G^1_t]: regression of value(t) on features.
RegressionResult estimate_conditional_mean(const PathProcess& values, const BrownianEnsemble& ens, int node,
                                           const Matrix& features);

}  // namespace lqsg
