#include "lqsg/simulate.hpp"

#include <cstdlib>
#include <mutex>
#include <thread>

namespace lqsg {

int worker_count() {
    if (const char* env = std::getenv("LQSG_WORKERS")) {
        const int w = std::atoi(env);
        if (w >= 1) return w;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

void parallel_for_paths(int paths, const std::function<void(int)>& body) {
    const int workers = std::min(worker_count(), paths);
    if (workers <= 1) {
        for (int p = 0; p < paths; ++p) body(p);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (int p = w; p < paths; p += workers) body(p);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

PathProcess euler_integrate(const SdeCoefficient& drift, const SdeCoefficient& diffW, const SdeCoefficient& diffWt,
                            const Vector& x0, const BrownianEnsemble& ensemble) {
    const TimeGrid& grid = ensemble.grid();
    const int d = static_cast<int>(x0.size());
    PathProcess out(ensemble.paths(), grid, d, ensemble.seed());
    const double dt = grid.dt();
    parallel_for_paths(ensemble.paths(), [&](int p) {
        Vector x = x0;
        out.set_value(p, 0, x);
        for (int i = 0; i < grid.N; ++i) {
            const double t = grid.t(i);
            Vector dx = drift(i, t, x, p) * dt;
            if (diffW) dx += diffW(i, t, x, p) * ensemble.dW(p, i);
            if (diffWt) dx += diffWt(i, t, x, p) * ensemble.dWt(p, i);
            x += dx;
            if (!x.allFinite())
                throw NumericalError("simulate", "euler_integrate", grid.t(i + 1),
                                     "non-finite state on path " + std::to_string(p));
            out.set_value(p, i + 1, x);
        }
    });
    return out;
}

void AffineSde::resize(int d, int nodes) {
    dim = d;
    const auto zM = Matrix::Zero(d, d);
    const auto zV = Vector::Zero(d);
    A.assign(static_cast<std::size_t>(nodes), zM);
    Gw.assign(static_cast<std::size_t>(nodes), zM);
    Gt.assign(static_cast<std::size_t>(nodes), zM);
    f0.assign(static_cast<std::size_t>(nodes), zV);
    fW.assign(static_cast<std::size_t>(nodes), zV);
    gw0.assign(static_cast<std::size_t>(nodes), zV);
    gwW.assign(static_cast<std::size_t>(nodes), zV);
    gt0.assign(static_cast<std::size_t>(nodes), zV);
    gtW.assign(static_cast<std::size_t>(nodes), zV);
}

PathProcess simulate_affine_sde(const AffineSde& sde, const Vector& x0, const BrownianEnsemble& ensemble,
                                const std::function<Vector(int path)>& x0_per_path, const char* op) {
    const TimeGrid& grid = ensemble.grid();
    PathProcess out(ensemble.paths(), grid, sde.dim, ensemble.seed());
    const double dt = grid.dt();
    parallel_for_paths(ensemble.paths(), [&](int p) {
        Vector x = x0_per_path ? x0_per_path(p) : x0;
        double W = 0.0;
        out.set_value(p, 0, x);
        for (int i = 0; i < grid.N; ++i) {
            const std::size_t k = static_cast<std::size_t>(i);
            const double dw = ensemble.dW(p, i);
            const double dwt = ensemble.dWt(p, i);
            Vector dx = (sde.A[k] * x + sde.f0[k] + sde.fW[k] * W) * dt +
                        (sde.Gw[k] * x + sde.gw0[k] + sde.gwW[k] * W) * dw +
                        (sde.Gt[k] * x + sde.gt0[k] + sde.gtW[k] * W) * dwt;
            x += dx;
            W += dw;
            if (!x.allFinite())
                throw NumericalError("simulate", op, grid.t(i + 1), "non-finite state on path " + std::to_string(p));
            out.set_value(p, i + 1, x);
        }
    });
    return out;
}

RegressionResult regress(const Matrix& features, const Matrix& values) {
    RegressionResult res;
    const Eigen::Index m = features.rows();
    const Eigen::Index p = features.cols();
    Eigen::ColPivHouseholderQR<Matrix> qr(features);
    qr.setThreshold(1e-12);
    res.reduced_basis = qr.rank() < p;
    res.coefficients = qr.solve(values);
    res.fitted = features * res.coefficients;
    res.r_squared = Vector::Zero(values.cols());
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
        const double mu = values.col(c).mean();
        const double tss = (values.col(c).array() - mu).square().sum();
        const double rss = (values.col(c) - res.fitted.col(c)).squaredNorm();
        res.r_squared(c) = tss > 0 ? 1.0 - rss / tss : 1.0;
    }
    (void)m;
    return res;
}

Matrix features_const_w(const BrownianEnsemble& ens, int node) {
    Matrix f(ens.paths(), 2);
    for (int p = 0; p < ens.paths(); ++p) {
        f(p, 0) = 1.0;
        f(p, 1) = ens.W_at(p, node);
    }
    return f;
}

Matrix features_const_w_wt(const BrownianEnsemble& ens, int node) {
    Matrix f(ens.paths(), 3);
    for (int p = 0; p < ens.paths(); ++p) {
        f(p, 0) = 1.0;
        f(p, 1) = ens.W_at(p, node);
        f(p, 2) = ens.Wt_at(p, node);
    }
    return f;
}

RegressionResult estimate_conditional_mean(const PathProcess& values, const BrownianEnsemble& ens, int node,
                                           const Matrix& features) {
    Matrix y(values.paths(), values.dim());
    for (int p = 0; p < values.paths(); ++p)
        for (int k = 0; k < values.dim(); ++k) y(p, k) = values.at(p, node, k);
    return regress(features, y);
}

}  // namespace lqsg
