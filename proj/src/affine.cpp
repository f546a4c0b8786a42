#include "lqsg/affine.hpp"

#include <memory>

namespace lqsg {

AffineProcess solve_affine_linear_bsde(const LinearBSDESpec& bsde, const TimeGrid& grid) {
    if (bsde.terminal_c2.size() > 0 && !bsde.terminal_c2.isZero(0.0))
        throw StructuralError("solve_affine_linear_bsde: terminal with Wt loading is outside the affine backend");
    const int d = bsde.dim;
    const bool forced = bsde.forcing.dim() > 0;
    MatrixRhs rhs = [&bsde, d, forced](double t, const Matrix& ab, InverseTracker&) -> Matrix {
        const Matrix my = bsde.M_Y(t);
        const Matrix mz = bsde.M_Z ? bsde.M_Z(t) : Matrix::Zero(d, d);
        const Vector a = ab.col(0), b = ab.col(1);
        Vector fa = Vector::Zero(d), fb = Vector::Zero(d);
        if (forced) {
            fa = bsde.forcing.a(t);
            fb = bsde.forcing.b(t);
        }
        Matrix out(d, 2);
        out.col(1) = -my * b - fb;
        out.col(0) = -my * a - mz * b - fa;
        return out;
    };
    Matrix terminal(d, 2);
    terminal.col(0) = bsde.terminal_c0;
    terminal.col(1) = bsde.terminal_c1;
    auto path = std::make_shared<MatrixPath>(
        integrate_matrix_ode(rhs, grid.T, terminal, grid, OdeDirection::Backward, "filters", "solve_affine_linear_bsde"));
    return AffineProcess::from_path(std::move(path));
}

LsmcResult lsmc_linear_bsde(const LinearBSDESpec& bsde, const BrownianEnsemble& ensemble) {
    const TimeGrid& grid = ensemble.grid();
    const int d = bsde.dim;
    const int M = ensemble.paths();
    const double dt = grid.dt();
    const bool extended = bsde.terminal_c2.size() > 0 && !bsde.terminal_c2.isZero(0.0);
    const bool forced = bsde.forcing.dim() > 0;

    LsmcResult res{PathProcess(M, grid, d, ensemble.seed()), PathProcess(M, grid, d, ensemble.seed())};

    std::vector<double> W(static_cast<std::size_t>(M)), Wt(static_cast<std::size_t>(M));
    for (int p = 0; p < M; ++p) {
        W[static_cast<std::size_t>(p)] = ensemble.W_at(p, grid.N);
        Wt[static_cast<std::size_t>(p)] = ensemble.Wt_at(p, grid.N);
    }

    Matrix Y(M, d);
    for (int p = 0; p < M; ++p) {
        Vector xi = bsde.terminal_c0 + bsde.terminal_c1 * W[static_cast<std::size_t>(p)];
        if (extended) xi += bsde.terminal_c2 * Wt[static_cast<std::size_t>(p)];
        Y.row(p) = xi.transpose();
        res.Y.set_value(p, grid.N, xi);
        res.Z.set_value(p, grid.N, Vector::Zero(d));
    }

    for (int i = grid.N - 1; i >= 0; --i) {
        for (int p = 0; p < M; ++p) {
            W[static_cast<std::size_t>(p)] -= ensemble.dW(p, i);
            Wt[static_cast<std::size_t>(p)] -= ensemble.dWt(p, i);
        }
        const double t = grid.t(i);
        Matrix feats(M, extended ? 3 : 2);
        for (int p = 0; p < M; ++p) {
            feats(p, 0) = 1.0;
            feats(p, 1) = W[static_cast<std::size_t>(p)];
            if (extended) feats(p, 2) = Wt[static_cast<std::size_t>(p)];
        }
        // E[Y_{i+1} | F_i] and E[Y_{i+1} dW | F_i] / dt by least squares
        Matrix target(M, 2 * d);
        for (int p = 0; p < M; ++p) {
            target.block(p, 0, 1, d) = Y.row(p);
            target.block(p, d, 1, d) = Y.row(p) * (ensemble.dW(p, i) / dt);
        }
        const RegressionResult reg = regress(feats, target);
        const Matrix my = bsde.M_Y(t);
        const Matrix mz = bsde.M_Z ? bsde.M_Z(t) : Matrix::Zero(d, d);
        const Matrix lhs = Matrix::Identity(d, d) - dt * my;
        Eigen::PartialPivLU<Matrix> lu(lhs);
        for (int p = 0; p < M; ++p) {
            const Vector ey = reg.fitted.block(p, 0, 1, d).transpose();
            const Vector z = reg.fitted.block(p, d, 1, d).transpose();
            Vector f = Vector::Zero(d);
            if (forced)
                f = bsde.forcing.value(t, W[static_cast<std::size_t>(p)], Wt[static_cast<std::size_t>(p)]);
            const Vector y = lu.solve(ey + dt * (mz * z + f));
            Y.row(p) = y.transpose();
            res.Y.set_value(p, i, y);
            res.Z.set_value(p, i, z);
        }
    }
    return res;
}

}  // namespace lqsg
