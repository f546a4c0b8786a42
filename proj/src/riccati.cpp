#include "lqsg/riccati.hpp"

#include <fstream>

namespace lqsg {

namespace {

Matrix zero(int r, int c) { return Matrix::Zero(r, c); }

}  // namespace

MatrixPath solve_P1(const LQGameSpec& spec, const TimeGrid& grid) {
    const int n = spec.n;
    MatrixRhs rhs = [&spec, n](double t, const Matrix& p1, InverseTracker& inv) -> Matrix {
        const Matrix A = spec.A(t), B1 = spec.B1(t), C1 = spec.C1(t), C2 = spec.C2(t);
        const Matrix Q1 = spec.Q1(t), S1 = spec.S1(t), S2 = spec.S2(t);
        const Matrix R1inv = inv.inverse(spec.R1(t), t, "R1");
        const Matrix I = Matrix::Identity(n, n);
        const Matrix J1 = inv.inverse(p1 * S1 + I, t, "(P1 S1 + I)");
        const Matrix J2 = inv.inverse(p1 * S2 + I, t, "(P1 S2 + I)");
        return -(A * p1 + p1 * A.transpose() - p1 * Q1 * p1 + B1 * R1inv * B1.transpose() +
                 C1 * J1 * p1 * C1.transpose() + C2 * J2 * p1 * C2.transpose());
    };
    return integrate_matrix_ode(rhs, grid.T, zero(n, n), grid, OdeDirection::Backward, "riccati", "solve_P1",
                                /*symmetrize=*/true);
}

MatrixPath solve_P2(const LQGameSpec& spec, const TimeGrid& grid, const MatrixPath& P1) {
    const int n = spec.n;
    MatrixRhs rhs = [&spec, &P1, n](double t, const Matrix& p2, InverseTracker& inv) -> Matrix {
        const Matrix A = spec.A(t), B1 = spec.B1(t), C1 = spec.C1(t), C2 = spec.C2(t);
        const Matrix Q1 = spec.Q1(t), S1 = spec.S1(t), S2 = spec.S2(t);
        const Matrix R1inv = inv.inverse(spec.R1(t), t, "R1");
        const Matrix I = Matrix::Identity(n, n);
        const Matrix p1 = P1.eval(t);
        const Matrix J1 = inv.inverse(p1 * S1 + I, t, "(P1 S1 + I)");
        const Matrix J2 = inv.inverse(p1 * S2 + I, t, "(P1 S2 + I)");
        return A.transpose() * p2 + p2 * A - p2 * B1 * R1inv * B1.transpose() * p2 -
               p2 * C1 * J1 * p1 * C1.transpose() * p2 - p2 * C2 * J2 * p1 * C2.transpose() * p2 + Q1;
    };
    return integrate_matrix_ode(rhs, 0.0, spec.G1, grid, OdeDirection::Forward, "riccati", "solve_P2",
                                /*symmetrize=*/true);
}

AugmentedCoefficients build_augmented(const LQGameSpec& spec, const MatrixPath& P1, const MatrixPath& P2, double t) {
    const int n = spec.n, k2 = spec.k2;
    InverseTracker inv("riccati", "build_augmented");
    const Matrix A = spec.A(t), B1 = spec.B1(t), B2 = spec.B2(t), C1 = spec.C1(t), C2 = spec.C2(t);
    const Matrix Q2 = spec.Q2(t), S1 = spec.S1(t), S2 = spec.S2(t), N1 = spec.N1(t), N2 = spec.N2(t);
    const Matrix R1inv = inv.inverse(spec.R1(t), t, "R1");
    const Matrix I = Matrix::Identity(n, n);
    const Matrix p1 = P1.eval(t), p2 = P2.eval(t);
    const Matrix J1 = inv.inverse(p1 * S1 + I, t, "(P1 S1 + I)");
    const Matrix J2 = inv.inverse(p1 * S2 + I, t, "(P1 S2 + I)");

    const Matrix BRB = B1 * R1inv * B1.transpose();
    const Matrix K1 = p2 * C1 * J1 * p1 * C1.transpose();         // P2 C1 (P1 S1+I)^-1 P1 C1'
    const Matrix K2 = p2 * C2 * J2 * p1 * C2.transpose();         // P2 C2 (P1 S2+I)^-1 P1 C2'

    AugmentedCoefficients a;
    a.A1 = zero(2 * n, 2 * n);
    a.A1.topLeftCorner(n, n) = A.transpose() - p2 * BRB - K2;
    a.A1.bottomRightCorner(n, n) = A.transpose();

    a.A1t = zero(2 * n, 2 * n);
    a.A1t.topLeftCorner(n, n) = C1.transpose();
    a.A1t.bottomRightCorner(n, n) = C1.transpose();

    a.A2 = zero(2 * n, 2 * n);
    a.A2.bottomRightCorner(n, n) = -p2 * BRB;

    a.A2t = zero(2 * n, 2 * n);
    a.A2t.bottomRightCorner(n, n) = C2.transpose();

    a.B1 = zero(2 * n, 2 * n);
    a.B1.bottomRightCorner(n, n) = Q2;

    a.B2t = zero(2 * n, k2);
    a.B2t.bottomRows(n) = B2;

    a.B2 = zero(2 * n, 2 * n);
    a.B2.topRightCorner(n, n) = K1 * p2;
    a.B2.bottomLeftCorner(n, n) = (K1 * p2).transpose();

    a.C1t = zero(2 * n, 2 * n);
    a.C1t.bottomRightCorner(n, n) = N1;

    a.C2t = zero(2 * n, 2 * n);
    a.C2t.topRightCorner(n, n) = S1 - p2;
    a.C2t.bottomLeftCorner(n, n) = (S1 - p2).transpose();

    a.C3t = zero(2 * n, 2 * n);
    a.C3t.bottomRightCorner(n, n) = N2;

    a.F1 = zero(2 * n, 2 * n);
    a.F1.topRightCorner(n, n) = -BRB;
    a.F1.bottomLeftCorner(n, n) = -BRB;

    a.C = zero(2 * n, 2 * n);
    a.C.topRightCorner(n, n) = p2 * C1;
    a.C.bottomLeftCorner(n, n) = p2 * C1;

    a.D = zero(2 * n, k2);
    a.D.topRows(n) = p2 * B2;

    a.Gbar = zero(2 * n, 2 * n);
    a.Gbar.bottomLeftCorner(n, n) = spec.G1;
    a.Gbar.bottomRightCorner(n, n) = spec.G2;
    return a;
}

SigmaBundle assemble_sigma(const AugmentedCoefficients& aug, const Matrix& R2inv, const Matrix& Pi1,
                           const Matrix& Pi2, const Matrix& Pi3, const Matrix& Pi4, double t,
                           InverseTracker& tracker) {
    const Eigen::Index m = aug.A1.rows();
    const Matrix I = Matrix::Identity(m, m);
    const Matrix P12 = Pi1 + Pi2;
    SigmaBundle s;
    s.s1 = tracker.inverse(I - P12 * (aug.C1t + aug.C2t), t, "Sigma1");
    s.s2 = P12 * aug.C.transpose() * P12;
    s.s3 = P12 * aug.C2t + Pi2 * aug.C1t;
    s.s4 = tracker.inverse(I - Pi1 * aug.C1t, t, "Sigma4");
    s.s5 = aug.A2 - aug.D * R2inv * aug.B2t.transpose();
    s.s6 = aug.B2 - aug.D * R2inv * aug.D.transpose();
    s.s7 = aug.A1 + s.s5;
    s.s8 = aug.B1 + s.s6;
    s.s9 = aug.F1 - aug.B2t * R2inv * aug.B2t.transpose();
    s.s10 = tracker.inverse(I - Pi1 * aug.C3t, t, "Sigma10");
    Eigen::PartialPivLU<Matrix> lu(I - P12 * (Pi3 + Pi4));
    s.s11 = lu.inverse();
    if (!s.s11.allFinite()) throw NumericalError("riccati", "assemble_sigma", t, "decoupling degeneracy (Sigma11)");
    return s;
}

Matrix LeaderFrame::k_xhat() const {
    const Matrix P12 = Pi1 + Pi2;
    return sig.s4 * sig.s2 + sig.s4 * sig.s3 * sig.s1 * P12 * aug.A1t + sig.s4 * Pi2 * aug.A1t +
           sig.s4 * sig.s3 * sig.s1 * sig.s2;
}

Matrix LeaderFrame::k_phihat() const {
    const Matrix P12 = Pi1 + Pi2;
    return sig.s4 * sig.s3 * sig.s1 * P12 * aug.C.transpose() + sig.s4 * P12 * aug.C.transpose();
}

namespace {

/// Shared between the Pi solvers: coefficient data at a stage time.
struct PiContext {
    const LQGameSpec* spec;
    const MatrixPath* P1;
    const MatrixPath* P2;
};

Matrix rhs_pi1(const PiContext& ctx, double t, const Matrix& pi1, InverseTracker& inv) {
    const AugmentedCoefficients a = build_augmented(*ctx.spec, *ctx.P1, *ctx.P2, t);
    const Eigen::Index m = a.A1.rows();
    const Matrix I = Matrix::Identity(m, m);
    const Matrix R2inv = inv.inverse(ctx.spec->R2(t), t, "R2");
    const Matrix s4 = inv.inverse(I - pi1 * a.C1t, t, "Sigma4");
    const Matrix s10 = inv.inverse(I - pi1 * a.C3t, t, "Sigma10");
    const Matrix s9 = a.F1 - a.B2t * R2inv * a.B2t.transpose();
    return -(pi1 * a.A1 + a.A1.transpose() * pi1 + pi1 * a.B1 * pi1 +
             a.A1t.transpose() * s4 * pi1 * a.A1t + a.A2t.transpose() * s10 * pi1 * a.A2t + s9);
}

Matrix rhs_pi2(const PiContext& ctx, const MatrixPath& Pi1, double t, const Matrix& pi2, InverseTracker& inv) {
    const AugmentedCoefficients a = build_augmented(*ctx.spec, *ctx.P1, *ctx.P2, t);
    const Eigen::Index m = a.A1.rows();
    const Matrix I = Matrix::Identity(m, m);
    const Matrix R2inv = inv.inverse(ctx.spec->R2(t), t, "R2");
    const Matrix pi1 = Pi1.eval(t);
    const Matrix P12 = pi1 + pi2;
    const Matrix s1 = inv.inverse(I - P12 * (a.C1t + a.C2t), t, "Sigma1");
    const Matrix s2 = P12 * a.C.transpose() * P12;
    const Matrix s3 = P12 * a.C2t + pi2 * a.C1t;
    const Matrix s4 = inv.inverse(I - pi1 * a.C1t, t, "Sigma4");
    const Matrix s5 = a.A2 - a.D * R2inv * a.B2t.transpose();
    const Matrix s6 = a.B2 - a.D * R2inv * a.D.transpose();
    return -(P12 * s5 + s5.transpose() * P12 + pi2 * a.A1 + a.A1.transpose() * pi2 + pi1 * a.B1 * pi2 +
             pi2 * a.B1 * pi1 + P12 * s6 * P12 + pi2 * a.B1 * pi2 + P12 * a.C * s1 * P12 * a.A1t +
             P12 * a.C * s1 * s2 + a.A1t.transpose() * s4 * s2 + a.A1t.transpose() * s4 * s3 * s1 * P12 * a.A1t +
             a.A1t.transpose() * s4 * pi2 * a.A1t + a.A1t.transpose() * s4 * s3 * s1 * s2);
}

Matrix rhs_pi3(const PiContext& ctx, const MatrixPath& Pi1, double t, const Matrix& pi3, InverseTracker& inv) {
    const AugmentedCoefficients a = build_augmented(*ctx.spec, *ctx.P1, *ctx.P2, t);
    const Eigen::Index m = a.A1.rows();
    const Matrix I = Matrix::Identity(m, m);
    const Matrix R2inv = inv.inverse(ctx.spec->R2(t), t, "R2");
    const Matrix pi1 = Pi1.eval(t);
    const Matrix s4 = inv.inverse(I - pi1 * a.C1t, t, "Sigma4");
    const Matrix s10 = inv.inverse(I - pi1 * a.C3t, t, "Sigma10");
    const Matrix s9 = a.F1 - a.B2t * R2inv * a.B2t.transpose();
    return a.A1 * pi3 + pi3 * a.A1.transpose() + pi3 * s9 * pi3 +
           pi3 * a.A1t.transpose() * s4 * pi1 * a.A1t * pi3 +
           pi3 * a.A2t.transpose() * s10 * pi1 * a.A2t * pi3 + a.B1;
}

Matrix rhs_pi4(const PiContext& ctx, const MatrixPath& Pi1, const MatrixPath& Pi2, const MatrixPath& Pi3, double t,
               const Matrix& pi4, InverseTracker& inv) {
    const AugmentedCoefficients a = build_augmented(*ctx.spec, *ctx.P1, *ctx.P2, t);
    const Eigen::Index m = a.A1.rows();
    const Matrix I = Matrix::Identity(m, m);
    const Matrix R2inv = inv.inverse(ctx.spec->R2(t), t, "R2");
    const Matrix pi1 = Pi1.eval(t);
    const Matrix pi2 = Pi2.eval(t);
    const Matrix pi3 = Pi3.eval(t);
    const Matrix P12 = pi1 + pi2;
    const Matrix P34 = pi3 + pi4;
    const Matrix s1 = inv.inverse(I - P12 * (a.C1t + a.C2t), t, "Sigma1");
    const Matrix s2 = P12 * a.C.transpose() * P12;
    const Matrix s3 = P12 * a.C2t + pi2 * a.C1t;
    const Matrix s4 = inv.inverse(I - pi1 * a.C1t, t, "Sigma4");
    const Matrix s5 = a.A2 - a.D * R2inv * a.B2t.transpose();
    const Matrix s6 = a.B2 - a.D * R2inv * a.D.transpose();
    const Matrix s9 = a.F1 - a.B2t * R2inv * a.B2t.transpose();
    const Matrix s10 = inv.inverse(I - pi1 * a.C3t, t, "Sigma10");
    const Matrix k_xhat =
        s4 * s2 + s4 * s3 * s1 * P12 * a.A1t + s4 * pi2 * a.A1t + s4 * s3 * s1 * s2;
    return pi3 * s5.transpose() + s5 * pi3 + pi4 * a.A1.transpose() + a.A1 * pi4 + pi4 * s5.transpose() +
           s5 * pi4 + pi3 * s9 * pi4 + pi4 * s9 * pi3 + pi4 * s9 * pi4 +
           pi3 * a.A1t.transpose() * s4 * pi1 * a.A1t * pi4 + pi3 * a.A1t.transpose() * k_xhat * P34 +
           pi3 * a.A2t.transpose() * s10 * pi1 * a.A2t * pi4 +
           pi4 * a.A1t.transpose() * s1 * P12 * a.A1t * P34 +
           pi4 * a.A1t.transpose() * s1 * P12 * a.C.transpose() +
           pi4 * a.A2t.transpose() * s10 * pi1 * a.A2t * P34 + a.C * s1 * P12 * a.C.transpose() +
           a.C * s1 * P12 * a.A1t * P34 + s6;
}

}  // namespace

LeaderRiccatis solve_leader_riccatis(const LQGameSpec& spec, const MatrixPath& P1, const MatrixPath& P2,
                                     const TimeGrid& grid) {
    const int m = 2 * spec.n;
    PiContext ctx{&spec, &P1, &P2};
    LeaderRiccatis out;

    out.Pi1 = integrate_matrix_ode(
        [&ctx](double t, const Matrix& p, InverseTracker& inv) { return rhs_pi1(ctx, t, p, inv); }, grid.T,
        zero(m, m), grid, OdeDirection::Backward, "riccati", "solve_Pi1");

    out.Pi2 = integrate_matrix_ode(
        [&ctx, &out](double t, const Matrix& p, InverseTracker& inv) { return rhs_pi2(ctx, out.Pi1, t, p, inv); },
        grid.T, zero(m, m), grid, OdeDirection::Backward, "riccati", "solve_Pi2");

    const AugmentedCoefficients a0 = build_augmented(spec, P1, P2, 0.0);
    out.Pi3 = integrate_matrix_ode(
        [&ctx, &out](double t, const Matrix& p, InverseTracker& inv) { return rhs_pi3(ctx, out.Pi1, t, p, inv); },
        0.0, a0.Gbar, grid, OdeDirection::Forward, "riccati", "solve_Pi3");

    out.Pi4 = integrate_matrix_ode(
        [&ctx, &out](double t, const Matrix& p, InverseTracker& inv) {
            return rhs_pi4(ctx, out.Pi1, out.Pi2, out.Pi3, t, p, inv);
        },
        0.0, zero(m, m), grid, OdeDirection::Forward, "riccati", "solve_Pi4");

    return out;
}

LeaderFrame LeaderSystem::frame_at(double t) const {
    LeaderFrame f;
    f.aug = build_augmented(spec, P1, P2, t);
    f.Pi1 = pis.Pi1.eval(t);
    f.Pi2 = pis.Pi2.eval(t);
    f.Pi3 = pis.Pi3.eval(t);
    f.Pi4 = pis.Pi4.eval(t);
    InverseTracker tracker("riccati", "frame_at");
    f.R2inv = tracker.inverse(spec.R2(t), t, "R2");
    f.sig = assemble_sigma(f.aug, f.R2inv, f.Pi1, f.Pi2, f.Pi3, f.Pi4, t, tracker);
    return f;
}

LeaderSystem solve_leader_system(const LQGameSpec& spec, const TimeGrid& grid) {
    LeaderSystem sys;
    sys.spec = spec;
    sys.grid = grid;
    sys.P1 = solve_P1(spec, grid);
    sys.P2 = solve_P2(spec, grid, sys.P1);
    sys.pis = solve_leader_riccatis(spec, sys.P1, sys.P2, grid);
    return sys;
}

double RiccatiResiduals::max() const {
    return std::max({p1, p2, pi1, pi2, pi3, pi4});
}

namespace {

/// Central differences inside, second-order one-sided stencils at the ends.
Matrix time_derivative(const MatrixPath& path, int i) {
    const double dt = path.grid().dt();
    const int N = path.grid().N;
    if (i == 0) return (-3.0 * path.at(0) + 4.0 * path.at(1) - path.at(2)) / (2.0 * dt);
    if (i == N) return (3.0 * path.at(N) - 4.0 * path.at(N - 1) + path.at(N - 2)) / (2.0 * dt);
    return (path.at(i + 1) - path.at(i - 1)) / (2.0 * dt);
}

template <typename Rhs>
double residual_sup(const MatrixPath& path, Rhs&& rhs) {
    double sup = 0.0;
    InverseTracker inv("riccati", "residual");
    for (int i = 0; i <= path.grid().N; ++i) {
        const double t = path.grid().t(i);
        const Matrix r = time_derivative(path, i) - rhs(t, path.at(i), inv);
        sup = std::max(sup, r.cwiseAbs().maxCoeff());
    }
    return sup;
}

}  // namespace

RiccatiResiduals riccati_residuals(const LeaderSystem& sys) {
    PiContext ctx{&sys.spec, &sys.P1, &sys.P2};
    const LQGameSpec& spec = sys.spec;
    const int n = spec.n;
    RiccatiResiduals rr;
    rr.p1 = residual_sup(sys.P1, [&spec, n](double t, const Matrix& p1, InverseTracker& inv) {
        const Matrix A = spec.A(t), B1 = spec.B1(t), C1 = spec.C1(t), C2 = spec.C2(t);
        const Matrix I = Matrix::Identity(n, n);
        const Matrix R1inv = inv.inverse(spec.R1(t), t, "R1");
        return (-(A * p1 + p1 * A.transpose() - p1 * spec.Q1(t) * p1 + B1 * R1inv * B1.transpose() +
                  C1 * inv.inverse(p1 * spec.S1(t) + I, t, "J1") * p1 * C1.transpose() +
                  C2 * inv.inverse(p1 * spec.S2(t) + I, t, "J2") * p1 * C2.transpose()))
            .eval();
    });
    rr.p2 = residual_sup(sys.P2, [&spec, &sys, n](double t, const Matrix& p2, InverseTracker& inv) {
        const Matrix A = spec.A(t), B1 = spec.B1(t), C1 = spec.C1(t), C2 = spec.C2(t);
        const Matrix I = Matrix::Identity(n, n);
        const Matrix R1inv = inv.inverse(spec.R1(t), t, "R1");
        const Matrix p1 = sys.P1.eval(t);
        return (A.transpose() * p2 + p2 * A - p2 * B1 * R1inv * B1.transpose() * p2 -
                p2 * C1 * inv.inverse(p1 * spec.S1(t) + I, t, "J1") * p1 * C1.transpose() * p2 -
                p2 * C2 * inv.inverse(p1 * spec.S2(t) + I, t, "J2") * p1 * C2.transpose() * p2 + spec.Q1(t))
            .eval();
    });
    rr.pi1 = residual_sup(sys.pis.Pi1,
                          [&ctx](double t, const Matrix& p, InverseTracker& inv) { return rhs_pi1(ctx, t, p, inv); });
    rr.pi2 = residual_sup(sys.pis.Pi2, [&ctx, &sys](double t, const Matrix& p, InverseTracker& inv) {
        return rhs_pi2(ctx, sys.pis.Pi1, t, p, inv);
    });
    rr.pi3 = residual_sup(sys.pis.Pi3, [&ctx, &sys](double t, const Matrix& p, InverseTracker& inv) {
        return rhs_pi3(ctx, sys.pis.Pi1, t, p, inv);
    });
    rr.pi4 = residual_sup(sys.pis.Pi4, [&ctx, &sys](double t, const Matrix& p, InverseTracker& inv) {
        return rhs_pi4(ctx, sys.pis.Pi1, sys.pis.Pi2, sys.pis.Pi3, t, p, inv);
    });
    return rr;
}

void export_riccati_csv(const MatrixPath& path, const std::string& name, const std::string& filename) {
    std::ofstream out(filename);
    if (!out) throw StructuralError("export_riccati_csv: cannot open " + filename);
    const Matrix& first = path.at(0);
    out << "t";
    for (Eigen::Index r = 0; r < first.rows(); ++r)
        for (Eigen::Index c = 0; c < first.cols(); ++c) out << "," << name << "_" << r << c;
    out << "\n";
    char buf[64];
    for (int i = 0; i <= path.grid().N; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", path.grid().t(i));
        out << buf;
        const Matrix& m = path.at(i);
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
                out << "," << buf;
            }
        out << "\n";
    }
}

}  // namespace lqsg
