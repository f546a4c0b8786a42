#include "lqsg/filters.hpp"

namespace lqsg {

AffineProcess solve_hat_phi(const LQGameSpec& spec, const MatrixPath& P1, const TimeGrid& grid,
                            const AffineProcess& v2hat) {
    if (spec.terminal.mode() != TerminalMode::Standard)
        throw StructuralError("solve_hat_phi: affine backend requires a STANDARD terminal (c2 = 0)");
    const int n = spec.n;
    LinearBSDESpec bsde;
    bsde.dim = n;
    bsde.M_Y = [&spec, &P1](double t) -> Matrix { return spec.A(t) - P1.eval(t) * spec.Q1(t); };
    bsde.M_Z = [&spec, &P1, n](double t) -> Matrix {
        InverseTracker inv("filters", "solve_hat_phi");
        return spec.C1(t) * inv.inverse(P1.eval(t) * spec.S1(t) + Matrix::Identity(n, n), t, "(P1 S1 + I)");
    };
    if (v2hat.dim() > 0) {
        bsde.forcing = AffineProcess(
            n, [&spec, v2hat](double t) { return Vector(-spec.B2(t) * v2hat.a(t)); },
            [&spec, v2hat](double t) { return Vector(-spec.B2(t) * v2hat.b(t)); });
    }
    bsde.terminal_c0 = -spec.terminal.c0;
    bsde.terminal_c1 = -spec.terminal.c1;
    return solve_affine_linear_bsde(bsde, grid);
}

AffineSde build_hat_varphi_sde(const LQGameSpec& spec, const MatrixPath& P1, const MatrixPath& P2,
                               const AffineProcess& phi_hat, const TimeGrid& grid, const AffineProcess& v2hat) {
    const int n = spec.n;
    InverseTracker inv("filters", "simulate_hat_varphi_follower");
    AffineSde sde;
    sde.resize(n, grid.nodes());
    const Matrix I = Matrix::Identity(n, n);
    for (int i = 0; i <= grid.N; ++i) {
        const double t = grid.t(i);
        const Matrix A = spec.A(t), B1 = spec.B1(t), B2 = spec.B2(t), C1 = spec.C1(t), C2 = spec.C2(t);
        const Matrix S1 = spec.S1(t), S2 = spec.S2(t);
        const Matrix R1inv = inv.inverse(spec.R1(t), t, "R1");
        const Matrix p1 = P1.eval(t), p2 = P2.eval(t);
        const Matrix J1 = inv.inverse(p1 * S1 + I, t, "(P1 S1 + I)");
        const Matrix J2 = inv.inverse(p1 * S2 + I, t, "(P1 S2 + I)");
        const Matrix J1r = inv.inverse(S1 * p1 + I, t, "(S1 P1 + I)");
        const Matrix IPP = I + p2 * p1;
        const Matrix IPPinv = inv.inverse(IPP, t, "(I + P2 P1)");

        const Matrix drift_state =
            A.transpose() - p2 * B1 * R1inv * B1.transpose() - p2 * C1 * J1 * p1 * C1.transpose() -
            p2 * C2 * J2 * p1 * C2.transpose();
        const Matrix g_phi = -IPP * J1r * C1.transpose() * IPPinv * p2;  // on hat-phi
        const Matrix g_self = IPP * J1r * C1.transpose() * IPPinv;       // on hat-varphi
        const Matrix g_eta = -(S1 - p2) * J1;                            // on hat-eta

        const Vector pa = phi_hat.a(t), pb = phi_hat.b(t);
        const Vector v2a = v2hat.dim() > 0 ? v2hat.a(t) : Vector::Zero(spec.k2);
        const Vector v2b = v2hat.dim() > 0 ? v2hat.b(t) : Vector::Zero(spec.k2);

        const std::size_t k = static_cast<std::size_t>(i);
        sde.A[k] = drift_state;
        sde.f0[k] = -p2 * C1 * J1 * pb + p2 * B2 * v2a;
        sde.fW[k] = p2 * B2 * v2b;
        sde.Gw[k] = g_self;
        sde.gw0[k] = g_phi * pa + g_eta * pb;
        sde.gwW[k] = g_phi * pb;
    }
    return sde;
}

PathProcess simulate_hat_varphi_follower(const LQGameSpec& spec, const MatrixPath& P1, const MatrixPath& P2,
                                         const AffineProcess& phi_hat, const TimeGrid& grid,
                                         const AffineProcess& v2hat, const BrownianEnsemble& ensemble) {
    const AffineSde sde = build_hat_varphi_sde(spec, P1, P2, phi_hat, grid, v2hat);
    return simulate_affine_sde(sde, Vector::Zero(spec.n), ensemble, nullptr, "simulate_hat_varphi_follower");
}

LinearBSDESpec leader_filter_bsde(const LeaderSystem& sys) {
    const int m = 2 * sys.spec.n;
    LinearBSDESpec bsde;
    bsde.dim = m;
    bsde.M_Y = [&sys](double t) -> Matrix {
        const LeaderFrame f = sys.frame_at(t);
        const Matrix P12 = f.Pi1 + f.Pi2;
        return f.Pi1 * f.sig.s6 + P12 * f.aug.C * f.sig.s1 * P12 * f.aug.C.transpose() + f.Pi2 * f.sig.s8 +
               f.sig.s5.transpose() + f.aug.A1t.transpose() * f.sig.s4 * f.sig.s3 * f.sig.s1 * P12 * f.aug.C.transpose() +
               f.aug.A1t.transpose() * f.sig.s4 * P12 * f.aug.C.transpose() + f.Pi1 * f.aug.B1 +
               f.aug.A1.transpose();
    };
    bsde.M_Z = [&sys](double t) -> Matrix {
        const LeaderFrame f = sys.frame_at(t);
        const Matrix P12 = f.Pi1 + f.Pi2;
        return P12 * f.aug.C * f.sig.s1 + f.aug.A1t.transpose() * f.sig.s4 * f.sig.s3 * f.sig.s1 +
               f.aug.A1t.transpose() * f.sig.s4;
    };
    bsde.terminal_c0 = Vector::Zero(m);
    bsde.terminal_c1 = Vector::Zero(m);
    bsde.terminal_c0.tail(sys.spec.n) = sys.spec.terminal.c0;
    bsde.terminal_c1.tail(sys.spec.n) = sys.spec.terminal.c1;
    return bsde;
}

AffineProcess solve_hat_tilde_phi(const LeaderSystem& sys) {
    return solve_affine_linear_bsde(leader_filter_bsde(sys), sys.grid);
}

TildePhiResult recover_tilde_phi(const LeaderSystem& sys, const AffineProcess& phi_tilde_hat,
                                 const BrownianEnsemble* ensemble) {
    TildePhiResult res;
    if (sys.spec.terminal.mode() == TerminalMode::Standard) {
        res.pathwise = false;
        res.affine = phi_tilde_hat;
        return res;
    }
    if (!ensemble)
        throw StructuralError("recover_tilde_phi: EXPERIMENTAL terminal requires an ensemble");

    // -d tilde-phi = alpha dt - tilde-eta dW with alpha affine in
    // (tilde-phi, tilde-eta) plus forcing from the solved filter pair.
    const int m = 2 * sys.spec.n;
    LinearBSDESpec bsde;
    bsde.dim = m;
    bsde.M_Y = [&sys](double t) -> Matrix {
        const LeaderFrame f = sys.frame_at(t);
        return f.Pi1 * f.aug.B1 + f.aug.A1.transpose();
    };
    bsde.M_Z = [&sys](double t) -> Matrix {
        const LeaderFrame f = sys.frame_at(t);
        return f.aug.A1t.transpose() * f.sig.s4;
    };
    bsde.forcing = AffineProcess(
        m,
        [&sys, phi_tilde_hat](double t) -> Vector {
            const LeaderFrame f = sys.frame_at(t);
            const Matrix P12 = f.Pi1 + f.Pi2;
            const Matrix M1 = f.Pi1 * f.sig.s6 + P12 * f.aug.C * f.sig.s1 * P12 * f.aug.C.transpose() +
                              f.Pi2 * f.sig.s8 + f.sig.s5.transpose() +
                              f.aug.A1t.transpose() * f.sig.s4 * f.sig.s3 * f.sig.s1 * P12 * f.aug.C.transpose() +
                              f.aug.A1t.transpose() * f.sig.s4 * P12 * f.aug.C.transpose();
            const Matrix Me1 = P12 * f.aug.C * f.sig.s1 + f.aug.A1t.transpose() * f.sig.s4 * f.sig.s3 * f.sig.s1;
            return M1 * phi_tilde_hat.a(t) + Me1 * phi_tilde_hat.b(t);
        },
        [&sys, phi_tilde_hat](double t) -> Vector {
            const LeaderFrame f = sys.frame_at(t);
            const Matrix P12 = f.Pi1 + f.Pi2;
            const Matrix M1 = f.Pi1 * f.sig.s6 + P12 * f.aug.C * f.sig.s1 * P12 * f.aug.C.transpose() +
                              f.Pi2 * f.sig.s8 + f.sig.s5.transpose() +
                              f.aug.A1t.transpose() * f.sig.s4 * f.sig.s3 * f.sig.s1 * P12 * f.aug.C.transpose() +
                              f.aug.A1t.transpose() * f.sig.s4 * P12 * f.aug.C.transpose();
            return M1 * phi_tilde_hat.b(t);
        });
    bsde.terminal_c0 = Vector::Zero(m);
    bsde.terminal_c1 = Vector::Zero(m);
    bsde.terminal_c2 = Vector::Zero(m);
    bsde.terminal_c0.tail(sys.spec.n) = sys.spec.terminal.c0;
    bsde.terminal_c1.tail(sys.spec.n) = sys.spec.terminal.c1;
    bsde.terminal_c2.tail(sys.spec.n) = sys.spec.terminal.c2;

    LsmcResult sol = lsmc_linear_bsde(bsde, *ensemble);

    // forward re-integration with the regressed integrand measures how much of
    // the terminal cannot be represented by dW integrals alone
    const TimeGrid& grid = ensemble->grid();
    const double dt = grid.dt();
    std::vector<double> sq(static_cast<std::size_t>(ensemble->paths()));
    parallel_for_paths(ensemble->paths(), [&](int p) {
        Vector phi = sol.Y.value(p, 0);
        for (int i = 0; i < grid.N; ++i) {
            const double t = grid.t(i);
            const Vector eta = sol.Z.value(p, i);
            const Vector alpha = bsde.M_Y(t) * phi + bsde.M_Z(t) * eta +
                                 bsde.forcing.value(t, ensemble->W_at(p, i), ensemble->Wt_at(p, i));
            phi += -alpha * dt + eta * ensemble->dW(p, i);
        }
        Vector xi_bar = Vector::Zero(2 * sys.spec.n);
        xi_bar.tail(sys.spec.n) = terminal_value(sys.spec.terminal, ensemble->W_at(p, grid.N),
                                                 ensemble->Wt_at(p, grid.N));
        sq[static_cast<std::size_t>(p)] = (phi - xi_bar).squaredNorm();
    });
    res.pathwise = true;
    res.phi = std::move(sol.Y);
    res.eta = std::move(sol.Z);
    res.representation_residual = mean_of(sq);
    return res;
}

LeaderVarphiCoeffs build_leader_varphi_coeffs(const LeaderSystem& sys) {
    const TimeGrid& grid = sys.grid;
    LeaderVarphiCoeffs c;
    const int nodes = grid.nodes();
    auto reserve = [&](std::vector<Matrix>& v) { v.resize(static_cast<std::size_t>(nodes)); };
    reserve(c.Bv); reserve(c.Bph); reserve(c.Beh); reserve(c.Gv); reserve(c.Gph); reserve(c.Geh);
    reserve(c.Wv); reserve(c.Wvh); reserve(c.Wph); reserve(c.Weh);
    reserve(c.GY); reserve(c.GYh); reserve(c.Gvh6); reserve(c.Gv6); reserve(c.Gph6); reserve(c.Geh6);

    for (int i = 0; i < nodes; ++i) {
        const double t = grid.t(i);
        const LeaderFrame f = sys.frame_at(t);
        const Matrix P12 = f.Pi1 + f.Pi2;
        const Matrix P34 = f.Pi3 + f.Pi4;
        const Matrix kx = f.k_xhat();
        const Matrix kp = f.k_phihat();
        const Matrix A1tT = f.aug.A1t.transpose();
        const Matrix A2tT = f.aug.A2t.transpose();
        const Matrix D1 = f.aug.C1t - f.Pi3;
        const Matrix D2 = f.aug.C2t - f.Pi4;
        const std::size_t k = static_cast<std::size_t>(i);

        // drift of the unfiltered tilde-varphi equation
        c.Wv[k] = f.Pi3 * f.sig.s9 + f.Pi3 * A1tT * f.sig.s4 * f.Pi1 * f.aug.A1t +
                  f.Pi3 * A2tT * f.sig.s10 * f.Pi1 * f.aug.A2t + f.aug.A1;
        c.Wvh[k] = f.Pi3 * A1tT * kx + f.Pi4 * f.sig.s9 + f.Pi4 * A1tT * f.sig.s1 * P12 * f.aug.A1t +
                   f.Pi4 * A2tT * f.sig.s10 * f.Pi1 * f.aug.A2t + f.sig.s5 +
                   f.aug.C * f.sig.s1 * P12 * f.aug.A1t;
        c.Wph[k] = f.Pi3 * A1tT * kp;
        c.Weh[k] = f.Pi3 * A1tT * f.sig.s4 * f.sig.s3 * f.sig.s1 + f.Pi4 * A1tT * f.sig.s1 +
                   f.aug.C * f.sig.s1 + f.Pi3 * A1tT * f.sig.s4;

        // diffusion of the unfiltered equation
        c.GY[k] = f.aug.A1t * f.Pi3 + D1 * f.sig.s4 * f.Pi1 * f.aug.A1t * f.Pi3;
        c.GYh[k] = f.aug.A1t * f.Pi4 + f.aug.C.transpose() + D1 * f.sig.s4 * f.Pi1 * f.aug.A1t * f.Pi4 +
                   D1 * kx * P34 + D2 * f.sig.s1 * P12 * f.aug.A1t * P34 +
                   D2 * f.sig.s1 * P12 * f.aug.C.transpose();
        c.Gvh6[k] = D1 * kx + D2 * f.sig.s1 * P12 * f.aug.A1t;
        c.Gv6[k] = f.aug.A1t + D1 * f.sig.s4 * f.Pi1 * f.aug.A1t;
        c.Gph6[k] = D1 * kp;
        c.Geh6[k] = D1 * f.sig.s4 * f.sig.s3 * f.sig.s1 + D2 * f.sig.s1 + D1 * f.sig.s4;

        // filtered equation: the hat of the above with Y, hat-Y merged through
        // hat-Y = Sigma11 [(Pi1+Pi2) hat-varphi + hat-phi]
        c.Bv[k] = c.Wvh[k] + c.Wv[k];
        c.Bph[k] = c.Wph[k];
        c.Beh[k] = c.Weh[k];
        const Matrix kyhat = (c.GY[k] + c.GYh[k]).eval();
        c.Gv[k] = kyhat * f.sig.s11 * P12 + c.Gvh6[k] + c.Gv6[k];
        c.Gph[k] = kyhat * f.sig.s11 + c.Gph6[k];
        c.Geh[k] = c.Geh6[k];
    }
    return c;
}

PathProcess simulate_hat_tilde_varphi(const LeaderSystem& sys, const AffineProcess& phi_tilde_hat,
                                      const BrownianEnsemble& ensemble) {
    const LeaderVarphiCoeffs c = build_leader_varphi_coeffs(sys);
    const TimeGrid& grid = sys.grid;
    const int m = 2 * sys.spec.n;
    AffineSde sde;
    sde.resize(m, grid.nodes());
    for (int i = 0; i <= grid.N; ++i) {
        const double t = grid.t(i);
        const std::size_t k = static_cast<std::size_t>(i);
        const Vector pa = phi_tilde_hat.a(t), pb = phi_tilde_hat.b(t);
        sde.A[k] = c.Bv[k];
        sde.f0[k] = c.Bph[k] * pa + c.Beh[k] * pb;
        sde.fW[k] = c.Bph[k] * pb;
        sde.Gw[k] = c.Gv[k];
        sde.gw0[k] = c.Gph[k] * pa + c.Geh[k] * pb;
        sde.gwW[k] = c.Gph[k] * pb;
    }
    return simulate_affine_sde(sde, Vector::Zero(m), ensemble, nullptr, "simulate_hat_tilde_varphi");
}

}  // namespace lqsg
