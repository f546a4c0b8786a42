#pragma once

#include "lqsg/affine.hpp"
#include "lqsg/riccati.hpp"

namespace lqsg {

/// Filter BSDE of the follower,
///   -d hat-phi = { -[P1 Q1 - A] hat-phi + C1 (P1 S1 + I)^-1 hat-eta - B2 hat-v2 } dt
///                - hat-eta dW,   hat-phi(T) = -hat-xi,
/// solved in the affine class; hat-eta(t) is the b-loading of the result.
AffineProcess solve_hat_phi(const LQGameSpec& spec, const MatrixPath& P1, const TimeGrid& grid,
                            const AffineProcess& v2hat);

/// Node-tabulated coefficients of the follower filter SDE for hat-varphi.
AffineSde build_hat_varphi_sde(const LQGameSpec& spec, const MatrixPath& P1, const MatrixPath& P2,
                               const AffineProcess& phi_hat, const TimeGrid& grid, const AffineProcess& v2hat);

/// Forward filter of the follower: Euler-Maruyama from hat-varphi(0) = 0 of
/// the linear SDE whose drift and dW coefficient are affine in
/// (hat-varphi, hat-phi, hat-eta, hat-v2); driven by W increments only.
PathProcess simulate_hat_varphi_follower(const LQGameSpec& spec, const MatrixPath& P1, const MatrixPath& P2,
                                         const AffineProcess& phi_hat, const TimeGrid& grid,
                                         const AffineProcess& v2hat, const BrownianEnsemble& ensemble);

/// Leader filter BSDE for (hat-tilde-phi, hat-tilde-eta), 2n-dimensional,
/// terminal (0; hat-xi); affine backend.
AffineProcess solve_hat_tilde_phi(const LeaderSystem& sys);

/// LinearBSDESpec of the leader filter BSDE (shared with the MC backend).
LinearBSDESpec leader_filter_bsde(const LeaderSystem& sys);

struct TildePhiResult {
    bool pathwise = false;          // false: affine identification (STANDARD)
    AffineProcess affine;           // valid when !pathwise
    PathProcess phi;                // valid when pathwise (EXPERIMENTAL)
    PathProcess eta;
    double representation_residual = 0.0;  // E| forward-shot phi(T) - xi_bar |^2
};

/// STANDARD mode returns (tilde-phi, tilde-eta) = (hat-tilde-phi, hat-tilde-eta):
/// with a G1-measurable terminal and G1-adapted generator inputs the full BSDE
/// coincides with its filter. EXPERIMENTAL mode solves the posited dW-only BSDE
/// by regression Monte Carlo and reports the terminal representation defect.
TildePhiResult recover_tilde_phi(const LeaderSystem& sys, const AffineProcess& phi_tilde_hat,
                                 const BrownianEnsemble* ensemble);

/// Node-tabulated coefficient matrices of the leader's forward filter SDE
/// (drift beta-hat and diffusion gamma-hat of hat-tilde-varphi) and of the
/// unfiltered tilde-varphi equation used inside the equilibrium loop.
struct LeaderVarphiCoeffs {
    // d hat-tilde-varphi = [Bv x + Bph phi + Beh eta] dt + [Gv x + Gph phi + Geh eta] dW
    std::vector<Matrix> Bv, Bph, Beh, Gv, Gph, Geh;
    // unfiltered equation: drift [Wv v + Wvh vh + Wph phi + Weh eta],
    // diffusion [GY Y + GYh Yh + Gvh6 vh + Gv6 v + Gph6 phi + Geh6 eta]
    std::vector<Matrix> Wv, Wvh, Wph, Weh;
    std::vector<Matrix> GY, GYh, Gvh6, Gv6, Gph6, Geh6;
};

LeaderVarphiCoeffs build_leader_varphi_coeffs(const LeaderSystem& sys);

/// Forward filter of the leader from 0, driven by W only.
PathProcess simulate_hat_tilde_varphi(const LeaderSystem& sys, const AffineProcess& phi_tilde_hat,
                                      const BrownianEnsemble& ensemble);

}  // namespace lqsg
