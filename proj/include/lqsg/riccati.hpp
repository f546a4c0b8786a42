#pragma once

#include "lqsg/model.hpp"
#include "lqsg/ode.hpp"

namespace lqsg {

/// Block coefficients of the leader's stacked 2n-dimensional system at one time.
/// Stacking: X = (hat-varphi; Q), Y = (p; y), Z = (q1; z), Zt = (0; zt).
struct AugmentedCoefficients {
    Matrix A1, A1t;   // drift blocks on X and the dW loading of X
    Matrix A2, A2t;   // loadings on hat-X and the dWt loading of X
    Matrix B1, B2;    // loadings on Y and hat-Y in the forward equation
    Matrix B2t, D;    // 2n x k2 control loadings (backward resp. forward equation)
    Matrix C1t, C2t, C3t;
    Matrix F1, C;
    Matrix Gbar;      // initial coupling X(0) = Gbar Y(0)
};

/// The eleven composite matrices entering the leader decoupling at one time.
struct SigmaBundle {
    Matrix s1, s2, s3, s4, s5, s6, s7, s8, s9, s10, s11;
};

/// Follower Riccati pair.
///   P1:  dP1 + A P1 + P1 A' - P1 Q1 P1 + B1 R1^-1 B1' + C1 (P1 S1 + I)^-1 P1 C1'
///        + C2 (P1 S2 + I)^-1 P1 C2' = 0,   P1(T) = 0, integrated backward.
///   P2:  dP2 - A' P2 - P2 A + P2 B1 R1^-1 B1' P2 + P2 C1 (P1 S1 + I)^-1 P1 C1' P2
///        + P2 C2 (P1 S2 + I)^-1 P1 C2' P2 - Q1 = 0,   P2(0) = G1, forward.
/// Both are symmetrized each step.
MatrixPath solve_P1(const LQGameSpec& spec, const TimeGrid& grid);
MatrixPath solve_P2(const LQGameSpec& spec, const TimeGrid& grid, const MatrixPath& P1);

/// Assemble every block of the leader system at time t from the primitive
/// coefficients and the solved follower pair.
AugmentedCoefficients build_augmented(const LQGameSpec& spec, const MatrixPath& P1, const MatrixPath& P2, double t);

struct LeaderRiccatis {
    MatrixPath Pi1, Pi2, Pi3, Pi4;
};

/// Solve the four leader Riccati equations in dependency order
/// (Pi1 backward, then Pi2 backward, then Pi3 forward, then Pi4 forward).
LeaderRiccatis solve_leader_riccatis(const LQGameSpec& spec, const MatrixPath& P1, const MatrixPath& P2,
                                     const TimeGrid& grid);

SigmaBundle assemble_sigma(const AugmentedCoefficients& aug, const Matrix& R2inv, const Matrix& Pi1,
                           const Matrix& Pi2, const Matrix& Pi3, const Matrix& Pi4, double t,
                           InverseTracker& tracker);

/// Everything the leader pipeline needs at a single grid time.
struct LeaderFrame {
    AugmentedCoefficients aug;
    Matrix Pi1, Pi2, Pi3, Pi4;
    SigmaBundle sig;
    Matrix R2inv;

    /// Coefficient of hat-X in the Z recovery display:
    /// S4 S2 + S4 S3 S1 (Pi1+Pi2) A1t + S4 Pi2 A1t + S4 S3 S1 S2.
    Matrix k_xhat() const;
    /// Coefficient of hat-tilde-phi in the Z recovery display:
    /// S4 S3 S1 (Pi1+Pi2) C' + S4 (Pi1+Pi2) C'.
    Matrix k_phihat() const;
};

/// Solved follower + leader Riccati data with dense-output access.
struct LeaderSystem {
    LQGameSpec spec;
    TimeGrid grid;
    MatrixPath P1, P2;
    LeaderRiccatis pis;

    LeaderFrame frame_at(double t) const;
};

LeaderSystem solve_leader_system(const LQGameSpec& spec, const TimeGrid& grid);

/// Sup-norm central-difference residuals of the six Riccati displays along the
/// solved paths (second-order one-sided stencils at the endpoints).
struct RiccatiResiduals {
    double p1 = 0, p2 = 0, pi1 = 0, pi2 = 0, pi3 = 0, pi4 = 0;
    double max() const;
};

RiccatiResiduals riccati_residuals(const LeaderSystem& sys);

/// CSV export: columns t then row-major matrix entries.
void export_riccati_csv(const MatrixPath& path, const std::string& name, const std::string& filename);

}  // namespace lqsg
