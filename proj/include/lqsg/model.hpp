#pragma once

#include <map>
#include <optional>
#include <string>

#include "lqsg/coefficient.hpp"
#include "lqsg/types.hpp"

namespace lqsg {

/// Mode flag for the terminal value xi = c0 + c1 W(T) + c2 Wt(T).
/// STANDARD requires c2 = 0 so that xi is measurable w.r.t. the follower's
/// filtration; EXPERIMENTAL admits a Wt(T) loading and routes the unfiltered
/// backward solves through the Monte Carlo backend.
enum class TerminalMode { Standard, Experimental };

struct TerminalCondition {
    Vector c0;
    Vector c1;
    Vector c2;

    TerminalMode mode() const {
        return (c2.size() == 0 || c2.isZero(0.0)) ? TerminalMode::Standard : TerminalMode::Experimental;
    }
};

/// Two-player LQ game data on [0, T]:
///   backward state  -dy = [A y + B1 v1 + B2 v2 + C1 z + C2 zt] dt - z dW - zt dWt,  y(T) = xi,
///   follower cost   J1 = 1/2 E{ int <Q1 y,y> + <R1 v1,v1> + <S1 z,z> + <S2 zt,zt> dt + <G1 y(0),y(0)> },
///   leader cost     J2 with weights Q2, R2, N1, N2, G2.
/// All coefficients deterministic; G1, G2 constant symmetric PSD matrices.
struct LQGameSpec {
    int n = 1;
    int k1 = 1;
    int k2 = 1;

    CoefficientFn A, B1, B2, C1, C2;
    CoefficientFn Q1, Q2, S1, S2, N1, N2;
    CoefficientFn R1, R2;
    Matrix G1, G2;
    TerminalCondition terminal;

    Matrix A_at(double t) const { return A(t); }
};

struct AssumptionViolation {
    std::string assumption;   // e.g. "R1 positive definite"
    std::string field;        // coefficient name
    double time = 0.0;
    double eigenvalue = 0.0;  // offending smallest eigenvalue where applicable
    std::string message;
};

struct AssumptionReport {
    bool passed = true;
    std::vector<AssumptionViolation> violations;
    double max_inverse_defect = 0.0;  // sup over grid of ||R R^-1 - I||_inf for R1, R2
};

/// Eigenvalue checks of (L1)-(L3) at every grid node. PSD tolerance -1e-10 on
/// the smallest eigenvalue, PD threshold +1e-12.
AssumptionReport validate_spec(const LQGameSpec& spec, const TimeGrid& grid);

/// Shape consistency only; throws StructuralError naming the offending field.
void check_shapes(const LQGameSpec& spec);

/// Deterministic evaluation of every coefficient at all grid nodes and midpoints,
/// keyed by coefficient name; index i holds t = i * dt / 2 on the doubled grid.
std::map<std::string, std::vector<Matrix>> sample_coefficients(const LQGameSpec& spec, const TimeGrid& grid);

/// Draw xi per path from the terminal description and realized (W(T), Wt(T)).
Vector terminal_value(const TerminalCondition& tc, double WT, double WtT);

}  // namespace lqsg
