#include "lqsg/model.hpp"

#include <Eigen/Eigenvalues>

namespace lqsg {

namespace {

constexpr double kPsdTol = -1e-10;
constexpr double kPdTol = 1e-12;

void require_shape(const CoefficientFn& f, Eigen::Index r, Eigen::Index c, const char* name) {
    if (f.rows() != r || f.cols() != c)
        throw StructuralError(std::string("spec field ") + name + ": expected " + std::to_string(r) + "x" +
                              std::to_string(c) + ", got " + std::to_string(f.rows()) + "x" +
                              std::to_string(f.cols()));
}

double min_eigenvalue_sym(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

bool is_symmetric(const Matrix& m, double tol = 1e-9) {
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

}  // namespace

void check_shapes(const LQGameSpec& spec) {
    const Eigen::Index n = spec.n, k1 = spec.k1, k2 = spec.k2;
    if (n < 1 || k1 < 1 || k2 < 1) throw StructuralError("spec dimensions must be positive");
    require_shape(spec.A, n, n, "A");
    require_shape(spec.B1, n, k1, "B1");
    require_shape(spec.B2, n, k2, "B2");
    require_shape(spec.C1, n, n, "C1");
    require_shape(spec.C2, n, n, "C2");
    require_shape(spec.Q1, n, n, "Q1");
    require_shape(spec.Q2, n, n, "Q2");
    require_shape(spec.S1, n, n, "S1");
    require_shape(spec.S2, n, n, "S2");
    require_shape(spec.N1, n, n, "N1");
    require_shape(spec.N2, n, n, "N2");
    require_shape(spec.R1, k1, k1, "R1");
    require_shape(spec.R2, k2, k2, "R2");
    if (spec.G1.rows() != n || spec.G1.cols() != n) throw StructuralError("spec field G1: wrong shape");
    if (spec.G2.rows() != n || spec.G2.cols() != n) throw StructuralError("spec field G2: wrong shape");
    if (spec.terminal.c0.size() != n) throw StructuralError("spec field terminal.c0: wrong length");
    if (spec.terminal.c1.size() != n) throw StructuralError("spec field terminal.c1: wrong length");
    if (spec.terminal.c2.size() != 0 && spec.terminal.c2.size() != n)
        throw StructuralError("spec field terminal.c2: wrong length");
}

AssumptionReport validate_spec(const LQGameSpec& spec, const TimeGrid& grid) {
    check_shapes(spec);
    AssumptionReport report;

    auto fail = [&](const std::string& assumption, const std::string& field, double t, double ev,
                    const std::string& msg) {
        report.passed = false;
        report.violations.push_back({assumption, field, t, ev, msg});
    };

    struct PsdCheck {
        const CoefficientFn* f;
        const char* name;
    };
    const PsdCheck psd[] = {{&spec.Q1, "Q1"}, {&spec.S1, "S1"}, {&spec.S2, "S2"},
                            {&spec.Q2, "Q2"}, {&spec.N1, "N1"}, {&spec.N2, "N2"}};
    const PsdCheck pd[] = {{&spec.R1, "R1"}, {&spec.R2, "R2"}};

    for (int i = 0; i <= grid.N; ++i) {
        const double t = grid.t(i);
        for (const auto& chk : psd) {
            const Matrix m = (*chk.f)(t);
            if (!is_symmetric(m)) {
                fail("symmetric weight", chk.name, t, 0.0, std::string(chk.name) + " not symmetric at t");
                continue;
            }
            const double ev = min_eigenvalue_sym(m);
            if (ev < kPsdTol)
                fail("positive semidefinite weight", chk.name, t, ev,
                     std::string(chk.name) + " not positive semidefinite at t");
        }
        for (const auto& chk : pd) {
            const Matrix m = (*chk.f)(t);
            if (!is_symmetric(m)) {
                fail("symmetric control weight", chk.name, t, 0.0, std::string(chk.name) + " not symmetric at t");
                continue;
            }
            const double ev = min_eigenvalue_sym(m);
            if (!(ev > kPdTol)) {
                fail("positive definite control weight", chk.name, t, ev,
                     std::string(chk.name) + " not positive definite at t");
            } else {
                const Matrix inv = m.inverse();
                const double defect = (m * inv - Matrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
                report.max_inverse_defect = std::max(report.max_inverse_defect, defect);
            }
        }
    }

    for (const auto& [g, name] : {std::pair{&spec.G1, "G1"}, std::pair{&spec.G2, "G2"}}) {
        if (!is_symmetric(*g)) {
            fail("symmetric terminal weight", name, 0.0, 0.0, std::string(name) + " not symmetric");
        } else {
            const double ev = min_eigenvalue_sym(*g);
            if (ev < kPsdTol)
                fail("positive semidefinite terminal weight", name, 0.0, ev,
                     std::string(name) + " not positive semidefinite");
        }
    }
    return report;
}

std::map<std::string, std::vector<Matrix>> sample_coefficients(const LQGameSpec& spec, const TimeGrid& grid) {
    check_shapes(spec);
    std::map<std::string, std::vector<Matrix>> out;
    const std::pair<const CoefficientFn*, const char*> fns[] = {
        {&spec.A, "A"},   {&spec.B1, "B1"}, {&spec.B2, "B2"}, {&spec.C1, "C1"}, {&spec.C2, "C2"},
        {&spec.Q1, "Q1"}, {&spec.Q2, "Q2"}, {&spec.S1, "S1"}, {&spec.S2, "S2"}, {&spec.N1, "N1"},
        {&spec.N2, "N2"}, {&spec.R1, "R1"}, {&spec.R2, "R2"}};
    const double h = 0.5 * grid.dt();
    for (const auto& [f, name] : fns) {
        std::vector<Matrix> vals;
        vals.reserve(2 * grid.N + 1);
        for (int i = 0; i <= 2 * grid.N; ++i) {
            const double t = h * static_cast<double>(i);
            Matrix m = (*f)(t);
            if (!m.allFinite())
                throw NumericalError("model", "sample_coefficients", t,
                                     std::string("coefficient ") + name + " evaluated non-finite");
            vals.push_back(std::move(m));
        }
        out.emplace(name, std::move(vals));
    }
    return out;
}

Vector terminal_value(const TerminalCondition& tc, double WT, double WtT) {
    Vector xi = tc.c0 + tc.c1 * WT;
    if (tc.c2.size() > 0) xi += tc.c2 * WtT;
    return xi;
}

}  // namespace lqsg
