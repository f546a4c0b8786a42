#include "lqsg/ensemble.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace lqsg {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Standard normals via Box-Muller on explicitly constructed uniforms; avoids
/// the implementation-defined std::normal_distribution.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : eng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    double uniform01() {
        // (0, 1]: log() stays finite
        return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
    }

    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

void fill_path(std::vector<double>& dst, std::size_t offset, std::uint64_t seed, int steps, double sqdt) {
    GaussianStream g(seed);
    for (int k = 0; k < steps; ++k) dst[offset + static_cast<std::size_t>(k)] = sqdt * g.next();
}

std::uint64_t path_seed(std::uint64_t master, int path, int stream) {
    return splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(path) * 2ULL + static_cast<std::uint64_t>(stream)));
}

}  // namespace

BrownianEnsemble BrownianEnsemble::generate(std::uint64_t seed, int paths, const TimeGrid& grid, bool antithetic) {
    if (paths < 1) throw StructuralError("BrownianEnsemble: need at least one path");
    BrownianEnsemble e;
    e.seed_ = seed;
    e.M_ = paths;
    e.grid_ = grid;
    const std::size_t total = static_cast<std::size_t>(paths) * static_cast<std::size_t>(grid.N);
    e.dw_.resize(total);
    e.dwt_.resize(total);
    const double sqdt = std::sqrt(grid.dt());
    const int base = antithetic ? (paths + 1) / 2 : paths;
    for (int p = 0; p < base; ++p) {
        fill_path(e.dw_, e.idx(p, 0), path_seed(seed, p, 0), grid.N, sqdt);
        fill_path(e.dwt_, e.idx(p, 0), path_seed(seed, p, 1), grid.N, sqdt);
    }
    if (antithetic) {
        for (int p = base; p < paths; ++p) {
            const int src = p - base;
            for (int k = 0; k < grid.N; ++k) {
                e.dw_[e.idx(p, k)] = -e.dw_[e.idx(src, k)];
                e.dwt_[e.idx(p, k)] = -e.dwt_[e.idx(src, k)];
            }
        }
    }
    return e;
}

double BrownianEnsemble::W_at(int path, int node) const {
    KahanSum s;
    for (int k = 0; k < node; ++k) s.add(dw_[idx(path, k)]);
    return s.value();
}

double BrownianEnsemble::Wt_at(int path, int node) const {
    KahanSum s;
    for (int k = 0; k < node; ++k) s.add(dwt_[idx(path, k)]);
    return s.value();
}

BrownianEnsemble BrownianEnsemble::coarsen() const {
    if (grid_.N % 2 != 0) throw StructuralError("BrownianEnsemble::coarsen: step count must be even");
    BrownianEnsemble e;
    e.seed_ = seed_;
    e.M_ = M_;
    e.grid_ = TimeGrid(grid_.T, grid_.N / 2);
    const std::size_t total = static_cast<std::size_t>(M_) * static_cast<std::size_t>(e.grid_.N);
    e.dw_.resize(total);
    e.dwt_.resize(total);
    for (int p = 0; p < M_; ++p)
        for (int k = 0; k < e.grid_.N; ++k) {
            e.dw_[e.idx(p, k)] = dw_[idx(p, 2 * k)] + dw_[idx(p, 2 * k + 1)];
            e.dwt_[e.idx(p, k)] = dwt_[idx(p, 2 * k)] + dwt_[idx(p, 2 * k + 1)];
        }
    return e;
}

BrownianEnsemble BrownianEnsemble::with_rotated_wtilde(int shift) const {
    BrownianEnsemble e = *this;
    for (int p = 0; p < M_; ++p) {
        const int src = (p + shift) % M_;
        for (int k = 0; k < grid_.N; ++k) e.dwt_[e.idx(p, k)] = dwt_[idx(src, k)];
    }
    return e;
}

std::vector<double> BrownianEnsemble::single_path_dW(std::uint64_t seed, int path, int steps, double dt) {
    std::vector<double> out(static_cast<std::size_t>(steps));
    fill_path(out, 0, path_seed(seed, path, 0), steps, std::sqrt(dt));
    return out;
}

MCEstimate estimate_mean(const std::vector<Vector>& samples) {
    MCEstimate est;
    est.paths = static_cast<int>(samples.size());
    if (samples.empty()) return est;
    const Eigen::Index d = samples.front().size();
    est.mean = Vector::Zero(d);
    est.standard_error = Vector::Zero(d);
    for (Eigen::Index k = 0; k < d; ++k) {
        std::vector<double> comp(samples.size());
        for (std::size_t j = 0; j < samples.size(); ++j) comp[j] = samples[j](k);
        est.mean(k) = mean_of(comp);
        est.standard_error(k) = standard_error_of(comp);
    }
    return est;
}

}  // namespace lqsg
