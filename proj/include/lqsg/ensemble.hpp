#pragma once

#include <cstdint>

#include "lqsg/types.hpp"

namespace lqsg {

/// M sampled paths of the independent pair (W, Wt) as per-step increments on
/// the grid. Per-path substreams are derived from the master seed, so any path
/// is reproducible in isolation and regeneration is bit-identical.
class BrownianEnsemble {
public:
    BrownianEnsemble() = default;

    static BrownianEnsemble generate(std::uint64_t seed, int paths, const TimeGrid& grid, bool antithetic = false);

    int paths() const { return M_; }
    const TimeGrid& grid() const { return grid_; }
    std::uint64_t seed() const { return seed_; }

    double dW(int path, int step) const { return dw_[idx(path, step)]; }
    double dWt(int path, int step) const { return dwt_[idx(path, step)]; }

    /// W(t_i) for one path (prefix sum over increments).
    double W_at(int path, int node) const;
    double Wt_at(int path, int node) const;

    /// Same Brownian paths on the halved grid (adjacent increments summed).
    BrownianEnsemble coarsen() const;

    /// Rotate the Wt streams across paths, leaving W untouched. Filters that
    /// depend on W only must be bit-identical under this operation.
    BrownianEnsemble with_rotated_wtilde(int shift = 1) const;

    /// Independent single-path generation used to check substream isolation.
    static std::vector<double> single_path_dW(std::uint64_t seed, int path, int steps, double dt);

private:
    std::size_t idx(int path, int step) const {
        return static_cast<std::size_t>(path) * static_cast<std::size_t>(grid_.N) + static_cast<std::size_t>(step);
    }

    std::uint64_t seed_ = 0;
    int M_ = 0;
    TimeGrid grid_;
    std::vector<double> dw_;
    std::vector<double> dwt_;
};

struct MCEstimate {
    Vector mean;
    Vector standard_error;
    int paths = 0;
};

MCEstimate estimate_mean(const std::vector<Vector>& samples);

}  // namespace lqsg
