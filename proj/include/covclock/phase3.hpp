// Three-block majority-voting decoder for an unknown phase error on an
// unknown block.  The error rotates one of the three clock blocks by an
// arbitrary time before measurement; the decoder sees only the three
// outcomes and the known initial marks, picks the circular-median angle,
// and rotates by it.

#pragma once

#include <covclock/fidelity.hpp>

namespace covclock {

// One block targeted (unknown to the decoder) by U(t_ph).
struct PhaseErrorSpec {
    int target_block = 1;  // in {1, 2, 3}
    double t_ph = 0.0;
};

struct ThreeClockOptions {
    bool compute_direct = false;  // assemble the full channel (d^3 outcomes)
    int restarts = 16;
    std::uint64_t seed = 1;
};

namespace detail {

// The outcome sum over all d^3 outcomes collapses by a factor d: the joint
// statistics and |p| are invariant under a global outcome shift matched by
// the phase rule, so one representative per orbit (k_1 = 0) suffices.
inline double three_clock_weighted_pmax(const GridMeasurementModel& grid,
                                        std::span<const double> marks, int q_max) {
    const int d = grid.dim();
    const int g = grid.grid();

    Eigen::VectorXd row0 = grid.table(0).row(0).transpose();
    std::vector<Vector> phase(q_max + 1);
    for (int q = 1; q <= q_max; ++q) {
        phase[q].resize(g);
        for (int j = 0; j < g; ++j) phase[q](j) = cis(-two_pi * double(q) * j / g);
    }

    double total = 0.0;
    std::array<int, 3> k{0, 0, 0};
    Eigen::VectorXd buf(g);
    for (int k2 = 0; k2 < d; ++k2) {
        buf = row0.cwiseProduct(grid.table(1).row(k2).transpose());
        for (int k3 = 0; k3 < d; ++k3) {
            double f0 = 0.0;
            std::vector<cx> fq(q_max + 1, cx(0.0, 0.0));
            for (int j = 0; j < g; ++j) {
                double prod = buf(j) * grid.table(2)(k3, j);
                f0 += prod;
                for (int q = 1; q <= q_max; ++q) fq[q] += prod * phase[q](j);
            }
            f0 /= g;
            if (f0 <= 1e-15) continue;
            k[1] = k2;
            k[2] = k3;
            double k_alpha = k_alpha_three_clock_middle(k, marks, d);
            double pmax = 0.0;
            for (int q = 1; q <= q_max; ++q) {
                cx p = p_ratio(fq[q] / double(g), f0, k_alpha, q, d);
                pmax = std::max(pmax, std::abs(p));
            }
            total += f0 * pmax;
        }
    }
    return double(d) * total;
}

}  // namespace detail

// Runs the three-block pipeline: apply U(t_ph) to the target block, measure
// all three blocks in the time basis, choose k_alpha by the middle angle,
// decode.  The decoder path never reads err (the marks come from the
// original block state; evolve() keeps the mark).
inline FidelityReport three_clock_pipeline(const BaseCode& base, const ClockState& block,
                                           const PhaseErrorSpec& err,
                                           const ThreeClockOptions& opt = {}) {
    if (err.target_block < 1 || err.target_block > 3)
        throw InvalidArgument("three_clock_pipeline: target block must be 1, 2 or 3");
    const int d = block.dim();
    Generator clock_gen = Generator::clock(d, base.gen_L.omega);

    std::vector<ClockState> blocks{block, block, block};
    blocks[err.target_block - 1] = evolve(blocks[err.target_block - 1], err.t_ph, clock_gen);

    std::array<double, 3> marks{block.time_mark(), block.time_mark(), block.time_mark()};

    std::vector<const ClockState*> ptrs{&blocks[0], &blocks[1], &blocks[2]};
    GridMeasurementModel grid(ptrs, base.q_range());

    FidelityReport report;
    report.f_lower = 1.0 - 1.5 * std::sqrt(double(base.d_L())) * double(base.d_P()) *
                               detail::three_clock_weighted_pmax(grid, marks, base.q_range());
    report.f_converse = converse_bound(base.gen_L.delta_h(), base.gen_Co.delta_h(),
                                       block.embed_factor, block.per_site_dim);

    if (opt.compute_direct) {
        CovariantCode cov{base, blocks, {}};
        Pipeline pipe(std::move(cov), 0, KAlphaMode::ThreeClockMiddle);
        auto [value, state] = f_worst_direct(pipe.full_channel(), opt.restarts, 1e-9, opt.seed);
        report.f_direct = value;
        report.minimizer = std::move(state);
        report.has_direct = true;
    }
    return report;
}

}  // namespace covclock
