// Reference-frame alignment benchmark: a qubit message sent through a
// time-twirl channel together with a clock frame decoheres with
// probability p = (A1 - A2)/A1, where A1 and A2 are infinite-time averages
// of the frame's autocorrelation.  For integer spectra both reduce to
// exact sums over the energy populations, so the message qubit is never
// materialised.

#pragma once

#include <covclock/clock.hpp>

namespace covclock {

struct AlignmentResult {
    double a1 = 0.0;
    double a2 = 0.0;
    double p = 1.0;
};

// A1 = sum over level-equal pairs of |c_r|^2 |c_r'|^2, A2 the same with
// the levels offset by `gap` (the message qubit's energy gap in units of
// omega).  For the non-degenerate clock spectrum these are sum_r |c_r|^4
// and sum_r |c_r|^2 |c_{r+gap}|^2.
inline AlignmentResult alignment_probability(const ClockState& frame, const Generator& gen,
                                             int gap = 1) {
    if (gen.dim() != frame.dim())
        throw InvalidArgument("alignment: generator level count must match frame dimension");
    if (gap < 1) throw InvalidArgument("alignment: qubit gap must be a positive level offset");
    const int d = frame.dim();
    std::vector<double> pop(d);
    for (int r = 0; r < d; ++r) pop[r] = std::norm(frame.amps(r));

    double a1 = 0.0, a2 = 0.0;
    for (int r = 0; r < d; ++r) {
        for (int rp = 0; rp < d; ++rp) {
            if (gen.levels[r] == gen.levels[rp]) a1 += pop[r] * pop[rp];
            if (gen.levels[rp] == gen.levels[r] + gap) a2 += pop[r] * pop[rp];
        }
    }
    AlignmentResult res;
    res.a1 = a1;
    res.a2 = a2;
    if (a1 <= 0.0) throw InvariantViolation("alignment: A1 vanished for a normalized frame");
    res.p = (a1 - a2) / a1;
    return res;
}

// Same quantities by exact uniform-grid averaging of |<psi|U(t)|psi>|^2
// over one period.  The integrands are trigonometric polynomials of degree
// delta_h + gap, so the grid must exceed twice that; smaller grids are
// refused rather than silently approximated.
inline AlignmentResult alignment_probability_timeavg(const ClockState& frame,
                                                     const Generator& gen, int grid,
                                                     int gap = 1) {
    if (gen.dim() != frame.dim())
        throw InvalidArgument("alignment oracle: generator level count must match frame dimension");
    const int degree = gen.delta_h() + gap;
    if (grid < 2 * degree + 1)
        throw InvalidArgument("alignment oracle: grid of " + std::to_string(grid) +
                              " points cannot integrate degree " + std::to_string(degree) +
                              " exactly");
    const double period = gen.period();
    double a1 = 0.0;
    cx a2 = 0.0;
    for (int j = 0; j < grid; ++j) {
        double t = period * j / grid;
        cx auto_corr = 0.0;
        for (int r = 0; r < frame.dim(); ++r)
            auto_corr += std::norm(frame.amps(r)) * cis(-gen.omega * gen.levels[r] * t);
        double weight = std::norm(auto_corr);
        a1 += weight;
        a2 += weight * cis(-gen.omega * gap * t);
    }
    AlignmentResult res;
    res.a1 = a1 / grid;
    res.a2 = a2.real() / grid;
    if (res.a1 <= 0.0) throw InvariantViolation("alignment oracle: A1 vanished");
    res.p = (res.a1 - res.a2) / res.a1;
    return res;
}

}  // namespace covclock
