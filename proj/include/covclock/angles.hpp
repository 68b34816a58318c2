// Circular statistics on the discrete angle set {0, 1, ..., d-1}: the
// two-case distance rule and the circular median ("middle angle") used by
// the three-clock majority-voting decoder.

#pragma once

#include <covclock/core.hpp>

#include <array>

namespace covclock {

inline bool nearly_integer(double x) { return std::abs(x - std::llround(x)) < 1e-9; }

// Distance between two angles on a d-cycle.  Integer angles on an even
// cycle use the verbatim two-case rule
//   raw           if raw <= d/2 - 1,
//   d - raw       if raw >= d/2,
// with raw = | [a]_d - [b]_d |; everything else falls back to the natural
// circular distance min(m, d - m), m = |a - b| mod d, which agrees with
// the two-case rule wherever both apply.
inline double circular_delta(double a, double b, int d) {
    if (d < 1) throw InvalidArgument("circular_delta: cycle length must be positive");
    if (d % 2 == 0 && nearly_integer(a) && nearly_integer(b)) {
        long ai = positive_imod(std::llround(a), d);
        long bi = positive_imod(std::llround(b), d);
        long raw = std::labs(ai - bi);
        if (raw <= d / 2 - 1) return double(raw);
        return double(d - raw);
    }
    double m = positive_fmod(std::abs(a - b), double(d));
    return std::min(m, double(d) - m);
}

struct AngleTriple {
    std::array<double, 3> gamma;  // each taken mod d
    int d = 0;
};

struct MiddleAngle {
    double value = 0.0;
    int location = 0;  // 1-based index of the chosen angle
};

// Circular median of three angles: compute the pairwise distances, find
// the pair set holding the two smallest, return the angle common to that
// pair.  Ties resolve by checking the cases in fixed order, so the result
// is reproducible.
inline MiddleAngle middle_angle(const AngleTriple& t) {
    const double d12 = circular_delta(t.gamma[0], t.gamma[1], t.d);
    const double d13 = circular_delta(t.gamma[0], t.gamma[2], t.d);
    const double d23 = circular_delta(t.gamma[1], t.gamma[2], t.d);
    int w;
    if (d12 >= d13 && d12 >= d23)
        w = 3;  // {d13, d23} smallest, index 3 common
    else if (d23 >= d12 && d23 >= d13)
        w = 1;  // {d13, d12} smallest, index 1 common
    else
        w = 2;  // {d12, d23} smallest, index 2 common
    return {positive_fmod(t.gamma[w - 1], double(t.d)), w};
}

}  // namespace covclock
