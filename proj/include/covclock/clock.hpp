// Finite-dimensional clock states over the compact U(1) representation
// generated by H_C = sum_r omega r |r><r|.  The two families built here are
// the Salecker-Wigner-Peres states (single vectors of the discrete Fourier
// "time basis") and the Quasi-Ideal states (Gaussian-weighted coherent
// superpositions of time-basis vectors), plus an entangled multi-site
// embedding represented directly in its effective non-degenerate subspace.

#pragma once

#include <covclock/core.hpp>

#include <algorithm>
#include <optional>

namespace covclock {

// Integer energy-level list h_n with a common frequency omega.  Levels may
// repeat (degeneracy) and are never reordered.
struct Generator {
    std::vector<int> levels;
    double omega = 1.0;

    // Non-degenerate clock spectrum 0, 1, ..., d-1.
    static Generator clock(int d, double omega = 1.0) {
        Generator g;
        g.levels.resize(d);
        for (int r = 0; r < d; ++r) g.levels[r] = r;
        g.omega = omega;
        return g;
    }

    static Generator constant(int d, int level = 0, double omega = 1.0) {
        Generator g;
        g.levels.assign(d, level);
        g.omega = omega;
        return g;
    }

    int dim() const { return int(levels.size()); }

    int delta_h() const {
        if (levels.empty()) return 0;
        auto [lo, hi] = std::minmax_element(levels.begin(), levels.end());
        return *hi - *lo;
    }

    double period() const { return two_pi / omega; }

    Matrix hamiltonian() const {
        Matrix h = Matrix::Zero(dim(), dim());
        for (int n = 0; n < dim(); ++n) h(n, n) = omega * levels[n];
        return h;
    }

    // U(t) = exp(-i t H) as a diagonal matrix.
    Matrix unitary(double t) const {
        Matrix u = Matrix::Zero(dim(), dim());
        for (int n = 0; n < dim(); ++n) u(n, n) = cis(-omega * levels[n] * t);
        return u;
    }
};

enum class ClockKind { SWP, QuasiIdeal, Custom };

// Pure clock state held as a complex amplitude vector in the energy
// eigenbasis {|r>}.  `embed_factor` > 1 marks a state standing in for an
// L-site entangled block; `dim()` is then the effective dimension
// L*(per_site_dim-1)+1 and the full tensor representation is never formed.
struct ClockState {
    Vector amps;
    ClockKind kind = ClockKind::Custom;
    double k0 = 0.0;     // initial time mark (k_0 for SWP, k_1^0 for Quasi-Ideal)
    double n0 = 0.0;     // Quasi-Ideal mean-energy parameter
    double sigma = 0.0;  // Quasi-Ideal width
    int embed_factor = 1;
    int per_site_dim = 0;

    int dim() const { return int(amps.size()); }

    // Decoders estimate elapsed time relative to this mark.
    double time_mark() const { return kind == ClockKind::Custom ? 0.0 : k0; }

    Matrix density() const { return amps * amps.adjoint(); }
};

// |theta_k> = (1/sqrt d) sum_r e^{-i 2 pi k r / d} |r>, with k understood
// mod d.
inline ClockState make_time_basis_state(int d, long k) {
    if (d < 1) throw InvalidArgument("time basis state: dimension must be >= 1");
    ClockState s;
    s.amps.resize(d);
    const double step = -two_pi * positive_imod(k, d) / d;
    for (int r = 0; r < d; ++r) s.amps(r) = cis(step * r) / std::sqrt(double(d));
    s.kind = ClockKind::SWP;
    s.k0 = double(positive_imod(k, d));
    s.per_site_dim = d;
    return s;
}

// The d consecutive integers centred about k1_0:
//   S_d(k1_0) = { k in Z : -d/2 <= k1_0 - k < d/2 },
// i.e. k ranges over (k1_0 - d/2, k1_0 + d/2].  When k1_0 + d/2 is an
// integer it is the maximal element.
inline std::pair<long, long> quasi_ideal_window(int d, double k1_0) {
    long k_max = long(std::floor(k1_0 + d / 2.0));
    long k_min = k_max - d + 1;
    return {k_min, k_max};
}

// Gaussian-weighted superposition of time-basis states,
//   sum_{k in S_d(k1_0)} A e^{-pi (k - k1_0)^2 / sigma^2}
//                          e^{ i 2 pi n0 (k - k1_0) / d} |theta_k>,
// with A fixed numerically so the state has unit norm.
inline ClockState make_quasi_ideal_state(int d, double k1_0, double n0, double sigma) {
    if (d < 2) throw InvalidArgument("quasi-ideal state: dimension must be >= 2");
    if (!(sigma > 0.0 && sigma < double(d)))
        throw InvalidArgument("quasi-ideal state: sigma must lie in (0, d)");
    if (!(n0 > 0.0 && n0 < double(d - 1)))
        throw InvalidArgument("quasi-ideal state: n0 must lie in (0, d-1)");

    auto [k_min, k_max] = quasi_ideal_window(d, k1_0);
    Vector amps = Vector::Zero(d);
    const double inv_sqrt_d = 1.0 / std::sqrt(double(d));
    for (long k = k_min; k <= k_max; ++k) {
        double dk = double(k) - k1_0;
        cx psi = std::exp(-pi * dk * dk / (sigma * sigma)) * cis(two_pi * n0 * dk / d);
        // expand |theta_k> in the energy basis; e^{-i 2 pi k r / d} is
        // periodic in k so no explicit mod is needed
        for (int r = 0; r < d; ++r)
            amps(r) += psi * cis(-two_pi * double(k) * r / d) * inv_sqrt_d;
    }
    amps /= amps.norm();

    ClockState s;
    s.amps = std::move(amps);
    s.kind = ClockKind::QuasiIdeal;
    s.k0 = k1_0;
    s.n0 = n0;
    s.sigma = sigma;
    s.per_site_dim = d;
    return s;
}

// n0 defaults to (d-1)/2, the centre of the spectrum.
inline ClockState make_quasi_ideal_state(int d, double k1_0, double sigma) {
    return make_quasi_ideal_state(d, k1_0, (d - 1) / 2.0, sigma);
}

inline ClockState make_custom_state(Vector amps) {
    if (amps.size() < 1) throw InvalidArgument("custom state: empty amplitude vector");
    double norm = amps.norm();
    if (norm < 1e-12) throw InvalidArgument("custom state: zero vector");
    ClockState s;
    s.amps = amps / norm;
    s.kind = ClockKind::Custom;
    s.per_site_dim = int(s.amps.size());
    return s;
}

// amplitude_r <- e^{-i omega h_r t} amplitude_r.
inline ClockState evolve(const ClockState& state, double t, const Generator& gen) {
    if (gen.dim() != state.dim())
        throw InvalidArgument("evolve: generator level count must match state dimension");
    ClockState out = state;
    for (int r = 0; r < state.dim(); ++r)
        out.amps(r) *= cis(-gen.omega * gen.levels[r] * t);
    return out;
}

// Parameters for building a clock without fixing the dimension yet; used by
// the multi-site embedding.
struct ClockSpec {
    ClockKind kind = ClockKind::SWP;
    double k0 = 0.0;
    double sigma = 1.0;              // Quasi-Ideal only
    std::optional<double> n0;        // defaults to (d_eff - 1)/2

    ClockState build(int d) const {
        switch (kind) {
            case ClockKind::SWP:
                return make_time_basis_state(d, long(std::llround(k0)));
            case ClockKind::QuasiIdeal:
                return make_quasi_ideal_state(d, k0, n0.value_or((d - 1) / 2.0), sigma);
            default:
                throw InvalidArgument("clock spec: custom states have no parametric form");
        }
    }
};

// Entangled block of L clocks of per-site dimension d_C, represented in the
// maximal non-degenerate subspace of the L-fold Kronecker-sum generator.
// That subspace carries the spectrum 0..L(d_C-1), so the block behaves
// exactly like a single clock of dimension L(d_C-1)+1 and is stored that
// way.
inline ClockState embed_sites(int per_site_dim, int sites, const ClockSpec& spec) {
    if (sites < 1) throw InvalidArgument("embed_sites: site count must be >= 1");
    if (per_site_dim < 2) throw InvalidArgument("embed_sites: per-site dimension must be >= 2");
    int d_eff = sites * (per_site_dim - 1) + 1;
    ClockState s = spec.build(d_eff);
    s.embed_factor = sites;
    s.per_site_dim = per_site_dim;
    return s;
}

// True iff some point of the periodic orbit U(t0) rho U(t0)^dag is diagonal
// in the time basis, tested on a uniform grid of t0 values (the continuous
// quantifier cannot be checked exactly; grid defaults to 8*d points).
inline bool is_t_incoherent(const ClockState& state, const Generator& gen,
                            int grid = 0, double tol = 1e-8) {
    const int d = state.dim();
    if (grid <= 0) grid = 8 * d;
    if (grid < d) throw InvalidArgument("is_t_incoherent: grid must be >= dim");
    Matrix w = time_basis_transform(d);
    const double period = gen.period();
    double best = std::numeric_limits<double>::infinity();
    for (int g = 0; g < grid; ++g) {
        ClockState moved = evolve(state, period * g / grid, gen);
        Vector theta_amps = w * moved.amps;  // components <theta_k|psi>
        // For a pure state the off-diagonal Frobenius norm in the theta
        // basis is sqrt(1 - sum_k |<theta_k|psi>|^4).
        double purity4 = 0.0;
        for (int k = 0; k < d; ++k) {
            double p = std::norm(theta_amps(k));
            purity4 += p * p;
        }
        best = std::min(best, std::sqrt(std::max(0.0, 1.0 - purity4)));
        if (best < tol) return true;
    }
    return best < tol;
}

}  // namespace covclock
