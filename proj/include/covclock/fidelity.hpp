// Worst-case entanglement fidelity by three routes: the 1-norm bound chain
// driven by max_Q |p(Q, k)|, direct minimisation over pure bipartite
// inputs, and the generic converse cap for covariant encodings.

#pragma once

#include <covclock/pipeline.hpp>

namespace covclock {

struct FidelityReport {
    double f_lower = std::numeric_limits<double>::quiet_NaN();
    double f_direct = std::numeric_limits<double>::quiet_NaN();
    double f_converse = std::numeric_limits<double>::quiet_NaN();
    bool has_direct = false;
    Vector minimizer;  // bipartite pure state achieving f_direct
};

// f_worst >= 1 - (3/2) sqrt(d_L) d_P sum_k F_0(k) max_Q |p(Q, k)|.
inline double f_worst_lower(const Pipeline& pipe) {
    const BaseCode& b = pipe.code().base;
    return 1.0 - 1.5 * std::sqrt(double(b.d_L())) * double(b.d_P()) * pipe.weighted_pmax_sum();
}

// 1 - dh_L^2 / (16 (dh_Co + L d_C)^2): no decoder can beat this for the
// covariant construction at these parameters.
inline double converse_bound(int dh_L, int dh_Co, int sites, int d_C) {
    double denom = double(dh_Co) + double(sites) * double(d_C);
    if (denom <= 0.0) throw InvalidArgument("converse_bound: dh_Co + L*d_C must be positive");
    return 1.0 - double(dh_L) * double(dh_L) / (16.0 * denom * denom);
}

enum class TheoremCurve { QiLeading, SwpForm, QiLsiteLeading };

// Leading-order analytic reference curves, for overlaying against numerics
// only; the asymptotic constants are not desk-scale testable.
inline double theorem_curve(TheoremCurve kind, int d_C, int d_L, int d_P, int dh_sum,
                            int sites = 1, double c_star = 1.0) {
    switch (kind) {
        case TheoremCurve::QiLeading: {
            double x = std::pow(std::log(double(d_C)), 3) / double(d_C);
            return 1.0 - (3.0 * pi * std::sqrt(double(d_L)) * d_P / 4.0) * x * x * dh_sum * dh_sum;
        }
        case TheoremCurve::QiLsiteLeading: {
            double ld = double(sites) * double(d_C);
            double x = std::pow(std::log(ld), 3) / ld;
            return 1.0 - (3.0 * pi * std::sqrt(double(d_L)) * d_P / 4.0) * x * x * dh_sum * dh_sum;
        }
        case TheoremCurve::SwpForm:
            return 1.0 - c_star / double(d_C);
    }
    throw InvalidArgument("theorem_curve: unknown kind");
}

namespace detail {

// Entanglement fidelity of a pure bipartite input phi (given as the d_L x
// d_L coefficient matrix Phi with |phi> = sum Phi(a,i) |a>|i>):
//   f = sum_{a,b} [R M_ab R](a, b),  R = Phi Phi^dag,
// where M_ab = K(|a><b|).
inline double entanglement_fidelity_value(const std::vector<Matrix>& m_ab, int d_L,
                                          const Vector& phi) {
    Eigen::Map<const Matrix> coeff(phi.data(), d_L, d_L);
    Matrix r = coeff * coeff.adjoint();
    cx f = 0.0;
    for (int a = 0; a < d_L; ++a)
        for (int b = 0; b < d_L; ++b) f += (r * m_ab[std::size_t(a) * d_L + b] * r)(a, b);
    return f.real();
}

inline std::vector<Matrix> channel_basis_images(const ChannelMatrix& ch) {
    std::vector<Matrix> m_ab;
    m_ab.reserve(std::size_t(ch.d_L) * ch.d_L);
    for (int a = 0; a < ch.d_L; ++a)
        for (int b = 0; b < ch.d_L; ++b) {
            Matrix unit = Matrix::Zero(ch.d_L, ch.d_L);
            unit(a, b) = 1.0;
            m_ab.push_back(ch.apply(unit));
        }
    return m_ab;
}

// Gradient-free Nelder-Mead on the real coordinates of phi; the objective
// normalises internally so the walk stays effectively on the unit sphere.
template <typename F>
std::pair<double, RealVector> nelder_mead(F&& objective, RealVector start, double tol,
                                          int max_iter) {
    const int n = int(start.size());
    const double step = 0.35;
    std::vector<RealVector> simplex;
    simplex.push_back(start);
    for (int i = 0; i < n; ++i) {
        RealVector v = start;
        v(i) += step;
        simplex.push_back(std::move(v));
    }
    std::vector<double> value(simplex.size());
    for (std::size_t i = 0; i < simplex.size(); ++i) value[i] = objective(simplex[i]);

    auto order = [&] {
        std::vector<std::size_t> idx(simplex.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return value[a] < value[b]; });
        std::vector<RealVector> s2;
        std::vector<double> v2;
        for (auto i : idx) {
            s2.push_back(simplex[i]);
            v2.push_back(value[i]);
        }
        simplex = std::move(s2);
        value = std::move(v2);
    };

    for (int iter = 0; iter < max_iter; ++iter) {
        order();
        if (value.back() - value.front() < tol) break;
        RealVector centroid = RealVector::Zero(n);
        for (std::size_t i = 0; i + 1 < simplex.size(); ++i) centroid += simplex[i];
        centroid /= double(n);

        RealVector reflected = centroid + (centroid - simplex.back());
        double f_ref = objective(reflected);
        if (f_ref < value.front()) {
            RealVector expanded = centroid + 2.0 * (centroid - simplex.back());
            double f_exp = objective(expanded);
            if (f_exp < f_ref) {
                simplex.back() = expanded;
                value.back() = f_exp;
            } else {
                simplex.back() = reflected;
                value.back() = f_ref;
            }
        } else if (f_ref < value[value.size() - 2]) {
            simplex.back() = reflected;
            value.back() = f_ref;
        } else {
            RealVector contracted = centroid + 0.5 * (simplex.back() - centroid);
            double f_con = objective(contracted);
            if (f_con < value.back()) {
                simplex.back() = contracted;
                value.back() = f_con;
            } else {
                for (std::size_t i = 1; i < simplex.size(); ++i) {
                    simplex[i] = simplex.front() + 0.5 * (simplex[i] - simplex.front());
                    value[i] = objective(simplex[i]);
                }
            }
        }
    }
    order();
    return {value.front(), simplex.front()};
}

}  // namespace detail

// min over pure bipartite |phi> of <phi| (K (x) I)(|phi><phi|) |phi> via
// seeded multi-start local minimisation; deterministic for a fixed seed.
inline std::pair<double, Vector> f_worst_direct(const ChannelMatrix& ch, int restarts = 16,
                                                double tol = 1e-9, std::uint64_t seed = 1) {
    if (ch.min_choi_eigenvalue() < -1e-8)
        throw InvariantViolation("f_worst_direct: channel is not completely positive");
    const int d_L = ch.d_L;
    const int m = d_L * d_L;
    auto m_ab = detail::channel_basis_images(ch);

    auto unpack = [m](const RealVector& x) {
        Vector phi(m);
        for (int i = 0; i < m; ++i) phi(i) = cx(x(2 * i), x(2 * i + 1));
        double norm = phi.norm();
        if (norm < 1e-14) phi(0) = 1.0;
        else phi /= norm;
        return phi;
    };
    auto objective = [&](const RealVector& x) {
        return detail::entanglement_fidelity_value(m_ab, d_L, unpack(x));
    };

    double best = std::numeric_limits<double>::infinity();
    RealVector best_x;
    for (int r = 0; r < restarts; ++r) {
        Rng rng(seed + 0x9e3779b97f4a7c15ULL * std::uint64_t(r + 1));
        Vector phi0 = rng.next_unit_vector(m);
        RealVector x0(2 * m);
        for (int i = 0; i < m; ++i) {
            x0(2 * i) = phi0(i).real();
            x0(2 * i + 1) = phi0(i).imag();
        }
        auto [val, x] = detail::nelder_mead(objective, std::move(x0), tol, 4000);
        if (val < best) {
            best = val;
            best_x = std::move(x);
        }
    }
    return {best, unpack(best_x)};
}

}  // namespace covclock
