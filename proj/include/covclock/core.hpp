// Shared linear-algebra helpers and numeric conventions used across the
// library: complex matrices are Eigen::MatrixXcd, all generators have
// integer spectra in units of a common frequency omega, and every time
// average is either an exact sector sum or an exact-degree uniform grid.

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace covclock {

using cx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Thrown when an input violates a documented precondition.
struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when a runtime contract (trace preservation, positivity, ...)
// fails beyond tolerance.
struct InvariantViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline cx cis(double phase) { return {std::cos(phase), std::sin(phase)}; }

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Sum of absolute eigenvalues of a Hermitian matrix (trace norm).
inline double one_norm_hermitian(const Matrix& h) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

// Trace norm of an arbitrary matrix via its singular values.
inline double one_norm(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues().sum();
}

// (1/2)||a - b||_1 for Hermitian a, b.
inline double trace_distance(const Matrix& a, const Matrix& b) {
    return 0.5 * one_norm_hermitian(a - b);
}

inline double min_eigenvalue(const Matrix& h) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

inline bool approx_identity(const Matrix& m, double tol) {
    return (m - Matrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() < tol;
}

inline double offdiag_frobenius(const Matrix& m) {
    double total = m.squaredNorm();
    double diag = m.diagonal().squaredNorm();
    return std::sqrt(std::max(0.0, total - diag));
}

// Row k is <theta_k| written in the energy basis: W(k, r) = e^{i 2 pi k r / d} / sqrt(d).
inline Matrix time_basis_transform(int d) {
    Matrix w(d, d);
    const double step = two_pi / d;
    for (int k = 0; k < d; ++k)
        for (int r = 0; r < d; ++r)
            w(k, r) = cis(step * k * r) / std::sqrt(double(d));
    return w;
}

inline double positive_fmod(double x, double m) {
    double r = std::fmod(x, m);
    return r < 0 ? r + m : r;
}

inline int positive_imod(long x, int m) {
    long r = x % m;
    return int(r < 0 ? r + m : r);
}

// Deterministic RNG used everywhere randomness is needed.  splitmix64 for
// seeding plus xoshiro-style output would be overkill; a raw 64-bit LCG walk
// through splitmix64 is reproducible across standard libraries, unlike
// std::normal_distribution.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() {
        return double(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller (deterministic given the seed).
    double next_normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = 0.0;
        while (u1 <= 1e-300) u1 = next_double();
        double u2 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        cached_ = r * std::sin(two_pi * u2);
        have_cached_ = true;
        return r * std::cos(two_pi * u2);
    }

    Vector next_unit_vector(int n) {
        Vector v(n);
        for (int i = 0; i < n; ++i) v(i) = cx(next_normal(), next_normal());
        double norm = v.norm();
        if (norm < 1e-12) return next_unit_vector(n);
        return v / norm;
    }

private:
    std::uint64_t state_;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

// Random density matrix (mixed, full support almost surely).
inline Matrix random_density(Rng& rng, int d) {
    Matrix g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = cx(rng.next_normal(), rng.next_normal());
    Matrix rho = g * g.adjoint();
    return rho / rho.trace().real();
}

inline Matrix projector(const Vector& v) { return v * v.adjoint(); }

}  // namespace covclock
