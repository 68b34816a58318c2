// Base error-correcting codes {encoder V, error channels, decoders} with
// U(1) generators on the logical and physical spaces, and the covariant
// encoder obtained by twirling the code together with clock reference
// frames.  All spectra are integer multiples of one omega, so the group
// average is evaluated exactly as a Kronecker-delta energy-sector sum; no
// time quadrature appears on this path.

#pragma once

#include <covclock/clock.hpp>

#include <functional>
#include <map>
#include <utility>

namespace covclock {

// Channel in Kraus form.  Input/output dimensions follow the operator
// shapes (ops are out_dim x in_dim).
struct KrausChannel {
    std::vector<Matrix> ops;

    int in_dim() const { return ops.empty() ? 0 : int(ops.front().cols()); }
    int out_dim() const { return ops.empty() ? 0 : int(ops.front().rows()); }

    Matrix apply(const Matrix& x) const {
        Matrix out = Matrix::Zero(out_dim(), out_dim());
        for (const Matrix& k : ops) out += k * x * k.adjoint();
        return out;
    }

    // sum_i K_i^dag K_i = identity on the input space.
    double completeness_defect() const {
        Matrix s = Matrix::Zero(in_dim(), in_dim());
        for (const Matrix& k : ops) s += k.adjoint() * k;
        return (s - Matrix::Identity(in_dim(), in_dim())).cwiseAbs().maxCoeff();
    }

    static KrausChannel identity(int d) {
        return {{Matrix::Identity(d, d)}};
    }

    static KrausChannel unitary(Matrix u) {
        return {{std::move(u)}};
    }
};

// Extends the partial isometry W (whose columns need not span the input
// space of the channel) to a trace-preserving Kraus set by routing the
// orthogonal complement of W^dag's support onto |0> of the output space.
inline KrausChannel complete_to_channel(const Matrix& w) {
    KrausChannel ch;
    ch.ops.push_back(w);
    const int din = int(w.cols());
    const int dout = int(w.rows());
    Matrix defect = Matrix::Identity(din, din) - w.adjoint() * w;
    Eigen::SelfAdjointEigenSolver<Matrix> es(defect);
    for (int i = 0; i < din; ++i) {
        double ev = es.eigenvalues()(i);
        if (ev > 1e-12) {
            Matrix k = Matrix::Zero(dout, din);
            k.row(0) = std::sqrt(ev) * es.eigenvectors().col(i).adjoint();
            ch.ops.push_back(std::move(k));
        }
    }
    return ch;
}

// Perfectly recoverable code: isometric encoder V (d_P x d_L), labelled
// error channels on the physical space, and one decoder per error label
// with D_j(E_j(V rho V^dag)) = rho.
struct BaseCode {
    Matrix encoder;                      // d_P x d_L isometry
    std::vector<KrausChannel> errors;    // physical -> physical
    std::vector<KrausChannel> decoders;  // physical -> logical
    Generator gen_L;
    Generator gen_Co;

    int d_L() const { return int(encoder.cols()); }
    int d_P() const { return int(encoder.rows()); }

    Matrix encode(const Matrix& rho) const { return encoder * rho * encoder.adjoint(); }

    // Inverse of the encoding channel (exact for isometric encoders).
    Matrix encode_inverse(const Matrix& x) const {
        return encoder.adjoint() * x * encoder.adjoint().adjoint();
    }

    int q_range() const {
        // Optimisation range for the energy difference Q; collapses to the
        // logical range when the physical representation is trivial.
        return gen_Co.delta_h() == 0 ? gen_L.delta_h()
                                     : gen_L.delta_h() + gen_Co.delta_h();
    }

    void validate(double tol_iso = 1e-12, double tol_recovery = 1e-10) const {
        if (gen_L.dim() != d_L() || gen_Co.dim() != d_P())
            throw InvalidArgument("base code: generator level lists must match the space dimensions");
        if (!approx_identity(encoder.adjoint() * encoder, tol_iso))
            throw InvalidArgument("base code: encoder is not an isometry");
        if (errors.size() != decoders.size())
            throw InvalidArgument("base code: each error channel needs a paired decoder");
        for (const auto& e : errors)
            if (e.completeness_defect() > tol_iso)
                throw InvalidArgument("base code: error channel is not trace preserving");
        for (const auto& dch : decoders)
            if (dch.completeness_defect() > tol_iso)
                throw InvalidArgument("base code: decoder is not trace preserving");
        // Perfect recovery on a full operator basis of the logical space.
        for (std::size_t j = 0; j < errors.size(); ++j) {
            for (int a = 0; a < d_L(); ++a) {
                for (int b = 0; b < d_L(); ++b) {
                    Matrix unit = Matrix::Zero(d_L(), d_L());
                    unit(a, b) = 1.0;
                    Matrix back = decoders[j].apply(errors[j].apply(encode(unit)));
                    if ((back - unit).cwiseAbs().maxCoeff() > tol_recovery)
                        throw InvalidArgument("base code: decoder does not invert error channel " +
                                              std::to_string(j));
                }
            }
        }
    }
};

// V = identity, one trivial error channel, trivial decoder.
inline BaseCode make_identity_code(int d, std::vector<int> levels_L,
                                   std::vector<int> levels_Co, double omega = 1.0) {
    if (d < 2) throw InvalidArgument("identity code: dimension must be >= 2");
    if (int(levels_L.size()) != d || int(levels_Co.size()) != d)
        throw InvalidArgument("identity code: level lists must have length d");
    BaseCode code;
    code.encoder = Matrix::Identity(d, d);
    code.errors = {KrausChannel::identity(d)};
    code.decoders = {KrausChannel::identity(d)};
    code.gen_L = Generator{std::move(levels_L), omega};
    code.gen_Co = Generator{std::move(levels_Co), omega};
    code.validate();
    return code;
}

// Isometric encoder V with unitary noise channels U_j; the decoder for
// error j is X -> V^dag U_j^dag X U_j V completed to a trace-preserving
// map on the physical space.
inline BaseCode make_unitary_conjugation_code(Matrix v, std::vector<Matrix> noise,
                                              std::vector<int> levels_L,
                                              std::vector<int> levels_Co,
                                              double omega = 1.0) {
    const int d_P = int(v.rows());
    const int d_L = int(v.cols());
    if (!approx_identity(v.adjoint() * v, 1e-12))
        throw InvalidArgument("unitary conjugation code: V is not an isometry");
    BaseCode code;
    code.encoder = std::move(v);
    for (Matrix& u : noise) {
        if (u.rows() != d_P || u.cols() != d_P)
            throw InvalidArgument("unitary conjugation code: noise unitary has wrong shape");
        code.decoders.push_back(complete_to_channel(code.encoder.adjoint() * u.adjoint()));
        code.errors.push_back(KrausChannel::unitary(std::move(u)));
    }
    code.gen_L = Generator{std::move(levels_L), omega};
    code.gen_Co = Generator{std::move(levels_Co), omega};
    code.validate();
    return code;
}

// Base code plus M clock frames sharing one omega; erased clocks are
// dropped (tracing them out reproduces the encoding built from the
// survivors, so nothing else is needed).
struct CovariantCode {
    BaseCode base;
    std::vector<ClockState> clocks;
    std::vector<bool> erased;  // empty means nothing erased

    int clock_dim() const { return clocks.empty() ? 0 : clocks.front().dim(); }

    std::vector<const ClockState*> surviving() const {
        std::vector<const ClockState*> out;
        for (std::size_t i = 0; i < clocks.size(); ++i)
            if (erased.empty() || !erased[i]) out.push_back(&clocks[i]);
        return out;
    }

    void validate() const {
        base.validate();
        if (clocks.empty()) throw InvalidArgument("covariant code: at least one clock required");
        for (const auto& c : clocks)
            if (c.dim() != clocks.front().dim())
                throw InvalidArgument("covariant code: clocks must share one dimension");
        if (!erased.empty() && erased.size() != clocks.size())
            throw InvalidArgument("covariant code: erased mask length mismatch");
        if (surviving().empty())
            throw InvalidArgument("covariant code: all clocks erased");
    }
};

namespace detail {

// Matrix with only the x-th diagonal of rho kept: entries (r, r') with
// r - r' = x.
inline Matrix diagonal_band(const Matrix& rho, int x) {
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    const int d = int(rho.rows());
    for (int r = std::max(0, x); r < d && r - x < d; ++r) out(r, r - x) = rho(r, r - x);
    return out;
}

// Joint clock operator for total energy offset sum(r_i - r_i') = x, built
// as a banded convolution over the surviving clocks.  Only the requested
// offsets are materialised; a code only ever touches |x| <= q_range.
inline std::map<int, Matrix> joint_clock_bands(const std::vector<const ClockState*>& clocks,
                                               const std::vector<int>& offsets) {
    std::map<int, Matrix> result;
    if (clocks.empty()) return result;

    // x -> banded matrix, one map per clock
    std::vector<std::map<int, Matrix>> per_clock;
    for (const ClockState* c : clocks) {
        Matrix rho = c->density();
        std::map<int, Matrix> bands;
        for (int x = -(c->dim() - 1); x <= c->dim() - 1; ++x)
            bands.emplace(x, diagonal_band(rho, x));
        per_clock.push_back(std::move(bands));
    }

    // recursive expansion over per-clock offsets summing to the target
    for (int target : offsets) {
        Matrix acc;
        bool have = false;
        std::function<void(std::size_t, int, const Matrix&)> rec =
            [&](std::size_t i, int remaining, const Matrix& partial) {
                if (i + 1 == per_clock.size()) {
                    auto it = per_clock[i].find(remaining);
                    if (it == per_clock[i].end()) return;
                    Matrix term = kron(partial, it->second);
                    if (!have) {
                        acc = std::move(term);
                        have = true;
                    } else {
                        acc += term;
                    }
                    return;
                }
                for (const auto& [x, band] : per_clock[i])
                    rec(i + 1, remaining - x, kron(partial, band));
            };
        rec(0, target, Matrix::Identity(1, 1));
        if (have) result.emplace(target, std::move(acc));
    }
    return result;
}

}  // namespace detail

// Exact group average of E_t(rho) tensored with the rotated clocks: the
// integral of e^{-i omega t (Q + sum(r - r'))} over one period is the
// Kronecker delta on Q + sum(r - r') = 0, so the output is assembled
// sector by sector.  Output lives on P (x) (surviving clocks).
inline Matrix covariant_encode(const CovariantCode& code, const Matrix& rho_L,
                               double psd_tol = 1e-9) {
    const BaseCode& base = code.base;
    if (rho_L.rows() != base.d_L() || rho_L.cols() != base.d_L())
        throw InvalidArgument("covariant_encode: logical input has wrong shape");
    if (std::abs(rho_L.trace().real() - 1.0) > 1e-10 || std::abs(rho_L.trace().imag()) > 1e-10)
        throw InvalidArgument("covariant_encode: input must have unit trace");
    if (min_eigenvalue(0.5 * (rho_L + rho_L.adjoint())) < -psd_tol)
        throw InvalidArgument("covariant_encode: input is not positive semidefinite");

    auto clocks = code.surviving();
    std::vector<int> needed;
    for (int q = -base.q_range(); q <= base.q_range(); ++q) needed.push_back(q);
    auto bands = detail::joint_clock_bands(clocks, needed);
    int clock_total_dim = 1;
    for (const ClockState* c : clocks) clock_total_dim *= c->dim();

    const int d_P = base.d_P();
    const int d_L = base.d_L();
    Matrix out = Matrix::Zero(d_P * clock_total_dim, d_P * clock_total_dim);
    for (int q = 0; q < d_P; ++q) {
        for (int qp = 0; qp < d_P; ++qp) {
            for (int n = 0; n < d_L; ++n) {
                for (int np = 0; np < d_L; ++np) {
                    cx coeff = rho_L(np, n) * base.encoder(q, np) * std::conj(base.encoder(qp, n));
                    if (coeff == cx(0.0, 0.0)) continue;
                    int Q = base.gen_Co.levels[q] - base.gen_Co.levels[qp] +
                            base.gen_L.levels[n] - base.gen_L.levels[np];
                    auto it = bands.find(-Q);
                    if (it == bands.end()) continue;
                    out.block(q * clock_total_dim, qp * clock_total_dim, clock_total_dim,
                              clock_total_dim) += coeff * it->second;
                }
            }
        }
    }
    return out;
}

// True iff V_L commutes with the logical generator and V_Co with the
// physical generator (sufficient for the pair to remain transversal for
// the covariant encoder).
inline bool check_transversal_compat(const BaseCode& code, const Matrix& v_L,
                                     const Matrix& v_Co, double tol = 1e-10) {
    Matrix h_L = code.gen_L.hamiltonian();
    Matrix h_Co = code.gen_Co.hamiltonian();
    double defect = (v_L * h_L - h_L * v_L).cwiseAbs().maxCoeff() +
                    (v_Co * h_Co - h_Co * v_Co).cwiseAbs().maxCoeff();
    return defect < tol;
}

}  // namespace covclock
