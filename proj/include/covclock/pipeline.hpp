// Protocol core: projective time-basis measurement statistics of the
// twirled encoding, phase selection from the outcomes, the rotated decoder,
// and assembly of the end-to-end logical channel.
//
// The joint outcome statistics enter only through the Fourier coefficients
//   F_Q(k) = (1/T0) int_0^T0 dt e^{-i w Q t} prod_i <theta_{k_i}| rho_i(t) |theta_{k_i}>,
// evaluated exactly either as a delta-constrained sum over energy offsets
// or on a uniform grid dense enough for the trigonometric degree.

#pragma once

#include <covclock/angles.hpp>
#include <covclock/codes.hpp>

#include <array>
#include <span>

namespace covclock {

// Exact evaluator for the outcome Fourier coefficients of a set of clocks
// measured in their time bases.
class MeasurementModel {
public:
    explicit MeasurementModel(std::vector<const ClockState*> clocks) {
        if (clocks.empty()) throw InvalidArgument("measurement model: no clocks");
        d_ = clocks.front()->dim();
        for (const ClockState* c : clocks) {
            if (c->dim() != d_)
                throw InvalidArgument("measurement model: clocks must share one dimension");
            // s[x] = sum_r a_{r+x} conj(a_r), the x-th diagonal sum of the
            // clock density matrix
            Vector s = Vector::Zero(2 * d_ - 1);
            for (int x = -(d_ - 1); x <= d_ - 1; ++x) {
                cx acc = 0.0;
                for (int r = std::max(0, -x); r + x < d_ && r < d_; ++r)
                    acc += c->amps(r + x) * std::conj(c->amps(r));
                s(x + d_ - 1) = acc;
            }
            diag_sums_.push_back(std::move(s));
        }
    }

    int dim() const { return d_; }
    int n_clocks() const { return int(diag_sums_.size()); }

    // Delta-constrained sum: F_Q factorises into per-clock coefficient
    // arrays u_i[x] = e^{i 2 pi k_i x / d} s_i[x] / d whose convolution is
    // read off at total offset -Q.
    cx fourier(int q, std::span<const int> k) const {
        if (int(k.size()) != n_clocks())
            throw InvalidArgument("fourier: outcome vector length mismatch");
        const int d = d_;
        std::vector<cx> conv{1.0};
        int lo = 0;  // offset of conv[0]
        for (int i = 0; i < n_clocks(); ++i) {
            std::vector<cx> u(2 * d - 1);
            for (int x = -(d - 1); x <= d - 1; ++x)
                u[x + d - 1] = cis(two_pi * k[i] * x / d) * diag_sums_[i](x + d - 1) / double(d);
            std::vector<cx> next(conv.size() + u.size() - 1, cx(0.0, 0.0));
            for (std::size_t a = 0; a < conv.size(); ++a)
                for (std::size_t b = 0; b < u.size(); ++b) next[a + b] += conv[a] * u[b];
            conv = std::move(next);
            lo += -(d - 1);
        }
        long idx = long(-q) - lo;
        if (idx < 0 || idx >= long(conv.size())) return 0.0;
        return conv[idx];
    }

    double prob(std::span<const int> k) const { return fourier(0, k).real(); }

private:
    int d_ = 0;
    std::vector<Vector> diag_sums_;
};

// Uniform-grid route for the same coefficients.  The integrand is a
// trigonometric polynomial of degree N(d-1)+|Q|, so any grid larger than
// that is exact; the default follows the convention 2*(N(d-1)+q_max)+1
// rounded up to a power of two.
class GridMeasurementModel {
public:
    GridMeasurementModel(std::vector<const ClockState*> clocks, int q_max, int grid = 0) {
        if (clocks.empty()) throw InvalidArgument("grid model: no clocks");
        d_ = clocks.front()->dim();
        const int n = int(clocks.size());
        int degree = n * (d_ - 1) + q_max;
        int min_grid = 2 * degree + 1;
        grid_ = 1;
        while (grid_ < std::max(grid, min_grid)) grid_ *= 2;

        Matrix w(d_, d_);  // w(k, r) = e^{i 2 pi k r / d} / sqrt(d)
        for (int k = 0; k < d_; ++k)
            for (int r = 0; r < d_; ++r) w(k, r) = cis(two_pi * double(k) * r / d_) / std::sqrt(double(d_));

        for (const ClockState* c : clocks) {
            if (c->dim() != d_)
                throw InvalidArgument("grid model: clocks must share one dimension");
            Eigen::MatrixXd g(d_, grid_);
            Vector rotated(d_);
            for (int j = 0; j < grid_; ++j) {
                for (int r = 0; r < d_; ++r)
                    rotated(r) = c->amps(r) * cis(-two_pi * double(r) * j / grid_);
                Vector overlaps = w * rotated;
                for (int k = 0; k < d_; ++k) g(k, j) = std::norm(overlaps(k));
            }
            tables_.push_back(std::move(g));
        }
    }

    int dim() const { return d_; }
    int grid() const { return grid_; }
    int n_clocks() const { return int(tables_.size()); }

    cx fourier(int q, std::span<const int> k) const {
        if (int(k.size()) != n_clocks())
            throw InvalidArgument("fourier: outcome vector length mismatch");
        cx acc = 0.0;
        for (int j = 0; j < grid_; ++j) {
            double prod = 1.0;
            for (int i = 0; i < n_clocks(); ++i) prod *= tables_[i](k[i], j);
            acc += prod * cis(-two_pi * double(q) * j / grid_);
        }
        return acc / double(grid_);
    }

    double prob(std::span<const int> k) const { return fourier(0, k).real(); }

    // Row of outcome values for one clock at one grid time (used by sweep
    // loops that walk outcomes in bulk).
    const Eigen::MatrixXd& table(int clock) const { return tables_[clock]; }

private:
    int d_ = 0;
    int grid_ = 0;
    std::vector<Eigen::MatrixXd> tables_;
};

// p(Q, k) = 1 - (F_Q / F_0) e^{2 pi i k_alpha Q / d}; the modulus of this
// number drives every fidelity bound.
inline cx p_ratio(cx f_q, double f_0, double k_alpha, int q, int d) {
    if (f_0 <= 1e-15)
        throw InvariantViolation("p_ratio: outcome has no support (F_0 <= 1e-15)");
    return cx(1.0, 0.0) - (f_q / f_0) * cis(two_pi * k_alpha * q / d);
}

enum class KAlphaMode { SingleClock, ThreeClockMiddle };

struct OutcomeRecord {
    std::vector<int> k;
    double prob = 0.0;
    double k_alpha = 0.0;  // defined mod d, kept as a real number
    double t_alpha = 0.0;
};

struct ConditionedState {
    Matrix rho_P;
    OutcomeRecord record;
};

// Composed logical -> logical channel.
struct ChannelMatrix {
    Matrix super;  // d_L^2 x d_L^2, column-major vec convention
    Matrix choi;   // sum_ab K(|a><b|) (x) |a><b|
    int d_L = 0;

    Matrix apply(const Matrix& rho) const {
        Vector v = Eigen::Map<const Vector>(rho.data(), rho.size());
        Vector out = super * v;
        return Eigen::Map<const Matrix>(out.data(), d_L, d_L);
    }

    double trace_preservation_defect() const {
        Matrix reduced = Matrix::Zero(d_L, d_L);
        for (int x = 0; x < d_L; ++x)
            reduced += choi.block(x * d_L, x * d_L, d_L, d_L);
        return (reduced - Matrix::Identity(d_L, d_L)).cwiseAbs().maxCoeff();
    }

    double min_choi_eigenvalue() const {
        return min_eigenvalue(0.5 * (choi + choi.adjoint()));
    }

    static ChannelMatrix from_super(Matrix super, int d_L) {
        ChannelMatrix ch;
        ch.super = std::move(super);
        ch.d_L = d_L;
        ch.choi = Matrix::Zero(d_L * d_L, d_L * d_L);
        for (int a = 0; a < d_L; ++a) {
            for (int b = 0; b < d_L; ++b) {
                Vector col = ch.super.col(b * d_L + a);
                Matrix k_ab = Eigen::Map<const Matrix>(col.data(), d_L, d_L);
                Matrix unit = Matrix::Zero(d_L, d_L);
                unit(a, b) = 1.0;
                ch.choi += kron(k_ab, unit);
            }
        }
        return ch;
    }
};

namespace detail {

inline Matrix conj_superop(const Matrix& w) { return kron(w.conjugate(), w); }

inline Matrix kraus_superop(const KrausChannel& ch) {
    Matrix s = Matrix::Zero(ch.out_dim() * ch.out_dim(), ch.in_dim() * ch.in_dim());
    for (const Matrix& k : ch.ops) s += kron(k.conjugate(), k);
    return s;
}

}  // namespace detail

// Phase selection rules.  SingleClock: k_alpha = k_1 - k_1^0 (elapsed
// ticks relative to the initial mark).  ThreeClockMiddle: majority vote by
// circular median of the mark-relative angles.
inline double k_alpha_single_clock(std::span<const int> k, std::span<const double> marks, int d) {
    if (k.size() != 1 || marks.size() != 1)
        throw InvalidArgument("k_alpha: single-clock rule needs exactly one outcome");
    return positive_fmod(double(k[0]) - marks[0], double(d));
}

// Gamma_q = [k_q + d/2 - 1 - floor(mark_q)] mod d for each of the three
// outcomes, then k_alpha = -d/2 + 1 + (middle angle).  Reads nothing but
// the outcomes, the initial marks and d.
inline double k_alpha_three_clock_middle(std::span<const int> k, std::span<const double> marks,
                                         int d) {
    if (k.size() != 3 || marks.size() != 3)
        throw InvalidArgument("k_alpha: middle-angle rule needs exactly three outcomes");
    AngleTriple t;
    t.d = d;
    for (int q = 0; q < 3; ++q)
        t.gamma[q] = positive_fmod(double(k[q]) + d / 2.0 - 1.0 - std::floor(marks[q]), double(d));
    return -d / 2.0 + 1.0 + middle_angle(t).value;
}

// Full measured pipeline for one error label of a covariant code.
class Pipeline {
public:
    Pipeline(CovariantCode code, int error_index, KAlphaMode mode)
        : code_(std::move(code)), error_index_(error_index), mode_(mode),
          meas_(code_.surviving()) {
        code_.validate();
        if (error_index_ < 0 || error_index_ >= int(code_.base.errors.size()))
            throw InvalidArgument("pipeline: error label out of range");
        const int n = meas_.n_clocks();
        if (n > 3) throw InvalidArgument("pipeline: outcome enumeration supports at most 3 clocks");
        if (mode_ == KAlphaMode::SingleClock && n != 1)
            throw InvalidArgument("pipeline: single-clock phase rule needs one surviving clock");
        if (mode_ == KAlphaMode::ThreeClockMiddle && n != 3)
            throw InvalidArgument("pipeline: middle-angle phase rule needs three surviving clocks");
        for (const ClockState* c : code_.surviving()) marks_.push_back(c->time_mark());
        build_graded_components();
    }

    const CovariantCode& code() const { return code_; }
    const MeasurementModel& measurement() const { return meas_; }
    int q_max() const { return code_.base.q_range(); }
    int dim() const { return meas_.dim(); }

    double k_alpha_for(std::span<const int> k) const {
        return mode_ == KAlphaMode::SingleClock
                   ? k_alpha_single_clock(k, marks_, dim())
                   : k_alpha_three_clock_middle(k, marks_, dim());
    }

    OutcomeRecord record_for(std::span<const int> k) const {
        OutcomeRecord rec;
        rec.k.assign(k.begin(), k.end());
        rec.prob = meas_.prob(k);
        rec.k_alpha = k_alpha_for(k);
        rec.t_alpha = rec.k_alpha * code_.base.gen_L.period() / dim();
        return rec;
    }

    // rho_P^k = sum_Q (F_Q / F_0) [graded component_Q](rho_L).
    ConditionedState conditioned_state(const Matrix& rho_L, std::span<const int> k) const {
        OutcomeRecord rec = record_for(k);
        if (rec.prob <= 1e-15)
            throw InvariantViolation("conditioned_state: zero-probability outcome");
        const int d_P = code_.base.d_P();
        Vector v = Eigen::Map<const Vector>(rho_L.data(), rho_L.size());
        Vector acc = Vector::Zero(d_P * d_P);
        for (const auto& [q, s] : graded_) {
            cx f_q = meas_.fourier(q, k);
            acc += (f_q / rec.prob) * (s * v);
        }
        ConditionedState out;
        out.rho_P = Eigen::Map<const Matrix>(acc.data(), d_P, d_P);
        out.record = std::move(rec);
        return out;
    }

    // Rotated decoder: U_L(t) E^{-1}( U_Co^dag(t) E( D_j(X) ) U_Co(t) ) U_L^dag(t)
    // evaluated at t = t_alpha of the outcome.
    Matrix decode(const ConditionedState& cond) const {
        return decode_at(cond.record.t_alpha, cond.rho_P);
    }

    Matrix decode_at(double t_alpha, const Matrix& rho_P) const {
        const BaseCode& b = code_.base;
        Matrix x = b.decoders[error_index_].apply(rho_P);
        x = b.encode(x);
        Matrix u_co = b.gen_Co.unitary(t_alpha);
        x = u_co.adjoint() * x * u_co;
        x = b.encode_inverse(x);
        Matrix u_l = b.gen_L.unitary(t_alpha);
        return u_l * x * u_l.adjoint();
    }

    // K(rho) = sum_k F_0(k) Decode_k(rho_P^k(rho)), assembled over the
    // exhaustive outcome set in lexicographic order.
    ChannelMatrix full_channel() const {
        const int d_L = code_.base.d_L();
        Matrix s_k = Matrix::Zero(d_L * d_L, d_L * d_L);
        for_each_outcome([&](std::span<const int> k) {
            Matrix branch = branch_superop(k);
            double k_alpha = k_alpha_for(k);
            double t_alpha = k_alpha * code_.base.gen_L.period() / dim();
            s_k += decoder_superop(t_alpha) * branch;
        });
        ChannelMatrix ch = ChannelMatrix::from_super(std::move(s_k), d_L);
        if (ch.trace_preservation_defect() > 1e-9)
            throw InvariantViolation("full_channel: assembled channel is not trace preserving");
        if (ch.min_choi_eigenvalue() < -1e-8)
            throw InvariantViolation("full_channel: assembled channel is not completely positive");
        return ch;
    }

    // sum_k F_0(k) max_Q |p(Q, k)|, the quantity the fidelity lower bound
    // is built from.
    double weighted_pmax_sum() const {
        double total = 0.0;
        for_each_outcome([&](std::span<const int> k) {
            double f_0 = meas_.prob(k);
            if (f_0 <= 1e-15) return;
            double k_alpha = k_alpha_for(k);
            double pmax = 0.0;
            for (int q = 1; q <= q_max(); ++q) {
                cx p = p_ratio(meas_.fourier(q, k), f_0, k_alpha, q, dim());
                pmax = std::max(pmax, std::abs(p));
            }
            total += f_0 * pmax;
        });
        return total;
    }

    // Superoperator of the (unnormalised) measured branch,
    // vec(F_0 rho_P^k) = sum_Q F_Q(k) S_Q vec(rho_L).
    Matrix branch_superop(std::span<const int> k) const {
        const int d_P = code_.base.d_P();
        const int d_L = code_.base.d_L();
        Matrix b = Matrix::Zero(d_P * d_P, d_L * d_L);
        for (const auto& [q, s] : graded_) b += meas_.fourier(q, k) * s;
        return b;
    }

    Matrix decoder_superop(double t_alpha) const {
        const BaseCode& b = code_.base;
        Matrix u_co = b.gen_Co.unitary(-t_alpha);  // conjugation by U_Co^dag(t)
        Matrix u_l = b.gen_L.unitary(t_alpha);
        return detail::conj_superop(u_l) * s_encode_inverse_ *
               detail::conj_superop(u_co) * s_encode_ * s_base_decoder_;
    }

    template <typename F>
    void for_each_outcome(F&& fn) const {
        const int n = meas_.n_clocks();
        const int d = dim();
        std::vector<int> k(n, 0);
        while (true) {
            fn(std::span<const int>(k));
            int i = n - 1;
            while (i >= 0 && ++k[i] == d) k[i--] = 0;
            if (i < 0) break;
        }
    }

    const std::map<int, Matrix>& graded_components() const { return graded_; }

private:
    void build_graded_components() {
        const BaseCode& b = code_.base;
        const int d_P = b.d_P();
        const int d_L = b.d_L();
        for (int n = 0; n < d_L; ++n) {
            for (int np = 0; np < d_L; ++np) {
                Matrix unit = Matrix::Zero(d_L, d_L);
                unit(np, n) = 1.0;  // |n'><n|
                Matrix m = b.errors[error_index_].apply(b.encode(unit));
                for (int q = 0; q < d_P; ++q) {
                    for (int qp = 0; qp < d_P; ++qp) {
                        if (m(q, qp) == cx(0.0, 0.0)) continue;
                        int sector = b.gen_Co.levels[q] - b.gen_Co.levels[qp] +
                                     b.gen_L.levels[n] - b.gen_L.levels[np];
                        auto [it, inserted] =
                            graded_.try_emplace(sector, Matrix::Zero(d_P * d_P, d_L * d_L));
                        // vec index of |n'><n| is (col n, row n'); of
                        // |q><q'| is (col q', row q)
                        it->second(qp * d_P + q, n * d_L + np) += m(q, qp);
                    }
                }
            }
        }
        s_encode_ = detail::conj_superop(b.encoder);
        s_encode_inverse_ = detail::conj_superop(b.encoder.adjoint());
        s_base_decoder_ = detail::kraus_superop(b.decoders[error_index_]);
    }

    CovariantCode code_;
    int error_index_;
    KAlphaMode mode_;
    MeasurementModel meas_;
    std::vector<double> marks_;
    std::map<int, Matrix> graded_;
    Matrix s_encode_, s_encode_inverse_, s_base_decoder_;
};

// Deviation |F_Q(k) - e^{i 2 pi l Q / d} F_Q(k + l)|; the shift covariance
// of the outcome statistics says this vanishes.
inline double shift_covariance_deviation(const MeasurementModel& meas, int q,
                                         std::span<const int> k, int l) {
    const int d = meas.dim();
    std::vector<int> shifted(k.begin(), k.end());
    for (int& ki : shifted) ki = positive_imod(ki + l, d);
    cx lhs = meas.fourier(q, k);
    cx rhs = cis(two_pi * double(l) * q / d) * meas.fourier(q, shifted);
    return std::abs(lhs - rhs);
}

// Conditioning the stationary encoded state on the clock having advanced
// to time tau (trivial logical representation required).  Returns the
// trace distance between the normalised conditioned state and
// e^{-i tau H_Co} E(rho_L) e^{i tau H_Co}.
inline double page_wootters_distance(const CovariantCode& code, const Matrix& rho_L,
                                     double tau) {
    if (code.base.gen_L.delta_h() != 0)
        throw InvalidArgument("page_wootters: logical representation must be trivial");
    auto clocks = code.surviving();
    if (clocks.size() != 1)
        throw InvalidArgument("page_wootters: exactly one surviving clock expected");
    const ClockState& clock = *clocks.front();
    const int d = clock.dim();
    const int d_P = code.base.d_P();

    Matrix encoded = covariant_encode(code, rho_L);
    ClockState pointer = evolve(clock, tau, Generator::clock(d, code.base.gen_Co.omega));

    Matrix conditioned = Matrix::Zero(d_P, d_P);
    for (int q = 0; q < d_P; ++q)
        for (int qp = 0; qp < d_P; ++qp) {
            cx acc = 0.0;
            for (int r = 0; r < d; ++r)
                for (int rp = 0; rp < d; ++rp)
                    acc += std::conj(pointer.amps(r)) * encoded(q * d + r, qp * d + rp) *
                           pointer.amps(rp);
            conditioned(q, qp) = acc;
        }
    double weight = conditioned.trace().real();
    if (weight <= 1e-15)
        throw InvariantViolation("page_wootters: conditioning weight vanished");
    conditioned /= weight;

    Matrix u = code.base.gen_Co.unitary(tau);
    Matrix target = u * code.base.encode(rho_L) * u.adjoint();
    return trace_distance(conditioned, target);
}

// Frobenius norm of [H_total, E_cov(rho_L)] for the single-clock encoding;
// the twirled state commutes with the total energy.
inline double stationarity_violation(const CovariantCode& code, const Matrix& rho_L) {
    auto clocks = code.surviving();
    if (clocks.size() != 1)
        throw InvalidArgument("stationarity: exactly one surviving clock expected");
    const int d = clocks.front()->dim();
    Matrix encoded = covariant_encode(code, rho_L);
    Matrix h_total = kron(code.base.gen_Co.hamiltonian(), Matrix::Identity(d, d)) +
                     kron(Matrix::Identity(code.base.d_P(), code.base.d_P()),
                          Generator::clock(d, code.base.gen_Co.omega).hamiltonian());
    return (h_total * encoded - encoded * h_total).norm();
}

}  // namespace covclock
