// langevin.hpp — Classical stochastic oracle: Euler–Maruyama cavity trajectories and their higher-order statistics
//
// Driven model:   dc = −(γ/2 − iδ) c dt + i f dt + √(γ n_eff) dW,  n = |c|²,
//                 complex dW with <dW* dW> = dt, <dW dW> = 0, n_eff = n_th + ½.
// Squeezed model: dx = (−δp − γx/2) dt + e^{r} √(γ n_eff) dW₁
//                 dp = ( δx − γp/2) dt + e^{−r} √(γ n_eff) dW₂,  n = (x² + p²)/2.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qbs/errors.hpp"
#include "qbs/model.hpp"
#include "qbs/parallel.hpp"
#include "qbs/rng.hpp"
#include "qbs/stats.hpp"

namespace qbs {

struct SdeConfig {
    double dt{0.01};
    double total_time{200.0};
    double burn_in{10.0};
    int n_traj{1};
    std::uint64_t seed{1};
    int sample_stride{1}; // keep every k-th step
    int threads{1};

    void validate(double gamma) const {
        require(std::isfinite(dt) && dt > 0.0, "SdeConfig: dt must be > 0");
        require(dt <= 0.05 / gamma * (1.0 + 1e-12), "SdeConfig: dt must be <= 0.05/gamma");
        require(std::isfinite(total_time) && total_time > 0.0, "SdeConfig: total_time must be > 0");
        require(burn_in >= 10.0 / gamma * (1.0 - 1e-12), "SdeConfig: burn_in must be >= 10/gamma");
        require(n_traj >= 1, "SdeConfig: n_traj must be >= 1");
        require(sample_stride >= 1, "SdeConfig: sample_stride must be >= 1");
    }

    long n_steps() const { return std::lround(total_time / dt); }
    long n_samples() const { return n_steps() / sample_stride; }
    double sample_dt() const { return dt * sample_stride; }
};

enum class TrajectoryKind { driven, squeezed, scalar };

// Driven: samples hold c. Squeezed: (x, p) packed as x + ip. Scalar: the
// noise value itself in the real part (synthetic test processes).
struct Trajectory {
    TrajectoryKind kind{TrajectoryKind::driven};
    std::vector<cplx> samples;
    double dt{0.0};
    CavityParams params;
    SqueezedBathParams squeezed_params;

    std::vector<double> photon_number() const {
        std::vector<double> n(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const cplx s = samples[i];
            switch (kind) {
            case TrajectoryKind::driven: n[i] = std::norm(s); break;
            case TrajectoryKind::squeezed: n[i] = 0.5 * (s.real() * s.real() + s.imag() * s.imag()); break;
            case TrajectoryKind::scalar: n[i] = s.real(); break;
            }
        }
        return n;
    }
};

inline cplx driven_fixed_point(const CavityParams& p) {
    return cplx(0.0, 1.0) * p.drive() / cplx(p.gamma / 2.0, -p.delta);
}

inline Trajectory simulate_driven_one(const CavityParams& p, const SdeConfig& cfg, std::uint64_t index) {
    p.validate();
    cfg.validate(p.gamma);
    NormalStream rng(cfg.seed, index);
    const double amp = std::sqrt(p.gamma * (p.n_th + 0.5) * cfg.dt / 2.0);
    const cplx drift_lin = -cplx(p.gamma / 2.0, -p.delta) * cfg.dt;
    const cplx drift_const = cplx(0.0, 1.0) * p.drive() * cfg.dt;
    cplx c = driven_fixed_point(p);
    const long burn = std::lround(cfg.burn_in / cfg.dt);
    auto step = [&] {
        const double xi1 = rng(), xi2 = rng();
        c += drift_lin * c + drift_const + amp * cplx(xi1, xi2);
    };
    for (long k = 0; k < burn; ++k) step();
    Trajectory tr;
    tr.kind = TrajectoryKind::driven;
    tr.dt = cfg.sample_dt();
    tr.params = p;
    const long ns = cfg.n_samples();
    tr.samples.reserve(static_cast<std::size_t>(ns));
    for (long k = 0; k < ns; ++k) {
        tr.samples.push_back(c);
        for (int s = 0; s < cfg.sample_stride; ++s) step();
    }
    return tr;
}

inline Trajectory simulate_squeezed_one(const SqueezedBathParams& sp, const SdeConfig& cfg, std::uint64_t index) {
    sp.validate();
    cfg.validate(sp.gamma);
    NormalStream rng(cfg.seed, index);
    const double base = std::sqrt(sp.gamma * (sp.n_cl + 0.5) * cfg.dt);
    const double ax = std::exp(sp.r) * base, ap = std::exp(-sp.r) * base;
    const double g2 = sp.gamma / 2.0 * cfg.dt, dd = sp.delta * cfg.dt;
    double x = 0.0, p = 0.0;
    auto step = [&] {
        const double xi1 = rng(), xi2 = rng();
        const double nx = x + (-dd * p - g2 * x) + ax * xi1;
        const double np = p + (dd * x - g2 * p) + ap * xi2;
        x = nx;
        p = np;
    };
    const long burn = std::lround(cfg.burn_in / cfg.dt);
    for (long k = 0; k < burn; ++k) step();
    Trajectory tr;
    tr.kind = TrajectoryKind::squeezed;
    tr.dt = cfg.sample_dt();
    tr.squeezed_params = sp;
    tr.params = CavityParams{sp.gamma, sp.delta, 0.0, 0.0, sp.n_cl};
    const long ns = cfg.n_samples();
    tr.samples.reserve(static_cast<std::size_t>(ns));
    for (long k = 0; k < ns; ++k) {
        tr.samples.emplace_back(x, p);
        for (int s = 0; s < cfg.sample_stride; ++s) step();
    }
    return tr;
}

inline std::vector<Trajectory> simulate_driven(const CavityParams& p, const SdeConfig& cfg) {
    cfg.validate(p.gamma);
    std::vector<Trajectory> out(static_cast<std::size_t>(cfg.n_traj));
    parallel_for(out.size(), cfg.threads, [&](std::size_t i) { out[i] = simulate_driven_one(p, cfg, i); });
    return out;
}

inline std::vector<Trajectory> simulate_squeezed(const SqueezedBathParams& sp, const SdeConfig& cfg) {
    cfg.validate(sp.gamma);
    std::vector<Trajectory> out(static_cast<std::size_t>(cfg.n_traj));
    parallel_for(out.size(), cfg.threads, [&](std::size_t i) { out[i] = simulate_squeezed_one(sp, cfg, i); });
    return out;
}

// Trajectory source for streaming estimators: index -> trajectory.
using TrajectorySource = std::function<Trajectory(std::size_t)>;

inline TrajectorySource from_vector(const std::vector<Trajectory>& trajs) {
    return [&trajs](std::size_t i) { return trajs[i]; };
}

namespace detail {

// Trajectories are reduced in fixed blocks so sums never depend on threads.
constexpr std::size_t k_block = 8;

inline double ensemble_mean(const TrajectorySource& src, std::size_t n_traj, int threads) {
    const std::size_t nb = (n_traj + k_block - 1) / k_block;
    std::vector<double> sums(nb), counts(nb);
    parallel_for(nb, threads, [&](std::size_t b) {
        double s = 0.0, c = 0.0;
        for (std::size_t i = b * k_block; i < std::min(n_traj, (b + 1) * k_block); ++i) {
            const auto n = src(i).photon_number();
            s += pairwise_sum(n);
            c += static_cast<double>(n.size());
        }
        sums[b] = s;
        counts[b] = c;
    });
    const double c = pairwise_sum(counts);
    require(c > 0.0, "no samples");
    return pairwise_sum(sums) / c;
}

} // namespace detail

struct MomentEstimate {
    double mean{0.0};
    double stderr_{0.0};
};

// Time-averaged <δn(t) δn(t + τ1) δn(t + τ2)> per trajectory, then mean ± stderr
// across trajectories. δn uses the ensemble mean of n.
inline std::vector<MomentEstimate> estimate_c3(const TrajectorySource& src, std::size_t n_traj,
                                               const std::vector<std::pair<double, double>>& tau_pairs,
                                               int threads = 1) {
    require(n_traj >= 2, "estimate_c3: need >= 2 trajectories for a standard error");
    require(!tau_pairs.empty(), "estimate_c3: no lag pairs");
    const Trajectory first = src(0);
    const double h = first.dt;
    const auto len = static_cast<long>(first.samples.size());
    struct Lag {
        long k1, k2, lo, hi;
    };
    std::vector<Lag> lags;
    for (const auto& [t1, t2] : tau_pairs) {
        const double f1 = t1 / h, f2 = t2 / h;
        const long k1 = std::lround(f1), k2 = std::lround(f2);
        require(std::abs(f1 - k1) < 1e-6 && std::abs(f2 - k2) < 1e-6, "estimate_c3: lags must be multiples of the sample spacing");
        const long lo = std::max({0L, -k1, -k2});
        const long hi = len - std::max({0L, k1, k2}); // exclusive
        require(hi - lo >= 1, "estimate_c3: lags exceed the trajectory span");
        lags.push_back({k1, k2, lo, hi});
    }
    const double mu = detail::ensemble_mean(src, n_traj, threads);
    std::vector<std::vector<double>> per(lags.size(), std::vector<double>(n_traj));
    parallel_for(n_traj, threads, [&](std::size_t i) {
        auto n = src(i).photon_number();
        require(static_cast<long>(n.size()) == len, "estimate_c3: trajectories differ in length");
        for (double& v : n) v -= mu;
        std::vector<double> prod;
        for (std::size_t l = 0; l < lags.size(); ++l) {
            const auto& L = lags[l];
            prod.resize(static_cast<std::size_t>(L.hi - L.lo));
            for (long t = L.lo; t < L.hi; ++t)
                prod[static_cast<std::size_t>(t - L.lo)] = n[static_cast<std::size_t>(t)] *
                                                           n[static_cast<std::size_t>(t + L.k1)] *
                                                           n[static_cast<std::size_t>(t + L.k2)];
            per[l][i] = pairwise_sum(prod) / static_cast<double>(prod.size());
        }
    });
    std::vector<MomentEstimate> out;
    for (const auto& v : per) {
        const auto ms = mean_and_stderr(v);
        out.push_back({ms.mean, ms.stderr_});
    }
    return out;
}

inline std::vector<MomentEstimate> estimate_c3(const std::vector<Trajectory>& trajs,
                                               const std::vector<std::pair<double, double>>& tau_pairs,
                                               int threads = 1) {
    return estimate_c3(from_vector(trajs), trajs.size(), tau_pairs, threads);
}

// Per-trajectory contrast C3(a) − C3(b), mean ± stderr. Sharper than
// differencing two separate estimates because the common noise cancels.
inline MomentEstimate estimate_c3_difference(const TrajectorySource& src, std::size_t n_traj,
                                             std::pair<double, double> a, std::pair<double, double> b,
                                             int threads = 1) {
    require(n_traj >= 2, "estimate_c3_difference: need >= 2 trajectories");
    std::vector<double> diff(n_traj);
    // One trajectory at a time keeps memory flat; the ensemble mean is shared.
    const double mu = detail::ensemble_mean(src, n_traj, threads);
    const Trajectory first = src(0);
    const double h = first.dt;
    auto lag = [&](double t) {
        const long k = std::lround(t / h);
        require(std::abs(t / h - static_cast<double>(k)) < 1e-6, "lags must be multiples of the sample spacing");
        return k;
    };
    const long a1 = lag(a.first), a2 = lag(a.second), b1 = lag(b.first), b2 = lag(b.second);
    parallel_for(n_traj, threads, [&](std::size_t i) {
        auto n = src(i).photon_number();
        for (double& v : n) v -= mu;
        const auto len = static_cast<long>(n.size());
        auto avg = [&](long k1, long k2) {
            const long lo = std::max({0L, -k1, -k2}), hi = len - std::max({0L, k1, k2});
            require(hi - lo >= 1, "lags exceed the trajectory span");
            std::vector<double> prod(static_cast<std::size_t>(hi - lo));
            for (long t = lo; t < hi; ++t)
                prod[static_cast<std::size_t>(t - lo)] = n[static_cast<std::size_t>(t)] *
                                                         n[static_cast<std::size_t>(t + k1)] *
                                                         n[static_cast<std::size_t>(t + k2)];
            return pairwise_sum(prod) / static_cast<double>(prod.size());
        };
        diff[i] = avg(a1, a2) - avg(b1, b2);
    });
    const auto ms = mean_and_stderr(diff);
    return {ms.mean, ms.stderr_};
}

enum class Window { rectangular, hann };

struct LangevinBispectrum {
    BispectrumSurface surface; // std_error holds (stderr Re, stderr Im)
    std::size_t segments{0};
    double mean_n{0.0};
};

// Segment-averaged triple product
//   B(ω1, ω2) = <X(ω1) X(ω2) X*(ω1 + ω2)> / (Δt Σ w³),  X(ω) = Σ w_k δn_k e^{−iω t_k} Δt,
// with segments advancing by half a segment for the Hann window and by a full
// segment for the rectangular one. Standard errors come from the spread of
// per-trajectory averages.
inline LangevinBispectrum estimate_bispectrum(const TrajectorySource& src, std::size_t n_traj,
                                              const FreqGrid2D& grid, double segment_len, Window window,
                                              int threads = 1) {
    grid.validate();
    require(n_traj >= 2, "estimate_bispectrum: need >= 2 trajectories");
    const Trajectory first = src(0);
    const double h = first.dt;
    const auto len = static_cast<long>(first.samples.size());
    const long M = std::lround(segment_len / h);
    require(M >= 4 && M <= len, "segment length must be between 4 samples and the trajectory length");
    const double nyquist = M_PI / h;
    for (double w : grid.omega1_values) require(std::abs(w) <= nyquist, "grid frequency beyond Nyquist");
    for (double w : grid.omega2_values) require(std::abs(w) <= nyquist, "grid frequency beyond Nyquist");
    for (double w1 : grid.omega1_values)
        for (double w2 : grid.omega2_values)
            require(std::abs(w1 + w2) <= nyquist, "grid frequency sum beyond Nyquist");
    const long hop = window == Window::hann ? M / 2 : M;
    const long n_seg = (len - M) / hop + 1;

    std::vector<double> w(static_cast<std::size_t>(M));
    for (long k = 0; k < M; ++k)
        w[static_cast<std::size_t>(k)] = window == Window::hann ? 0.5 - 0.5 * std::cos(2.0 * M_PI * (k + 0.5) / M) : 1.0;
    double w3 = 0.0;
    for (double x : w) w3 += x * x * x;
    const double norm = 1.0 / (h * w3);

    // Distinct non-negative |ω| values to transform; negatives are conjugates.
    std::vector<double> freqs;
    auto add = [&](double x) { freqs.push_back(std::abs(x)); };
    for (double a : grid.omega1_values) add(a);
    for (double b : grid.omega2_values) add(b);
    for (double a : grid.omega1_values)
        for (double b : grid.omega2_values) add(a + b);
    std::sort(freqs.begin(), freqs.end());
    freqs.erase(std::unique(freqs.begin(), freqs.end()), freqs.end());
    auto index_of = [&](double x) {
        return static_cast<std::size_t>(std::lower_bound(freqs.begin(), freqs.end(), std::abs(x)) - freqs.begin());
    };
    const std::size_t nf = freqs.size();
    // Phase table over one segment.
    Eigen::MatrixXcd phase(static_cast<Eigen::Index>(nf), M);
    for (std::size_t f = 0; f < nf; ++f)
        for (long k = 0; k < M; ++k)
            phase(static_cast<Eigen::Index>(f), k) = w[static_cast<std::size_t>(k)] * h *
                                                     std::exp(cplx(0.0, -freqs[f] * h * static_cast<double>(k)));

    const auto R = static_cast<Eigen::Index>(grid.rows()), C = static_cast<Eigen::Index>(grid.cols());
    struct Ref {
        Eigen::Index idx;
        bool neg;
    };
    auto ref = [&](double om) { return Ref{static_cast<Eigen::Index>(index_of(om)), om < 0.0}; };
    std::vector<Ref> r1, r2, r3;
    for (double a : grid.omega1_values) r1.push_back(ref(a));
    for (double b : grid.omega2_values) r2.push_back(ref(b));
    for (double a : grid.omega1_values)
        for (double b : grid.omega2_values) r3.push_back(ref(a + b));

    const double mu = detail::ensemble_mean(src, n_traj, threads);
    // Per-block sums of per-trajectory estimates and of their squares.
    const std::size_t nb = (n_traj + detail::k_block - 1) / detail::k_block;
    std::vector<Eigen::MatrixXcd> sum(nb);
    std::vector<Eigen::MatrixXd> sq_re(nb), sq_im(nb);
    parallel_for(nb, threads, [&](std::size_t blk) {
        sum[blk] = Eigen::MatrixXcd::Zero(R, C);
        sq_re[blk] = Eigen::MatrixXd::Zero(R, C);
        sq_im[blk] = Eigen::MatrixXd::Zero(R, C);
        Eigen::VectorXd seg(M);
        Eigen::MatrixXcd acc(R, C);
        for (std::size_t i = blk * detail::k_block; i < std::min(n_traj, (blk + 1) * detail::k_block); ++i) {
            const auto n = src(i).photon_number();
            require(static_cast<long>(n.size()) == len, "estimate_bispectrum: trajectories differ in length");
            acc.setZero();
            for (long s = 0; s < n_seg; ++s) {
                for (long k = 0; k < M; ++k) seg[k] = n[static_cast<std::size_t>(s * hop + k)] - mu;
                // The segment start phase cancels in the triple product.
                const Eigen::VectorXcd X = phase * seg.cast<cplx>();
                auto get = [&](const Ref& r) { return r.neg ? std::conj(X[r.idx]) : X[r.idx]; };
                for (Eigen::Index a = 0; a < R; ++a) {
                    const cplx x1 = get(r1[static_cast<std::size_t>(a)]);
                    for (Eigen::Index b = 0; b < C; ++b)
                        acc(a, b) += x1 * get(r2[static_cast<std::size_t>(b)]) *
                                     std::conj(get(r3[static_cast<std::size_t>(a * C + b)]));
                }
            }
            acc *= norm / static_cast<double>(n_seg);
            sum[blk] += acc;
            sq_re[blk] += acc.real().cwiseAbs2();
            sq_im[blk] += acc.imag().cwiseAbs2();
        }
    });

    LangevinBispectrum out;
    out.segments = static_cast<std::size_t>(n_seg) * n_traj;
    out.mean_n = mu;
    out.surface.grid = grid;
    out.surface.source = Source::langevin;
    out.surface.params = first.params;
    out.surface.values = pairwise_sum(sum.data(), nb);
    const Eigen::MatrixXd qre = pairwise_sum(sq_re.data(), nb), qim = pairwise_sum(sq_im.data(), nb);
    const double N = static_cast<double>(n_traj);
    out.surface.values /= N;
    const Eigen::MatrixXd vre = ((qre / N) - out.surface.values.real().cwiseAbs2()).cwiseMax(0.0) * (N / (N - 1.0));
    const Eigen::MatrixXd vim = ((qim / N) - out.surface.values.imag().cwiseAbs2()).cwiseMax(0.0) * (N / (N - 1.0));
    out.surface.std_error.resize(R, C);
    out.surface.std_error.real() = (vre / N).cwiseSqrt();
    out.surface.std_error.imag() = (vim / N).cwiseSqrt();
    double se = 0.0;
    for (Eigen::Index a = 0; a < R; ++a)
        for (Eigen::Index b = 0; b < C; ++b) se = std::max(se, std::abs(out.surface.std_error(a, b)));
    out.surface.error_bound = se;
    return out;
}

inline LangevinBispectrum estimate_bispectrum(const std::vector<Trajectory>& trajs, const FreqGrid2D& grid,
                                              double segment_len, Window window, int threads = 1) {
    return estimate_bispectrum(from_vector(trajs), trajs.size(), grid, segment_len, window, threads);
}

// Stationary covariance of the squeezed-model quadratures from the Lyapunov
// equation A Σ + Σ Aᵀ + D = 0.
inline Eigen::Matrix2d squeezed_stationary_covariance(const SqueezedBathParams& sp) {
    sp.validate();
    Eigen::Matrix2d A;
    A << -sp.gamma / 2.0, -sp.delta, sp.delta, -sp.gamma / 2.0;
    const double ne = sp.n_cl + 0.5;
    const Eigen::Matrix2d D = Eigen::Vector2d(std::exp(2.0 * sp.r), std::exp(-2.0 * sp.r)).asDiagonal() * (sp.gamma * ne);
    // vec(AΣ + ΣAᵀ) = (I ⊗ A + A ⊗ I) vec(Σ)
    Eigen::Matrix4d K = Eigen::Matrix4d::Zero();
    const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            K.block<2, 2>(2 * j, 2 * i) += I(j, i) * A;
            K.block<2, 2>(2 * j, 2 * i) += A(j, i) * I;
        }
    const Eigen::Vector4d d = Eigen::Map<const Eigen::Vector4d>(D.data());
    const Eigen::Vector4d s = K.partialPivLu().solve(-d);
    return Eigen::Map<const Eigen::Matrix2d>(s.data());
}

} // namespace qbs
