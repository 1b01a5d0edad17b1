// lindblad.hpp — Truncated-Fock Lindblad oracle: steady state, regression correlators, Keldysh cumulants
//
// Superoperators act on column-major vec(ρ), vec(AXB) = (Bᵀ ⊗ A) vec(X).
// Correlators G(a, b, c) = <δn(a) δn(b) δn(c)> are operator strings in that
// order; they are evaluated by quantum regression only when the earliest time
// sits at an end of the string, which is all the Keldysh kernel ever needs.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "qbs/errors.hpp"
#include "qbs/model.hpp"
#include "qbs/parallel.hpp"

namespace qbs {

using SpMat = Eigen::SparseMatrix<cplx, Eigen::ColMajor>;

enum class PropagationMethod { automatic, krylov, dense };

struct FockWorkspace {
    int dim{0};
    Eigen::MatrixXcd annihilation;
    Eigen::MatrixXcd number;
    Eigen::MatrixXcd dn; // n − <n>
    double mean_n{0.0};
    SpMat liouvillian;
    SpMat liouvillian_t; // transpose, for backward (dual) propagation
    Eigen::MatrixXcd steady_state;
    CavityParams params;
    SqueezedBathParams squeezed_params;
    bool squeezed{false};
    double top_population{0.0};
    PropagationMethod method{PropagationMethod::automatic};

    Eigen::Index vec_size() const { return static_cast<Eigen::Index>(dim) * dim; }
    bool use_dense() const {
        return method == PropagationMethod::dense || (method == PropagationMethod::automatic && dim <= 12);
    }
};

namespace detail {

inline Eigen::VectorXcd vec(const Eigen::MatrixXcd& m) {
    return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
}

inline Eigen::MatrixXcd unvec(const Eigen::VectorXcd& v, int dim) {
    return Eigen::Map<const Eigen::MatrixXcd>(v.data(), dim, dim);
}

inline SpMat sparse_identity(int dim) {
    SpMat I(dim, dim);
    I.setIdentity();
    return I;
}

inline SpMat sparse_annihilation(int dim) {
    std::vector<Eigen::Triplet<cplx>> t;
    for (int k = 1; k < dim; ++k) t.emplace_back(k - 1, k, std::sqrt(static_cast<double>(k)));
    SpMat a(dim, dim);
    a.setFromTriplets(t.begin(), t.end());
    return a;
}

inline SpMat transpose_of(const SpMat& m) { return SpMat(m.transpose()); }
inline SpMat adjoint_of(const SpMat& m) { return SpMat(m.adjoint()); }
inline SpMat conj_of(const SpMat& m) { return SpMat(m.conjugate()); }

// rate · D[A] as a superoperator.
inline SpMat dissipator(const SpMat& A, double rate, int dim) {
    const SpMat I = sparse_identity(dim);
    const SpMat AdA = adjoint_of(A) * A;
    SpMat out = SpMat(Eigen::kroneckerProduct(conj_of(A), A));
    out -= 0.5 * SpMat(Eigen::kroneckerProduct(I, AdA));
    out -= 0.5 * SpMat(Eigen::kroneckerProduct(transpose_of(AdA), I));
    return rate * out;
}

inline SpMat hamiltonian_part(const SpMat& H, int dim) {
    const SpMat I = sparse_identity(dim);
    SpMat out = SpMat(Eigen::kroneckerProduct(I, H)) - SpMat(Eigen::kroneckerProduct(transpose_of(H), I));
    return cplx(0.0, -1.0) * out;
}

// Null vector by shifted inverse iteration from a seeded random start.
inline Eigen::VectorXcd null_vector(Eigen::SparseLU<SpMat>& lu, Eigen::Index n, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    Eigen::VectorXcd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = cplx(nd(gen), nd(gen));
    x.normalize();
    for (int it = 0; it < 4; ++it) {
        x = lu.solve(x);
        if (lu.info() != Eigen::Success) throw ComputationError("steady state: sparse solve failed");
        x.normalize();
    }
    return x;
}

inline void finish_workspace(FockWorkspace& ws, const SpMat& L) {
    const int dim = ws.dim;
    ws.liouvillian = L;
    ws.liouvillian.makeCompressed();
    ws.liouvillian_t = transpose_of(L);
    ws.liouvillian_t.makeCompressed();
    ws.annihilation = Eigen::MatrixXcd(sparse_annihilation(dim));
    ws.number = ws.annihilation.adjoint() * ws.annihilation;

    // Shift keeps the factorisation regular; the null space sits at zero.
    const Eigen::Index n = ws.vec_size();
    double lnorm = 0.0;
    for (int k = 0; k < L.outerSize(); ++k)
        for (SpMat::InnerIterator it(L, k); it; ++it) lnorm = std::max(lnorm, std::abs(it.value()));
    SpMat shifted = L;
    SpMat I(n, n);
    I.setIdentity();
    shifted -= cplx(1e-9 * std::max(1.0, lnorm), 0.0) * I;
    Eigen::SparseLU<SpMat> lu;
    lu.compute(shifted);
    if (lu.info() != Eigen::Success) throw ComputationError("steady state: factorisation failed");

    auto as_density = [&](const Eigen::VectorXcd& v) {
        Eigen::MatrixXcd r = unvec(v, dim);
        const cplx tr = r.trace();
        if (std::abs(tr) < 1e-300) throw ComputationError("steady state: null vector has zero trace");
        return Eigen::MatrixXcd(r / tr);
    };
    const Eigen::MatrixXcd r1 = as_density(null_vector(lu, n, 0x5eed1u));
    const Eigen::MatrixXcd r2 = as_density(null_vector(lu, n, 0x5eed2u));
    if ((r1 - r2).norm() > 1e-6)
        throw ComputationError("steady state: degenerate null space (two starts converge to different states)");

    Eigen::MatrixXcd rho = r1;
    if ((rho - rho.adjoint()).norm() > 1e-8 * std::max(1.0, rho.norm()))
        throw ComputationError("steady state: not Hermitian");
    rho = 0.5 * (rho + rho.adjoint());
    rho /= rho.trace().real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw ComputationError("steady state: negative eigenvalue " + std::to_string(es.eigenvalues().minCoeff()));
    ws.steady_state = rho;
    ws.top_population = rho(dim - 1, dim - 1).real();
    if (ws.top_population >= 1e-8)
        throw TruncationError("Fock truncation too small: top level population " +
                                  std::to_string(ws.top_population) + " at dim " + std::to_string(dim),
                              static_cast<int>(std::ceil(1.5 * dim)));
    ws.mean_n = (ws.number * rho).trace().real();
    ws.dn = ws.number - ws.mean_n * Eigen::MatrixXcd::Identity(dim, dim);
}

} // namespace detail

inline int default_dim(const CavityParams& p) {
    return std::max(4, static_cast<int>(std::ceil(8.0 * (p.n_th + intracavity_drive_photons(p) + 1.0))));
}

inline int default_dim(const SqueezedBathParams& sp) {
    const double n_est = (sp.n_cl + 0.5) * std::exp(2.0 * std::abs(sp.r)) - 0.5;
    return std::max(4, static_cast<int>(std::ceil(8.0 * (n_est + 1.0))));
}

inline FockWorkspace build_workspace(const CavityParams& p, int dim) {
    p.validate();
    require(dim >= 4, "dim must be >= 4");
    const SpMat a = detail::sparse_annihilation(dim);
    const SpMat ad = detail::adjoint_of(a);
    const cplx f = p.drive();
    const SpMat H = cplx(-p.delta) * SpMat(ad * a) - (f * a + std::conj(f) * ad);
    SpMat L = detail::hamiltonian_part(H, dim) + detail::dissipator(a, p.gamma * (p.n_th + 1.0), dim);
    if (p.n_th > 0.0) L += detail::dissipator(ad, p.gamma * p.n_th, dim);
    FockWorkspace ws;
    ws.dim = dim;
    ws.params = p;
    detail::finish_workspace(ws, L);
    return ws;
}

inline FockWorkspace build_workspace(const SqueezedBathParams& sp, int dim) {
    sp.validate();
    require(dim >= 4, "dim must be >= 4");
    const SpMat a = detail::sparse_annihilation(dim);
    const SpMat ad = detail::adjoint_of(a);
    const SpMat s = std::cosh(sp.r) * a + std::sinh(sp.r) * ad;
    const SpMat H = cplx(-sp.delta) * SpMat(ad * a);
    SpMat L = detail::hamiltonian_part(H, dim) + detail::dissipator(s, sp.gamma * (sp.n_cl + 1.0), dim);
    if (sp.n_cl > 0.0) L += detail::dissipator(detail::adjoint_of(s), sp.gamma * sp.n_cl, dim);
    FockWorkspace ws;
    ws.dim = dim;
    ws.squeezed = true;
    ws.squeezed_params = sp;
    ws.params = CavityParams{sp.gamma, sp.delta, 0.0, 0.0, 0.0};
    detail::finish_workspace(ws, L);
    return ws;
}

// Grows the truncation until the leakage check passes.
template <class Params>
FockWorkspace build_workspace_auto(const Params& p, int dim = 0, int max_dim = 120) {
    int d = dim > 0 ? dim : default_dim(p);
    for (;;) {
        try {
            return build_workspace(p, d);
        } catch (const TruncationError& e) {
            if (d >= max_dim) throw;
            d = std::min(max_dim, std::max(d + 5, e.suggested_dim()));
        }
    }
}

// ---------------------------------------------------------------------------
// Propagation

namespace detail {

// exp(dt·A) v by restarted Arnoldi with a posteriori step control.
inline Eigen::VectorXcd expmv_krylov(const SpMat& A, Eigen::VectorXcd v, double dt, double tol = 1e-12,
                                     int m = 30) {
    if (dt == 0.0) return v;
    const Eigen::Index n = v.size();
    m = static_cast<int>(std::min<Eigen::Index>(m, n));
    double anorm = 0.0;
    for (int k = 0; k < A.outerSize(); ++k) {
        double col = 0.0;
        for (SpMat::InnerIterator it(A, k); it; ++it) col += std::abs(it.value());
        anorm = std::max(anorm, col);
    }
    double t = 0.0;
    double tau = std::min(dt, anorm > 0.0 ? 4.0 / anorm : dt);
    Eigen::MatrixXcd V(n, m + 1);
    Eigen::MatrixXcd H(m + 1, m);
    while (t < dt) {
        const double beta = v.norm();
        if (beta == 0.0) return v;
        V.col(0) = v / beta;
        H.setZero();
        int k = m;
        double h_next = 0.0;
        for (int j = 0; j < m; ++j) {
            Eigen::VectorXcd w = A * V.col(j);
            for (int i = 0; i <= j; ++i) {
                H(i, j) = V.col(i).dot(w);
                w -= H(i, j) * V.col(i);
            }
            h_next = w.norm();
            H(j + 1, j) = h_next;
            if (h_next <= 1e-13 * anorm * std::max(1.0, dt)) { // invariant subspace: exact
                k = j + 1;
                h_next = 0.0;
                break;
            }
            V.col(j + 1) = w / h_next;
        }
        for (;;) {
            const double step = std::min(tau, dt - t);
            const Eigen::MatrixXcd F = (step * H.topLeftCorner(k, k)).exp();
            const double err = beta * h_next * step * std::abs(F(k - 1, 0));
            if (err <= tol * beta * std::max(step / dt, 1e-3) || h_next == 0.0) {
                v = beta * (V.leftCols(k) * F.col(0));
                t = (step == dt - t) ? dt : t + step;
                if (err < 0.01 * tol * beta) tau = step * 1.5;
                break;
            }
            tau = step * 0.5;
            if (tau < 1e-14 * dt)
                throw ComputationError("Krylov exponential did not converge (|A|_1 = " + std::to_string(anorm) +
                                       ", |v| = " + std::to_string(beta) + ")");
        }
        if (!v.allFinite()) throw ComputationError("Krylov exponential produced non-finite values");
    }
    return v;
}

} // namespace detail

// Dense exp(L dt), for small truncations or repeated fixed-step use.
inline Eigen::MatrixXcd dense_propagator(const FockWorkspace& ws, double dt) {
    require(dt >= 0.0, "dt must be >= 0");
    const Eigen::MatrixXcd Ld = Eigen::MatrixXcd(ws.liouvillian) * dt;
    return Ld.exp();
}

inline Eigen::VectorXcd propagate_vec(const FockWorkspace& ws, const Eigen::VectorXcd& v, double dt,
                                      bool adjoint_direction = false) {
    require(dt >= 0.0, "propagate: dt must be >= 0");
    require(v.size() == ws.vec_size(), "propagate: dimension mismatch");
    if (dt == 0.0) return v;
    if (ws.use_dense()) {
        const Eigen::MatrixXcd E = dense_propagator(ws, dt);
        return adjoint_direction ? Eigen::VectorXcd(E.transpose() * v) : Eigen::VectorXcd(E * v);
    }
    return detail::expmv_krylov(adjoint_direction ? ws.liouvillian_t : ws.liouvillian, v, dt);
}

/// e^{L dt} applied to M.
inline Eigen::MatrixXcd propagate(const FockWorkspace& ws, const Eigen::MatrixXcd& M, double dt) {
    require(M.rows() == ws.dim && M.cols() == ws.dim, "propagate: matrix dimension mismatch");
    return detail::unvec(propagate_vec(ws, detail::vec(M), dt), ws.dim);
}

// ---------------------------------------------------------------------------
// Correlators

// Kernel-allowed string orders for sorted times r1 <= r2 <= r3.
enum class Placement {
    chrono,         // <δn(r1) δn(r2) δn(r3)>
    mixed,          // <δn(r1) δn(r3) δn(r2)>
    chrono_reverse, // <δn(r3) δn(r2) δn(r1)> = conj(chrono)
    mixed_reverse,  // <δn(r2) δn(r3) δn(r1)> = conj(mixed)
};

struct OrderedCorrelator {
    std::array<double, 3> times{};
    Placement placement{Placement::chrono};
    cplx value{0.0};
};

inline cplx three_point(const FockWorkspace& ws, Placement placement, double r1, double r2, double r3) {
    require(r1 <= r2 && r2 <= r3, "three_point: times must be sorted");
    const auto& dn = ws.dn;
    const Eigen::MatrixXcd start = ws.steady_state * dn; // right multiplication at r1
    const Eigen::MatrixXcd x = propagate(ws, start, r2 - r1);
    cplx v;
    switch (placement) {
    case Placement::chrono:
    case Placement::chrono_reverse:
        v = (dn * propagate(ws, x * dn, r3 - r2)).trace();
        break;
    case Placement::mixed:
    case Placement::mixed_reverse:
        v = (dn * propagate(ws, dn * x, r3 - r2)).trace();
        break;
    }
    if (placement == Placement::chrono_reverse || placement == Placement::mixed_reverse) v = std::conj(v);
    return v;
}

inline OrderedCorrelator ordered_correlator(const FockWorkspace& ws, Placement placement, double r1, double r2,
                                            double r3) {
    return OrderedCorrelator{{r1, r2, r3}, placement, three_point(ws, placement, r1, r2, r3)};
}

// String correlator at arbitrary times, or nothing when the earliest time is
// strictly inside the string (the Keldysh kernel drops those).
template <class Provider>
std::optional<cplx> string_correlator(Provider&& g_sorted, double a, double b, double c) {
    const double m = std::min({a, b, c});
    if (a == m) {
        if (b <= c) return g_sorted(Placement::chrono, a, b, c);
        return g_sorted(Placement::mixed, a, c, b);
    }
    if (c == m) {
        if (b <= a) return std::conj(g_sorted(Placement::chrono, c, b, a));
        return std::conj(g_sorted(Placement::mixed, c, a, b));
    }
    return std::nullopt;
}

// (1/4) Σ_perm [1 − Θ(t_π1 − t_π2) Θ(t_π3 − t_π2)] <δn(t_π1) δn(t_π2) δn(t_π3)>,
// Θ(0) = 1/2. At a triple coincidence the continuous value <δn³> is used.
// Returns the complex sum; the imaginary part is a consistency residue.
template <class Provider>
cplx keldysh_combine(Provider&& g_sorted, double t1, double t2, double t3, cplx coincident_value) {
    if (t1 == t2 && t2 == t3) return coincident_value;
    const std::array<double, 3> t{t1, t2, t3};
    static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    cplx sum = 0.0;
    for (const auto& p : perms) {
        const double a = t[p[0]], b = t[p[1]], c = t[p[2]];
        const double k = 1.0 - heaviside_sym(a - b) * heaviside_sym(c - b);
        if (k == 0.0) continue;
        const auto g = string_correlator(g_sorted, a, b, c);
        if (!g) throw ComputationError("Keldysh kernel reached an earliest-in-middle string");
        sum += k * *g;
    }
    return 0.25 * sum;
}

inline double real_checked(cplx z, const char* what) {
    if (std::abs(z.imag()) > 1e-9 * std::max(1.0, std::abs(z.real())))
        throw ComputationError(std::string(what) + ": imaginary residue " + std::to_string(z.imag()));
    return z.real();
}

inline cplx coincident_third_moment(const FockWorkspace& ws) {
    return (ws.dn * ws.dn * ws.dn * ws.steady_state).trace();
}

/// Keldysh-ordered third cumulant at times (0, tau1, tau2).
inline double keldysh_c3(const FockWorkspace& ws, double tau1, double tau2) {
    auto g = [&](Placement pl, double r1, double r2, double r3) { return three_point(ws, pl, r1, r2, r3); };
    return real_checked(keldysh_combine(g, 0.0, tau1, tau2, coincident_third_moment(ws)), "keldysh_c3");
}

/// Symmetrised two-time cumulant Re <δn(0) δn(τ)>.
inline double keldysh_c2(const FockWorkspace& ws, double tau) {
    const double a = std::abs(tau);
    const Eigen::MatrixXcd x = propagate(ws, ws.steady_state * ws.dn, a);
    return (ws.dn * x).trace().real();
}

// Terms of C3(t, t) = ½<{δn(0), δn(t)²}> − Θ(−t)/4 <[δn(t), [δn(t), δn(0)]]>,
// each evaluated by its own regression chain. The double commutator contains
// the earliest-in-middle string <δn(t) δn(0) δn(t)> for t > 0, which regression
// cannot reach; it is only evaluated (and only needed) for t < 0.
struct SkewnessTerms {
    double anticommutator{0.0};
    double double_commutator{std::numeric_limits<double>::quiet_NaN()};
};

inline SkewnessTerms skewness_terms(const FockWorkspace& ws, double t) {
    const auto& dn = ws.dn;
    const auto& rho = ws.steady_state;
    const double a = std::abs(t);
    const Eigen::MatrixXcd dn2 = dn * dn;
    SkewnessTerms s;
    if (t >= 0.0) {
        // <δn(0) δn(t)²> and <δn(t)² δn(0)>
        const cplx p = (dn2 * propagate(ws, rho * dn, a)).trace();
        const cplx q = (dn2 * propagate(ws, dn * rho, a)).trace();
        s.anticommutator = real_checked(0.5 * (p + q), "anticommutator term");
        return s;
    }
    // <δn(0) δn(t)²>, <δn(t)² δn(0)>, <δn(t) δn(0) δn(t)> with t earliest
    const cplx p = (dn * propagate(ws, dn2 * rho, a)).trace();
    const cplx q = (dn * propagate(ws, rho * dn2, a)).trace();
    const cplx r = (dn * propagate(ws, dn * rho * dn, a)).trace();
    s.anticommutator = real_checked(0.5 * (p + q), "anticommutator term");
    s.double_commutator = real_checked(q - 2.0 * r + p, "double commutator term");
    return s;
}

// Right-hand side of the decomposition at time t.
inline double skewness_decomposition(const FockWorkspace& ws, double t) {
    const auto s = skewness_terms(ws, t);
    return s.anticommutator - (t < 0.0 ? 0.25 * s.double_commutator : 0.0);
}

// ---------------------------------------------------------------------------
// Oracle bispectrum

struct LagTables {
    double h{0.0};
    int K{0};
    Eigen::MatrixXcd chrono; // [d2, d1] = <δn(0) δn(d1 h) δn((d1 + d2) h)>
    Eigen::MatrixXcd mixed;  // [d2, d1] = <δn(0) δn((d1 + d2) h) δn(d1 h)>
    cplx coincident{0.0};

    cplx sorted(Placement pl, double r1, double r2, double r3) const {
        const auto d1 = static_cast<Eigen::Index>(std::lround((r2 - r1) / h));
        const auto d2 = static_cast<Eigen::Index>(std::lround((r3 - r2) / h));
        if (d1 + d2 >= K) throw std::out_of_range("lag outside tabulated range");
        switch (pl) {
        case Placement::chrono: return chrono(d2, d1);
        case Placement::mixed: return mixed(d2, d1);
        case Placement::chrono_reverse: return std::conj(chrono(d2, d1));
        case Placement::mixed_reverse: return std::conj(mixed(d2, d1));
        }
        return 0.0;
    }
};

// Forward states a_k = E^k vec(ρ δn) and dual functionals ℓ_k = (Eᵀ)^k vec(δnᵀ)
// on a uniform lag grid, combined into both correlator tables.
inline LagTables lag_tables(const FockWorkspace& ws, double h, int K) {
    require(h > 0.0 && K >= 2, "lag_tables: need h > 0 and K >= 2");
    const int dim = ws.dim;
    const Eigen::Index n = ws.vec_size();
    Eigen::MatrixXcd A(n, K), Ld(n, K);
    A.col(0) = detail::vec(ws.steady_state * ws.dn);
    Ld.col(0) = detail::vec(ws.dn.transpose());
    if (ws.use_dense()) {
        const Eigen::MatrixXcd E = dense_propagator(ws, h);
        const Eigen::MatrixXcd Et = E.transpose();
        for (int k = 1; k < K; ++k) {
            A.col(k) = E * A.col(k - 1);
            Ld.col(k) = Et * Ld.col(k - 1);
        }
    } else {
        for (int k = 1; k < K; ++k) {
            A.col(k) = detail::expmv_krylov(ws.liouvillian, A.col(k - 1), h);
            Ld.col(k) = detail::expmv_krylov(ws.liouvillian_t, Ld.col(k - 1), h);
        }
    }
    Eigen::MatrixXcd RA(n, K), LA(n, K);
    for (int k = 0; k < K; ++k) {
        const Eigen::MatrixXcd X = detail::unvec(A.col(k), dim);
        RA.col(k) = detail::vec(X * ws.dn);
        LA.col(k) = detail::vec(ws.dn * X);
    }
    LagTables t;
    t.h = h;
    t.K = K;
    t.chrono = Ld.transpose() * RA;
    t.mixed = Ld.transpose() * LA;
    t.coincident = coincident_third_moment(ws);
    return t;
}

struct OracleBispectrum {
    BispectrumSurface surface;
    Eigen::MatrixXd quadrature_error; // |S_h − S_2h| / 3
    double tail_bound{0.0};
    bool tail_flagged{false};
    Eigen::MatrixXd c3; // tabulated cumulant on the lag grid, [τ1, τ2]
    std::vector<double> taus;
};

struct OracleOptions {
    int threads{1};
    double tail_tolerance{1e-3}; // relative to the largest |S| on the grid
};

namespace detail {

inline Eigen::MatrixXcd fourier_rows(const std::vector<double>& omegas, const std::vector<double>& taus,
                                     const Eigen::VectorXd& w) {
    Eigen::MatrixXcd E(static_cast<Eigen::Index>(omegas.size()), static_cast<Eigen::Index>(taus.size()));
    for (std::size_t i = 0; i < omegas.size(); ++i)
        for (std::size_t j = 0; j < taus.size(); ++j)
            E(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                w[static_cast<Eigen::Index>(j)] * std::exp(cplx(0.0, -omegas[i] * taus[j]));
    return E;
}

inline Eigen::VectorXd trapezoid_weights(int K, double h, int stride = 1) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(K);
    for (int k = 0; k < K; k += stride) w[k] = h * stride;
    w[0] *= 0.5;
    w[K - 1] *= 0.5;
    return w;
}

} // namespace detail

// S[ω1, ω2] = ∫∫ e^{−i(ω1τ1 + ω2τ2)} C3(0, τ1, τ2) over [−T, T]² by trapezoid
// quadrature on n_tau points per axis.
inline OracleBispectrum oracle_bispectrum(const FockWorkspace& ws, const FreqGrid2D& grid, double window_T,
                                          int n_tau, const OracleOptions& opt = {}) {
    grid.validate();
    require(window_T > 0.0, "window_T must be > 0");
    require(n_tau >= 5 && n_tau % 2 == 1, "n_tau must be odd and >= 5");
    const int K = n_tau;
    const double h = 2.0 * window_T / (K - 1);
    const LagTables tab = lag_tables(ws, h, K);
    const int mid = (K - 1) / 2;

    OracleBispectrum out;
    out.taus.resize(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) out.taus[static_cast<std::size_t>(i)] = (i - mid) * h;

    // Work on integer lag indices so that ties are exact.
    auto g = [&](Placement pl, double r1, double r2, double r3) { return tab.sorted(pl, r1, r2, r3); };
    out.c3.resize(K, K);
    parallel_for(static_cast<std::size_t>(K), opt.threads, [&](std::size_t ii) {
        const int i = static_cast<int>(ii);
        for (int j = i; j < K; ++j) {
            const cplx v = keldysh_combine(g, 0.0, static_cast<double>(i - mid) * h, static_cast<double>(j - mid) * h,
                                           tab.coincident);
            const double re = real_checked(v, "oracle cumulant");
            out.c3(i, j) = re;
            out.c3(j, i) = re;
        }
    });

    const Eigen::MatrixXcd C = out.c3.cast<cplx>();
    auto transform = [&](int stride) {
        const Eigen::VectorXd w = detail::trapezoid_weights(K, h, stride);
        const Eigen::MatrixXcd E1 = detail::fourier_rows(grid.omega1_values, out.taus, w);
        const Eigen::MatrixXcd E2 = detail::fourier_rows(grid.omega2_values, out.taus, w);
        return Eigen::MatrixXcd(E1 * C * E2.transpose());
    };
    const Eigen::MatrixXcd S = transform(1);
    out.quadrature_error = Eigen::MatrixXd::Zero(S.rows(), S.cols());
    if ((K - 1) % 4 == 0) out.quadrature_error = (S - transform(2)).cwiseAbs() / 3.0;

    // Boundary magnitude times the area of a slowest-decay (rate γ/2) tail.
    double edge = 0.0;
    for (int k = 0; k < K; ++k)
        edge = std::max({edge, std::abs(out.c3(0, k)), std::abs(out.c3(K - 1, k)), std::abs(out.c3(k, 0)),
                         std::abs(out.c3(k, K - 1))});
    const double gamma = ws.squeezed ? ws.squeezed_params.gamma : ws.params.gamma;
    out.tail_bound = edge * 8.0 * window_T * (2.0 / gamma);
    const double smax = S.cwiseAbs().maxCoeff();
    out.tail_flagged = out.tail_bound > opt.tail_tolerance * std::max(smax, 1e-300);

    out.surface.grid = grid;
    out.surface.values = S;
    out.surface.source = Source::lindblad;
    out.surface.params = ws.params;
    out.surface.error_bound = out.quadrature_error.maxCoeff() + out.tail_bound;
    return out;
}

// ---------------------------------------------------------------------------
// Commutator dichotomy: a linear quadrature has c-number commutators at
// different times, the photon number does not.

struct CommutatorReport {
    double linear_max_residue{0.0};
    double number_min_residue{0.0};
    double linear_equal_time{0.0};
    double number_equal_time{0.0};
};

inline double off_identity_residue(const Eigen::MatrixXcd& C) {
    const Eigen::Index m = C.rows();
    const cplx mean = C.trace() / static_cast<double>(m);
    return (C - mean * Eigen::MatrixXcd::Identity(m, m)).norm();
}

inline CommutatorReport linear_commutator_check(int dim, const std::vector<std::pair<double, double>>& time_pairs,
                                                double omega = 1.0, double delta = 1.0, cplx drive = {0.5, 0.0}) {
    require(dim >= 6, "dim must be >= 6");
    require(!time_pairs.empty(), "need at least one time pair");
    const Eigen::MatrixXcd a = Eigen::MatrixXcd(detail::sparse_annihilation(dim));
    const Eigen::MatrixXcd ad = a.adjoint();
    const Eigen::MatrixXcd x = (a + ad) / std::sqrt(2.0);
    const Eigen::MatrixXcd p = cplx(0.0, 1.0) * (ad - a) / std::sqrt(2.0);
    const Eigen::MatrixXcd n = ad * a;
    const Eigen::MatrixXcd H = -delta * n - (drive * a + std::conj(drive) * ad);
    // The truncation corrupts only the top level of [a, a†]; compare on the
    // block below it.
    const int blk = dim - 1;
    auto xt = [&](double t) { return Eigen::MatrixXcd(x * std::cos(omega * t) + p * std::sin(omega * t)); };
    auto nt = [&](double t) {
        const Eigen::MatrixXcd U = (cplx(0.0, 1.0) * t * H).exp();
        return Eigen::MatrixXcd(U * n * U.adjoint());
    };
    CommutatorReport rep;
    rep.number_min_residue = std::numeric_limits<double>::infinity();
    for (const auto& [t1, t2] : time_pairs) {
        const Eigen::MatrixXcd X1 = xt(t1), X2 = xt(t2);
        const Eigen::MatrixXcd cx = X1 * X2 - X2 * X1;
        const double rx = off_identity_residue(cx.topLeftCorner(blk, blk));
        const Eigen::MatrixXcd N1 = nt(t1), N2 = nt(t2);
        const Eigen::MatrixXcd cn = N1 * N2 - N2 * N1;
        // Number-operator residue on a low block where truncation is invisible.
        const double rn = off_identity_residue(cn.topLeftCorner(dim / 3, dim / 3));
        if (t1 == t2) {
            rep.linear_equal_time = std::max(rep.linear_equal_time, cx.norm());
            rep.number_equal_time = std::max(rep.number_equal_time, cn.norm());
        } else {
            rep.linear_max_residue = std::max(rep.linear_max_residue, rx);
            rep.number_min_residue = std::min(rep.number_min_residue, rn);
        }
    }
    return rep;
}

} // namespace qbs
