#pragma once

// The family of constituent systems x' = A_i x, their stability classes, the
// Lyapunov-like pairs (P_i, lambda_i) with V_i(x) = <P_i x, x>, and the
// comparison constants mu_ij with V_j <= mu_ij V_i.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "swicert/error.hpp"
#include "swicert/graph.hpp"
#include "swicert/matops.hpp"
#include "swicert/matrix.hpp"

namespace swicert {

enum class StabilityClass { AsymptoticallyStable, MarginallyStable, Unstable };

inline const char* to_string(StabilityClass c) {
    switch (c) {
    case StabilityClass::AsymptoticallyStable: return "AS";
    case StabilityClass::MarginallyStable: return "MS";
    case StabilityClass::Unstable: return "U";
    }
    return "?";
}

inline constexpr double kDefaultClassifyTol = 1e-9;
inline constexpr double kFullRankTol = 1e-12;

namespace detail {

/// Rank of a complex matrix by Gaussian elimination with complete pivoting.
inline std::size_t complex_rank(std::vector<std::complex<double>> m, std::size_t n, double rel_tol) {
    auto at = [&](std::size_t i, std::size_t j) -> std::complex<double>& { return m[i * n + j]; };
    double scale = 0.0;
    for (auto v : m) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return 0;
    std::size_t rank = 0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pi = k, pj = k;
        double best = 0.0;
        for (std::size_t i = k; i < n; ++i)
            for (std::size_t j = k; j < n; ++j)
                if (std::abs(at(i, j)) > best) {
                    best = std::abs(at(i, j));
                    pi = i;
                    pj = j;
                }
        if (best <= rel_tol * scale) break;
        ++rank;
        for (std::size_t j = 0; j < n; ++j) std::swap(at(k, j), at(pi, j));
        for (std::size_t i = 0; i < n; ++i) std::swap(at(i, k), at(i, pj));
        for (std::size_t i = k + 1; i < n; ++i) {
            const auto f = at(i, k) / at(k, k);
            for (std::size_t j = k; j < n; ++j) at(i, j) -= f * at(k, j);
        }
    }
    return rank;
}

} // namespace detail

/// Trichotomy on the spectrum of A with a band of width `tol` around the
/// imaginary axis. Eigenvalues inside the band must be semisimple for the
/// system to count as marginally stable.
inline StabilityClass classify(const RealMatrix& a, double tol = kDefaultClassifyTol) {
    if (!(tol > 0.0)) fail(ErrorKind::Domain, "classify: tolerance must be positive");
    const Spectrum sp = eig_general(a);
    const double top = sp.max_real();
    if (top > tol) return StabilityClass::Unstable;
    if (top < -tol) return StabilityClass::AsymptoticallyStable;

    const std::size_t n = a.rows();
    const double cluster = 1e-6 * std::max(1.0, spectral_norm(a));
    std::vector<bool> seen(sp.values.size(), false);
    for (std::size_t i = 0; i < sp.values.size(); ++i) {
        if (seen[i] || std::abs(sp.values[i].real()) > tol) continue;
        std::complex<double> centre = 0.0;
        std::size_t multiplicity = 0;
        for (std::size_t j = i; j < sp.values.size(); ++j)
            if (!seen[j] && std::abs(sp.values[j] - sp.values[i]) <= cluster) {
                seen[j] = true;
                centre += sp.values[j];
                ++multiplicity;
            }
        centre /= static_cast<double>(multiplicity);
        std::vector<std::complex<double>> shifted(n * n);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) shifted[r * n + c] = a(r, c) - (r == c ? centre : 0.0);
        const std::size_t geometric = n - detail::complex_rank(std::move(shifted), n, 1e-6);
        if (geometric < multiplicity) return StabilityClass::Unstable;
    }
    return StabilityClass::MarginallyStable;
}

struct SystemEntry {
    SystemIndex index = 0;
    RealMatrix a;
    StabilityClass cls = StabilityClass::AsymptoticallyStable;
};

/// Ordered family {A_1..A_N} of d x d full-rank matrices.
class SystemFamily {
public:
    SystemFamily() = default;

    explicit SystemFamily(const std::vector<RealMatrix>& matrices, double classify_tol = kDefaultClassifyTol) {
        if (matrices.empty()) fail(ErrorKind::Configuration, "family must contain at least one system");
        dim_ = matrices.front().rows();
        for (std::size_t k = 0; k < matrices.size(); ++k) {
            const RealMatrix& a = matrices[k];
            const auto i = static_cast<SystemIndex>(k + 1);
            if (!a.is_square() || a.rows() != dim_)
                fail(ErrorKind::Configuration, "system " + std::to_string(i) + " is not " + std::to_string(dim_) +
                                                   "x" + std::to_string(dim_));
            if (scaled_determinant(a) <= kFullRankTol)
                fail(ErrorKind::Configuration, "system " + std::to_string(i) + " is rank deficient");
            systems_.push_back({i, a, classify(a, classify_tol)});
        }
    }

    [[nodiscard]] std::size_t dimension() const noexcept { return dim_; }
    [[nodiscard]] int size() const noexcept { return static_cast<int>(systems_.size()); }
    [[nodiscard]] const std::vector<SystemEntry>& systems() const noexcept { return systems_; }

    [[nodiscard]] const SystemEntry& at(SystemIndex i) const {
        if (i < 1 || i > size()) fail(ErrorKind::Configuration, "no system with index " + std::to_string(i));
        return systems_[static_cast<std::size_t>(i - 1)];
    }

    [[nodiscard]] std::vector<StabilityClass> classes() const {
        std::vector<StabilityClass> out;
        for (const auto& s : systems_) out.push_back(s.cls);
        return out;
    }

private:
    std::size_t dim_ = 0;
    std::vector<SystemEntry> systems_;
};

enum class PairSource { Synthesized, UserSupplied };

/// (P_i, lambda_i) with A'P + PA + lambda P <= 0, so that V_i decays (or grows)
/// no faster than exp(-lambda t) along the i-th system.
struct LyapunovPair {
    SystemIndex index = 0;
    RealMatrix p;
    double lambda = 0.0;
    RealMatrix q; ///< -(A'P + PA)
    PairSource source = PairSource::Synthesized;
};

struct PairOverride {
    std::optional<RealMatrix> q;
    std::optional<RealMatrix> p;
};

namespace detail {

inline RealMatrix lyapunov_derivative(const RealMatrix& a, const RealMatrix& p) {
    return symmetrize(a.transpose() * p + p * a);
}

/// Largest lambda with A'P + PA + lambda P <= 0.
inline double best_rate(const RealMatrix& a, const RealMatrix& p) {
    const RealMatrix l = cholesky(p);
    const RealMatrix d = lyapunov_derivative(a, p);
    const RealMatrix x = forward_substitute(l, d);
    const RealMatrix m = forward_substitute(l, x.transpose());
    return -lambda_max_sym(symmetrize(m));
}

inline void check_override_shape(const RealMatrix& m, std::size_t d, const char* what) {
    if (!m.is_square() || m.rows() != d)
        fail(ErrorKind::Configuration, std::string(what) + " override has the wrong dimension");
}

} // namespace detail

/// Constructs (P, lambda) for one system.
///
/// AS: P solves A'P + PA + Q = 0 (Q = I unless overridden), lambda = lambda_min(Q) / lambda_max(P).
/// MS: P = I when A' + A <= 0, lambda = 0; otherwise a user-supplied P is required.
/// U:  P = I, lambda = -2 ||A||.
/// A user-supplied P is accepted for any class, with Q = -(A'P + PA): AS and MS
/// use the rules above; U takes the largest lambda with A'P + PA + lambda P <= 0.
inline LyapunovPair synth_pair(const RealMatrix& a, StabilityClass cls, SystemIndex index = 0,
                               const PairOverride& ov = {}) {
    const std::size_t d = a.rows();
    const RealMatrix id = RealMatrix::identity(d);
    const std::string who = "system " + std::to_string(index);
    LyapunovPair pair;
    pair.index = index;

    if (ov.p) {
        detail::check_override_shape(*ov.p, d, "P");
        if (!is_positive_definite(*ov.p)) fail(ErrorKind::Configuration, who + ": supplied P is not positive definite");
        pair.p = symmetrize(*ov.p);
        pair.q = -detail::lyapunov_derivative(a, pair.p);
        pair.source = PairSource::UserSupplied;
        const double pscale = lambda_max_sym(pair.p) * std::max(1.0, spectral_norm(a));
        switch (cls) {
        case StabilityClass::AsymptoticallyStable: {
            const double qmin = lambda_min_sym(pair.q);
            if (!(qmin > 0.0))
                fail(ErrorKind::SynthesisUnavailable, who + ": supplied P does not give A'P + PA < 0");
            pair.lambda = qmin / lambda_max_sym(pair.p);
            break;
        }
        case StabilityClass::MarginallyStable:
            if (lambda_min_sym(pair.q) < -1e-9 * pscale)
                fail(ErrorKind::SynthesisUnavailable, who + ": supplied P does not give A'P + PA <= 0");
            pair.lambda = 0.0;
            break;
        case StabilityClass::Unstable:
            pair.lambda = std::min(detail::best_rate(a, pair.p), -std::numeric_limits<double>::min());
            break;
        }
        return pair;
    }

    switch (cls) {
    case StabilityClass::AsymptoticallyStable: {
        RealMatrix q = id;
        if (ov.q) {
            detail::check_override_shape(*ov.q, d, "Q");
            if (!is_positive_definite(*ov.q))
                fail(ErrorKind::Configuration, who + ": supplied Q is not positive definite");
            q = symmetrize(*ov.q);
        }
        pair.p = solve_lyapunov(a, q);
        if (!is_positive_definite(pair.p))
            fail(ErrorKind::NumericalFailure, who + ": Lyapunov solution is not positive definite");
        pair.q = q;
        pair.lambda = lambda_min_sym(q) / lambda_max_sym(pair.p);
        break;
    }
    case StabilityClass::MarginallyStable: {
        if (ov.q)
            fail(ErrorKind::SynthesisUnavailable,
                 who + ": a Q override cannot be used for a marginally stable system; supply P instead");
        const RealMatrix sym = symmetrize(a.transpose() + a);
        if (lambda_max_sym(sym) > 1e-10 * std::max(1.0, spectral_norm(a)))
            fail(ErrorKind::SynthesisUnavailable,
                 who + ": A' + A is indefinite; supply a P with A'P + PA <= 0 for this marginally stable system");
        pair.p = id;
        pair.q = -sym;
        pair.lambda = 0.0;
        break;
    }
    case StabilityClass::Unstable:
        if (ov.q) fail(ErrorKind::SynthesisUnavailable, who + ": a Q override is not used for unstable systems");
        pair.p = id;
        pair.q = -symmetrize(a.transpose() + a);
        pair.lambda = -2.0 * spectral_norm(a);
        break;
    }
    return pair;
}

/// Synthesizes one pair per system; overrides are keyed by system index.
inline std::vector<LyapunovPair> synth_pairs(const SystemFamily& fam,
                                             const std::map<SystemIndex, PairOverride>& overrides = {}) {
    std::vector<LyapunovPair> out;
    for (const auto& s : fam.systems()) {
        auto it = overrides.find(s.index);
        out.push_back(synth_pair(s.a, s.cls, s.index, it == overrides.end() ? PairOverride{} : it->second));
    }
    return out;
}

/// Smallest mu with <P_j x, x> <= mu <P_i x, x>: lambda_max(L^-1 P_j L^-T), L L' = P_i.
inline double mu_estimate(const RealMatrix& p_i, const RealMatrix& p_j) {
    if (p_i.rows() != p_j.rows() || !p_i.is_square() || !p_j.is_square())
        fail(ErrorKind::Dimension, "mu_estimate: P_i and P_j differ in shape");
    RealMatrix l;
    try {
        l = cholesky(p_i);
        (void)cholesky(p_j);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::NotPositiveDefinite) fail(ErrorKind::Domain, std::string("mu_estimate: ") + e.what());
        throw;
    }
    const RealMatrix x = forward_substitute(l, p_j);
    const RealMatrix m = forward_substitute(l, x.transpose());
    return lambda_max_sym(symmetrize(m));
}

using MuTable = std::map<Edge, double>;

inline const LyapunovPair& find_pair(const std::vector<LyapunovPair>& pairs, SystemIndex i) {
    for (const auto& p : pairs)
        if (p.index == i) return p;
    fail(ErrorKind::Configuration, "no Lyapunov pair for system " + std::to_string(i));
}

/// One mu per edge of the graph.
inline MuTable mu_table(const std::vector<LyapunovPair>& pairs, const TransitionGraph& graph) {
    for (int v = 1; v <= graph.vertex_count(); ++v) (void)find_pair(pairs, v);
    MuTable t;
    for (const Edge& e : graph.edges()) t[e] = mu_estimate(find_pair(pairs, e.from).p, find_pair(pairs, e.to).p);
    return t;
}

/// max_i ||A_i||
inline double lipschitz_constant(const SystemFamily& fam) {
    double l = 0.0;
    for (const auto& s : fam.systems()) l = std::max(l, spectral_norm(s.a));
    return l;
}

/// c = sqrt(lambda_max(sum_i P_i) / min_i lambda_min(P_i)); bounds
/// ||x(t)|| <= c ||x0|| exp(psi(t) / 2).
inline double uniformity_constant(const std::vector<LyapunovPair>& pairs) {
    if (pairs.empty()) fail(ErrorKind::Configuration, "uniformity_constant: no pairs");
    RealMatrix sum = pairs.front().p;
    double min_eig = lambda_min_sym(pairs.front().p);
    for (std::size_t k = 1; k < pairs.size(); ++k) {
        sum += pairs[k].p;
        min_eig = std::min(min_eig, lambda_min_sym(pairs[k].p));
    }
    return std::sqrt(lambda_max_sym(symmetrize(sum)) / min_eig);
}

} // namespace swicert
