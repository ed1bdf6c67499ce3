#pragma once

// Asymptotic densities of a switching signal: upper/lower density of the
// h-frequency, upper density of each transition frequency and upper/lower
// densities of each h-fraction of activation.
//
// Three sources: closed-form profiles (exact limits), declared values, and a
// finite-horizon tail estimate. The last is a heuristic and is labelled so.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "swicert/error.hpp"
#include "swicert/expression.hpp"
#include "swicert/graph.hpp"
#include "swicert/signal.hpp"

namespace swicert {

enum class Provenance { Profile, Declared, EmpiricalTail };

inline const char* to_string(Provenance p) {
    switch (p) {
    case Provenance::Profile: return "profile";
    case Provenance::Declared: return "declared";
    case Provenance::EmpiricalTail: return "empirical_tail";
    }
    return "?";
}

struct DensityBundle {
    double nu_hat = 0.0;
    double nu_check = 0.0;
    std::map<Edge, double> rho_hat;
    std::map<SystemIndex, double> eta_hat;
    std::map<SystemIndex, double> eta_check;
    Provenance provenance = Provenance::Declared;
    bool converged = true;
};

/// Throws InconsistentBundle when the bundle violates its ordering or range invariants.
inline void validate_bundle(const DensityBundle& b) {
    auto bad = [](const std::string& why) { fail(ErrorKind::InconsistentBundle, why); };
    auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (!ok(b.nu_hat) || !ok(b.nu_check)) bad("nu densities must be finite and >= 0");
    if (b.nu_check > b.nu_hat) bad("nu_check exceeds nu_hat");
    double rho_sum = 0.0;
    for (const auto& [e, r] : b.rho_hat) {
        if (!ok(r)) bad("rho_hat for " + to_string(e) + " must be finite and >= 0");
        rho_sum += r;
    }
    // Upper densities of individual frequencies need not sum to one; only
    // declared or profile bundles carry exact frequencies.
    if (b.provenance != Provenance::EmpiricalTail && rho_sum > 1.0 + 1e-9) bad("rho_hat sums to more than 1");
    for (const auto& [j, v] : b.eta_hat)
        if (!ok(v)) bad("eta_hat(" + std::to_string(j) + ") must be finite and >= 0");
    for (const auto& [j, v] : b.eta_check) {
        if (!ok(v)) bad("eta_check(" + std::to_string(j) + ") must be finite and >= 0");
        auto it = b.eta_hat.find(j);
        if (it == b.eta_hat.end()) bad("eta_check(" + std::to_string(j) + ") has no eta_hat");
        if (v > it->second) bad("eta_check(" + std::to_string(j) + ") exceeds eta_hat");
    }
}

/// Declared asymptotic data.
inline DensityBundle bundle_direct(DensityBundle values) {
    values.provenance = Provenance::Declared;
    values.converged = true;
    validate_bundle(values);
    return values;
}

/// Closed-form asymptotic behaviour of a signal: N(t), the cumulative
/// activation of each system, and constant transition frequencies.
struct SignalProfile {
    HFunction h = HFunction::identity();
    Expression n_of_t;
    std::map<SystemIndex, Expression> eta_of_t;
    std::map<Edge, double> rho;
    /// Range over which monotonicity and nonnegativity are checked.
    double range_lo = 10.0;
    double range_hi = 1e6;
};

namespace detail {
inline std::vector<double> log_grid(double lo, double hi, int points) {
    std::vector<double> g;
    const double a = std::log(lo), b = std::log(hi);
    for (int k = 0; k < points; ++k) g.push_back(std::exp(a + (b - a) * k / (points - 1)));
    g.front() = lo;
    g.back() = hi;
    return g;
}
} // namespace detail

inline void validate_profile(const SignalProfile& p) {
    if (!(p.range_lo > 0.0) || !(p.range_hi > p.range_lo))
        fail(ErrorKind::Configuration, "profile evaluation range must satisfy 0 < lo < hi");
    if (p.n_of_t.empty()) fail(ErrorKind::Configuration, "profile needs N(t)");
    const auto grid = detail::log_grid(p.range_lo, p.range_hi, 512);
    double prev = -INFINITY;
    for (double t : grid) {
        const double n = p.n_of_t(t);
        if (n < 0.0) fail(ErrorKind::Configuration, "profile N(t) is negative at t = " + std::to_string(t));
        if (n < prev - 1e-12 * std::abs(prev))
            fail(ErrorKind::Configuration, "profile N(t) decreases near t = " + std::to_string(t));
        prev = n;
        for (const auto& [j, e] : p.eta_of_t)
            if (e(t) < -1e-12 * t)
                fail(ErrorKind::Configuration, "profile activation of system " + std::to_string(j) +
                                                   " is negative at t = " + std::to_string(t));
    }
    double sum = 0.0;
    for (const auto& [e, r] : p.rho) {
        if (!(r >= 0.0) || !std::isfinite(r)) fail(ErrorKind::Configuration, "profile rho for " + to_string(e) + " must be >= 0");
        sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-9) fail(ErrorKind::Configuration, "profile rho values must sum to 1");
}

/// lim_{t -> inf} e(t) / h(t) from the leading terms.
inline double limit_over_h(const Expression& e, const HFunction& h, const std::string& what) {
    const auto terms = e.canonical();
    if (terms.empty()) return 0.0;
    const Term& lead = terms.front();
    const int cmp = compare_growth({lead.power, lead.log ? 1 : 0}, {h.exponent(), h.log_power()});
    if (cmp > 0) {
        if (lead.coeff > 0) fail(ErrorKind::DivergentDensity, what + " grows faster than h(t) = " + h.name());
        fail(ErrorKind::Configuration, what + " tends to -infinity");
    }
    if (cmp < 0) return 0.0;
    return lead.coeff;
}

/// Exact limits for the supported expression family; lim sup = lim inf here.
inline DensityBundle densities_from_profile(const SignalProfile& p) {
    validate_profile(p);
    DensityBundle b;
    b.provenance = Provenance::Profile;
    b.converged = true;
    b.nu_hat = b.nu_check = limit_over_h(p.n_of_t, p.h, "N(t)");
    for (const auto& [j, e] : p.eta_of_t) {
        const double v = limit_over_h(e, p.h, "activation of system " + std::to_string(j));
        b.eta_hat[j] = b.eta_check[j] = std::max(v, 0.0);
    }
    b.rho_hat = p.rho;
    validate_bundle(b);
    return b;
}

inline constexpr int kTailGrid = 256;
inline constexpr double kDefaultTailFraction = 0.5;

/// Tail-window surrogate for the asymptotic densities: extrema of the
/// finite-time statistics over a 256-point grid on [f T, T].
/// `converged` reports whether both halves of the tail agree within 5%.
inline DensityBundle densities_empirical(const SwitchingSignal& sig, const HFunction& h, const TransitionGraph& graph,
                                         double tail_fraction = kDefaultTailFraction) {
    if (!(tail_fraction > 0.0 && tail_fraction < 1.0))
        fail(ErrorKind::Domain, "tail_fraction must lie in (0, 1)");
    if (auto v = validate_signal(sig, graph); !v.empty())
        fail(ErrorKind::Configuration, "signal executes " + to_string(v.front().transition) + " at t = " +
                                           std::to_string(v.front().time) + ", which the graph does not admit");
    const double horizon = sig.horizon();
    const double t0 = tail_fraction * horizon;
    if (sig.count_upto(horizon) - sig.count_upto(t0) < 10)
        fail(ErrorKind::InsufficientData, "fewer than 10 switches in the tail window");

    const auto& tau = sig.instants();
    const auto& idx = sig.indices();
    const int n_sys = graph.vertex_count();
    std::map<Edge, std::size_t> counts;
    for (const Edge& e : graph.edges()) counts[e] = 0;
    std::vector<double> act(static_cast<std::size_t>(n_sys) + 1, 0.0);

    struct Extrema {
        double lo = INFINITY, hi = -INFINITY;
        void add(double v) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    };
    // [half][statistic]
    std::array<Extrema, 2> nu;
    std::array<std::map<SystemIndex, Extrema>, 2> eta;
    std::array<std::map<Edge, Extrema>, 2> rho_x;

    std::size_t i = 0; // index of the last instant <= t
    for (int k = 0; k < kTailGrid; ++k) {
        const double t = k == kTailGrid - 1 ? horizon : t0 + (horizon - t0) * k / (kTailGrid - 1);
        while (i + 1 < tau.size() && tau[i + 1] <= t) {
            ++counts[{idx[i], idx[i + 1]}];
            act[static_cast<std::size_t>(idx[i])] += tau[i + 1] - tau[i];
            ++i;
        }
        const int half = k < kTailGrid / 2 ? 0 : 1;
        const double ht = h(t);
        nu[half].add(static_cast<double>(i) / ht);
        for (SystemIndex j = 1; j <= n_sys; ++j) eta[half][j].add(act[static_cast<std::size_t>(j)] / ht);
        if (i > 0)
            for (const auto& [e, c] : counts) rho_x[half][e].add(static_cast<double>(c) / static_cast<double>(i));
    }

    DensityBundle b;
    b.provenance = Provenance::EmpiricalTail;
    b.nu_hat = std::max(nu[0].hi, nu[1].hi);
    b.nu_check = std::min(nu[0].lo, nu[1].lo);
    double eta_scale = 0.0;
    for (SystemIndex j = 1; j <= n_sys; ++j) {
        b.eta_hat[j] = std::max(eta[0][j].hi, eta[1][j].hi);
        b.eta_check[j] = std::min(eta[0][j].lo, eta[1][j].lo);
        eta_scale = std::max(eta_scale, b.eta_hat[j]);
    }
    for (const Edge& e : graph.edges()) {
        double hi = 0.0;
        for (int half = 0; half < 2; ++half)
            if (auto it = rho_x[half].find(e); it != rho_x[half].end()) hi = std::max(hi, it->second.hi);
        b.rho_hat[e] = hi;
    }

    auto agree = [](double a, double c, double floor) {
        return std::abs(a - c) <= 0.05 * std::max({std::abs(a), std::abs(c), floor});
    };
    bool conv = agree(nu[0].hi, nu[1].hi, 1e-3 * b.nu_hat) && agree(nu[0].lo, nu[1].lo, 1e-3 * b.nu_hat);
    for (SystemIndex j = 1; j <= n_sys; ++j)
        conv = conv && agree(eta[0][j].hi, eta[1][j].hi, 1e-3 * eta_scale) &&
               agree(eta[0][j].lo, eta[1][j].lo, 1e-3 * eta_scale);
    for (const Edge& e : graph.edges()) {
        const auto a = rho_x[0].find(e), c = rho_x[1].find(e);
        if (a != rho_x[0].end() && c != rho_x[1].end()) conv = conv && agree(a->second.hi, c->second.hi, 1e-3);
    }
    b.converged = conv;
    validate_bundle(b);
    return b;
}

} // namespace swicert
