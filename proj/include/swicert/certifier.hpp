#pragma once

// Stability certificate from asymptotic densities:
//
//   nu_check > 0  and
//   nu_hat * sum_{(k,l)} rho_hat_kl ln mu_kl
//       < sum_{j in AS} |lambda_j| eta_check(j) - sum_{j in U} |lambda_j| eta_hat(j)
//
// plus the pointwise bound V_{sigma(t)}(x(t)) <= exp(psi(t)) V_{sigma(0)}(x0)
// that underlies it, and the norm envelope ||x(t)|| <= c ||x0|| exp(psi(t)/2).

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "swicert/densities.hpp"
#include "swicert/error.hpp"
#include "swicert/family.hpp"
#include "swicert/signal.hpp"
#include "swicert/simulator.hpp"

namespace swicert {

struct Certificate {
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0; ///< rhs - lhs
    bool nu_check_positive = false;
    bool certified = false;
    Provenance provenance = Provenance::Declared;
    std::map<Edge, double> edge_contributions;
    std::map<SystemIndex, double> system_contributions;

    /// "certified (analytic densities)" and friends; empirical bundles only
    /// ever indicate.
    [[nodiscard]] std::string verdict() const {
        if (provenance == Provenance::EmpiricalTail)
            return certified ? "indicated (empirical densities)" : "not indicated (empirical densities)";
        return certified ? "certified (analytic densities)" : "not certified (analytic densities)";
    }
};

namespace detail {

inline StabilityClass class_of(const std::vector<StabilityClass>& classes, SystemIndex j) {
    if (j < 1 || static_cast<std::size_t>(j) > classes.size())
        fail(ErrorKind::Configuration, "no stability class for system " + std::to_string(j));
    return classes[static_cast<std::size_t>(j - 1)];
}

inline std::map<Edge, double> lhs_terms(const DensityBundle& b, const MuTable& mu) {
    std::map<Edge, double> out;
    for (const auto& [e, r] : b.rho_hat) {
        if (r == 0.0) continue;
        auto it = mu.find(e);
        if (it == mu.end()) fail(ErrorKind::Configuration, "no mu for weighted edge " + to_string(e));
        out[e] = b.nu_hat * r * std::log(it->second);
    }
    return out;
}

inline std::map<SystemIndex, double> rhs_terms(const DensityBundle& b, const std::vector<LyapunovPair>& pairs,
                                               const std::vector<StabilityClass>& classes) {
    std::map<SystemIndex, double> out;
    for (std::size_t k = 0; k < classes.size(); ++k) {
        const auto j = static_cast<SystemIndex>(k + 1);
        switch (classes[k]) {
        case StabilityClass::AsymptoticallyStable: {
            auto it = b.eta_check.find(j);
            const double eta = it == b.eta_check.end() ? 0.0 : it->second;
            out[j] = eta == 0.0 ? 0.0 : std::abs(find_pair(pairs, j).lambda) * eta;
            break;
        }
        case StabilityClass::Unstable: {
            auto it = b.eta_hat.find(j);
            if (it == b.eta_hat.end())
                fail(ErrorKind::Configuration, "no eta_hat for unstable system " + std::to_string(j));
            out[j] = it->second == 0.0 ? 0.0 : -std::abs(find_pair(pairs, j).lambda) * it->second;
            break;
        }
        case StabilityClass::MarginallyStable: out[j] = 0.0; break;
        }
    }
    return out;
}

template <class Map>
double sum_values(const Map& m) {
    double s = 0.0;
    for (const auto& [k, v] : m) s += v;
    return s;
}

} // namespace detail

inline double theorem_lhs(const DensityBundle& b, const MuTable& mu) {
    return detail::sum_values(detail::lhs_terms(b, mu));
}

inline double theorem_rhs(const DensityBundle& b, const std::vector<LyapunovPair>& pairs,
                          const std::vector<StabilityClass>& classes) {
    return detail::sum_values(detail::rhs_terms(b, pairs, classes));
}

/// Strict comparison with no slack; the margin is reported for the caller.
inline Certificate certify(const DensityBundle& b, const MuTable& mu, const std::vector<LyapunovPair>& pairs,
                           const std::vector<StabilityClass>& classes) {
    Certificate c;
    c.edge_contributions = detail::lhs_terms(b, mu);
    c.system_contributions = detail::rhs_terms(b, pairs, classes);
    c.lhs = detail::sum_values(c.edge_contributions);
    c.rhs = detail::sum_values(c.system_contributions);
    c.margin = c.rhs - c.lhs;
    c.nu_check_positive = b.nu_check > 0.0;
    c.certified = c.nu_check_positive && c.lhs < c.rhs;
    c.provenance = b.provenance;
    return c;
}

/// psi(t) and its parts at each requested time:
///   psi = transition_cost + unstable_term - stable_term + current_hold
/// where the holding terms sum completed holds only and current_hold is
/// -lambda_{sigma(tau_N)} (t - tau_N).
struct PsiTrace {
    std::vector<double> times;
    std::vector<double> psi;
    std::vector<double> transition_cost;
    std::vector<double> unstable_term;
    std::vector<double> stable_term;
    std::vector<double> current_hold;
};

/// Evaluates psi on nondecreasing times in [0, horizon].
inline PsiTrace psi_trace(const SwitchingSignal& sig, const std::vector<LyapunovPair>& pairs, const MuTable& mu,
                          const std::vector<StabilityClass>& classes, const std::vector<double>& times) {
    std::map<SystemIndex, double> rate;
    for (SystemIndex j : sig.indices())
        if (!rate.contains(j)) {
            const double lam = std::abs(find_pair(pairs, j).lambda);
            switch (detail::class_of(classes, j)) {
            case StabilityClass::AsymptoticallyStable: rate[j] = lam; break;
            case StabilityClass::Unstable: rate[j] = -lam; break;
            case StabilityClass::MarginallyStable: rate[j] = 0.0; break;
            }
        }

    PsiTrace tr;
    tr.times = times;
    const auto& tau = sig.instants();
    const auto& idx = sig.indices();
    double cost = 0.0, unstable = 0.0, stable = 0.0;
    std::size_t i = 0;
    double prev = -INFINITY;
    for (double t : times) {
        if (t < 0.0 || t > sig.horizon()) fail(ErrorKind::Domain, "psi: t outside [0, horizon]");
        if (t < prev) fail(ErrorKind::Domain, "psi_trace: times must be nondecreasing");
        prev = t;
        while (i + 1 < tau.size() && tau[i + 1] <= t) {
            const Edge e{idx[i], idx[i + 1]};
            auto it = mu.find(e);
            if (it == mu.end()) fail(ErrorKind::Configuration, "no mu for executed transition " + to_string(e));
            cost += std::log(it->second);
            const double r = rate[idx[i]];
            const double s = tau[i + 1] - tau[i];
            if (r > 0) stable += r * s;
            else if (r < 0) unstable += -r * s;
            ++i;
        }
        const double current = -rate[idx[i]] * (t - tau[i]);
        tr.transition_cost.push_back(cost);
        tr.unstable_term.push_back(unstable);
        tr.stable_term.push_back(stable);
        tr.current_hold.push_back(current);
        tr.psi.push_back(cost + unstable - stable + current);
    }
    return tr;
}

inline double psi(const SwitchingSignal& sig, const std::vector<LyapunovPair>& pairs, const MuTable& mu,
                  const std::vector<StabilityClass>& classes, double t) {
    if (!(t > 0.0)) fail(ErrorKind::Domain, "psi: t must be positive");
    return psi_trace(sig, pairs, mu, classes, {t}).psi.front();
}

struct EnvelopeReport {
    bool passed = true;
    std::size_t samples = 0;
    std::size_t violations = 0;
    /// max over samples of ln(V / (exp(psi) V0)); <= ln(1 + 1e-6) when passing.
    double worst_v_log_ratio = -INFINITY;
    /// max over samples of ln(||x|| / (c ||x0|| exp(psi / 2))).
    double worst_norm_log_ratio = -INFINITY;
    double first_violation_time = std::numeric_limits<double>::quiet_NaN();
    double uniformity_constant = 0.0;
};

inline constexpr double kEnvelopeSlack = 1e-6;

/// Checks both envelopes at every trajectory sample, in log space so that
/// decayed states and large psi neither underflow nor overflow.
inline EnvelopeReport envelope_check(const Trajectory& traj, const SwitchingSignal& sig,
                                     const std::vector<LyapunovPair>& pairs, const MuTable& mu,
                                     const std::vector<StabilityClass>& classes) {
    if (traj.signal_fingerprint != fingerprint(sig))
        fail(ErrorKind::Configuration, "trajectory was not produced from this signal");
    if (traj.times.empty()) return {};

    EnvelopeReport rep;
    rep.samples = traj.times.size();
    rep.uniformity_constant = uniformity_constant(pairs);
    const auto ps = psi_trace(sig, pairs, mu, classes, traj.times);
    const auto log_v = log_v_trace(traj, pairs);
    const double log_v0 = log_v.front();
    const double log_x0 = detail::log_norm(traj.states.front());
    const double log_c = std::log(rep.uniformity_constant);
    const double tol = std::log1p(kEnvelopeSlack);
    if (log_v0 == -INFINITY) return rep; // zero initial state stays zero

    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const double rv = log_v[k] - (ps.psi[k] + log_v0);
        const double rn = detail::log_norm(traj.states[k]) - (log_c + log_x0 + 0.5 * ps.psi[k]);
        rep.worst_v_log_ratio = std::max(rep.worst_v_log_ratio, rv);
        rep.worst_norm_log_ratio = std::max(rep.worst_norm_log_ratio, rn);
        if (rv > tol || rn > tol) {
            if (rep.violations == 0) rep.first_violation_time = traj.times[k];
            ++rep.violations;
        }
    }
    rep.passed = rep.violations == 0;
    return rep;
}

/// exp(psi(t)) V_{sigma(0)}(x0) at each trajectory sample.
inline std::vector<double> psi_bound(const Trajectory& traj, const SwitchingSignal& sig,
                                     const std::vector<LyapunovPair>& pairs, const MuTable& mu,
                                     const std::vector<StabilityClass>& classes) {
    const auto ps = psi_trace(sig, pairs, mu, classes, traj.times);
    const double v0 = v_trace(traj, pairs).front();
    std::vector<double> out;
    out.reserve(ps.psi.size());
    for (double p : ps.psi) out.push_back(std::exp(p) * v0);
    return out;
}

} // namespace swicert
