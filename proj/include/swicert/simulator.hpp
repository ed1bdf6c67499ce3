#pragma once

// Exact trajectories of x' = A_{sigma(t)} x as products of matrix
// exponentials, one per hold, with intra-hold samples.

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "swicert/error.hpp"
#include "swicert/family.hpp"
#include "swicert/matops.hpp"
#include "swicert/signal.hpp"

namespace swicert {

namespace detail {
inline void fnv1a(std::uint64_t& h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
}
inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
} // namespace detail

inline std::uint64_t fingerprint(const SystemFamily& fam) {
    std::uint64_t h = detail::kFnvOffset;
    for (const auto& s : fam.systems()) {
        detail::fnv1a(h, &s.index, sizeof s.index);
        for (double v : s.a.entries()) detail::fnv1a(h, &v, sizeof v);
    }
    return h;
}

inline std::uint64_t fingerprint(const SwitchingSignal& sig) {
    std::uint64_t h = detail::kFnvOffset;
    for (double v : sig.instants()) detail::fnv1a(h, &v, sizeof v);
    for (SystemIndex i : sig.indices()) detail::fnv1a(h, &i, sizeof i);
    const double hz = sig.horizon();
    detail::fnv1a(h, &hz, sizeof hz);
    return h;
}

/// exp(A_i s) keyed by (system index, bit pattern of s). Safe to share between
/// concurrent simulations; inserts stop once `capacity` entries are held.
class ExpmCache {
public:
    explicit ExpmCache(std::size_t capacity = 4096) : capacity_(capacity) {}

    RealMatrix get(SystemIndex index, const RealMatrix& a, double duration) {
        const Key key{index, std::bit_cast<std::uint64_t>(duration)};
        {
            std::shared_lock lock(mutex_);
            if (auto it = entries_.find(key); it != entries_.end()) {
                ++hits_;
                return it->second;
            }
        }
        RealMatrix e = expm(a, duration);
        std::unique_lock lock(mutex_);
        if (entries_.size() < capacity_) entries_.emplace(key, e);
        return e;
    }

    [[nodiscard]] std::size_t size() const {
        std::shared_lock lock(mutex_);
        return entries_.size();
    }
    [[nodiscard]] std::size_t hits() const noexcept { return hits_.load(); }

private:
    using Key = std::pair<SystemIndex, std::uint64_t>;
    std::size_t capacity_;
    mutable std::shared_mutex mutex_;
    std::map<Key, RealMatrix> entries_;
    std::atomic<std::size_t> hits_{0};
};

struct Trajectory {
    std::size_t dimension = 0;
    std::vector<double> times;
    std::vector<Vector> states;
    std::vector<SystemIndex> active;
    std::uint64_t family_fingerprint = 0;
    std::uint64_t signal_fingerprint = 0;
};

inline constexpr int kDefaultSamplesPerHold = 8;

/// Samples every switching instant, `samples_per_hold - 1` evenly spaced
/// points inside each hold, and the horizon. The state at each switching
/// instant is exp(A S) applied to the state at the previous instant.
inline Trajectory simulate(const SystemFamily& fam, const SwitchingSignal& sig, std::span<const double> x0,
                           int samples_per_hold = kDefaultSamplesPerHold, ExpmCache* cache = nullptr) {
    if (x0.size() != fam.dimension())
        fail(ErrorKind::Configuration, "x0 has dimension " + std::to_string(x0.size()) + ", family has " +
                                           std::to_string(fam.dimension()));
    if (samples_per_hold < 1) fail(ErrorKind::Configuration, "samples_per_hold must be >= 1");
    for (SystemIndex i : sig.indices())
        if (i < 1 || i > fam.size()) fail(ErrorKind::Configuration, "signal uses unknown system " + std::to_string(i));

    ExpmCache local(0);
    ExpmCache& exps = cache ? *cache : local;

    Trajectory tr;
    tr.dimension = fam.dimension();
    tr.family_fingerprint = fingerprint(fam);
    tr.signal_fingerprint = fingerprint(sig);
    const auto& tau = sig.instants();
    const auto& idx = sig.indices();
    const std::size_t holds = tau.size();
    tr.times.reserve(holds * static_cast<std::size_t>(samples_per_hold) + 1);

    Vector x(x0.begin(), x0.end());
    for (std::size_t i = 0; i < holds; ++i) {
        const double start = tau[i];
        const double end = i + 1 < holds ? tau[i + 1] : sig.horizon();
        const SystemIndex sys = idx[i];
        const RealMatrix& a = fam.at(sys).a;
        tr.times.push_back(start);
        tr.states.push_back(x);
        tr.active.push_back(sys);
        const double len = end - start;
        if (len <= 0.0) break; // last instant sits on the horizon
        if (samples_per_hold > 1) {
            const double step = len / samples_per_hold;
            const RealMatrix e_step = exps.get(sys, a, step);
            Vector y = x;
            for (int k = 1; k < samples_per_hold; ++k) {
                const double t = start + step * k;
                if (!(t > tr.times.back()) || !(t < end)) continue;
                y = e_step * std::span<const double>(y);
                tr.times.push_back(t);
                tr.states.push_back(y);
                tr.active.push_back(sys);
            }
        }
        x = exps.get(sys, a, len) * std::span<const double>(x);
        for (double v : x)
            if (!std::isfinite(v))
                fail(ErrorKind::NumericalFailure, "state left the floating-point range at t = " + std::to_string(end));
        if (i + 1 == holds) {
            tr.times.push_back(end);
            tr.states.push_back(x);
            tr.active.push_back(sys);
        }
    }
    return tr;
}

/// V_{sigma(t)}(x(t)) at each sample.
inline std::vector<double> v_trace(const Trajectory& tr, const std::vector<LyapunovPair>& pairs) {
    std::vector<double> v;
    v.reserve(tr.times.size());
    std::map<SystemIndex, const LyapunovPair*> by_index;
    for (const auto& p : pairs) by_index[p.index] = &p;
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        auto it = by_index.find(tr.active[k]);
        if (it == by_index.end())
            fail(ErrorKind::Configuration, "no Lyapunov pair for active system " + std::to_string(tr.active[k]));
        v.push_back(quadratic_form(it->second->p, tr.states[k]));
    }
    return v;
}

namespace detail {

/// ln <P x, x> and ln ||x|| without overflow for states near the top of the
/// double range; -inf for the zero state.
inline double log_quadratic_form(const RealMatrix& p, std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s = std::max(s, std::abs(v));
    if (s == 0.0) return -INFINITY;
    Vector u(x.begin(), x.end());
    for (double& v : u) v /= s;
    return 2.0 * std::log(s) + std::log(quadratic_form(p, u));
}

inline double log_norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s = std::max(s, std::abs(v));
    if (s == 0.0) return -INFINITY;
    double sum = 0.0;
    for (double v : x) sum += (v / s) * (v / s);
    return std::log(s) + 0.5 * std::log(sum);
}

} // namespace detail

/// ln V_{sigma(t)}(x(t)) at each sample.
inline std::vector<double> log_v_trace(const Trajectory& tr, const std::vector<LyapunovPair>& pairs) {
    std::vector<double> v;
    v.reserve(tr.times.size());
    std::map<SystemIndex, const LyapunovPair*> by_index;
    for (const auto& p : pairs) by_index[p.index] = &p;
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        auto it = by_index.find(tr.active[k]);
        if (it == by_index.end())
            fail(ErrorKind::Configuration, "no Lyapunov pair for active system " + std::to_string(tr.active[k]));
        v.push_back(detail::log_quadratic_form(it->second->p, tr.states[k]));
    }
    return v;
}

/// ||x0|| e^{-L t} <= ||x(t)|| <= ||x0|| e^{L t} at every sample, with
/// multiplicative slack 1 + 1e-9.
inline bool lipschitz_envelope_check(const Trajectory& tr, double lipschitz) {
    if (tr.states.empty()) return true;
    const double n0 = norm2(tr.states.front());
    const double t0 = tr.times.front();
    constexpr double slack = 1.0 + 1e-9;
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        const double n = norm2(tr.states[k]);
        const double dt = tr.times[k] - t0;
        if (n > n0 * std::exp(lipschitz * dt) * slack) return false;
        if (n * slack < n0 * std::exp(-lipschitz * dt)) return false;
    }
    return true;
}

/// CSV with header `t,sigma,x_1,...,x_d,V[,psi_bound]`.
inline std::string trajectory_csv(const Trajectory& tr, const std::vector<LyapunovPair>& pairs,
                                  const std::optional<std::vector<double>>& psi_bound = std::nullopt) {
    const auto v = v_trace(tr, pairs);
    std::string out = "t,sigma";
    for (std::size_t i = 1; i <= tr.dimension; ++i) out += ",x_" + std::to_string(i);
    out += ",V";
    if (psi_bound) out += ",psi_bound";
    out += '\n';
    char buf[64];
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g,%d", tr.times[k], tr.active[k]);
        out += buf;
        for (double xi : tr.states[k]) {
            std::snprintf(buf, sizeof buf, ",%.9g", xi);
            out += buf;
        }
        std::snprintf(buf, sizeof buf, ",%.9g", v[k]);
        out += buf;
        if (psi_bound) {
            std::snprintf(buf, sizeof buf, ",%.9g", (*psi_bound)[k]);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

} // namespace swicert
