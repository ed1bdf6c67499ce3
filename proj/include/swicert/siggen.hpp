#pragma once

// Concrete admissible switching signals: periodic round-robin, seeded random
// walks on a transition graph, and a deterministic scheduler that tracks a
// closed-form profile of switch counts, activation times and transition
// frequencies.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <variant>
#include <vector>

#include "swicert/densities.hpp"
#include "swicert/error.hpp"
#include "swicert/graph.hpp"
#include "swicert/signal.hpp"

namespace swicert {

struct RoundRobin {
    std::vector<SystemIndex> cycle;
    double hold = 1.0;
};

struct FixedHold {
    double tau = 1.0;
};
struct UniformHold {
    double lo = 0.5;
    double hi = 1.5;
};

struct RandomWalk {
    TransitionGraph graph;
    std::variant<FixedHold, UniformHold> hold = FixedHold{};
    std::uint64_t seed = 0;
    SystemIndex start = 1;
};

struct ProfileTracking {
    SignalProfile profile;
    TransitionGraph graph;
    SystemIndex start = 1;
};

struct GeneratorSpec {
    std::variant<RoundRobin, RandomWalk, ProfileTracking> kind;
    double horizon = 100.0;
};

/// The edges a round-robin cycle executes, including the closing edge.
inline TransitionGraph cycle_graph(const std::vector<SystemIndex>& cycle) {
    std::vector<Edge> es;
    int n = 0;
    for (std::size_t i = 0; i < cycle.size(); ++i) {
        es.push_back({cycle[i], cycle[(i + 1) % cycle.size()]});
        n = std::max(n, cycle[i]);
    }
    return TransitionGraph(n, es);
}

namespace detail {

inline void require_horizon(double horizon) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) fail(ErrorKind::Configuration, "generator horizon must be positive");
}

inline SwitchingSignal generate_round_robin(const RoundRobin& rr, double horizon) {
    const auto& c = rr.cycle;
    if (c.size() < 2) fail(ErrorKind::Configuration, "round-robin cycle needs at least two entries");
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] < 1) fail(ErrorKind::Configuration, "round-robin indices start at 1");
        if (c[i] == c[(i + 1) % c.size()])
            fail(ErrorKind::Configuration, "round-robin cycle repeats an index at position " + std::to_string(i));
    }
    if (!(rr.hold > 0.0) || !std::isfinite(rr.hold)) fail(ErrorKind::Configuration, "round-robin hold must be positive");
    std::vector<double> tau;
    std::vector<SystemIndex> idx;
    for (std::size_t i = 0;; ++i) {
        const double t = static_cast<double>(i) * rr.hold;
        if (t > horizon) break;
        tau.push_back(t);
        idx.push_back(c[i % c.size()]);
    }
    return SwitchingSignal(std::move(tau), std::move(idx), horizon);
}

/// Uniform double in [0, 1) from the top 53 bits; unlike the standard
/// distributions, the sequence is the same on every standard library.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline SwitchingSignal generate_random_walk(const RandomWalk& rw, double horizon) {
    const auto& g = rw.graph;
    if (!g.has_vertex(rw.start)) fail(ErrorKind::Configuration, "random walk start is not a vertex");
    if (!g.every_vertex_has_successor())
        fail(ErrorKind::Configuration, "random walk graph has a vertex without outgoing edges");
    if (const auto* u = std::get_if<UniformHold>(&rw.hold)) {
        if (!(u->lo > 0.0) || !(u->hi >= u->lo) || !std::isfinite(u->hi))
            fail(ErrorKind::Configuration, "uniform hold range must satisfy 0 < lo <= hi");
    } else if (!(std::get<FixedHold>(rw.hold).tau > 0.0)) {
        fail(ErrorKind::Configuration, "fixed hold must be positive");
    }

    std::mt19937_64 rng(rw.seed);
    std::map<SystemIndex, std::vector<SystemIndex>> succ;
    for (SystemIndex k = 1; k <= g.vertex_count(); ++k) succ[k] = g.successors(k);

    std::vector<double> tau{0.0};
    std::vector<SystemIndex> idx{rw.start};
    double t = 0.0;
    for (std::size_t i = 1;; ++i) {
        double next;
        if (const auto* f = std::get_if<FixedHold>(&rw.hold)) {
            next = static_cast<double>(i) * f->tau;
        } else {
            const auto& u = std::get<UniformHold>(rw.hold);
            next = t + u.lo + (u.hi - u.lo) * unit_uniform(rng);
        }
        if (next > horizon) break;
        const auto& out = succ[idx.back()];
        idx.push_back(out[rng() % out.size()]);
        tau.push_back(next);
        t = next;
    }
    return SwitchingSignal(std::move(tau), std::move(idx), horizon);
}

/// Smallest t >= 0 with n(t) >= y, to 1e-9 relative, for nondecreasing n.
inline double inverse_profile(const Expression& n, double y) {
    if (n(0.0) >= y) return 0.0;
    double lo = 0.0, hi = 1.0;
    while (n(hi) < y) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) fail(ErrorKind::Configuration, "profile N(t) never reaches " + std::to_string(y));
    }
    for (int it = 0; it < 200 && hi - lo > 1e-9 * std::max(1.0, hi); ++it) {
        const double m = 0.5 * (lo + hi);
        (n(m) < y ? lo : hi) = m;
    }
    return hi;
}

/// Greedy tracking scheduler.
///
/// System j is entered with in-frequency pi_j = sum_k rho_kj, so its m-th visit
/// should start near switch number m / pi_j. Each visit holds j for the
/// activation still owed at that point, E_j(N^-1(m / pi_j)) minus the
/// completed activation of j, so that cumulative activation follows E_j while
/// switch counts follow N. Systems without an activation target, or never
/// entered, hold until the next N^-1 instant. At each switch the destination
/// minimizes the L1 distance of the running transition frequencies and
/// activation fractions from their targets after the candidate hold.
inline SwitchingSignal generate_profile_tracking(const ProfileTracking& pt, double horizon) {
    const auto& p = pt.profile;
    const auto& g = pt.graph;
    validate_profile(p);
    if (!g.has_vertex(pt.start)) fail(ErrorKind::Configuration, "profile tracking start is not a vertex");
    for (const auto& [e, r] : p.rho)
        if (r > 0.0 && !g.has_edge(e.from, e.to))
            fail(ErrorKind::Configuration, "profile weights " + to_string(e) + ", which the graph does not admit");
    if (p.n_of_t(horizon) < 2.0) fail(ErrorKind::InsufficientSwitches, "profile N(T) < 2 on the requested horizon");

    const int n_sys = g.vertex_count();
    std::vector<double> pi(static_cast<std::size_t>(n_sys) + 1, 0.0);
    for (const auto& [e, r] : p.rho)
        if (e.to >= 1 && e.to <= n_sys) pi[static_cast<std::size_t>(e.to)] += r;
    std::vector<Edge> edges(g.edges().begin(), g.edges().end());
    std::map<Edge, double> target;
    for (const Edge& e : edges) target[e] = p.rho.contains(e) ? p.rho.at(e) : 0.0;
    std::map<Edge, std::size_t> counts;
    std::vector<std::size_t> visits(pi.size(), 0);
    std::vector<double> act(pi.size(), 0.0);

    std::vector<double> tau{0.0};
    std::vector<SystemIndex> idx{pt.start};
    double t = 0.0;
    std::size_t n = 0;

    auto hold_for = [&](SystemIndex j, double now, std::size_t switches) {
        const double s_min = 1e-9 * std::max(1.0, now);
        const auto ju = static_cast<std::size_t>(j);
        auto eta = p.eta_of_t.find(j);
        if (pi[ju] <= 0.0 || eta == p.eta_of_t.end())
            return std::max(s_min, inverse_profile(p.n_of_t, static_cast<double>(switches + 1)) - now);
        const double when = inverse_profile(p.n_of_t, static_cast<double>(visits[ju] + 1) / pi[ju]);
        return std::max(s_min, std::max(0.0, eta->second(when)) - act[ju]);
    };

    double s = hold_for(pt.start, 0.0, 0);
    ++visits[static_cast<std::size_t>(pt.start)];
    SystemIndex cur = pt.start;
    for (;;) {
        if (t + s > horizon) break;
        act[static_cast<std::size_t>(cur)] += s;
        t += s;

        SystemIndex best = 0;
        double best_cost = INFINITY, best_hold = 0.0;
        for (SystemIndex l : g.successors(cur)) {
            double cost = 0.0;
            const Edge cand{cur, l};
            for (const Edge& e : edges) {
                const double c = static_cast<double>(counts[e] + (e == cand ? 1 : 0));
                cost += std::abs(c / static_cast<double>(n + 1) - target[e]);
            }
            const double sl = hold_for(l, t, n + 1);
            const double t2 = t + sl;
            const double h2 = p.h(t2);
            for (const auto& [j, e] : p.eta_of_t) {
                if (j < 1 || j > n_sys) continue;
                const double a = act[static_cast<std::size_t>(j)] + (j == l ? sl : 0.0);
                cost += std::abs(a / h2 - std::max(0.0, e(t2)) / h2);
            }
            if (cost < best_cost - 1e-15) {
                best_cost = cost;
                best = l;
                best_hold = sl;
            }
        }
        ++counts[{cur, best}];
        ++n;
        cur = best;
        tau.push_back(t);
        idx.push_back(cur);
        s = best_hold;
        ++visits[static_cast<std::size_t>(cur)];
    }
    if (tau.size() < 3) fail(ErrorKind::InsufficientSwitches, "profile tracking produced fewer than two switches");
    return SwitchingSignal(std::move(tau), std::move(idx), horizon);
}

} // namespace detail

inline SwitchingSignal generate(const GeneratorSpec& spec) {
    detail::require_horizon(spec.horizon);
    return std::visit(
        [&](const auto& k) -> SwitchingSignal {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, RoundRobin>) return detail::generate_round_robin(k, spec.horizon);
            else if constexpr (std::is_same_v<K, RandomWalk>) return detail::generate_random_walk(k, spec.horizon);
            else return detail::generate_profile_tracking(k, spec.horizon);
        },
        spec.kind);
}

} // namespace swicert
