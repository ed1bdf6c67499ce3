#pragma once

// Piecewise-constant switching signals on a finite horizon and their exact
// finite-time statistics: switch counts, holding times, transition counts,
// h-frequency, transition frequency and h-fraction of activation.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "swicert/error.hpp"
#include "swicert/graph.hpp"

namespace swicert {

/// Class-K-infinity gauge h used to normalize switch counts and activation times.
class HFunction {
public:
    struct Identity {};
    struct Power {
        double p = 1.0;
    };
    struct TLog {}; ///< t ln(1 + t)

    HFunction() = default;
    static HFunction identity() { return HFunction(Identity{}); }
    static HFunction power(double p) {
        if (!(p > 0.0) || !std::isfinite(p)) fail(ErrorKind::Domain, "h = t^p needs p > 0");
        return HFunction(Power{p});
    }
    static HFunction tlog() { return HFunction(TLog{}); }

    [[nodiscard]] double operator()(double t) const {
        return std::visit(
            [t](const auto& f) -> double {
                using F = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<F, Identity>) return t;
                else if constexpr (std::is_same_v<F, Power>) return std::pow(t, f.p);
                else return t * std::log1p(t);
            },
            form_);
    }

    /// Leading growth t^exponent * ln(t)^log_power.
    [[nodiscard]] double exponent() const {
        if (const auto* p = std::get_if<Power>(&form_)) return p->p;
        return 1.0;
    }
    [[nodiscard]] int log_power() const { return std::holds_alternative<TLog>(form_) ? 1 : 0; }

    [[nodiscard]] std::string name() const {
        if (std::holds_alternative<Identity>(form_)) return "identity";
        if (std::holds_alternative<TLog>(form_)) return "tlog";
        char buf[64];
        std::snprintf(buf, sizeof buf, "power(%.17g)", std::get<Power>(form_).p);
        return buf;
    }

    [[nodiscard]] const std::variant<Identity, Power, TLog>& form() const noexcept { return form_; }

private:
    explicit HFunction(std::variant<Identity, Power, TLog> f) : form_(f) {}
    std::variant<Identity, Power, TLog> form_{Identity{}};
};

/// Right-continuous piecewise-constant signal: sigma(t) = indices[i] on
/// [instants[i], instants[i+1]), with instants[0] = 0, observed up to `horizon`.
class SwitchingSignal {
public:
    SwitchingSignal() = default;

    SwitchingSignal(std::vector<double> instants, std::vector<SystemIndex> indices, double horizon)
        : instants_(std::move(instants)), indices_(std::move(indices)), horizon_(horizon) {
        if (instants_.empty()) fail(ErrorKind::Configuration, "signal needs at least the initial instant");
        if (instants_.size() != indices_.size())
            fail(ErrorKind::Configuration, "signal instants and indices differ in length");
        if (instants_.front() != 0.0) fail(ErrorKind::Configuration, "signal must start at tau_0 = 0");
        for (std::size_t i = 0; i < instants_.size(); ++i) {
            if (!std::isfinite(instants_[i])) fail(ErrorKind::Configuration, "non-finite switching instant");
            if (indices_[i] < 1) fail(ErrorKind::Configuration, "system indices start at 1");
            if (i > 0 && !(instants_[i] > instants_[i - 1]))
                fail(ErrorKind::Configuration, "switching instants must be strictly increasing (row " +
                                                   std::to_string(i) + ")");
            if (i > 0 && indices_[i] == indices_[i - 1])
                fail(ErrorKind::Configuration, "consecutive indices must differ (row " + std::to_string(i) + ")");
        }
        if (!std::isfinite(horizon_) || !(horizon_ > 0.0) || horizon_ < instants_.back())
            fail(ErrorKind::Configuration, "horizon must be positive and not before the last instant");
    }

    [[nodiscard]] const std::vector<double>& instants() const noexcept { return instants_; }
    [[nodiscard]] const std::vector<SystemIndex>& indices() const noexcept { return indices_; }
    [[nodiscard]] double horizon() const noexcept { return horizon_; }
    /// Total number of switches (instants after tau_0).
    [[nodiscard]] std::size_t switches() const noexcept { return instants_.size() - 1; }

    /// Number of instants tau_i with 0 < tau_i <= t, without range checks.
    [[nodiscard]] std::size_t count_upto(double t) const {
        return static_cast<std::size_t>(std::upper_bound(instants_.begin(), instants_.end(), t) - instants_.begin()) - 1;
    }

    [[nodiscard]] SystemIndex active_at(double t) const { return indices_[count_upto(t)]; }

    friend bool operator==(const SwitchingSignal&, const SwitchingSignal&) = default;

private:
    std::vector<double> instants_{0.0};
    std::vector<SystemIndex> indices_{1};
    double horizon_ = 1.0;
};

namespace detail {
inline void require_in_horizon(const SwitchingSignal& sig, double t, const char* what) {
    if (!(t > 0.0) || t > sig.horizon())
        fail(ErrorKind::Domain, std::string(what) + ": t must lie in ]0, horizon]");
}
} // namespace detail

/// N_sigma(t): switches on ]0, t].
inline std::size_t switch_count(const SwitchingSignal& sig, double t) {
    detail::require_in_horizon(sig, t, "switch_count");
    return sig.count_upto(t);
}

/// S_{i+1} = tau_{i+1} - tau_i for consecutive instants.
inline std::vector<double> holding_times(const SwitchingSignal& sig) {
    const auto& tau = sig.instants();
    std::vector<double> s;
    s.reserve(tau.size() ? tau.size() - 1 : 0);
    for (std::size_t i = 0; i + 1 < tau.size(); ++i) s.push_back(tau[i + 1] - tau[i]);
    return s;
}

/// Transitions k -> l whose switching instant is <= t.
inline std::size_t transition_count(const SwitchingSignal& sig, SystemIndex k, SystemIndex l, double t) {
    detail::require_in_horizon(sig, t, "transition_count");
    const std::size_t n = sig.count_upto(t);
    const auto& idx = sig.indices();
    std::size_t c = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (idx[i] == k && idx[i + 1] == l) ++c;
    return c;
}

/// nu_h(t) = N_sigma(t) / h(t)
inline double nu_h(const SwitchingSignal& sig, const HFunction& h, double t) {
    return static_cast<double>(switch_count(sig, t)) / h(t);
}

/// rho_kl(t) = transitions k -> l / N_sigma(t); undefined before the first switch.
inline double rho(const SwitchingSignal& sig, SystemIndex k, SystemIndex l, double t) {
    const std::size_t n = switch_count(sig, t);
    if (n == 0) fail(ErrorKind::UndefinedStatistic, "rho: no switches on ]0, t]");
    return static_cast<double>(transition_count(sig, k, l, t)) / static_cast<double>(n);
}

/// Total completed holding time of system j up to the last switch <= t. The
/// running hold t - tau_{N(t)} is not included.
inline double completed_activation(const SwitchingSignal& sig, SystemIndex j, double t) {
    detail::require_in_horizon(sig, t, "eta_h");
    const std::size_t n = sig.count_upto(t);
    const auto& tau = sig.instants();
    const auto& idx = sig.indices();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (idx[i] == j) s += tau[i + 1] - tau[i];
    return s;
}

/// eta_h(j, t): completed activation of j over h(t).
inline double eta_h(const SwitchingSignal& sig, const HFunction& h, SystemIndex j, double t) {
    return completed_activation(sig, j, t) / h(t);
}

/// Average dwell time test: N_sigma(T, t) <= N0 + (T - t) / tau_a for all
/// 0 <= t <= T <= horizon. The supremum over intervals ]t, T] is reached with T
/// at a switch tau_b and t approaching a switch tau_a from the left, which
/// gives b - a + 1 switches over a length tau_b - tau_a.
inline bool check_adt(const SwitchingSignal& sig, double n0, double tau_a) {
    if (!(n0 > 0.0) || !(tau_a > 0.0)) fail(ErrorKind::Domain, "check_adt: N0 and tau_a must be positive");
    const auto& tau = sig.instants();
    const std::size_t n = sig.switches();
    // max over a <= b of (b - a + 1) - (tau_b - tau_a) / tau_a
    double best_start = -INFINITY; // max_{a <= b} (tau_a / tau_a_param - a)
    for (std::size_t b = 1; b <= n; ++b) {
        best_start = std::max(best_start, tau[b] / tau_a - static_cast<double>(b));
        const double excess = static_cast<double>(b) + 1.0 - tau[b] / tau_a + best_start;
        if (excess > n0 + 1e-9 * std::max(1.0, n0)) return false;
    }
    return true;
}

struct SignalViolation {
    std::size_t position = 0; ///< switch number i (transition at instants[i])
    double time = 0.0;
    Edge transition;
    std::string reason;
};

/// Lists every executed transition that is not an edge of `graph`, and every
/// index outside the graph's vertex set. Empty means admissible.
inline std::vector<SignalViolation> validate_signal(const SwitchingSignal& sig, const TransitionGraph& graph) {
    std::vector<SignalViolation> out;
    const auto& idx = sig.indices();
    const auto& tau = sig.instants();
    if (!graph.has_vertex(idx.front()))
        out.push_back({0, 0.0, {idx.front(), idx.front()}, "initial index is not a vertex"});
    for (std::size_t i = 1; i < idx.size(); ++i) {
        const Edge e{idx[i - 1], idx[i]};
        if (!graph.has_vertex(idx[i])) out.push_back({i, tau[i], e, "index is not a vertex"});
        else if (!graph.has_edge(e.from, e.to)) out.push_back({i, tau[i], e, "transition is not an edge"});
    }
    return out;
}

/// CSV with header `tau,sigma`; instants printed with 17 significant digits so
/// the signal round-trips exactly.
inline std::string to_csv(const SwitchingSignal& sig) {
    std::string out = "tau,sigma\n";
    char buf[64];
    for (std::size_t i = 0; i < sig.instants().size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%d\n", sig.instants()[i], sig.indices()[i]);
        out += buf;
    }
    return out;
}

inline SwitchingSignal signal_from_csv(std::istream& in, double horizon) {
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::Configuration, "signal CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "tau,sigma") fail(ErrorKind::Configuration, "signal CSV header must be `tau,sigma`");
    std::vector<double> tau;
    std::vector<SystemIndex> sigma;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) fail(ErrorKind::Configuration, "signal CSV row " + std::to_string(row) + " lacks a comma");
        const std::string a = line.substr(0, comma), b = line.substr(comma + 1);
        double t = 0.0;
        int s = 0;
        auto r1 = std::from_chars(a.data(), a.data() + a.size(), t);
        auto r2 = std::from_chars(b.data(), b.data() + b.size(), s);
        if (r1.ec != std::errc{} || r1.ptr != a.data() + a.size() || r2.ec != std::errc{} || r2.ptr != b.data() + b.size())
            fail(ErrorKind::Configuration, "signal CSV row " + std::to_string(row) + " is malformed: " + line);
        tau.push_back(t);
        sigma.push_back(s);
    }
    return SwitchingSignal(std::move(tau), std::move(sigma), horizon);
}

inline SwitchingSignal signal_from_csv(const std::string& text, double horizon) {
    std::istringstream in(text);
    return signal_from_csv(in, horizon);
}

} // namespace swicert
