// Acceptance suite: one [PASS]/[FAIL] line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "reference_family.hpp"
#include "swicert/swicert.hpp"

using namespace swicert;

namespace {

// Tolerances and budgets.
constexpr double kPairTol = 5e-4;
constexpr double kMuTol = 5e-4;
constexpr double kCertTol = 1e-4;
constexpr double kAlternationTol = 1e-9;
constexpr double kLyapTol = 1e-10;
constexpr double kExpmTol = 1e-10;
constexpr double kSweepLow = 1.0 - 1e-3;
constexpr double kSweepHigh = 1.0 + 1e-12;
constexpr double kDecay = 1e-2;
constexpr double kDensityTol = 0.05;

struct Outcome {
    bool ok = true;
    std::ostringstream detail;
    void require(bool cond, const std::string& what) {
        if (!cond) {
            if (!ok) detail << "; ";
            else detail.str("");
            ok = false;
            detail << what;
        }
    }
};

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<void(Outcome&)>& body) {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(out);
    } catch (const std::exception& e) {
        out.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= budget_s) {
        std::ostringstream s;
        s << "took " << secs << " s, budget " << budget_s << " s";
        out.require(false, s.str());
    }
    if (!out.ok) ++failures;
    std::printf("[%s] %d %s (%.2f s)%s%s\n", out.ok ? "PASS" : "FAIL", id, name, secs, out.ok ? "" : ": ",
                out.ok ? "" : out.detail.str().c_str());
    std::fflush(stdout);
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

std::string fmt(const char* what, double got, double want) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s = %.10g, expected %.10g", what, got, want);
    return buf;
}

// Random family for the envelope suite: a mix of stable, unstable and
// (in even dimension) skew-symmetric marginal systems.
SystemFamily random_family(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> dim(1, 4), count(2, 5), kind(0, 2);
    const auto d = static_cast<std::size_t>(dim(rng));
    const int n = count(rng);
    std::vector<RealMatrix> mats;
    while (static_cast<int>(mats.size()) < n) {
        const int k = kind(rng);
        if (k == 0) {
            mats.push_back(oracle::random_hurwitz(d, rng));
        } else if (k == 1) {
            RealMatrix m = oracle::random_hurwitz(d, rng);
            for (std::size_t i = 0; i < d; ++i) m(i, i) += 1.5;
            if (classify(m) != StabilityClass::Unstable || scaled_determinant(m) <= 1e-6) continue;
            mats.push_back(m);
        } else if (d % 2 == 0) {
            std::uniform_real_distribution<double> w(0.2, 2.0);
            RealMatrix m(d, d);
            for (std::size_t i = 0; i < d; i += 2) {
                const double f = w(rng);
                m(i, i + 1) = f;
                m(i + 1, i) = -f;
            }
            mats.push_back(m);
        }
    }
    return SystemFamily(mats);
}

TransitionGraph random_graph(int n, std::mt19937_64& rng) {
    std::bernoulli_distribution keep(0.6);
    std::vector<Edge> es;
    for (int k = 1; k <= n; ++k) {
        std::vector<Edge> out;
        for (int l = 1; l <= n; ++l)
            if (l != k && keep(rng)) out.push_back({k, l});
        if (out.empty()) out.push_back({k, k % n + 1});
        es.insert(es.end(), out.begin(), out.end());
    }
    return TransitionGraph(n, es);
}

} // namespace

int main() {
    const SystemFamily fam4(ref::matrices());

    criterion(1, "reference Lyapunov pairs", 1.0, [&](Outcome& o) {
        const auto pairs = synth_pairs(fam4);
        const auto& p1 = find_pair(pairs, 1).p;
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) o.require(near(p1(i, j), ref::kP1[i][j], kPairTol), fmt("P1 entry", p1(i, j), ref::kP1[i][j]));
        const double want[] = {ref::kLambda1, 0.0, ref::kLambda3, ref::kLambda4};
        for (SystemIndex j = 1; j <= 4; ++j) {
            const double got = find_pair(pairs, j).lambda;
            o.require(near(got, want[j - 1], kPairTol), fmt(("lambda" + std::to_string(j)).c_str(), got, want[j - 1]));
        }
    });

    criterion(2, "reference mu table", 1.0, [&](Outcome& o) {
        const auto mu = mu_table(synth_pairs(fam4), ref::graph());
        o.require(mu.size() == 10, "expected ten mu entries");
        for (const auto& [e, v] : mu) {
            const double want = e.from == 1 ? ref::kMuOut : e.to == 1 ? ref::kMuIn : 1.0;
            o.require(near(v, want, kMuTol), fmt(("mu " + to_string(e)).c_str(), v, want));
        }
    });

    criterion(3, "reference certificate", 1.0, [&](Outcome& o) {
        const auto pairs = synth_pairs(fam4);
        const auto b = densities_from_profile(ref::profile());
        const auto c = certify(b, mu_table(pairs, ref::graph()), pairs, fam4.classes());
        o.require(near(c.lhs, ref::kLhs, kCertTol), fmt("lhs", c.lhs, ref::kLhs));
        o.require(near(c.rhs, ref::kRhs, kCertTol), fmt("rhs", c.rhs, ref::kRhs));
        o.require(c.certified, "not certified");
    });

    criterion(4, "alternation boundary case", 1.0, [&](Outcome& o) {
        const SystemFamily fam({RealMatrix{{-1.0}}, RealMatrix{{1.0}}});
        std::map<SystemIndex, PairOverride> ov{{1, {std::nullopt, RealMatrix{{1.0}}}}, {2, {std::nullopt, RealMatrix{{1.0}}}}};
        const auto pairs = synth_pairs(fam, ov);
        const auto g = TransitionGraph::complete(2);
        SignalProfile p;
        p.n_of_t = Expression({{1.0, 1.0}});
        p.eta_of_t[1] = Expression({{0.5, 1.0}});
        p.eta_of_t[2] = Expression({{0.5, 1.0}});
        p.rho[{1, 2}] = 0.5;
        p.rho[{2, 1}] = 0.5;
        const auto c = certify(densities_from_profile(p), mu_table(pairs, g), pairs, fam.classes());
        o.require(c.lhs == 0.0, fmt("lhs", c.lhs, 0.0));
        o.require(c.rhs == 0.0, fmt("rhs", c.rhs, 0.0));
        o.require(!c.certified, "certified a non-convergent system");

        const auto sig = generate({RoundRobin{{1, 2}, 1.0}, 200.0});
        const auto tr = simulate(fam, sig, Vector{1.0}, 1);
        for (std::size_t k = 0; k < tr.times.size(); ++k)
            if (static_cast<long>(tr.times[k]) % 2 == 0 && tr.times[k] == std::floor(tr.times[k]))
                o.require(near(tr.states[k][0], 1.0, kAlternationTol), fmt(("x(" + std::to_string(tr.times[k]) + ")").c_str(), tr.states[k][0], 1.0));
    });

    criterion(5, "envelope property suite", 30.0, [&](Outcome& o) {
        std::mt19937_64 rng(2024);
        std::uniform_int_distribution<int> switches(10, 1000);
        std::normal_distribution<double> g;
        for (int trial = 0; trial < 50; ++trial) {
            const auto fam = random_family(rng);
            const auto graph = random_graph(fam.size(), rng);
            const auto pairs = synth_pairs(fam);
            const auto mu = mu_table(pairs, graph);
            const int n_sw = switches(rng);
            // ||x(t)|| <= ||x0|| e^{L t}; keep the state inside double range
            const double horizon = std::min(0.9 * n_sw, 600.0 / lipschitz_constant(fam));
            const auto sig = generate({RandomWalk{graph, UniformHold{0.05, 2.0}, rng(), 1}, horizon});
            o.require(sig.switches() <= 1000, "trial " + std::to_string(trial) + " has too many switches");
            Vector x0(fam.dimension());
            for (auto& v : x0) v = g(rng);
            const auto tr = simulate(fam, sig, x0);
            const auto rep = envelope_check(tr, sig, pairs, mu, fam.classes());
            std::ostringstream s;
            s << "trial " << trial << " (d=" << fam.dimension() << ", N=" << fam.size() << ") violates at t = "
              << rep.first_violation_time;
            o.require(rep.passed, s.str());
        }
    });

    criterion(6, "kernel oracles", 60.0, [&](Outcome& o) {
        std::mt19937_64 rng(6);
        std::uniform_int_distribution<int> dim(1, 8);
        double worst_lyap = 0.0;
        for (int trial = 0; trial < 1000; ++trial) {
            const RealMatrix a = oracle::random_hurwitz(static_cast<std::size_t>(dim(rng)), rng);
            const RealMatrix q = RealMatrix::identity(a.rows());
            const RealMatrix p = solve_lyapunov(a, q);
            worst_lyap = std::max(worst_lyap, max_abs(a.transpose() * p + p * a + q));
        }
        o.require(worst_lyap <= kLyapTol, fmt("Lyapunov residual", worst_lyap, kLyapTol));

        std::uniform_real_distribution<double> scale(0.05, 5.0), tt(0.1, 2.0);
        double worst_expm = 0.0;
        for (int trial = 0; trial < 200; ++trial) {
            const RealMatrix a0 = oracle::random_matrix(static_cast<std::size_t>(dim(rng)), rng);
            const double t = tt(rng);
            const RealMatrix a = a0 * (scale(rng) / (spectral_norm(a0) * t));
            const RealMatrix ref_e = oracle::expm_series(a, t);
            worst_expm = std::max(worst_expm, oracle::max_abs_diff(expm(a, t), ref_e) / max_abs(ref_e));
        }
        o.require(worst_expm <= kExpmTol, fmt("expm relative error", worst_expm, kExpmTol));

        double lo = INFINITY, hi = 0.0;
        auto sweep = [&](const RealMatrix& pi, const RealMatrix& pj, std::uint64_t seed) {
            const double r = oracle::rayleigh_sweep(pi, pj, 100000, seed) / mu_estimate(pi, pj);
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        };
        const auto pairs = synth_pairs(fam4);
        for (const Edge& e : ref::edges()) sweep(find_pair(pairs, e.from).p, find_pair(pairs, e.to).p, 100 + static_cast<std::uint64_t>(e.from * 10 + e.to));
        for (int trial = 0; trial < 20; ++trial) {
            const auto fam = SystemFamily({oracle::random_hurwitz(2 + trial % 2, rng), oracle::random_hurwitz(2 + trial % 2, rng)});
            const auto ps = synth_pairs(fam);
            sweep(ps[0].p, ps[1].p, 500 + static_cast<std::uint64_t>(trial));
        }
        o.require(lo >= kSweepLow, fmt("worst sweep / mu", lo, kSweepLow));
        o.require(hi <= kSweepHigh, fmt("largest sweep / mu", hi, kSweepHigh));
    });

    criterion(7, "reference trajectories decay", 30.0, [&](Outcome& o) {
        const auto pairs = synth_pairs(fam4);
        const auto mu = mu_table(pairs, ref::graph());
        const auto sig = generate({ProfileTracking{ref::profile(), ref::graph(), 1}, 1e4});
        ExpmCache cache;
        for (const Vector& x0 : {Vector{-1000.0, 1000.0}, Vector{500.0, -1200.0}}) {
            const auto tr = simulate(fam4, sig, x0, kDefaultSamplesPerHold, &cache);
            const double ratio = norm2(tr.states.back()) / norm2(x0);
            o.require(ratio < kDecay, fmt("|x(T)| / |x0|", ratio, kDecay));
            const auto rep = envelope_check(tr, sig, pairs, mu, fam4.classes());
            o.require(rep.passed, "envelope violated at t = " + std::to_string(rep.first_violation_time));
        }
    });

    criterion(8, "empirical densities match the profile", 60.0, [&](Outcome& o) {
        const auto p = ref::profile();
        const auto analytic = densities_from_profile(p);
        const auto sig = generate({ProfileTracking{p, ref::graph(), 1}, 1e6});
        const auto emp = densities_empirical(sig, p.h, ref::graph());
        auto rel = [&](const std::string& what, double got, double want) {
            if (want == 0.0) return;
            o.require(std::abs(got - want) <= kDensityTol * want, fmt(what.c_str(), got, want));
        };
        rel("nu_hat", emp.nu_hat, analytic.nu_hat);
        rel("nu_check", emp.nu_check, analytic.nu_check);
        for (const auto& [e, r] : analytic.rho_hat) rel("rho_hat " + to_string(e), emp.rho_hat.at(e), r);
        for (const auto& [j, v] : analytic.eta_hat) rel("eta_hat " + std::to_string(j), emp.eta_hat.at(j), v);
        for (const auto& [j, v] : analytic.eta_check) rel("eta_check " + std::to_string(j), emp.eta_check.at(j), v);
    });

    criterion(9, "dwell-time comparison", 1.0, [&](Outcome& o) {
        std::vector<double> tau;
        std::vector<SystemIndex> idx;
        for (int i = 0; i <= 100; ++i) {
            tau.push_back(i);
            idx.push_back(1 + i % 2);
        }
        o.require(check_adt(SwitchingSignal(tau, idx, 100.0), 1.0, 1.0), "unit-spaced signal rejected");
        tau.assign({0.0});
        idx.assign({1});
        for (int i = 1; i <= 10; ++i) {
            tau.push_back(0.01 * i);
            idx.push_back(1 + i % 2);
        }
        o.require(!check_adt(SwitchingSignal(tau, idx, 1.0), 1.0, 1.0), "burst accepted");
        SignalProfile p;
        p.n_of_t = Expression({{1.0 / 3.0, 1.0}, {1.0, 0.5}});
        p.eta_of_t[1] = Expression({{0.5, 1.0}});
        p.eta_of_t[2] = Expression({{0.5, 1.0}});
        p.rho[{1, 2}] = 0.5;
        p.rho[{2, 1}] = 0.5;
        const auto b = densities_from_profile(p);
        o.require(near(b.nu_hat, 1.0 / 3.0, 1e-12), fmt("nu_hat", b.nu_hat, 1.0 / 3.0));
    });

    return failures == 0 ? 0 : 1;
}
