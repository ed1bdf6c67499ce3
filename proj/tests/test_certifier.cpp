#include <catch_amalgamated.hpp>

#include "reference_family.hpp"
#include "swicert/certifier.hpp"
#include "swicert/siggen.hpp"

using namespace swicert;
using Catch::Matchers::WithinAbs;

namespace {

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an exception");
    return ErrorKind::Domain;
}

struct Scalar {
    SystemFamily fam{{RealMatrix{{-1.0}}, RealMatrix{{1.0}}}};
    std::vector<LyapunovPair> pairs;
    TransitionGraph graph{2, {{1, 2}, {2, 1}}};
    MuTable mu;
    Scalar() {
        const PairOverride unit{std::nullopt, RealMatrix{{1.0}}};
        pairs = synth_pairs(fam, {{1, unit}, {2, unit}});
        mu = mu_table(pairs, graph);
    }
};

DensityBundle alternation_bundle() {
    DensityBundle b;
    b.nu_hat = b.nu_check = 1.0;
    b.eta_hat = b.eta_check = {{1, 0.5}, {2, 0.5}};
    b.rho_hat = {{{1, 2}, 0.5}, {{2, 1}, 0.5}};
    return bundle_direct(b);
}

SwitchingSignal alternation(int n) {
    return generate({RoundRobin{{1, 2}, 1.0}, static_cast<double>(n)});
}

} // namespace

TEST_CASE("reference certificate") {
    const SystemFamily fam(ref::matrices());
    const auto pairs = synth_pairs(fam);
    const auto mu = mu_table(pairs, ref::graph());
    const auto b = densities_from_profile(ref::profile());
    const auto c = certify(b, mu, pairs, fam.classes());
    CHECK_THAT(c.lhs, WithinAbs(ref::kLhs, 1e-12));
    CHECK_THAT(c.rhs, WithinAbs(ref::kRhs, 1e-12));
    CHECK_THAT(c.lhs, WithinAbs(0.12149, 1e-4));
    CHECK_THAT(c.rhs, WithinAbs(0.12574, 1e-4));
    CHECK(c.margin == c.rhs - c.lhs);
    CHECK_THAT(c.margin, WithinAbs(0.00425, 5e-5));
    CHECK(c.nu_check_positive);
    CHECK(c.certified);
    CHECK(c.verdict() == "certified (analytic densities)");
    CHECK(c.provenance == Provenance::Profile);
    REQUIRE(c.edge_contributions.size() == 10);
    CHECK(c.edge_contributions.at({2, 3}) == 0.0);
    CHECK(c.system_contributions.at(2) == 0.0);
    CHECK(c.system_contributions.at(3) < 0.0);
    CHECK(theorem_lhs(b, mu) == c.lhs);
    CHECK(theorem_rhs(b, pairs, fam.classes()) == c.rhs);
}

TEST_CASE("equality case is not certified") {
    const Scalar s;
    CHECK(s.mu.at({1, 2}) == 1.0);
    const auto c = certify(alternation_bundle(), s.mu, s.pairs, s.fam.classes());
    CHECK(c.lhs == 0.0);
    CHECK(c.rhs == 0.0);
    CHECK(c.margin == 0.0);
    CHECK_FALSE(c.certified);
    CHECK(c.verdict() == "not certified (analytic densities)");
}

TEST_CASE("trivial sides") {
    const Scalar s;
    DensityBundle b = alternation_bundle();
    b.nu_hat = b.nu_check = 0.0;
    CHECK(theorem_lhs(b, s.mu) == 0.0);
    DensityBundle stable;
    stable.eta_hat = stable.eta_check = {{1, 0.0}};
    const SystemFamily fam({RealMatrix{{-1.0}}});
    CHECK(theorem_rhs(stable, synth_pairs(fam), fam.classes()) == 0.0);
}

TEST_CASE("zero lower switching density blocks the certificate") {
    const Scalar s;
    DensityBundle b;
    b.nu_hat = 1.0;
    b.nu_check = 0.0;
    b.eta_hat = b.eta_check = {{1, 1.0}, {2, 0.0}};
    b.rho_hat = {{{1, 2}, 0.5}, {{2, 1}, 0.5}};
    const auto c = certify(bundle_direct(b), s.mu, s.pairs, s.fam.classes());
    CHECK(c.lhs < c.rhs);
    CHECK_FALSE(c.nu_check_positive);
    CHECK_FALSE(c.certified);
}

TEST_CASE("missing data is a configuration error") {
    const Scalar s;
    DensityBundle b = alternation_bundle();
    CHECK(kind_of([&] { (void)theorem_lhs(b, MuTable{}); }) == ErrorKind::Configuration);
    b.eta_hat.erase(2);
    b.eta_check.erase(2);
    CHECK(kind_of([&] { (void)theorem_rhs(b, s.pairs, s.fam.classes()); }) == ErrorKind::Configuration);
}

TEST_CASE("empirical bundles only indicate") {
    const Scalar s;
    DensityBundle b = alternation_bundle();
    b.provenance = Provenance::EmpiricalTail;
    b.eta_check[1] = b.eta_hat[1] = 0.6;
    b.eta_check[2] = b.eta_hat[2] = 0.4;
    const auto c = certify(b, s.mu, s.pairs, s.fam.classes());
    CHECK(c.certified);
    CHECK(c.verdict() == "indicated (empirical densities)");
}

TEST_CASE("certificate margin is monotone in unstable activation") {
    const SystemFamily fam(ref::matrices());
    const auto pairs = synth_pairs(fam);
    const auto mu = mu_table(pairs, ref::graph());
    auto b = densities_from_profile(ref::profile());
    double prev = certify(b, mu, pairs, fam.classes()).margin;
    for (int k = 0; k < 5; ++k) {
        b.eta_hat[3] += 0.001;
        const double m = certify(b, mu, pairs, fam.classes()).margin;
        CHECK(m <= prev);
        prev = m;
    }
    CHECK_FALSE(certify(b, mu, pairs, fam.classes()).certified);
}

TEST_CASE("psi on a hand-computed signal") {
    const Scalar s;
    MuTable mu{{{1, 2}, 2.0}, {{2, 1}, 3.0}};
    const SwitchingSignal sig({0.0, 1.0, 3.0}, {1, 2, 1}, 4.0);
    const auto tr = psi_trace(sig, s.pairs, mu, s.fam.classes(), {0.0, 0.5, 1.0, 2.0, 3.0, 3.5});
    const std::vector<double> expect{0.0, -1.0, std::log(2.0) - 2.0, std::log(2.0), std::log(6.0) + 2.0, std::log(6.0) + 1.0};
    for (std::size_t k = 0; k < expect.size(); ++k) {
        CHECK_THAT(tr.psi[k], WithinAbs(expect[k], 1e-14));
        CHECK(tr.psi[k] == tr.transition_cost[k] + tr.unstable_term[k] - tr.stable_term[k] + tr.current_hold[k]);
    }
    CHECK(tr.current_hold[2] == 0.0); // t on a switching instant
    CHECK(tr.current_hold[4] == 0.0);
    CHECK_THAT(psi(sig, s.pairs, mu, s.fam.classes(), 3.5), WithinAbs(expect[5], 1e-14));
    CHECK(kind_of([&] { (void)psi(sig, s.pairs, mu, s.fam.classes(), 0.0); }) == ErrorKind::Domain);
    CHECK(kind_of([&] { (void)psi(sig, s.pairs, MuTable{}, s.fam.classes(), 2.0); }) == ErrorKind::Configuration);
}

TEST_CASE("psi of the equality case vanishes at even times") {
    const Scalar s;
    const auto sig = alternation(200);
    for (int n = 1; n <= 100; ++n) CHECK(psi(sig, s.pairs, s.mu, s.fam.classes(), 2.0 * n) == 0.0);
}

TEST_CASE("psi of a constant stable signal") {
    const SystemFamily fam({RealMatrix{{-0.1, -0.2}, {0.1, -0.4}}});
    const auto pairs = synth_pairs(fam);
    const SwitchingSignal sig({0.0}, {1}, 50.0);
    for (double t : {0.5, 10.0, 50.0}) CHECK_THAT(psi(sig, pairs, {}, fam.classes(), t), WithinAbs(-ref::kLambda1 * t, 1e-12));
}

TEST_CASE("psi slope between switches") {
    const SystemFamily fam(ref::matrices());
    const auto pairs = synth_pairs(fam);
    const auto mu = mu_table(pairs, ref::graph());
    const auto sig = generate({ProfileTracking{ref::profile(), ref::graph(), 1}, 300.0});
    const auto& tau = sig.instants();
    for (std::size_t i = 0; i + 1 < tau.size(); ++i) {
        if (tau[i + 1] - tau[i] < 1e-3) continue;
        const double t = 0.5 * (tau[i] + tau[i + 1]);
        const double h = 1e-6;
        const double slope = (psi(sig, pairs, mu, fam.classes(), t + h) - psi(sig, pairs, mu, fam.classes(), t)) / h;
        CHECK_THAT(slope, WithinAbs(-find_pair(pairs, sig.indices()[i]).lambda, 1e-4));
    }
}

TEST_CASE("envelope holds along the reference system") {
    const SystemFamily fam(ref::matrices());
    const auto pairs = synth_pairs(fam);
    const auto mu = mu_table(pairs, ref::graph());
    const auto sig = generate({ProfileTracking{ref::profile(), ref::graph(), 1}, 2000.0});
    for (const Vector& x0 : {Vector{-1000.0, 1000.0}, Vector{500.0, -1200.0}}) {
        const auto tr = simulate(fam, sig, x0);
        const auto rep = envelope_check(tr, sig, pairs, mu, fam.classes());
        CHECK(rep.passed);
        CHECK(rep.violations == 0);
        CHECK(rep.samples == tr.times.size());
        CHECK(rep.worst_v_log_ratio <= std::log1p(1e-6));
        CHECK(rep.worst_norm_log_ratio <= std::log1p(1e-6));
        CHECK(std::isnan(rep.first_violation_time));
    }
}

TEST_CASE("envelope of a single stable system is the decay bound") {
    const SystemFamily fam({RealMatrix{{-0.1, -0.2}, {0.1, -0.4}}});
    const auto pairs = synth_pairs(fam);
    const SwitchingSignal sig({0.0}, {1}, 30.0);
    const auto tr = simulate(fam, sig, Vector{1.0, 2.0}, 64);
    const auto rep = envelope_check(tr, sig, pairs, {}, fam.classes());
    CHECK(rep.passed);
    CHECK(rep.worst_v_log_ratio <= 1e-12);
}

TEST_CASE("halved mu is caught by the envelope") {
    const Scalar s;
    MuTable bad = s.mu;
    for (auto& [e, m] : bad) m *= 0.5;
    const auto sig = alternation(20);
    const auto tr = simulate(s.fam, sig, Vector{1.0});
    const auto rep = envelope_check(tr, sig, s.pairs, bad, s.fam.classes());
    CHECK_FALSE(rep.passed);
    CHECK(rep.violations > 0);
    CHECK(rep.first_violation_time == 1.0);
}

TEST_CASE("envelope rejects a trajectory from another signal") {
    const Scalar s;
    const auto a = alternation(10), b = alternation(12);
    const auto tr = simulate(s.fam, a, Vector{1.0});
    CHECK(kind_of([&] { (void)envelope_check(tr, b, s.pairs, s.mu, s.fam.classes()); }) == ErrorKind::Configuration);
}

TEST_CASE("zero initial state passes trivially") {
    const Scalar s;
    const auto sig = alternation(10);
    const auto tr = simulate(s.fam, sig, Vector{0.0});
    CHECK(envelope_check(tr, sig, s.pairs, s.mu, s.fam.classes()).passed);
}

TEST_CASE("envelope check near the top of the double range") {
    // V = x^2 overflows for x ~ 1e200, the log-space check does not
    const SystemFamily fam({RealMatrix{{1.0}}});
    const auto pairs = synth_pairs(fam, {{1, {std::nullopt, RealMatrix{{1.0}}}}});
    const SwitchingSignal sig({0.0}, {1}, 400.0);
    const auto tr = simulate(fam, sig, Vector{1.0}, 8);
    REQUIRE(tr.states.back()[0] > 1e170);
    const auto rep = envelope_check(tr, sig, pairs, MuTable{}, fam.classes());
    CHECK(rep.passed);
    CHECK(std::isfinite(rep.worst_v_log_ratio));
}
