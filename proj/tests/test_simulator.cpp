#include <catch_amalgamated.hpp>

#include <random>
#include <thread>

#include "reference_family.hpp"
#include "swicert/siggen.hpp"
#include "swicert/simulator.hpp"

using namespace swicert;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

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

SwitchingSignal reference_signal(double horizon) {
    return generate({ProfileTracking{ref::profile(), ref::graph(), 1}, horizon});
}

} // namespace

TEST_CASE("scalar decay") {
    const SystemFamily fam({RealMatrix{{-1.0}}});
    const auto tr = simulate(fam, SwitchingSignal({0.0}, {1}, 1.0), Vector{1.0});
    CHECK(tr.times.front() == 0.0);
    CHECK(tr.times.back() == 1.0);
    CHECK(tr.times.size() == kDefaultSamplesPerHold + 1);
    CHECK_THAT(tr.states.back()[0], WithinRel(std::exp(-1.0), 1e-14));
}

TEST_CASE("alternating scalar system returns to its start every period") {
    const SystemFamily fam({RealMatrix{{-1.0}}, RealMatrix{{1.0}}});
    const auto sig = generate({RoundRobin{{1, 2}, 1.0}, 200.0});
    const auto tr = simulate(fam, sig, Vector{1.0}, 1);
    REQUIRE(tr.times.size() == 201);
    for (std::size_t k = 0; k < tr.times.size(); k += 2) CHECK_THAT(tr.states[k][0], WithinAbs(1.0, 1e-9));
}

TEST_CASE("sample layout") {
    const SystemFamily fam(ref::matrices());
    const auto sig = reference_signal(500.0);
    const auto tr = simulate(fam, sig, Vector{1.0, -1.0}, 4);
    CHECK(std::adjacent_find(tr.times.begin(), tr.times.end(), std::greater_equal<>()) == tr.times.end());
    CHECK(tr.times.back() == sig.horizon());
    // every switching instant is sampled with the new index
    std::size_t k = 0;
    for (std::size_t i = 0; i < sig.instants().size(); ++i) {
        while (tr.times[k] < sig.instants()[i]) ++k;
        CHECK(tr.times[k] == sig.instants()[i]);
        CHECK(tr.active[k] == sig.indices()[i]);
    }
    CHECK(tr.family_fingerprint == fingerprint(fam));
    CHECK(tr.signal_fingerprint == fingerprint(sig));
}

TEST_CASE("propagation across holds is exact") {
    const SystemFamily fam(ref::matrices());
    const auto sig = reference_signal(300.0);
    const auto tr = simulate(fam, sig, Vector{2.0, 1.0}, 1);
    const auto& tau = sig.instants();
    for (std::size_t i = 0; i + 1 < tau.size(); ++i) {
        const Vector expect = expm(fam.at(sig.indices()[i]).a, tau[i + 1] - tau[i]) * std::span<const double>(tr.states[i]);
        for (std::size_t c = 0; c < 2; ++c)
            CHECK_THAT(tr.states[i + 1][c], WithinAbs(expect[c], 1e-9 * std::max(1.0, norm2(expect))));
    }
}

TEST_CASE("restarting mid-signal matches a straight run") {
    const SystemFamily fam(ref::matrices());
    const auto sig = reference_signal(400.0);
    const auto full = simulate(fam, sig, Vector{-3.0, 4.0}, 1);
    const std::size_t cut = sig.instants().size() / 2;
    std::vector<double> tau(sig.instants().begin() + static_cast<long>(cut), sig.instants().end());
    const double t0 = tau.front();
    for (double& t : tau) t -= t0;
    std::vector<SystemIndex> idx(sig.indices().begin() + static_cast<long>(cut), sig.indices().end());
    const SwitchingSignal rest(tau, idx, sig.horizon() - t0);
    const auto tail = simulate(fam, rest, full.states[cut], 1);
    const auto& a = full.states.back();
    const auto& b = tail.states.back();
    for (std::size_t c = 0; c < 2; ++c) CHECK_THAT(b[c], WithinAbs(a[c], 1e-9 * norm2(a) + 1e-300));
}

TEST_CASE("linearity in the initial state") {
    const SystemFamily fam(ref::matrices());
    const auto sig = reference_signal(200.0);
    const auto a = simulate(fam, sig, Vector{1.0, 2.0});
    const auto b = simulate(fam, sig, Vector{-3.5, -7.0});
    for (std::size_t k = 0; k < a.states.size(); ++k)
        for (std::size_t c = 0; c < 2; ++c)
            CHECK_THAT(b.states[k][c], WithinAbs(-3.5 * a.states[k][c], 1e-10 * 3.5 * norm2(a.states[k]) + 1e-300));
}

TEST_CASE("Lyapunov traces") {
    const SystemFamily fam(ref::matrices());
    const auto pairs = synth_pairs(fam);
    const auto mu = mu_table(pairs, ref::graph());
    const auto sig = reference_signal(300.0);
    const auto tr = simulate(fam, sig, Vector{1.0, 1.0});
    const auto v = v_trace(tr, pairs);
    REQUIRE(v.size() == tr.times.size());
    for (std::size_t k = 1; k < tr.times.size(); ++k) {
        if (tr.active[k] == tr.active[k - 1]) continue;
        // same state, new index: the jump is bounded by mu
        const double before = quadratic_form(find_pair(pairs, tr.active[k - 1]).p, tr.states[k]);
        CHECK(v[k] <= mu.at({tr.active[k - 1], tr.active[k]}) * before * (1 + 1e-12));
    }
    // identity P gives the squared norm
    std::vector<LyapunovPair> ids(4);
    for (int i = 0; i < 4; ++i) ids[static_cast<std::size_t>(i)] = {i + 1, RealMatrix::identity(2), 0.0, {}, PairSource::UserSupplied};
    const auto sq = v_trace(tr, ids);
    for (std::size_t k = 0; k < tr.times.size(); ++k) CHECK_THAT(sq[k], WithinRel(dot(tr.states[k], tr.states[k]), 1e-15));
    CHECK(kind_of([&] { (void)v_trace(tr, {pairs[0]}); }) == ErrorKind::Configuration);
}

TEST_CASE("single stable system obeys the decay bound") {
    const SystemFamily fam({RealMatrix{{-0.1, -0.2}, {0.1, -0.4}}});
    const auto pairs = synth_pairs(fam);
    const auto tr = simulate(fam, SwitchingSignal({0.0}, {1}, 40.0), Vector{3.0, -1.0}, 100);
    const auto v = v_trace(tr, pairs);
    for (std::size_t k = 0; k < v.size(); ++k) CHECK(v[k] <= v[0] * std::exp(-pairs[0].lambda * tr.times[k]) * (1 + 1e-12));
}

TEST_CASE("Lipschitz envelope") {
    const SystemFamily fam(ref::matrices());
    const auto sig = reference_signal(1000.0);
    const auto tr = simulate(fam, sig, Vector{-1000.0, 1000.0});
    CHECK(lipschitz_envelope_check(tr, lipschitz_constant(fam)));
    CHECK(lipschitz_envelope_check(simulate(fam, sig, Vector{0.0, 0.0}), 0.0));
    const SystemFamily grow({RealMatrix{{0.5}}});
    CHECK_FALSE(lipschitz_envelope_check(simulate(grow, SwitchingSignal({0.0}, {1}, 5.0), Vector{1.0}), 0.0));
}

TEST_CASE("input validation") {
    const SystemFamily fam(ref::matrices());
    const auto sig = reference_signal(100.0);
    CHECK(kind_of([&] { (void)simulate(fam, sig, Vector{1.0}); }) == ErrorKind::Configuration);
    CHECK(kind_of([&] { (void)simulate(fam, sig, Vector{1.0, 0.0}, 0); }) == ErrorKind::Configuration);
    CHECK(kind_of([&] { (void)simulate(fam, SwitchingSignal({0.0, 1.0}, {1, 5}, 2.0), Vector{1.0, 0.0}); }) ==
          ErrorKind::Configuration);
}

TEST_CASE("shared expm cache across threads") {
    const SystemFamily fam({RealMatrix{{-1.0}}, RealMatrix{{1.0}}});
    const auto sig = generate({RoundRobin{{1, 2}, 1.0}, 100.0});
    ExpmCache cache;
    const auto solo = simulate(fam, sig, Vector{1.0});
    std::vector<Trajectory> out(8);
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < out.size(); ++i)
        threads.emplace_back([&, i] { out[i] = simulate(fam, sig, Vector{1.0}, kDefaultSamplesPerHold, &cache); });
    for (auto& t : threads) t.join();
    for (const auto& tr : out) CHECK(tr.states == solo.states);
    CHECK(cache.size() == 4); // two systems, hold and sub-step durations
    CHECK(cache.hits() > 0);
}

TEST_CASE("trajectory CSV") {
    const SystemFamily fam({RealMatrix{{-1.0, 0.0}, {0.0, -2.0}}});
    const auto pairs = synth_pairs(fam);
    const auto tr = simulate(fam, SwitchingSignal({0.0}, {1}, 1.0), Vector{1.0, 1.0}, 2);
    const std::string csv = trajectory_csv(tr, pairs);
    CHECK(csv.rfind("t,sigma,x_1,x_2,V\n0,1,1,1,", 0) == 0);
    const std::string with_bound = trajectory_csv(tr, pairs, std::vector<double>{1.0, 0.5, 0.25});
    CHECK(with_bound.rfind("t,sigma,x_1,x_2,V,psi_bound\n", 0) == 0);
    CHECK(with_bound.find(",0.25\n") != std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("overflowing states are a numerical failure") {
    const SystemFamily fam({RealMatrix{{2.0}}});
    CHECK(kind_of([&] { (void)simulate(fam, SwitchingSignal({0.0}, {1}, 400.0), Vector{1.0}); }) ==
          ErrorKind::NumericalFailure);
}
