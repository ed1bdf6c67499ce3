#pragma once

// JSON configuration, report assembly and the four CLI commands. Commands
// return the report and the files to write; the executable owns all I/O
// except reading the configuration and signal CSVs.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "swicert/certifier.hpp"
#include "swicert/densities.hpp"
#include "swicert/family.hpp"
#include "swicert/siggen.hpp"
#include "swicert/simulator.hpp"

namespace swicert {

using Json = nlohmann::ordered_json;

struct CsvSource {
    std::string path;
    std::optional<double> horizon;
};

struct SimulationBlock {
    std::vector<Vector> x0;
    int samples_per_hold = kDefaultSamplesPerHold;
    std::optional<double> horizon;
    SystemIndex start = 1;
};

struct Config {
    SystemFamily family;
    std::map<SystemIndex, PairOverride> overrides;
    TransitionGraph graph;
    HFunction h;
    std::variant<SignalProfile, GeneratorSpec, CsvSource, DensityBundle> signal;
    double tail_fraction = kDefaultTailFraction;
    std::optional<SimulationBlock> simulation;
    std::optional<std::string> output_dir;
    std::filesystem::path base_dir;
};

namespace detail {

[[noreturn]] inline void config_error(const std::string& where, const std::string& what) {
    fail(ErrorKind::Configuration, where + ": " + what);
}

inline const Json& require(const Json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) config_error(where, std::string("missing `") + key + "`");
    return j.at(key);
}

inline double as_number(const Json& j, const std::string& where) {
    if (!j.is_number()) config_error(where, "expected a number");
    return j.get<double>();
}

inline int as_index(const Json& j, const std::string& where) {
    if (!j.is_number_integer()) config_error(where, "expected an integer");
    return j.get<int>();
}

inline int parse_key_index(const std::string& key, const std::string& where) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
        return v;
    } catch (const std::exception&) {
        config_error(where, "`" + key + "` is not a system index");
    }
}

inline Edge parse_edge_key(const std::string& key, const std::string& where) {
    const auto arrow = key.find("->");
    if (arrow == std::string::npos) config_error(where, "edge key `" + key + "` must look like `k->l`");
    return {parse_key_index(key.substr(0, arrow), where), parse_key_index(key.substr(arrow + 2), where)};
}

inline RealMatrix parse_matrix(const Json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) config_error(where, "matrix must be a non-empty array of rows");
    const std::size_t rows = j.size();
    const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
    if (cols == 0) config_error(where, "matrix rows must be non-empty arrays");
    std::vector<double> v;
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) config_error(where, "ragged matrix");
        for (const auto& x : j[r]) v.push_back(as_number(x, where));
    }
    return RealMatrix(rows, cols, std::move(v));
}

inline Vector parse_vector(const Json& j, const std::string& where) {
    if (!j.is_array()) config_error(where, "expected an array of numbers");
    Vector v;
    for (const auto& x : j) v.push_back(as_number(x, where));
    return v;
}

inline HFunction parse_h(const Json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "identity") return HFunction::identity();
        if (s == "tlog") return HFunction::tlog();
        config_error("h", "unknown form `" + s + "`");
    }
    if (j.is_object() && j.contains("power")) return HFunction::power(as_number(j.at("power"), "h.power"));
    config_error("h", "expected \"identity\", \"tlog\" or {\"power\": p}");
}

/// [[c, p], [c, p, "log"], ...] -> sum of c t^p (times ln(1 + t)).
inline Expression parse_expression(const Json& j, const std::string& where) {
    if (!j.is_array()) config_error(where, "expression must be an array of [coeff, power] terms");
    std::vector<Term> terms;
    for (const auto& t : j) {
        if (!t.is_array() || t.size() < 2 || t.size() > 3) config_error(where, "term must be [coeff, power] or [coeff, power, \"log\"]");
        Term term{as_number(t[0], where), as_number(t[1], where), false};
        if (t.size() == 3) {
            if (!(t[2].is_string() && t[2].get<std::string>() == "log")) config_error(where, "third term entry must be \"log\"");
            term.log = true;
        }
        terms.push_back(term);
    }
    return Expression(std::move(terms));
}

inline SignalProfile parse_profile(const Json& j, const HFunction& h) {
    SignalProfile p;
    p.h = j.contains("h") ? parse_h(j.at("h")) : h;
    p.n_of_t = parse_expression(require(j, "N", "profile"), "profile.N");
    if (j.contains("eta"))
        for (const auto& [k, v] : j.at("eta").items())
            p.eta_of_t[parse_key_index(k, "profile.eta")] = parse_expression(v, "profile.eta." + k);
    for (const auto& [k, v] : require(j, "rho", "profile").items())
        p.rho[parse_edge_key(k, "profile.rho")] = as_number(v, "profile.rho." + k);
    if (j.contains("range")) {
        const auto r = parse_vector(j.at("range"), "profile.range");
        if (r.size() != 2) config_error("profile.range", "expected [lo, hi]");
        p.range_lo = r[0];
        p.range_hi = r[1];
    }
    return p;
}

inline GeneratorSpec parse_generator(const Json& j, const Config& cfg, std::optional<std::uint64_t> seed_override) {
    GeneratorSpec spec;
    spec.horizon = as_number(require(j, "horizon", "generator"), "generator.horizon");
    const auto& kind = require(j, "kind", "generator");
    if (!kind.is_string()) config_error("generator.kind", "expected a string");
    const auto k = kind.get<std::string>();
    if (k == "round_robin") {
        RoundRobin rr;
        for (const auto& x : require(j, "cycle", "generator")) rr.cycle.push_back(as_index(x, "generator.cycle"));
        rr.hold = j.contains("hold") ? as_number(j.at("hold"), "generator.hold") : 1.0;
        spec.kind = rr;
    } else if (k == "random_walk") {
        RandomWalk rw;
        rw.graph = cfg.graph;
        if (j.contains("hold")) {
            const auto& hj = j.at("hold");
            if (hj.contains("fixed")) rw.hold = FixedHold{as_number(hj.at("fixed"), "generator.hold.fixed")};
            else if (hj.contains("uniform")) {
                const auto r = parse_vector(hj.at("uniform"), "generator.hold.uniform");
                if (r.size() != 2) config_error("generator.hold.uniform", "expected [lo, hi]");
                rw.hold = UniformHold{r[0], r[1]};
            } else config_error("generator.hold", "expected {\"fixed\": s} or {\"uniform\": [a, b]}");
        }
        if (j.contains("seed")) {
            if (!j.at("seed").is_number_unsigned()) config_error("generator.seed", "expected a nonnegative integer");
            rw.seed = j.at("seed").get<std::uint64_t>();
        }
        if (seed_override) rw.seed = *seed_override;
        if (j.contains("start")) rw.start = as_index(j.at("start"), "generator.start");
        spec.kind = rw;
    } else if (k == "profile_tracking") {
        ProfileTracking pt;
        pt.graph = cfg.graph;
        pt.profile = parse_profile(require(j, "profile", "generator"), cfg.h);
        if (j.contains("start")) pt.start = as_index(j.at("start"), "generator.start");
        spec.kind = pt;
    } else {
        config_error("generator.kind", "unknown kind `" + k + "`");
    }
    return spec;
}

inline DensityBundle parse_bundle(const Json& j) {
    DensityBundle b;
    b.nu_hat = as_number(require(j, "nu_hat", "bundle"), "bundle.nu_hat");
    b.nu_check = as_number(require(j, "nu_check", "bundle"), "bundle.nu_check");
    if (j.contains("rho_hat"))
        for (const auto& [k, v] : j.at("rho_hat").items()) b.rho_hat[parse_edge_key(k, "bundle.rho_hat")] = as_number(v, "bundle.rho_hat");
    if (j.contains("eta_hat"))
        for (const auto& [k, v] : j.at("eta_hat").items()) b.eta_hat[parse_key_index(k, "bundle.eta_hat")] = as_number(v, "bundle.eta_hat");
    if (j.contains("eta_check"))
        for (const auto& [k, v] : j.at("eta_check").items())
            b.eta_check[parse_key_index(k, "bundle.eta_check")] = as_number(v, "bundle.eta_check");
    return bundle_direct(std::move(b));
}

inline std::optional<std::uint64_t> seed_from_env() {
    const char* s = std::getenv("SWICERT_SEED");
    if (!s || !*s) return std::nullopt;
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (errno != 0 || *end != '\0') fail(ErrorKind::Configuration, "SWICERT_SEED must be a nonnegative integer");
    return static_cast<std::uint64_t>(v);
}

} // namespace detail

/// Builds a validated configuration. `seed_override` replaces any random-walk seed.
inline Config parse_config(const Json& j, const std::filesystem::path& base_dir = {},
                           std::optional<std::uint64_t> seed_override = std::nullopt) {
    using namespace detail;
    if (!j.is_object()) config_error("config", "top level must be an object");
    Config cfg;
    cfg.base_dir = base_dir;

    const auto& fj = require(j, "family", "config");
    std::vector<RealMatrix> mats;
    for (const auto& m : require(fj, "matrices", "family")) mats.push_back(parse_matrix(m, "family.matrices"));
    if (mats.empty()) config_error("family.matrices", "at least one matrix is required");
    const double tol = fj.contains("classification_tol") ? as_number(fj.at("classification_tol"), "family.classification_tol")
                                                         : kDefaultClassifyTol;
    cfg.family = SystemFamily(mats, tol);
    if (fj.contains("dimension") && as_index(fj.at("dimension"), "family.dimension") != static_cast<int>(cfg.family.dimension()))
        config_error("family.dimension", "does not match the matrices");
    if (fj.contains("overrides"))
        for (const auto& [k, v] : fj.at("overrides").items()) {
            const int i = parse_key_index(k, "family.overrides");
            if (i < 1 || i > cfg.family.size()) config_error("family.overrides", "no system " + k);
            PairOverride ov;
            if (v.contains("Q")) ov.q = parse_matrix(v.at("Q"), "family.overrides." + k + ".Q");
            if (v.contains("P")) ov.p = parse_matrix(v.at("P"), "family.overrides." + k + ".P");
            if (ov.q && ov.p) config_error("family.overrides." + k, "give Q or P, not both");
            if (!ov.q && !ov.p) config_error("family.overrides." + k, "expected Q or P");
            cfg.overrides[i] = ov;
        }

    if (j.contains("graph")) {
        std::vector<Edge> es;
        for (const auto& e : require(j.at("graph"), "edges", "graph")) {
            if (!e.is_array() || e.size() != 2) config_error("graph.edges", "each edge is [k, l]");
            es.push_back({as_index(e[0], "graph.edges"), as_index(e[1], "graph.edges")});
        }
        cfg.graph = TransitionGraph(cfg.family.size(), es);
    } else {
        cfg.graph = TransitionGraph::complete(cfg.family.size());
    }

    cfg.h = j.contains("h") ? parse_h(j.at("h")) : HFunction::identity();

    const auto& sj = require(j, "signal", "config");
    int sources = 0;
    for (const char* k : {"profile", "generator", "csv", "bundle"}) sources += sj.contains(k) ? 1 : 0;
    if (sources != 1) config_error("signal", "exactly one of profile, generator, csv, bundle is required");
    if (sj.contains("profile")) {
        auto p = parse_profile(sj.at("profile"), cfg.h);
        for (const auto& [e, r] : p.rho)
            if (r > 0.0 && !cfg.graph.has_edge(e.from, e.to)) config_error("signal.profile.rho", to_string(e) + " is not a graph edge");
        cfg.signal = std::move(p);
    } else if (sj.contains("generator")) {
        cfg.signal = parse_generator(sj.at("generator"), cfg, seed_override);
    } else if (sj.contains("csv")) {
        CsvSource c;
        const auto& cj = sj.at("csv");
        if (cj.is_string()) c.path = cj.get<std::string>();
        else {
            c.path = require(cj, "path", "signal.csv").get<std::string>();
            if (cj.contains("horizon")) c.horizon = as_number(cj.at("horizon"), "signal.csv.horizon");
        }
        cfg.signal = c;
    } else {
        cfg.signal = parse_bundle(sj.at("bundle"));
    }

    if (j.contains("tail_fraction")) cfg.tail_fraction = as_number(j.at("tail_fraction"), "tail_fraction");

    if (j.contains("simulation")) {
        const auto& mj = j.at("simulation");
        SimulationBlock s;
        for (const auto& x : require(mj, "x0", "simulation")) {
            s.x0.push_back(parse_vector(x, "simulation.x0"));
            if (s.x0.back().size() != cfg.family.dimension()) config_error("simulation.x0", "dimension mismatch");
        }
        if (mj.contains("samples_per_hold")) s.samples_per_hold = as_index(mj.at("samples_per_hold"), "simulation.samples_per_hold");
        if (s.samples_per_hold < 1) config_error("simulation.samples_per_hold", "must be >= 1");
        if (mj.contains("horizon")) s.horizon = as_number(mj.at("horizon"), "simulation.horizon");
        if (mj.contains("start")) s.start = as_index(mj.at("start"), "simulation.start");
        cfg.simulation = s;
    }
    if (j.contains("output")) cfg.output_dir = require(j.at("output"), "dir", "output").get<std::string>();
    return cfg;
}

inline Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Configuration, "cannot open config " + path.string());
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorKind::Configuration, "config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(j, path.parent_path(), detail::seed_from_env());
}

/// Report output of a command plus files to write, relative to the output directory.
struct CommandResult {
    Json report;
    int status = 0;
    std::vector<std::pair<std::string, std::string>> files;
};

/// Exit status conventions of the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitNotCertified = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

namespace detail {

/// Nine significant digits; non-finite values become null.
inline Json num(double v) {
    if (!std::isfinite(v)) return nullptr;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::strtod(buf, nullptr);
}

inline Json matrix_json(const RealMatrix& m) {
    Json rows = Json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(num(m(r, c)));
        rows.push_back(row);
    }
    return rows;
}

inline Json pairs_json(const SystemFamily& fam, const std::vector<LyapunovPair>& pairs) {
    Json out = Json::array();
    for (const auto& p : pairs) {
        Json s;
        s["index"] = p.index;
        s["class"] = to_string(fam.at(p.index).cls);
        s["source"] = p.source == PairSource::UserSupplied ? "user" : "synthesized";
        s["P"] = matrix_json(p.p);
        s["lambda"] = num(p.lambda);
        out.push_back(s);
    }
    return out;
}

inline Json mu_json(const MuTable& mu) {
    Json out = Json::object();
    for (const auto& [e, m] : mu) out[to_string(e)] = num(m);
    return out;
}

inline Json bundle_json(const DensityBundle& b) {
    Json j;
    j["provenance"] = to_string(b.provenance);
    j["converged"] = b.converged;
    j["nu_hat"] = num(b.nu_hat);
    j["nu_check"] = num(b.nu_check);
    Json rho = Json::object();
    for (const auto& [e, r] : b.rho_hat) rho[to_string(e)] = num(r);
    j["rho_hat"] = rho;
    Json eh = Json::object(), ec = Json::object();
    for (const auto& [k, v] : b.eta_hat) eh[std::to_string(k)] = num(v);
    for (const auto& [k, v] : b.eta_check) ec[std::to_string(k)] = num(v);
    j["eta_hat"] = eh;
    j["eta_check"] = ec;
    return j;
}

inline Json certificate_json(const Certificate& c) {
    Json j;
    j["verdict"] = c.verdict();
    j["certified"] = c.certified;
    j["nu_check_positive"] = c.nu_check_positive;
    j["lhs"] = num(c.lhs);
    j["rhs"] = num(c.rhs);
    j["margin"] = num(c.margin);
    j["provenance"] = to_string(c.provenance);
    Json ec = Json::object(), sc = Json::object();
    for (const auto& [e, v] : c.edge_contributions) ec[to_string(e)] = num(v);
    for (const auto& [k, v] : c.system_contributions) sc[std::to_string(k)] = num(v);
    j["edge_contributions"] = ec;
    j["system_contributions"] = sc;
    return j;
}

inline SwitchingSignal restrict_to(const SwitchingSignal& sig, double horizon) {
    if (horizon > sig.horizon()) fail(ErrorKind::Configuration, "simulation horizon exceeds the signal horizon");
    std::vector<double> tau;
    std::vector<SystemIndex> idx;
    for (std::size_t i = 0; i < sig.instants().size() && sig.instants()[i] <= horizon; ++i) {
        tau.push_back(sig.instants()[i]);
        idx.push_back(sig.indices()[i]);
    }
    return SwitchingSignal(std::move(tau), std::move(idx), horizon);
}

inline SwitchingSignal load_csv_signal(const Config& cfg, const CsvSource& src) {
    const auto path = std::filesystem::path(src.path).is_absolute() ? std::filesystem::path(src.path) : cfg.base_dir / src.path;
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Configuration, "cannot open signal CSV " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    if (src.horizon) return signal_from_csv(text, *src.horizon);
    // Without an explicit horizon the signal ends at its last instant.
    std::istringstream probe(text);
    std::string line, last;
    while (std::getline(probe, line))
        if (!line.empty() && line != "\r") last = line;
    const double t_last = std::strtod(last.c_str(), nullptr);
    return signal_from_csv(text, t_last > 0.0 ? t_last : 1.0);
}

} // namespace detail

/// The concrete signal the config describes, if any. Profiles are realized
/// with the tracking generator over `horizon`.
inline std::optional<SwitchingSignal> concrete_signal(const Config& cfg, std::optional<double> horizon = std::nullopt,
                                                      SystemIndex start = 1) {
    return std::visit(
        [&](const auto& s) -> std::optional<SwitchingSignal> {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, SignalProfile>) {
                if (!horizon) fail(ErrorKind::Configuration, "a profile source needs an explicit horizon to realize a signal");
                return generate({ProfileTracking{s, cfg.graph, start}, *horizon});
            } else if constexpr (std::is_same_v<S, GeneratorSpec>) {
                auto sig = generate(s);
                return horizon ? detail::restrict_to(sig, *horizon) : sig;
            } else if constexpr (std::is_same_v<S, CsvSource>) {
                auto sig = detail::load_csv_signal(cfg, s);
                return horizon ? detail::restrict_to(sig, *horizon) : sig;
            } else {
                return std::nullopt;
            }
        },
        cfg.signal);
}

inline CommandResult cmd_synthesize(const Config& cfg) {
    const auto pairs = synth_pairs(cfg.family, cfg.overrides);
    const auto mu = mu_table(pairs, cfg.graph);
    CommandResult r;
    r.report["command"] = "synthesize";
    r.report["systems"] = detail::pairs_json(cfg.family, pairs);
    r.report["mu"] = detail::mu_json(mu);
    r.report["uniformity_constant"] = detail::num(uniformity_constant(pairs));
    r.files.emplace_back("report.json", r.report.dump(2) + "\n");
    return r;
}

inline CommandResult cmd_certify(const Config& cfg) {
    const auto pairs = synth_pairs(cfg.family, cfg.overrides);
    const auto mu = mu_table(pairs, cfg.graph);
    Json warnings = Json::array();
    DensityBundle b;
    if (const auto* p = std::get_if<SignalProfile>(&cfg.signal)) {
        b = densities_from_profile(*p);
    } else if (const auto* d = std::get_if<DensityBundle>(&cfg.signal)) {
        b = *d;
    } else {
        const auto sig = *concrete_signal(cfg);
        b = densities_empirical(sig, cfg.h, cfg.graph, cfg.tail_fraction);
        warnings.push_back("densities estimated from a finite signal tail; the verdict is indicative only");
        if (!b.converged) warnings.push_back("tail statistics have not converged");
    }
    const auto cert = certify(b, mu, pairs, cfg.family.classes());

    CommandResult r;
    r.report["command"] = "certify";
    r.report["h"] = cfg.h.name();
    r.report["systems"] = detail::pairs_json(cfg.family, pairs);
    r.report["mu"] = detail::mu_json(mu);
    r.report["densities"] = detail::bundle_json(b);
    r.report["certificate"] = detail::certificate_json(cert);
    r.report["warnings"] = warnings;
    r.status = cert.certified ? kExitOk : kExitNotCertified;
    r.files.emplace_back("report.json", r.report.dump(2) + "\n");
    return r;
}

inline CommandResult cmd_simulate(const Config& cfg) {
    if (!cfg.simulation) fail(ErrorKind::Configuration, "simulate needs a `simulation` block");
    const auto& sim = *cfg.simulation;
    const auto sig = concrete_signal(cfg, sim.horizon, sim.start);
    if (!sig) fail(ErrorKind::Configuration, "simulate needs a profile, generator or csv signal source");
    if (auto v = validate_signal(*sig, cfg.graph); !v.empty())
        fail(ErrorKind::Configuration, "signal executes " + to_string(v.front().transition) + ", which the graph does not admit");

    const auto pairs = synth_pairs(cfg.family, cfg.overrides);
    const auto mu = mu_table(pairs, cfg.graph);
    const auto classes = cfg.family.classes();
    ExpmCache cache;

    struct Run {
        EnvelopeReport env;
        std::string csv;
        double final_norm = 0.0;
    };
    std::vector<std::future<Run>> jobs;
    for (const auto& x0 : sim.x0)
        jobs.push_back(std::async(std::launch::async, [&, x0] {
            const auto tr = simulate(cfg.family, *sig, x0, sim.samples_per_hold, &cache);
            Run run;
            run.env = envelope_check(tr, *sig, pairs, mu, classes);
            run.csv = trajectory_csv(tr, pairs, psi_bound(tr, *sig, pairs, mu, classes));
            run.final_norm = norm2(tr.states.back());
            return run;
        }));

    CommandResult r;
    r.report["command"] = "simulate";
    r.report["switches"] = sig->switches();
    r.report["horizon"] = detail::num(sig->horizon());
    r.report["uniformity_constant"] = detail::num(uniformity_constant(pairs));
    Json runs = Json::array();
    bool all_pass = true;
    for (std::size_t k = 0; k < jobs.size(); ++k) {
        Run run = jobs[k].get();
        const std::string name = "trajectory_" + std::to_string(k + 1) + ".csv";
        Json jr;
        jr["x0"] = Json::array();
        for (double v : sim.x0[k]) jr["x0"].push_back(detail::num(v));
        jr["file"] = name;
        jr["samples"] = run.env.samples;
        jr["final_norm"] = detail::num(run.final_norm);
        jr["envelope_passed"] = run.env.passed;
        jr["violations"] = run.env.violations;
        jr["worst_v_log_ratio"] = detail::num(run.env.worst_v_log_ratio);
        jr["worst_norm_log_ratio"] = detail::num(run.env.worst_norm_log_ratio);
        jr["first_violation_time"] = detail::num(run.env.first_violation_time);
        runs.push_back(jr);
        all_pass = all_pass && run.env.passed;
        r.files.emplace_back(name, std::move(run.csv));
    }
    r.report["runs"] = runs;
    r.report["envelope_passed"] = all_pass;
    r.status = all_pass ? kExitOk : kExitNotCertified;
    r.files.emplace_back("signal.csv", to_csv(*sig));
    r.files.emplace_back("report.json", r.report.dump(2) + "\n");
    return r;
}

inline CommandResult cmd_generate(const Config& cfg) {
    std::optional<double> horizon;
    SystemIndex start = 1;
    if (cfg.simulation) {
        horizon = cfg.simulation->horizon;
        start = cfg.simulation->start;
    }
    const auto sig = concrete_signal(cfg, horizon, start);
    if (!sig) fail(ErrorKind::Configuration, "generate needs a profile, generator or csv signal source");
    CommandResult r;
    r.report["command"] = "generate";
    r.report["switches"] = sig->switches();
    r.report["horizon"] = detail::num(sig->horizon());
    const auto v = validate_signal(*sig, cfg.graph);
    r.report["admissible"] = v.empty();
    r.report["file"] = "signal.csv";
    r.files.emplace_back("signal.csv", to_csv(*sig));
    r.files.emplace_back("report.json", r.report.dump(2) + "\n");
    return r;
}

/// Maps a library error onto the CLI exit status.
inline int exit_status(const Error& e) { return e.is_numerical() ? kExitNumerical : kExitConfig; }

} // namespace swicert
