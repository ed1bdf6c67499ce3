// swicert: certify, synthesize, simulate and generate from a JSON config.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "swicert/app.hpp"

namespace fs = std::filesystem;

namespace {

void write_files(const fs::path& dir, const swicert::CommandResult& r) {
    fs::create_directories(dir);
    for (const auto& [name, text] : r.files) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) swicert::fail(swicert::ErrorKind::Configuration, "cannot write " + (dir / name).string());
        out << text;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stability certificates for switched linear systems under constrained switching"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_dir;
    const char* names[] = {"synthesize", "certify", "simulate", "generate"};
    const char* help[] = {
        "Lyapunov pairs and the mu table",
        "densities and the stability certificate",
        "trajectories and envelope checks",
        "emit the switching signal as CSV",
    };
    for (int k = 0; k < 4; ++k) {
        auto* sub = app.add_subcommand(names[k], help[k]);
        sub->add_option("--config", config_path, "JSON configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    }
    CLI11_PARSE(app, argc, argv);
    const std::string cmd = app.get_subcommands().front()->get_name();

    try {
        const auto cfg = swicert::load_config(config_path);
        swicert::CommandResult r;
        if (cmd == "synthesize") r = swicert::cmd_synthesize(cfg);
        else if (cmd == "certify") r = swicert::cmd_certify(cfg);
        else if (cmd == "simulate") r = swicert::cmd_simulate(cfg);
        else r = swicert::cmd_generate(cfg);

        std::string dir = out_dir;
        if (dir.empty() && cfg.output_dir) {
            const fs::path p(*cfg.output_dir);
            dir = (p.is_absolute() ? p : cfg.base_dir / p).string();
        }
        if (!dir.empty()) {
            write_files(dir, r);
            std::cout << r.report.dump(2) << '\n';
        } else if (cmd == "synthesize" || cmd == "certify") {
            std::cout << r.report.dump(2) << '\n';
        } else if (cmd == "generate") {
            for (const auto& [name, text] : r.files)
                if (name == "signal.csv") std::cout << text;
        } else {
            std::cerr << "simulate: give --out or output.dir for the trajectory files\n";
            return swicert::kExitConfig;
        }
        return r.status;
    } catch (const swicert::Error& e) {
        std::cerr << "swicert " << cmd << ": " << e.what() << '\n';
        if (e.kind() == swicert::ErrorKind::SynthesisUnavailable)
            std::cerr << "hint: supply a Lyapunov matrix for that system under family.overrides, e.g. {\"2\": {\"P\": [[...]]}}\n";
        return swicert::exit_status(e);
    } catch (const std::exception& e) {
        std::cerr << "swicert " << cmd << ": " << e.what() << '\n';
        return swicert::kExitConfig;
    }
}
