#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "trajthermo/commands.hpp"

using namespace trajthermo;

namespace {

unsigned threads_from_env() {
    const char* env = std::getenv("TRAJ_THERMO_THREADS");
    if (!env) return 0;
    const long v = std::strtol(env, nullptr, 10);
    return v > 0 ? static_cast<unsigned>(v) : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Collision-model trajectory ensembles: exact reweighting, biased dynamics, "
                 "circuit export and sampling"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::string policy_name = "reuse";
    bool execute = false;

    app.add_option("--config", config_path, "run configuration file")->required();
    app.add_option("--out", out_override, "override the output directory");

    CLI::App* exact = app.add_subcommand("exact", "exact reweighted distributions and histograms");
    CLI::App* sample = app.add_subcommand("sample", "Monte-Carlo sampling of the biased dynamics");
    CLI::App* circuit = app.add_subcommand("circuit", "emit (and optionally execute) circuit IR");
    CLI::App* verify = app.add_subcommand("verify", "run the end-to-end consistency checks");
    circuit->add_flag("--execute", execute, "also run the circuit on the statevector simulator");
    circuit->add_option("--ancilla-policy", policy_name, "fresh or reuse")
        ->check(CLI::IsMember({"fresh", "reuse"}));
    // lets --config/--out appear after the subcommand name
    for (CLI::App* sub : {exact, sample, circuit, verify}) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = parse_config_file(config_path);
        if (!out_override.empty()) cfg.out_dir = out_override;

        CommandOptions opts;
        opts.execute = execute;
        opts.threads = threads_from_env();
        opts.policy = (policy_name == "fresh") ? AncillaPolicy::FreshPerStep
                                               : AncillaPolicy::ReusedWithReset;

        std::vector<std::string> files;
        int rc = 0;
        if (exact->parsed()) {
            files = cmd_exact(cfg);
        } else if (sample->parsed()) {
            files = cmd_sample(cfg, opts);
        } else if (circuit->parsed()) {
            files = cmd_circuit(cfg, opts);
        } else if (verify->parsed()) {
            rc = cmd_verify(cfg);
            std::cout << "verification " << (rc == 0 ? "passed" : "FAILED") << ", report in "
                      << cfg.out_dir << "/verify_report.json\n";
            return rc;
        }
        for (const auto& f : files) std::cout << "wrote " << f << "\n";
        return rc;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const SingularG& e) {
        std::cerr << "numeric failure: " << e.what() << "\n"
                  << "hint: reduce |s| or soften the field entries\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    }
}
