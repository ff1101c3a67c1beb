#include "trajthermo/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "trajthermo/linalg.hpp"
#include "trajthermo/simulate.hpp"
#include "trajthermo/tolerances.hpp"

namespace fs = std::filesystem;

namespace trajthermo {

namespace {

std::string fmt12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

std::string variant_name(const RunConfig& cfg) {
    switch (cfg.variant) {
        case RunConfig::Variant::Field:
            return "field";
        case RunConfig::Variant::Pairwise:
            return "pairwise";
        case RunConfig::Variant::NearestNeighbor:
            return "nn";
    }
    return "unknown";
}

std::string header_comment(const RunConfig& cfg) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "# config=%016llx seed=%llu",
                  static_cast<unsigned long long>(config_hash(cfg)),
                  static_cast<unsigned long long>(cfg.seed));
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    return f;
}

KrausPair make_kraus(const RunConfig& cfg) {
    return kraus_from_unitary(mat_exp_mi(build_hamiltonian(cfg.model)));
}

}  // namespace

std::string s_tag(double s) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", s);
    std::string t(buf);
    for (char& c : t)
        if (c == '-') c = 'm';
    return "s" + t;
}

BiasedDynamics make_dynamics(const RunConfig& cfg, double s) {
    const KrausPair kraus = make_kraus(cfg);
    const StateVector psi0 = make_psi0(cfg);
    switch (cfg.variant) {
        case RunConfig::Variant::Field:
            return biased_dynamics_field(kraus, s, make_field(cfg), cfg.n, psi0);
        case RunConfig::Variant::NearestNeighbor:
            return biased_dynamics_nn(kraus, s, cfg.n, psi0);
        case RunConfig::Variant::Pairwise:
            throw ConfigError(
                "the pairwise variant has no physical dynamics construction; "
                "use the exact command for it");
    }
    throw ConfigError("unknown bias variant");
}

std::vector<std::string> cmd_exact(const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const KrausPair kraus = make_kraus(cfg);
    const TrajectoryDistribution dist = enumerate_ensemble(kraus, make_psi0(cfg), cfg.n);
    const std::string head = header_comment(cfg);
    const std::string var = variant_name(cfg);

    std::vector<std::string> files;
    for (const double s : cfg.s_values) {
        const EnergySpec spec = make_energy_spec(cfg, s);
        const TrajectoryDistribution rw = reweight(dist, spec);
        const std::string base =
            (fs::path(cfg.out_dir) / ("exact_" + var + "_" + s_tag(s))).string();

        {
            auto f = open_out(base + ".csv");
            f << head << "\n" << "bitstring,probability\n";
            for (const auto& [key, w] : rw.entries)
                f << bitstring(key, cfg.n) << ',' << fmt12(w) << "\n";
            files.push_back(base + ".csv");
        }
        {
            auto f = open_out(base + "_energy.csv");
            f << head << "\n" << "energy,probability\n";
            for (const auto& [e, w] : marginal_energy_histogram(rw, spec))
                f << fmt12(e) << ',' << fmt12(w) << "\n";
            files.push_back(base + "_energy.csv");
        }
        {
            auto f = open_out(base + "_marginals.csv");
            f << head << "\n" << "step,p_one\n";
            const std::vector<double> m = step_marginals(rw);
            for (int i = 0; i < cfg.n; ++i) f << (i + 1) << ',' << fmt12(m[i]) << "\n";
            files.push_back(base + "_marginals.csv");
        }
    }
    return files;
}

std::vector<std::string> cmd_sample(const RunConfig& cfg, const CommandOptions& opts) {
    fs::create_directories(cfg.out_dir);
    const KrausPair kraus = make_kraus(cfg);
    const TrajectoryDistribution dist = enumerate_ensemble(kraus, make_psi0(cfg), cfg.n);
    const std::string head = header_comment(cfg);
    const std::string var = variant_name(cfg);

    std::vector<std::string> files;
    for (const double s : cfg.s_values) {
        const BiasedDynamics dyn = make_dynamics(cfg, s);
        const SampleRun run = sample_kraus(dyn, cfg.shots, cfg.seed, opts.threads);
        const TrajectoryDistribution exact = reweight(dist, make_energy_spec(cfg, s));
        const std::string base =
            (fs::path(cfg.out_dir) / ("sample_" + var + "_" + s_tag(s))).string();

        {
            auto f = open_out(base + ".csv");
            f << head << "\n" << "bitstring,count\n";
            for (const auto& [key, c] : run.counts.entries)
                f << bitstring(key, cfg.n) << ',' << fmt12(c) << "\n";
            files.push_back(base + ".csv");
        }
        {
            const Chi2Result chi2 = chi2_gof(run, exact);
            nlohmann::ordered_json j;
            j["config"] = header_comment(cfg).substr(9, 16);
            j["s"] = s;
            j["seed"] = run.seed;
            j["shots"] = run.shots;
            j["tv_to_exact"] = tv_distance(run.counts, exact);
            j["chi2"] = chi2.statistic;
            j["dof"] = chi2.dof;
            // plot-ready energy-bin frequencies, sampled next to exact
            const EnergySpec spec = make_energy_spec(cfg, s);
            const auto sampled_hist = marginal_energy_histogram(run.counts, spec);
            nlohmann::ordered_json bins = nlohmann::ordered_json::array();
            for (const auto& [e, p] : marginal_energy_histogram(exact, spec)) {
                nlohmann::ordered_json bin;
                bin["energy"] = e;
                const auto it = sampled_hist.find(e);
                bin["frequency"] =
                    (it == sampled_hist.end() ? 0.0 : it->second) / static_cast<double>(run.shots);
                bin["exact"] = p;
                bins.push_back(std::move(bin));
            }
            j["energy_bins"] = std::move(bins);
            auto f = open_out(base + "_summary.json");
            f << j.dump(2) << "\n";
            files.push_back(base + "_summary.json");
        }
    }
    return files;
}

std::vector<std::string> cmd_circuit(const RunConfig& cfg, const CommandOptions& opts) {
    fs::create_directories(cfg.out_dir);
    const std::string head = header_comment(cfg);
    const std::string var = variant_name(cfg);

    std::vector<std::string> files;
    for (const double s : cfg.s_values) {
        const BiasedDynamics dyn = make_dynamics(cfg, s);
        const CircuitIR circ = build_circuit(dyn, opts.policy);
        const std::string base =
            (fs::path(cfg.out_dir) / ("circuit_" + var + "_" + s_tag(s))).string();

        {
            // config-hash comment goes right after the TRAJIR header line
            std::ostringstream body;
            export_ir(circ, body);
            const std::string text = body.str();
            const std::size_t eol = text.find('\n');
            auto f = open_out(base + ".trajir");
            f << text.substr(0, eol + 1) << head << "\n" << text.substr(eol + 1);
            files.push_back(base + ".trajir");
        }
        if (opts.execute) {
            const SampleRun run = run_circuit(circ, cfg.shots, cfg.seed, opts.threads);
            auto f = open_out(base + "_counts.csv");
            f << head << "\n" << "bitstring,count\n";
            for (const auto& [key, c] : run.counts.entries)
                f << bitstring(key, cfg.n) << ',' << fmt12(c) << "\n";
            files.push_back(base + "_counts.csv");
        }
    }
    return files;
}

bool VerifyReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

VerifyReport verify_checks(const RunConfig& cfg, bool corrupt_for_test) {
    VerifyReport report;
    const KrausPair kraus = make_kraus(cfg);
    const StateVector psi0 = make_psi0(cfg);
    const TrajectoryDistribution dist = enumerate_ensemble(kraus, psi0, cfg.n);

    for (const double s : cfg.s_values) {
        const std::string tag = variant_name(cfg) + " " + s_tag(s);
        BiasedDynamics dyn = make_dynamics(cfg, s);
        if (corrupt_for_test && !dyn.steps.empty())
            dyn.steps.back().pairs[0].k0 = dyn.steps.back().pairs[0].k0 * cplx(1.5);
        const EnergySpec spec = make_energy_spec(cfg, s);
        const TrajectoryDistribution rw = reweight(dist, spec);

        {
            const TrajectoryDistribution got = enumerate_biased(dyn);
            double max_err = 0.0;
            for (const auto& [key, w] : rw.entries)
                max_err = std::max(max_err, std::abs(w - got.at(key)));
            report.checks.push_back({"central_identity " + tag, max_err <= 1e-9,
                                     "max |P_biased - P_reweighted| = " + fmt12(max_err)});
        }
        {
            double worst = 0.0;
            for (const StepKraus& sk : dyn.steps)
                for (int c = 0; c < (sk.conditioned ? 2 : 1); ++c)
                    worst = std::max(worst, sk.pairs[c].completeness_residual());
            report.checks.push_back({"trace_preservation " + tag, worst <= tols().completeness,
                                     "max completeness residual = " + fmt12(worst)});
        }
        {
            const double z = mgf(dist, spec);
            const double err = std::abs(dyn.norm_factor - z);
            report.checks.push_back({"z_identity " + tag, err <= 1e-9,
                                     "| ||G0 psi0||^2 - Z | = " + fmt12(err)});
        }
        {
            double worst_block = 0.0;
            double worst_unitary = 0.0;
            for (const StepKraus& sk : dyn.steps)
                for (int c = 0; c < (sk.conditioned ? 2 : 1); ++c) {
                    const KrausPair& pair = sk.pairs[c];
                    ComplexMatrix u;
                    try {
                        u = dilate(pair);
                    } catch (const Error&) {
                        worst_block = worst_unitary = 1.0;
                        break;
                    }
                    const KrausPair back = kraus_from_unitary(u);
                    worst_block = std::max(worst_block, (back.k0 - pair.k0).frobenius_norm());
                    worst_block = std::max(worst_block, (back.k1 - pair.k1).frobenius_norm());
                    const ComplexMatrix r = u.adjoint() * u - ComplexMatrix::identity(4);
                    worst_unitary = std::max(worst_unitary, r.frobenius_norm());
                }
            report.checks.push_back({"dilation_roundtrip " + tag,
                                     worst_block <= 1e-10 && worst_unitary <= 1e-10,
                                     "max block residual = " + fmt12(worst_block) +
                                         ", max unitarity residual = " + fmt12(worst_unitary)});
        }
    }
    return report;
}

int cmd_verify(const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const VerifyReport report = verify_checks(cfg);

    nlohmann::ordered_json j;
    j["config"] = header_comment(cfg).substr(9, 16);
    j["all_pass"] = report.all_pass();
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : report.checks)
        j["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});

    auto f = open_out((fs::path(cfg.out_dir) / "verify_report.json").string());
    f << j.dump(2) << "\n";
    return report.all_pass() ? 0 : 4;
}

}  // namespace trajthermo
