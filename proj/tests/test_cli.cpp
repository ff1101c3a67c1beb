#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "trajthermo/commands.hpp"
#include "trajthermo/config.hpp"
#include "trajthermo/linalg.hpp"
#include "trajthermo/rng.hpp"
#include "trajthermo/simulate.hpp"

using namespace trajthermo;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// File contents minus '#' comment lines, for comparisons that should
/// ignore the config-hash header.
std::vector<std::string> data_rows(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::vector<std::string> rows;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') rows.push_back(line);
    return rows;
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("trajthermo_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const char* kBaseConfig =
    "[model]\n"
    "omega = 1\n"
    "kappa = 1\n"
    "psi0 = 0\n"
    "[trajectory]\n"
    "n = 4\n"
    "[bias]\n"
    "variant = field\n"
    "p = uniform\n"
    "s = 0, 1\n"
    "[sampling]\n"
    "shots = 2000\n"
    "seed = 7\n";

}  // namespace

TEST_CASE("parse_config: defaults and round trip") {
    const RunConfig cfg = parse_config(kBaseConfig);
    CHECK(cfg.n == 4);
    CHECK(cfg.model.omega == 1.0);
    CHECK(cfg.s_values == std::vector<double>{0.0, 1.0});
    CHECK(cfg.shots == 2000);

    const RunConfig back = parse_config(serialize_config(cfg));
    CHECK(serialize_config(back) == serialize_config(cfg));
    CHECK(config_hash(back) == config_hash(cfg));
}

TEST_CASE("parse_config: diagnostics carry line numbers") {
    try {
        parse_config("[model]\nomega = 1\nbogus_key = 3\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("[trajectory]\nn = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[trajectory]\nn = 21\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[bias]\nvariant = field\nq = 2,1,0.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[bias]\nvariant = nn\np = 1,1,1\n"), ConfigError);
    // explicit field must match the trajectory length
    CHECK_THROWS_AS(parse_config("[trajectory]\nn = 3\n[bias]\nvariant = field\np = 1,1\n"),
                    ConfigError);
}

TEST_CASE("make_field: generators") {
    RunConfig cfg = parse_config(kBaseConfig);
    CHECK(make_field(cfg) == std::vector<double>(4, 1.0));

    cfg.p_gen = RunConfig::FieldGen::Staggered;
    CHECK(make_field(cfg) == std::vector<double>{-1.0, 1.0, -1.0, 1.0});

    cfg.p_gen = RunConfig::FieldGen::Random;
    cfg.p_seed = 5;
    const std::vector<double> r1 = make_field(cfg);
    CHECK(r1 == make_field(cfg));  // deterministic in p_seed
    for (const double v : r1) CHECK((v == 1.0 || v == -1.0));

    cfg.p_gen = RunConfig::FieldGen::Explicit;
    cfg.p_explicit = {0.5, -1.0, 2.0, 0.0};
    CHECK(make_field(cfg) == cfg.p_explicit);
}

TEST_CASE("s_tag: filesystem-safe rendering") {
    CHECK(s_tag(2.0) == "s2");
    CHECK(s_tag(-2.0) == "sm2");
    CHECK(s_tag(0.5) == "s0.5");
    CHECK(s_tag(-0.5) == "sm0.5");
}

TEST_CASE("cmd_exact: trivial collision puts all weight on the all-zero trajectory") {
    RunConfig cfg = parse_config(kBaseConfig);
    cfg.model = {0.0, 0.0};
    cfg.n = 2;
    cfg.s_values = {0.0};
    cfg.out_dir = fresh_dir("exact_trivial").string();
    const auto paths = cmd_exact(cfg);
    REQUIRE(!paths.empty());
    const auto rows = data_rows(paths[0]);
    REQUIRE(rows.size() >= 2);
    CHECK(rows[0].rfind("bitstring,", 0) == 0);
    bool found = false;
    for (const auto& row : rows)
        if (row.rfind("00,", 0) == 0) {
            found = true;
            CHECK(std::stod(row.substr(3)) == doctest::Approx(1.0).epsilon(1e-12));
        }
    CHECK(found);
}

TEST_CASE("cmd_exact: staggered field at s mirrors the negated field at -s") {
    RunConfig a = parse_config(kBaseConfig);
    a.p_gen = RunConfig::FieldGen::Staggered;
    a.s_values = {2.0};
    a.out_dir = fresh_dir("mirror_a").string();

    RunConfig b = a;
    b.p_gen = RunConfig::FieldGen::Explicit;
    b.p_explicit = {1.0, -1.0, 1.0, -1.0};  // negated staggered
    b.s_values = {-2.0};
    b.out_dir = fresh_dir("mirror_b").string();

    const auto pa = cmd_exact(a);
    const auto pb = cmd_exact(b);
    REQUIRE(pa.size() == pb.size());
    // energy-histogram bins are labeled by p.k, which negates under the
    // mirror; probabilities and marginals must coincide exactly
    for (std::size_t i = 0; i < pa.size(); ++i)
        if (pa[i].find("_energy") == std::string::npos)
            CHECK(data_rows(pa[i]) == data_rows(pb[i]));
}

TEST_CASE("cmd_exact: reruns are byte-identical") {
    RunConfig cfg = parse_config(kBaseConfig);
    cfg.out_dir = fresh_dir("det_a").string();
    const auto first = cmd_exact(cfg);
    std::vector<std::string> snapshot;
    for (const auto& p : first) snapshot.push_back(slurp(p));
    cfg.out_dir = fresh_dir("det_b").string();
    const auto second = cmd_exact(cfg);
    REQUIRE(first.size() == second.size());
    for (std::size_t i = 0; i < first.size(); ++i) CHECK(slurp(second[i]) == snapshot[i]);
}

TEST_CASE("s=0 output coincides across variants") {
    RunConfig field = parse_config(kBaseConfig);
    field.s_values = {0.0};
    field.out_dir = fresh_dir("szero_field").string();
    RunConfig nn = field;
    nn.variant = RunConfig::Variant::NearestNeighbor;
    nn.p_gen = RunConfig::FieldGen::Uniform;
    nn.out_dir = fresh_dir("szero_nn").string();

    const auto pf = cmd_exact(field);
    const auto pn = cmd_exact(nn);
    const auto rows_f = data_rows(pf[0]);
    const auto rows_n = data_rows(pn[0]);
    REQUIRE(rows_f.size() == rows_n.size());
    for (std::size_t i = 1; i < rows_f.size(); ++i) {  // skip csv header
        const auto split = [](const std::string& row) {
            const auto comma = row.find(',');
            return std::pair(row.substr(0, comma), std::stod(row.substr(comma + 1)));
        };
        const auto [bits_f, prob_f] = split(rows_f[i]);
        const auto [bits_n, prob_n] = split(rows_n[i]);
        CHECK(bits_f == bits_n);
        CHECK(std::abs(prob_f - prob_n) <= 1e-12);
    }
}

TEST_CASE("cmd_sample: counts plus summary, deterministic") {
    RunConfig cfg = parse_config(kBaseConfig);
    cfg.s_values = {1.0};
    cfg.out_dir = fresh_dir("sample_a").string();
    const auto paths = cmd_sample(cfg);
    REQUIRE(paths.size() == 2);
    const std::string counts = slurp(paths[0]);
    const std::string summary = slurp(paths[1]);
    CHECK(summary.find("\"tv_to_exact\"") != std::string::npos);
    CHECK(summary.find("\"chi2\"") != std::string::npos);

    cfg.out_dir = fresh_dir("sample_b").string();
    const auto rerun = cmd_sample(cfg);
    CHECK(slurp(rerun[0]) == counts);
    CHECK(slurp(rerun[1]) == summary);
}

TEST_CASE("cmd_exact: energy histograms are normalized") {
    RunConfig cfg = parse_config(kBaseConfig);
    cfg.n = 6;
    cfg.s_values = {-2.0, 0.0, 2.0};
    cfg.out_dir = fresh_dir("exact_hist").string();
    for (const auto& path : cmd_exact(cfg)) {
        if (path.find("_energy") == std::string::npos) continue;
        double total = 0.0;
        const auto rows = data_rows(path);
        for (std::size_t i = 1; i < rows.size(); ++i)
            total += std::stod(rows[i].substr(rows[i].find(',') + 1));
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("cmd_sample: summary energy bins track the exact reweighted histogram") {
    RunConfig cfg = parse_config(kBaseConfig);
    cfg.variant = RunConfig::Variant::NearestNeighbor;
    cfg.n = 6;
    cfg.s_values = {1.0};
    cfg.shots = 20000;
    cfg.out_dir = fresh_dir("sample_bins").string();
    const auto paths = cmd_sample(cfg);
    const std::string summary = slurp(paths[1]);
    CHECK(summary.find("\"energy_bins\"") != std::string::npos);
    // crude shape check without a JSON parser: every bin line carries both
    // a sampled frequency and the exact value; spot-check their agreement
    // through the library instead
    const BiasedDynamics dyn = make_dynamics(cfg, 1.0);
    const SampleRun run = sample_kraus(dyn, cfg.shots, cfg.seed);
    const EnergySpec spec = make_energy_spec(cfg, 1.0);
    const KrausPair kraus =
        kraus_from_unitary(mat_exp_mi(build_hamiltonian(cfg.model)));
    const TrajectoryDistribution exact =
        reweight(enumerate_ensemble(kraus, make_psi0(cfg), cfg.n), spec);
    const auto hist_exact = marginal_energy_histogram(exact, spec);
    const auto hist_sampled = marginal_energy_histogram(run.counts, spec);
    for (const auto& [e, p] : hist_exact) {
        const auto it = hist_sampled.find(e);
        const double freq = (it == hist_sampled.end() ? 0.0 : it->second) / cfg.shots;
        CHECK(std::abs(freq - p) <= 0.02);
    }
}

TEST_CASE("cmd_circuit: exports a parseable TRAJIR file; --execute adds counts") {
    RunConfig cfg = parse_config(kBaseConfig);
    cfg.variant = RunConfig::Variant::NearestNeighbor;
    cfg.s_values = {0.5};
    cfg.out_dir = fresh_dir("circuit").string();
    CommandOptions opts;
    opts.execute = true;
    const auto paths = cmd_circuit(cfg, opts);
    REQUIRE(paths.size() == 2);
    const CircuitIR c = import_ir_file(paths[0]);
    CHECK(c.num_steps == 4);
    const auto rows = data_rows(paths[1]);
    CHECK(rows[0].rfind("bitstring,", 0) == 0);
}

TEST_CASE("pairwise variant has no physical dynamics to sample") {
    RunConfig cfg = parse_config(kBaseConfig);
    cfg.variant = RunConfig::Variant::Pairwise;
    cfg.q = {{2, 1, 0.5}};
    CHECK_THROWS_AS(make_dynamics(cfg, 1.0), ConfigError);
    // the exact command still works: reweighting needs no dynamics
    cfg.out_dir = fresh_dir("pairwise_exact").string();
    CHECK(!cmd_exact(cfg).empty());
}

TEST_CASE("verify_checks: passes on a healthy config and flags injected corruption") {
    RunConfig cfg = parse_config(kBaseConfig);
    cfg.s_values = {0.0, 1.0, -1.0};
    const VerifyReport good = verify_checks(cfg);
    CHECK(good.all_pass());
    CHECK(good.checks.size() == 12);  // 4 checks x 3 s values

    const VerifyReport bad = verify_checks(cfg, true);
    CHECK_FALSE(bad.all_pass());
}

TEST_CASE("cmd_verify: writes a report and returns the documented exit codes") {
    RunConfig cfg = parse_config(kBaseConfig);
    cfg.out_dir = fresh_dir("verify").string();
    CHECK(cmd_verify(cfg) == 0);
    CHECK(fs::exists(fs::path(cfg.out_dir) / "verify_report.json"));
}
