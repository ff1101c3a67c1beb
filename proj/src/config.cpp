#include "trajthermo/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "trajthermo/rng.hpp"

namespace trajthermo {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t next = s.find(sep, pos);
        if (next == std::string::npos) next = s.size();
        out.push_back(trim(s.substr(pos, next - pos)));
        pos = next + 1;
    }
    if (!out.empty() && out.back().empty()) out.pop_back();
    return out;
}

double to_double(const std::string& s, int line, const std::string& field) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || s.empty())
        throw ConfigError("line " + std::to_string(line) + ": field '" + field +
                          "': expected a number, got '" + s + "'");
    return v;
}

std::uint64_t to_u64(const std::string& s, int line, const std::string& field) {
    try {
        std::size_t used = 0;
        const std::uint64_t v = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line) + ": field '" + field +
                          "': expected a nonnegative integer, got '" + s + "'");
    }
}

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    bool p_seen = false;

    while (std::getline(in, line)) {
        ++lineno;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        const std::string where = section + "." + key;

        if (section == "model") {
            if (key == "omega")
                cfg.model.omega = to_double(val, lineno, where);
            else if (key == "kappa")
                cfg.model.kappa = to_double(val, lineno, where);
            else if (key == "psi0")
                cfg.psi0 = val;
            else
                throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + where + "'");
        } else if (section == "trajectory") {
            if (key == "n")
                cfg.n = static_cast<int>(to_u64(val, lineno, where));
            else
                throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + where + "'");
        } else if (section == "bias") {
            if (key == "variant") {
                if (val == "field")
                    cfg.variant = RunConfig::Variant::Field;
                else if (val == "pairwise")
                    cfg.variant = RunConfig::Variant::Pairwise;
                else if (val == "nn")
                    cfg.variant = RunConfig::Variant::NearestNeighbor;
                else
                    throw ConfigError("line " + std::to_string(lineno) +
                                      ": variant must be field, pairwise or nn");
            } else if (key == "p") {
                p_seen = true;
                if (val == "uniform")
                    cfg.p_gen = RunConfig::FieldGen::Uniform;
                else if (val == "staggered")
                    cfg.p_gen = RunConfig::FieldGen::Staggered;
                else if (val == "random")
                    cfg.p_gen = RunConfig::FieldGen::Random;
                else {
                    cfg.p_gen = RunConfig::FieldGen::Explicit;
                    cfg.p_explicit.clear();
                    for (const std::string& tok : split(val, ','))
                        cfg.p_explicit.push_back(to_double(tok, lineno, where));
                }
            } else if (key == "p_seed") {
                cfg.p_seed = to_u64(val, lineno, where);
            } else if (key == "q") {
                cfg.q.clear();
                if (!val.empty()) {
                    for (const std::string& term : split(val, ';')) {
                        const auto colon = term.find(':');
                        if (colon == std::string::npos)
                            throw ConfigError("line " + std::to_string(lineno) +
                                              ": q terms must look like n,m:value");
                        const auto idx = split(term.substr(0, colon), ',');
                        if (idx.size() != 2)
                            throw ConfigError("line " + std::to_string(lineno) +
                                              ": q term needs two indices");
                        const int a = static_cast<int>(to_u64(idx[0], lineno, where));
                        const int b = static_cast<int>(to_u64(idx[1], lineno, where));
                        cfg.q.emplace_back(a, b, to_double(term.substr(colon + 1), lineno, where));
                    }
                }
            } else if (key == "s") {
                cfg.s_values.clear();
                for (const std::string& tok : split(val, ','))
                    cfg.s_values.push_back(to_double(tok, lineno, where));
            } else {
                throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + where + "'");
            }
        } else if (section == "sampling") {
            if (key == "shots")
                cfg.shots = to_u64(val, lineno, where);
            else if (key == "seed")
                cfg.seed = to_u64(val, lineno, where);
            else
                throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + where + "'");
        } else if (section == "outputs") {
            if (key == "directory")
                cfg.out_dir = val;
            else
                throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + where + "'");
        } else {
            throw ConfigError("line " + std::to_string(lineno) + ": unknown section '" + section +
                              "'");
        }
    }

    // validation
    if (cfg.n < 1 || cfg.n > 20) throw ConfigError("trajectory.n must be in [1, 20]");
    if (cfg.s_values.empty()) throw ConfigError("bias.s must list at least one value");
    if (cfg.shots < 1) throw ConfigError("sampling.shots must be >= 1");
    if (cfg.variant == RunConfig::Variant::NearestNeighbor && p_seen &&
        cfg.p_gen == RunConfig::FieldGen::Explicit)
        throw ConfigError("bias.p has no effect for the nn variant");
    if (cfg.p_gen == RunConfig::FieldGen::Explicit &&
        static_cast<int>(cfg.p_explicit.size()) != cfg.n)
        throw ConfigError("bias.p: explicit field must list exactly n entries");
    for (const auto& [a, b, w] : cfg.q) {
        (void)w;
        if (a <= b || b < 1 || a > cfg.n)
            throw ConfigError("bias.q: indices must satisfy 1 <= m < n <= trajectory.n");
    }
    if (!cfg.q.empty() && cfg.variant != RunConfig::Variant::Pairwise)
        throw ConfigError("bias.q is only meaningful for the pairwise variant");
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open config file " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "[model]\n";
    out << "omega = " << fmt_double(cfg.model.omega) << "\n";
    out << "kappa = " << fmt_double(cfg.model.kappa) << "\n";
    out << "psi0 = " << cfg.psi0 << "\n";
    out << "\n[trajectory]\n";
    out << "n = " << cfg.n << "\n";
    out << "\n[bias]\n";
    out << "variant = "
        << (cfg.variant == RunConfig::Variant::Field
                ? "field"
                : cfg.variant == RunConfig::Variant::Pairwise ? "pairwise" : "nn")
        << "\n";
    out << "p = ";
    switch (cfg.p_gen) {
        case RunConfig::FieldGen::Uniform:
            out << "uniform";
            break;
        case RunConfig::FieldGen::Staggered:
            out << "staggered";
            break;
        case RunConfig::FieldGen::Random:
            out << "random";
            break;
        case RunConfig::FieldGen::Explicit:
            for (std::size_t i = 0; i < cfg.p_explicit.size(); ++i) {
                if (i) out << ',';
                out << fmt_double(cfg.p_explicit[i]);
            }
            break;
    }
    out << "\n";
    out << "p_seed = " << cfg.p_seed << "\n";
    out << "q = ";
    for (std::size_t i = 0; i < cfg.q.size(); ++i) {
        if (i) out << ';';
        out << std::get<0>(cfg.q[i]) << ',' << std::get<1>(cfg.q[i]) << ':'
            << fmt_double(std::get<2>(cfg.q[i]));
    }
    out << "\n";
    out << "s = ";
    for (std::size_t i = 0; i < cfg.s_values.size(); ++i) {
        if (i) out << ',';
        out << fmt_double(cfg.s_values[i]);
    }
    out << "\n";
    out << "\n[sampling]\n";
    out << "shots = " << cfg.shots << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "\n[outputs]\n";
    out << "directory = " << cfg.out_dir << "\n";
    return out.str();
}

std::uint64_t config_hash(const RunConfig& cfg) {
    // the output directory does not affect what is computed, so it is
    // excluded: the hash identifies the run, not where its files land
    RunConfig canonical = cfg;
    canonical.out_dir = "out";
    const std::string s = serialize_config(canonical);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<double> make_field(const RunConfig& cfg) {
    std::vector<double> p(cfg.n);
    switch (cfg.p_gen) {
        case RunConfig::FieldGen::Uniform:
            std::fill(p.begin(), p.end(), 1.0);
            break;
        case RunConfig::FieldGen::Staggered:
            for (int i = 0; i < cfg.n; ++i) p[i] = ((i + 1) % 2 == 0) ? 1.0 : -1.0;  // (-1)^n
            break;
        case RunConfig::FieldGen::Random: {
            ShotRng rng(cfg.p_seed, 0);
            for (int i = 0; i < cfg.n; ++i) p[i] = rng.uniform() < 0.5 ? 1.0 : -1.0;
            break;
        }
        case RunConfig::FieldGen::Explicit:
            p = cfg.p_explicit;
            break;
    }
    return p;
}

StateVector make_psi0(const RunConfig& cfg) {
    if (cfg.psi0 == "0") return StateVector::basis(2, 0);
    if (cfg.psi0 == "1") return StateVector::basis(2, 1);
    if (cfg.psi0 == "plus") {
        StateVector s(2);
        s.amplitudes = {cplx(M_SQRT1_2), cplx(M_SQRT1_2)};
        return s;
    }
    // "re,im;re,im"
    StateVector s(2);
    std::size_t i = 0;
    for (const std::string& amp : split(cfg.psi0, ';')) {
        const auto parts = split(amp, ',');
        if (parts.size() != 2 || i >= 2)
            throw ConfigError("model.psi0 must be 0, 1, plus, or re,im;re,im");
        s.amplitudes[i++] = cplx(std::strtod(parts[0].c_str(), nullptr),
                                 std::strtod(parts[1].c_str(), nullptr));
    }
    if (i != 2) throw ConfigError("model.psi0 must provide two amplitudes");
    if (s.norm() <= 0.0) throw ConfigError("model.psi0 must be nonzero");
    s.normalize();
    return s;
}

EnergySpec make_energy_spec(const RunConfig& cfg, double s) {
    switch (cfg.variant) {
        case RunConfig::Variant::Field:
            return EnergySpec::field(make_field(cfg), s);
        case RunConfig::Variant::Pairwise: {
            std::vector<std::tuple<int, int, double>> q0;
            for (const auto& [a, b, w] : cfg.q) q0.emplace_back(a - 1, b - 1, w);
            return EnergySpec::pairwise(make_field(cfg), std::move(q0), s);
        }
        case RunConfig::Variant::NearestNeighbor:
            return EnergySpec::nearest_neighbor(s);
    }
    throw ConfigError("unknown bias variant");
}

}  // namespace trajthermo
