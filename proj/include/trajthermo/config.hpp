#pragma once

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "trajthermo/bias.hpp"
#include "trajthermo/collision.hpp"

namespace trajthermo {

/// One run description, parsed from a sectioned key-value file.
struct RunConfig {
    // [model]
    ModelParams model;
    std::string psi0 = "0";  // "0", "1", "plus", or "re,im;re,im"

    // [trajectory]
    int n = 6;

    // [bias]
    enum class Variant { Field, Pairwise, NearestNeighbor };
    enum class FieldGen { Uniform, Staggered, Random, Explicit };
    Variant variant = Variant::Field;
    FieldGen p_gen = FieldGen::Uniform;
    std::vector<double> p_explicit;
    std::uint64_t p_seed = 1;
    std::vector<std::tuple<int, int, double>> q;  // 1-based (n, m, value), n > m
    std::vector<double> s_values = {0.0};

    // [sampling]
    std::uint64_t shots = 20000;
    std::uint64_t seed = 1;

    // [outputs]
    std::string out_dir = "out";
};

/// Throws ConfigError with a line/field diagnostic on any malformed input.
RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/// Canonical rendering: parse(serialize(c)) reproduces c exactly.
std::string serialize_config(const RunConfig& cfg);

/// FNV-1a over the canonical rendering; stamped into output headers.
std::uint64_t config_hash(const RunConfig& cfg);

/// Resolves the field generator into concrete p_1..p_N.
std::vector<double> make_field(const RunConfig& cfg);

StateVector make_psi0(const RunConfig& cfg);

/// EnergySpec for one bias strength from the s list.
EnergySpec make_energy_spec(const RunConfig& cfg, double s);

}  // namespace trajthermo
