#pragma once

#include <map>
#include <tuple>
#include <vector>

#include "trajthermo/collision.hpp"

namespace trajthermo {

/// Ising-like "energy"-function over trajectories, plus the bias strength s
/// (the "inverse temperature" of the reweighting).
struct EnergySpec {
    enum class Variant { Field, Pairwise, NearestNeighbor };

    Variant variant = Variant::Field;
    std::vector<double> p;                         // Field / Pairwise, length N
    std::vector<std::tuple<int, int, double>> q;   // (n, m, q_nm), 0-based, n > m
    double s = 0.0;

    static EnergySpec field(std::vector<double> p, double s);
    static EnergySpec pairwise(std::vector<double> p,
                               std::vector<std::tuple<int, int, double>> q, double s);
    static EnergySpec nearest_neighbor(double s);
};

/// Field: p . k. Pairwise: p . k + sum_{n>m} q_nm k_n k_m.
/// NearestNeighbor: sum_{n=2}^N sigma_n sigma_{n-1} with sigma = 1 - 2k.
double energy(const EnergySpec& spec, const Trajectory& k);
double energy(const EnergySpec& spec, std::uint64_t key, int n);

/// P_s(k) = P(k) e^{-s O(k)} / Z over an exact distribution.
TrajectoryDistribution reweight(const TrajectoryDistribution& dist, const EnergySpec& spec);

/// Z = sum_k P(k) e^{-s O(k)}, the moment generating function.
double mgf(const TrajectoryDistribution& dist, const EnergySpec& spec);

/// Bins trajectories by energy value (keys rounded to 1e-9) and sums weights.
std::map<double, double> marginal_energy_histogram(const TrajectoryDistribution& dist,
                                                   const EnergySpec& spec);

/// P(k_n = 1) for each step n, from an exact distribution.
std::vector<double> step_marginals(const TrajectoryDistribution& dist);

}  // namespace trajthermo
