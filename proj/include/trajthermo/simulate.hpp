#pragma once

#include <cstdint>

#include "trajthermo/dilation.hpp"
#include "trajthermo/doob.hpp"

namespace trajthermo {

struct SampleRun {
    std::uint64_t seed = 0;
    std::uint64_t shots = 0;
    TrajectoryDistribution counts;  // kind = Sampled, values are counts
};

/// Monte-Carlo trajectories of a biased dynamics. threads = 0 picks the
/// hardware default; results are independent of the thread count.
SampleRun sample_kraus(const BiasedDynamics& dyn, std::uint64_t shots, std::uint64_t seed,
                       unsigned threads = 0);

/// Statevector execution of a circuit with mid-circuit measurement.
/// Ancillas are appended to the register lazily and projected out after
/// measurement, so classically-controlled circuits never hold more than two
/// live qubits; coherent circuits grow up to the 12-qubit guard.
SampleRun run_circuit(const CircuitIR& circuit, std::uint64_t shots, std::uint64_t seed,
                      unsigned threads = 0);

/// Exact outcome distribution of a circuit by dense branching over
/// measurement outcomes (no sampling).
TrajectoryDistribution enumerate_circuit(const CircuitIR& circuit);

/// 1/2 sum_k |a(k) - b(k)|; sampled inputs are normalized by shots first.
double tv_distance(const TrajectoryDistribution& a, const TrajectoryDistribution& b);

struct Chi2Result {
    double statistic = 0.0;
    int dof = 0;
};

/// Pearson goodness-of-fit against an exact distribution; bins with
/// expected count below 5 are pooled smallest-first.
Chi2Result chi2_gof(const SampleRun& sample, const TrajectoryDistribution& exact);

}  // namespace trajthermo
