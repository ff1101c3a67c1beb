#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "trajthermo/matrix.hpp"

namespace trajthermo {

/// Couplings of the collision Hamiltonian. Dimensionless; the reference
/// parameter point is omega = kappa = 1.
struct ModelParams {
    double omega = 1.0;
    double kappa = 1.0;
};

/// The two measurement branches of one collision step.
struct KrausPair {
    ComplexMatrix k0;  // outcome 0
    ComplexMatrix k1;  // outcome 1

    /// || K0^dag K0 + K1^dag K1 - 1 ||_F
    double completeness_residual() const;
    bool is_complete(double tol) const { return completeness_residual() <= tol; }
};

/// Measurement record k = (k_1, ..., k_N), bits in collision order.
using Trajectory = std::vector<int>;

enum class DistKind { Exact, Sampled };

/// Distribution over length-N bitstrings. Keys pack k_n into bit n-1 of a
/// 64-bit integer (first collision = least significant bit). Exact
/// distributions carry all 2^N keys including zero-probability ones;
/// sampled distributions carry only observed keys with counts.
struct TrajectoryDistribution {
    int length = 0;
    DistKind kind = DistKind::Exact;
    std::map<std::uint64_t, double> entries;

    double total() const;
    double at(std::uint64_t key) const;
    /// Counts divided by total; exact inputs returned unchanged.
    TrajectoryDistribution normalized() const;
};

std::uint64_t key_from_bits(const Trajectory& k);
Trajectory bits_from_key(std::uint64_t key, int n);
/// "k1 k2 ... kN" rendered left to right, e.g. key 0b01, n=2 -> "10".
std::string bitstring(std::uint64_t key, int n);

/// Interaction Hamiltonian omega (1 (x) sigma_x) + kappa (sigma_+ (x) sigma_-
/// + sigma_- (x) sigma_+) on |system, ancilla> with the system as the
/// most-significant index.
ComplexMatrix build_hamiltonian(const ModelParams& params);

/// Kraus operators K_k = <k|U|0> of one collision, ancilla starting in |0>.
KrausPair kraus_from_unitary(const ComplexMatrix& u);

/// P(k) = || K_{k_N} ... K_{k_1} |psi_0> ||^2.
double trajectory_prob(const KrausPair& kraus, const StateVector& psi0, const Trajectory& k);

/// Exact distribution over all 2^N trajectories via depth-first state
/// propagation. N is capped at 20.
TrajectoryDistribution enumerate_ensemble(const KrausPair& kraus, const StateVector& psi0, int n);

/// Measurement-averaged channel E[rho] = sum_k K_k rho K_k^dag.
ComplexMatrix average_map(const KrausPair& kraus, const ComplexMatrix& rho);

}  // namespace trajthermo
