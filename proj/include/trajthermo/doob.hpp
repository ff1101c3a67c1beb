#pragma once

#include <array>
#include <vector>

#include "trajthermo/bias.hpp"
#include "trajthermo/collision.hpp"

namespace trajthermo {

/// Gauge matrices of the field recursion, g[0..N] with g[N] = 1.
/// The semantic matrix is G_n = e^{log_scale[n]} g[n]; log_scale stays zero
/// unless a tilt exponent |s p_n| > 700 (or norm growth) forces the
/// recursion into log-space to avoid overflow.
struct GSequenceField {
    std::vector<ComplexMatrix> g;
    std::vector<double> log_scale;
};

/// Outcome-conditioned gauge matrices, g[n][k_n] for n = 0..N.
/// g[N][0] = g[N][1] = 1 and g[0][0] = g[0][1] = G_0 by construction.
/// One common log_scale per time index, same convention as GSequenceField.
struct GSequenceNN {
    std::vector<std::array<ComplexMatrix, 2>> g;
    std::vector<double> log_scale;
};

/// Kraus pair(s) of one biased collision. Unconditioned steps use pairs[0];
/// conditioned steps select pairs[k_{n-1}].
struct StepKraus {
    bool conditioned = false;
    std::array<KrausPair, 2> pairs;

    const KrausPair& select(int prev_outcome) const {
        return conditioned ? pairs[prev_outcome] : pairs[0];
    }
};

/// The executable physical process generating the reweighted ensemble:
/// rotated initial state plus per-step (possibly conditioned) Kraus pairs.
/// The first step is always unconditioned.
struct BiasedDynamics {
    StateVector initial_state;
    std::vector<StepKraus> steps;
    /// || G_0 |psi_0> ||^2, which equals the moment generating function Z.
    double norm_factor = 1.0;

    int length() const { return static_cast<int>(steps.size()); }
};

/// weight0 K0^dag X K0 + weight1 K1^dag X K1 — the dual tilted map for
/// weights (1, e^{-s_n}), and the transfer-matrix entries for general weights.
ComplexMatrix tilted_dual_apply(const KrausPair& kraus, double weight0, double weight1,
                                const ComplexMatrix& x);

/// Backward recursion G_{n-1} = sqrt(E*_{s_n}[G_n^2]) with G_N = 1 and
/// s_n = s p_n.
GSequenceField g_sequence_field(const KrausPair& kraus, double s, const std::vector<double>& p,
                                int n);

/// Step n: K~_0 = G_n K_0 G_{n-1}^-1, K~_1 = e^{-s_n/2} G_n K_1 G_{n-1}^-1;
/// initial state G_0|psi_0> normalized.
BiasedDynamics biased_dynamics_field(const KrausPair& kraus, double s,
                                     const std::vector<double>& p, int n,
                                     const StateVector& psi0);

/// Conditioned backward recursion for the nearest-neighbor energy-function;
/// the final (n = 1) transfer entry carries no weight, so G_{0|0} = G_{0|1}.
GSequenceNN g_sequence_nn(const KrausPair& kraus, double s, int n);

/// First step unconditioned: K~_{k_1} = G_{1|k_1} K_{k_1} G_0^-1; steps
/// n >= 2 conditioned: K~_{k_n|k_{n-1}} = e^{-s sig_n sig_{n-1}/2}
/// G_{n|k_n} K_{k_n} G_{n-1|k_{n-1}}^-1.
BiasedDynamics biased_dynamics_nn(const KrausPair& kraus, double s, int n,
                                  const StateVector& psi0);

/// Squared norm of the ordered conditioned-Kraus product on the rotated
/// initial state.
double biased_trajectory_prob(const BiasedDynamics& dyn, const Trajectory& k);

/// Exact distribution of the biased process over all 2^N trajectories.
TrajectoryDistribution enumerate_biased(const BiasedDynamics& dyn);

}  // namespace trajthermo
