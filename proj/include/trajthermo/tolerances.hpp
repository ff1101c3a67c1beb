#pragma once

namespace trajthermo {

// All numeric tolerances in one place. Defaults are the contract values;
// individual call sites never hard-code their own thresholds.
struct Tolerances {
    double hermitian = 1e-10;        // symmetry check before eig/exp
    double unitary = 1e-9;           // unitarity precondition (kraus_from_unitary)
    double unitary_result = 1e-10;   // unitarity guaranteed on results
    double psd_clamp = 1e-10;        // eigenvalues in [-psd_clamp, 0) clamp to 0
    double inverse_rcond = 1e-9;     // min singular value >= rcond * max
    double jacobi_offdiag = 1e-13;   // cyclic Jacobi sweep exit (relative)
    double completeness = 1e-9;      // sum K^dag K = 1 residual
    double isometry = 1e-9;          // V^dag V = 1 precondition
    double completion_drop = 1e-8;   // Gram-Schmidt residual rejection
    double norm_state = 1e-12;       // state norm after normalization
    double prob_sum = 1e-9;          // exact distribution normalization
    double mgf_floor = 1e-300;       // degenerate normalization guard
};

inline const Tolerances& tols() {
    static const Tolerances t{};
    return t;
}

}  // namespace trajthermo
