#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "trajthermo/doob.hpp"

namespace trajthermo {

enum class AncillaPolicy { FreshPerStep, ReusedWithReset };

/// One circuit instruction. Qubit 0 is the system; ancillas follow.
/// Matrices use the composite ordering system*2 + ancilla (2-qubit gates)
/// and control*4 + system*2 + target (3-qubit gates).
struct GateOp {
    enum class Kind { StatePrep, Unitary2q, CondUnitary2q, Unitary3q, Measure, Reset };

    Kind kind;
    std::vector<int> targets;
    std::vector<cplx> amplitudes;  // StatePrep
    ComplexMatrix matrix0;         // Unitary2q/Unitary3q; CondUnitary2q bit = 0
    ComplexMatrix matrix1;         // CondUnitary2q bit = 1
    int classical_bit = -1;        // CondUnitary2q control / Measure destination
};

struct CircuitIR {
    int num_system_qubits = 1;
    AncillaPolicy ancilla_policy = AncillaPolicy::ReusedWithReset;
    int num_steps = 0;
    std::vector<GateOp> ops;
};

/// Promotes a trace-preserving Kraus pair to a 4x4 collision unitary whose
/// ancilla-|0> input block reproduces the pair: <s',k|U~|s,0> = K_k[s',s].
/// The free columns come from the deterministic isometry completion.
ComplexMatrix dilate(const KrausPair& pair);

/// 8x8 coherent conditioned collision: sum_k |k><k| (x) U_k on
/// (control ancilla, system, target ancilla).
ComplexMatrix coherent_gate(const ComplexMatrix& u_if0, const ComplexMatrix& u_if1);

/// Circuit with classically-controlled conditioned gates, mirroring the
/// deferred-measurement form run on dynamic-circuit hardware.
CircuitIR build_circuit(const BiasedDynamics& dyn,
                        AncillaPolicy policy = AncillaPolicy::ReusedWithReset);

/// Full-register variant: fresh ancillas, coherent three-qubit conditioned
/// gates, all measurements deferred to the end.
CircuitIR build_circuit_coherent(const BiasedDynamics& dyn);

// TRAJIR v1: line-oriented UTF-8, %.17g numerics, byte-stable.
void export_ir(const CircuitIR& circuit, std::ostream& out);
void export_ir(const CircuitIR& circuit, const std::string& path);
CircuitIR import_ir(std::istream& in);
CircuitIR import_ir_file(const std::string& path);

/// Bitwise equality (doubles compared exactly).
bool ir_equal(const CircuitIR& a, const CircuitIR& b);

}  // namespace trajthermo
