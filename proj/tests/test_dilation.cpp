#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "trajthermo/dilation.hpp"
#include "trajthermo/linalg.hpp"
#include "trajthermo/simulate.hpp"

using namespace trajthermo;

namespace {

KrausPair reference_pair() {
    return kraus_from_unitary(mat_exp_mi(build_hamiltonian({1.0, 1.0})));
}

StateVector ket0() { return StateVector::basis(2, 0); }

int count_kind(const CircuitIR& c, GateOp::Kind kind) {
    int n = 0;
    for (const auto& op : c.ops)
        if (op.kind == kind) ++n;
    return n;
}

}  // namespace

TEST_CASE("dilate: embeds the Kraus pair in the ancilla-|0> block") {
    for (const double s : {0.0, 2.0, -1.5}) {
        const BiasedDynamics dyn =
            biased_dynamics_field(reference_pair(), s, std::vector<double>(3, 1.0), 3, ket0());
        for (const auto& step : dyn.steps) {
            const ComplexMatrix u = dilate(step.pairs[0]);
            CHECK(u.is_unitary(1e-10));
            for (std::size_t sp = 0; sp < 2; ++sp)
                for (std::size_t ss = 0; ss < 2; ++ss) {
                    CHECK(std::abs(u(sp * 2 + 0, ss * 2 + 0) - step.pairs[0].k0(sp, ss)) <= 1e-12);
                    CHECK(std::abs(u(sp * 2 + 1, ss * 2 + 0) - step.pairs[0].k1(sp, ss)) <= 1e-12);
                }
        }
    }
}

TEST_CASE("dilate: unbiased dilation matches the physical collision unitary on the |0> sector") {
    const ComplexMatrix u_phys = mat_exp_mi(build_hamiltonian({1.0, 1.0}));
    const ComplexMatrix u_dil = dilate(kraus_from_unitary(u_phys));
    // both send |s,0> to the same state, completion columns may differ
    for (std::size_t row = 0; row < 4; ++row)
        for (std::size_t s = 0; s < 2; ++s)
            CHECK(std::abs(u_dil(row, s * 2) - u_phys(row, s * 2)) <= 1e-12);
}

TEST_CASE("dilate: projector pair yields a permutation-like unitary") {
    KrausPair pair{ComplexMatrix(2, 2), ComplexMatrix(2, 2)};
    pair.k0(0, 0) = 1.0;  // |0><0|
    pair.k1(1, 1) = 1.0;  // |1><1|
    const ComplexMatrix u = dilate(pair);
    CHECK(u.is_unitary(1e-12));
    CHECK(std::abs(u(0, 0) - cplx(1.0)) <= 1e-12);  // |0,0> -> |0,0>
    CHECK(std::abs(u(3, 2) - cplx(1.0)) <= 1e-12);  // |1,0> -> |1,1>
}

TEST_CASE("dilate: rejects non-trace-preserving pairs") {
    KrausPair pair{ComplexMatrix(2, 2), ComplexMatrix(2, 2)};
    pair.k0(0, 0) = 0.5;
    CHECK_THROWS_AS(dilate(pair), NotIsometry);
}

TEST_CASE("coherent_gate: block structure on the control ancilla") {
    const ComplexMatrix u0 = dilate(reference_pair());
    const ComplexMatrix u1 = ComplexMatrix::identity(4);
    const ComplexMatrix g = coherent_gate(u0, u1);
    CHECK(g.is_unitary(1e-10));
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(g(i, j) == u0(i, j));
            CHECK(g(4 + i, 4 + j) == u1(i, j));
            CHECK(g(i, 4 + j) == cplx(0.0));
            CHECK(g(4 + i, j) == cplx(0.0));
        }
}

TEST_CASE("build_circuit: field dynamics structure, reused ancilla") {
    const BiasedDynamics dyn =
        biased_dynamics_field(reference_pair(), 0.0, std::vector<double>(2, 1.0), 2, ket0());
    const CircuitIR c = build_circuit(dyn, AncillaPolicy::ReusedWithReset);
    CHECK(c.num_steps == 2);
    REQUIRE(c.ops.size() == 6);  // prep, (U2, M), (reset, U2, M)
    CHECK(c.ops[0].kind == GateOp::Kind::StatePrep);
    CHECK(c.ops[1].kind == GateOp::Kind::Unitary2q);
    CHECK(c.ops[2].kind == GateOp::Kind::Measure);
    CHECK(c.ops[3].kind == GateOp::Kind::Reset);
    CHECK(c.ops[4].kind == GateOp::Kind::Unitary2q);
    CHECK(c.ops[5].kind == GateOp::Kind::Measure);
    // ancilla is always qubit 1 when reused
    for (const auto& op : c.ops)
        if (op.kind == GateOp::Kind::Measure) CHECK(op.targets == std::vector<int>{1});
}

TEST_CASE("build_circuit: NN dynamics uses classically-controlled gates after step 1") {
    const BiasedDynamics dyn = biased_dynamics_nn(reference_pair(), 1.0, 3, ket0());
    const CircuitIR c = build_circuit(dyn, AncillaPolicy::FreshPerStep);
    CHECK(count_kind(c, GateOp::Kind::Unitary2q) == 1);
    CHECK(count_kind(c, GateOp::Kind::CondUnitary2q) == 2);
    CHECK(count_kind(c, GateOp::Kind::Measure) == 3);
    CHECK(count_kind(c, GateOp::Kind::Reset) == 0);
    // conditioned gate n reads the measurement bit of step n-1
    int step = 0;
    for (const auto& op : c.ops) {
        if (op.kind == GateOp::Kind::Measure) CHECK(op.classical_bit == step++);
        if (op.kind == GateOp::Kind::CondUnitary2q) CHECK(op.classical_bit == step - 1);
    }
    // fresh ancillas: step n acts on qubit n
    int anc = 1;
    for (const auto& op : c.ops)
        if (op.kind == GateOp::Kind::Measure) CHECK(op.targets == std::vector<int>{anc++});
}

TEST_CASE("build_circuit_coherent: three-qubit gates and deferred measurement") {
    const BiasedDynamics dyn = biased_dynamics_nn(reference_pair(), 0.5, 3, ket0());
    const CircuitIR c = build_circuit_coherent(dyn);
    CHECK(c.ancilla_policy == AncillaPolicy::FreshPerStep);
    CHECK(count_kind(c, GateOp::Kind::Unitary3q) == 2);
    CHECK(count_kind(c, GateOp::Kind::Unitary2q) == 1);
    CHECK(count_kind(c, GateOp::Kind::Measure) == 3);
    // all measurements come after all gates
    bool seen_measure = false;
    for (const auto& op : c.ops) {
        if (op.kind == GateOp::Kind::Measure) seen_measure = true;
        else CHECK_FALSE(seen_measure);
    }
}

TEST_CASE("coherent and classically-controlled circuits define the same distribution") {
    const KrausPair pair = reference_pair();
    for (int n = 2; n <= 4; ++n) {
        for (const double s : {0.0, 1.0, -1.0}) {
            const BiasedDynamics field =
                biased_dynamics_field(pair, s, std::vector<double>(n, 1.0), n, ket0());
            const BiasedDynamics nn = biased_dynamics_nn(pair, s, n, ket0());
            for (const BiasedDynamics* dyn : {&field, &nn}) {
                const TrajectoryDistribution cc = enumerate_circuit(build_circuit(*dyn));
                const TrajectoryDistribution coh =
                    enumerate_circuit(build_circuit_coherent(*dyn));
                for (const auto& [key, w] : cc.entries)
                    CHECK(std::abs(coh.at(key) - w) <= 1e-10);
            }
        }
    }
}

TEST_CASE("circuit enumeration reproduces the biased trajectory ensemble") {
    const KrausPair pair = reference_pair();
    const BiasedDynamics dyn = biased_dynamics_nn(pair, 1.0, 4, ket0());
    const TrajectoryDistribution from_circuit = enumerate_circuit(build_circuit(dyn));
    const TrajectoryDistribution direct = enumerate_biased(dyn);
    for (const auto& [key, w] : direct.entries)
        CHECK(std::abs(from_circuit.at(key) - w) <= 1e-10);
}

TEST_CASE("export/import round trip is bitwise stable") {
    const KrausPair pair = reference_pair();
    const BiasedDynamics field =
        biased_dynamics_field(pair, 1.3, std::vector<double>(4, 1.0), 4, ket0());
    const BiasedDynamics nn = biased_dynamics_nn(pair, -0.7, 4, ket0());
    for (const BiasedDynamics* dyn : {&field, &nn}) {
        for (const auto policy : {AncillaPolicy::ReusedWithReset, AncillaPolicy::FreshPerStep}) {
            const CircuitIR c = build_circuit(*dyn, policy);
            std::stringstream buf;
            export_ir(c, buf);
            const CircuitIR back = import_ir(buf);
            CHECK(ir_equal(c, back));
            // second serialization is byte-identical
            std::stringstream buf2;
            export_ir(back, buf2);
            CHECK(buf.str() == buf2.str());
        }
        const CircuitIR coh = build_circuit_coherent(*dyn);
        std::stringstream buf;
        export_ir(coh, buf);
        CHECK(ir_equal(coh, import_ir(buf)));
    }
}

TEST_CASE("import_ir rejects malformed input") {
    std::stringstream bad("TRAJIR v2\n");
    CHECK_THROWS_AS(import_ir(bad), IoError);
    std::stringstream truncated("TRAJIR v1\nPOLICY fresh\n");
    CHECK_THROWS_AS(import_ir(truncated), IoError);
}

TEST_CASE("golden TRAJIR file stays byte-identical") {
    const BiasedDynamics dyn = biased_dynamics_nn(reference_pair(), 0.5, 4, ket0());
    const CircuitIR c = build_circuit(dyn, AncillaPolicy::ReusedWithReset);
    std::stringstream buf;
    export_ir(c, buf);

    const std::string path = std::string(GOLDEN_DIR) + "/nn_n4_s0p5.trajir";
    if (std::getenv("TRAJTHERMO_REGEN_GOLDEN")) {
        std::ofstream out(path, std::ios::binary);
        out << buf.str();
    }
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream golden;
    golden << in.rdbuf();
    CHECK(buf.str() == golden.str());
}
