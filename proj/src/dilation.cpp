#include "trajthermo/dilation.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "trajthermo/linalg.hpp"
#include "trajthermo/tolerances.hpp"

namespace trajthermo {

ComplexMatrix dilate(const KrausPair& pair) {
    if (!pair.is_complete(tols().completeness))
        throw NotIsometry("dilate: Kraus pair violates completeness");

    // Stack the pair into the ancilla-|0> input columns: row s'*2 + k,
    // column indexed by the system input s.
    ComplexMatrix v(4, 2);
    for (std::size_t sp = 0; sp < 2; ++sp)
        for (std::size_t s = 0; s < 2; ++s) {
            v(sp * 2 + 0, s) = pair.k0(sp, s);
            v(sp * 2 + 1, s) = pair.k1(sp, s);
        }

    const ComplexMatrix w = complete_isometry(v);
    if (!w.is_unitary(tols().unitary_result))
        throw NotCompletable("dilate: completion failed the unitarity check");

    // Route the isometry columns to the ancilla-|0> input slots (column
    // index s*2 + 0) and the completion columns to the ancilla-|1> slots.
    ComplexMatrix u(4, 4);
    for (std::size_t r = 0; r < 4; ++r) {
        u(r, 0) = w(r, 0);
        u(r, 2) = w(r, 1);
        u(r, 1) = w(r, 2);
        u(r, 3) = w(r, 3);
    }
    return u;
}

ComplexMatrix coherent_gate(const ComplexMatrix& u_if0, const ComplexMatrix& u_if1) {
    if (u_if0.rows() != 4 || u_if1.rows() != 4)
        throw SizeMismatch("coherent_gate: expected 4x4 blocks");
    ComplexMatrix v(8, 8);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            v(i, j) = u_if0(i, j);
            v(4 + i, 4 + j) = u_if1(i, j);
        }
    return v;
}

namespace {

GateOp make_prep(const StateVector& psi) {
    GateOp op;
    op.kind = GateOp::Kind::StatePrep;
    op.targets = {0};
    op.amplitudes = psi.amplitudes;
    return op;
}

}  // namespace

CircuitIR build_circuit(const BiasedDynamics& dyn, AncillaPolicy policy) {
    CircuitIR circ;
    circ.ancilla_policy = policy;
    circ.num_steps = dyn.length();
    circ.ops.push_back(make_prep(dyn.initial_state));

    for (int step = 0; step < dyn.length(); ++step) {
        const int anc = (policy == AncillaPolicy::ReusedWithReset) ? 1 : step + 1;
        const StepKraus& sk = dyn.steps[step];

        GateOp gate;
        gate.targets = {0, anc};
        if (sk.conditioned) {
            gate.kind = GateOp::Kind::CondUnitary2q;
            gate.classical_bit = step - 1;
            gate.matrix0 = dilate(sk.pairs[0]);
            gate.matrix1 = dilate(sk.pairs[1]);
        } else {
            gate.kind = GateOp::Kind::Unitary2q;
            gate.matrix0 = dilate(sk.pairs[0]);
        }
        circ.ops.push_back(std::move(gate));

        GateOp meas;
        meas.kind = GateOp::Kind::Measure;
        meas.targets = {anc};
        meas.classical_bit = step;
        circ.ops.push_back(std::move(meas));

        if (policy == AncillaPolicy::ReusedWithReset && step + 1 < dyn.length()) {
            GateOp reset;
            reset.kind = GateOp::Kind::Reset;
            reset.targets = {anc};
            circ.ops.push_back(std::move(reset));
        }
    }
    return circ;
}

CircuitIR build_circuit_coherent(const BiasedDynamics& dyn) {
    CircuitIR circ;
    circ.ancilla_policy = AncillaPolicy::FreshPerStep;
    circ.num_steps = dyn.length();
    circ.ops.push_back(make_prep(dyn.initial_state));

    for (int step = 0; step < dyn.length(); ++step) {
        const int anc = step + 1;
        const StepKraus& sk = dyn.steps[step];
        GateOp gate;
        if (sk.conditioned) {
            gate.kind = GateOp::Kind::Unitary3q;
            gate.targets = {anc - 1, 0, anc};  // control ancilla, system, target ancilla
            gate.matrix0 = coherent_gate(dilate(sk.pairs[0]), dilate(sk.pairs[1]));
        } else {
            gate.kind = GateOp::Kind::Unitary2q;
            gate.targets = {0, anc};
            gate.matrix0 = dilate(sk.pairs[0]);
        }
        circ.ops.push_back(std::move(gate));
    }
    for (int step = 0; step < dyn.length(); ++step) {
        GateOp meas;
        meas.kind = GateOp::Kind::Measure;
        meas.targets = {step + 1};
        meas.classical_bit = step;
        circ.ops.push_back(std::move(meas));
    }
    return circ;
}

namespace {

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string fmt_matrix(const ComplexMatrix& m) {
    std::string s;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (!s.empty()) s += ',';
            s += fmt_double(m(i, j).real());
            s += ',';
            s += fmt_double(m(i, j).imag());
        }
    return s;
}

std::string fmt_targets(const std::vector<int>& t) {
    std::string s;
    for (const int q : t) {
        if (!s.empty()) s += ',';
        s += 'q';
        s += std::to_string(q);
    }
    return s;
}

std::vector<double> parse_doubles(const std::string& csv) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        std::size_t next = csv.find(',', pos);
        if (next == std::string::npos) next = csv.size();
        out.push_back(std::strtod(csv.substr(pos, next - pos).c_str(), nullptr));
        pos = next + 1;
    }
    return out;
}

ComplexMatrix parse_matrix(const std::string& csv, std::size_t dim) {
    const std::vector<double> vals = parse_doubles(csv);
    if (vals.size() != 2 * dim * dim) throw IoError("TRAJIR: bad matrix entry count");
    ComplexMatrix m(dim, dim);
    std::size_t idx = 0;
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) {
            m(i, j) = cplx(vals[idx], vals[idx + 1]);
            idx += 2;
        }
    return m;
}

std::vector<int> parse_targets(const std::string& s) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t next = s.find(',', pos);
        if (next == std::string::npos) next = s.size();
        const std::string tok = s.substr(pos, next - pos);
        if (tok.empty() || tok[0] != 'q') throw IoError("TRAJIR: bad qubit token '" + tok + "'");
        out.push_back(std::stoi(tok.substr(1)));
        pos = next + 1;
    }
    return out;
}

}  // namespace

void export_ir(const CircuitIR& circuit, std::ostream& out) {
    out << "TRAJIR v1\n";
    out << "POLICY " << (circuit.ancilla_policy == AncillaPolicy::FreshPerStep ? "fresh" : "reuse")
        << "\n";
    out << "STEPS " << circuit.num_steps << "\n";
    for (const GateOp& op : circuit.ops) {
        switch (op.kind) {
            case GateOp::Kind::StatePrep: {
                out << "PREP " << fmt_targets(op.targets) << ' ';
                for (std::size_t i = 0; i < op.amplitudes.size(); ++i) {
                    if (i) out << ';';
                    out << fmt_double(op.amplitudes[i].real()) << ','
                        << fmt_double(op.amplitudes[i].imag());
                }
                out << "\n";
                break;
            }
            case GateOp::Kind::Unitary2q:
                out << "U2 " << fmt_targets(op.targets) << ' ' << fmt_matrix(op.matrix0) << "\n";
                break;
            case GateOp::Kind::CondUnitary2q:
                out << "CU2 c" << op.classical_bit << ' ' << fmt_targets(op.targets) << ' '
                    << fmt_matrix(op.matrix0) << " | " << fmt_matrix(op.matrix1) << "\n";
                break;
            case GateOp::Kind::Unitary3q:
                out << "U3 " << fmt_targets(op.targets) << ' ' << fmt_matrix(op.matrix0) << "\n";
                break;
            case GateOp::Kind::Measure:
                out << "M " << fmt_targets(op.targets) << " -> c" << op.classical_bit << "\n";
                break;
            case GateOp::Kind::Reset:
                out << "RESET " << fmt_targets(op.targets) << "\n";
                break;
        }
    }
}

void export_ir(const CircuitIR& circuit, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    export_ir(circuit, f);
    if (!f) throw IoError("write failure on " + path);
}

CircuitIR import_ir(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "TRAJIR v1") throw IoError("TRAJIR: bad header");

    CircuitIR circ;
    // '#' lines are annotations (e.g. a config hash) and carry no IR content
    while (std::getline(in, line) && !line.empty() && line[0] == '#') {
    }
    if (!in || line.rfind("POLICY ", 0) != 0) throw IoError("TRAJIR: missing POLICY");
    const std::string pol = line.substr(7);
    if (pol == "fresh")
        circ.ancilla_policy = AncillaPolicy::FreshPerStep;
    else if (pol == "reuse")
        circ.ancilla_policy = AncillaPolicy::ReusedWithReset;
    else
        throw IoError("TRAJIR: unknown policy '" + pol + "'");
    if (!std::getline(in, line) || line.rfind("STEPS ", 0) != 0)
        throw IoError("TRAJIR: missing STEPS");
    circ.num_steps = std::stoi(line.substr(6));

    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        GateOp op;
        if (tag == "PREP") {
            op.kind = GateOp::Kind::StatePrep;
            std::string tgt, amps;
            ls >> tgt >> amps;
            op.targets = parse_targets(tgt);
            std::size_t pos = 0;
            while (pos < amps.size()) {
                std::size_t next = amps.find(';', pos);
                if (next == std::string::npos) next = amps.size();
                const std::vector<double> pair = parse_doubles(amps.substr(pos, next - pos));
                if (pair.size() != 2) throw IoError("TRAJIR: bad PREP amplitude");
                op.amplitudes.emplace_back(pair[0], pair[1]);
                pos = next + 1;
            }
        } else if (tag == "U2" || tag == "U3") {
            op.kind = (tag == "U2") ? GateOp::Kind::Unitary2q : GateOp::Kind::Unitary3q;
            std::string tgt, mat;
            ls >> tgt >> mat;
            op.targets = parse_targets(tgt);
            op.matrix0 = parse_matrix(mat, tag == "U2" ? 4 : 8);
        } else if (tag == "CU2") {
            op.kind = GateOp::Kind::CondUnitary2q;
            std::string cbit, tgt, m0, bar, m1;
            ls >> cbit >> tgt >> m0 >> bar >> m1;
            if (cbit.empty() || cbit[0] != 'c' || bar != "|") throw IoError("TRAJIR: bad CU2 line");
            op.classical_bit = std::stoi(cbit.substr(1));
            op.targets = parse_targets(tgt);
            op.matrix0 = parse_matrix(m0, 4);
            op.matrix1 = parse_matrix(m1, 4);
        } else if (tag == "M") {
            op.kind = GateOp::Kind::Measure;
            std::string tgt, arrow, cbit;
            ls >> tgt >> arrow >> cbit;
            if (arrow != "->" || cbit.empty() || cbit[0] != 'c') throw IoError("TRAJIR: bad M line");
            op.targets = parse_targets(tgt);
            op.classical_bit = std::stoi(cbit.substr(1));
        } else if (tag == "RESET") {
            op.kind = GateOp::Kind::Reset;
            std::string tgt;
            ls >> tgt;
            op.targets = parse_targets(tgt);
        } else {
            throw IoError("TRAJIR: unknown op tag '" + tag + "'");
        }
        circ.ops.push_back(std::move(op));
    }
    return circ;
}

CircuitIR import_ir_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    return import_ir(f);
}

namespace {

bool matrix_equal(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (!a.same_shape(b)) return false;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        if (a.data()[i] != b.data()[i]) return false;
    return true;
}

}  // namespace

bool ir_equal(const CircuitIR& a, const CircuitIR& b) {
    if (a.num_system_qubits != b.num_system_qubits || a.ancilla_policy != b.ancilla_policy ||
        a.num_steps != b.num_steps || a.ops.size() != b.ops.size())
        return false;
    for (std::size_t i = 0; i < a.ops.size(); ++i) {
        const GateOp& x = a.ops[i];
        const GateOp& y = b.ops[i];
        if (x.kind != y.kind || x.targets != y.targets || x.classical_bit != y.classical_bit ||
            x.amplitudes != y.amplitudes || !matrix_equal(x.matrix0, y.matrix0) ||
            !matrix_equal(x.matrix1, y.matrix1))
            return false;
    }
    return true;
}

}  // namespace trajthermo
