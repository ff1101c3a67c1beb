#include "trajthermo/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

#include "trajthermo/rng.hpp"
#include "trajthermo/tolerances.hpp"

namespace trajthermo {

namespace {

constexpr int kMaxLiveQubits = 12;

unsigned resolve_threads(unsigned threads, std::uint64_t shots) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(1, shots)));
}

/// Statevector over the currently live qubits. Register position p is bit p
/// of the amplitude index; newly added qubits join at the top in |0>.
class Register {
public:
    void prep(int qubit, const std::vector<cplx>& amplitudes) {
        if (!qubits_.empty()) throw InvalidState("PREP must come first");
        if (amplitudes.size() != 2) throw InvalidState("PREP expects one qubit");
        qubits_ = {qubit};
        amps_ = amplitudes;
    }

    void ensure_live(int qubit) {
        if (position_of(qubit) >= 0) return;
        if (static_cast<int>(qubits_.size()) >= kMaxLiveQubits)
            throw TooManyQubits("register exceeds the 12-qubit guard");
        qubits_.push_back(qubit);
        amps_.resize(amps_.size() * 2, cplx(0.0, 0.0));
    }

    /// Gate targets listed most-significant-first, matching the row index
    /// convention of the gate matrix.
    void apply(const ComplexMatrix& m, const std::vector<int>& targets) {
        const int k = static_cast<int>(targets.size());
        std::vector<int> pos(k);
        std::uint64_t target_mask = 0;
        for (int i = 0; i < k; ++i) {
            pos[i] = position_of(targets[i]);
            if (pos[i] < 0) throw InvalidState("gate on a qubit that is not live");
            target_mask |= std::uint64_t{1} << pos[i];
        }
        const std::uint64_t dim = amps_.size();
        const std::uint64_t block = std::uint64_t{1} << k;
        std::vector<cplx> local(block), mixed(block);
        for (std::uint64_t base = 0; base < dim; ++base) {
            if (base & target_mask) continue;
            for (std::uint64_t c = 0; c < block; ++c) {
                std::uint64_t idx = base;
                for (int i = 0; i < k; ++i)
                    if ((c >> (k - 1 - i)) & 1u) idx |= std::uint64_t{1} << pos[i];
                local[c] = amps_[idx];
            }
            for (std::uint64_t r = 0; r < block; ++r) {
                cplx acc = 0.0;
                for (std::uint64_t c = 0; c < block; ++c) acc += m(r, c) * local[c];
                mixed[r] = acc;
            }
            for (std::uint64_t c = 0; c < block; ++c) {
                std::uint64_t idx = base;
                for (int i = 0; i < k; ++i)
                    if ((c >> (k - 1 - i)) & 1u) idx |= std::uint64_t{1} << pos[i];
                amps_[idx] = mixed[c];
            }
        }
    }

    double prob_one(int qubit) const {
        const int p = position_of(qubit);
        if (p < 0) throw InvalidState("measurement of a qubit that is not live");
        const std::uint64_t bit = std::uint64_t{1} << p;
        double s = 0.0;
        for (std::uint64_t i = 0; i < amps_.size(); ++i)
            if (i & bit) s += std::norm(amps_[i]);
        return s;
    }

    /// Projects onto the outcome, renormalizes and drops the qubit.
    void collapse_and_remove(int qubit, int outcome) {
        const int p = position_of(qubit);
        const std::uint64_t bit = std::uint64_t{1} << p;
        const std::uint64_t low_mask = bit - 1;
        std::vector<cplx> next(amps_.size() / 2);
        double norm_sq = 0.0;
        for (std::uint64_t i = 0; i < amps_.size(); ++i) {
            if (((i & bit) != 0) != (outcome != 0)) continue;
            const std::uint64_t j = (i & low_mask) | ((i >> 1) & ~low_mask);
            next[j] = amps_[i];
            norm_sq += std::norm(amps_[i]);
        }
        if (norm_sq <= 0.0) throw InvalidState("collapse onto a zero-probability outcome");
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (auto& a : next) a *= inv;
        amps_ = std::move(next);
        qubits_.erase(qubits_.begin() + p);
    }

    bool is_live(int qubit) const { return position_of(qubit) >= 0; }

private:
    int position_of(int qubit) const {
        for (std::size_t p = 0; p < qubits_.size(); ++p)
            if (qubits_[p] == qubit) return static_cast<int>(p);
        return -1;
    }

    std::vector<cplx> amps_;
    std::vector<int> qubits_;
};

std::uint64_t run_one_shot(const CircuitIR& circuit, ShotRng& rng) {
    Register reg;
    std::vector<int> cbits(circuit.num_steps, 0);
    for (const GateOp& op : circuit.ops) {
        switch (op.kind) {
            case GateOp::Kind::StatePrep:
                reg.prep(op.targets[0], op.amplitudes);
                break;
            case GateOp::Kind::Unitary2q:
            case GateOp::Kind::Unitary3q:
                for (const int q : op.targets) reg.ensure_live(q);
                reg.apply(op.matrix0, op.targets);
                break;
            case GateOp::Kind::CondUnitary2q: {
                for (const int q : op.targets) reg.ensure_live(q);
                const int bit = cbits.at(op.classical_bit);
                reg.apply(bit ? op.matrix1 : op.matrix0, op.targets);
                break;
            }
            case GateOp::Kind::Measure: {
                const double p1 = reg.prob_one(op.targets[0]);
                const int outcome = rng.uniform() < p1 ? 1 : 0;
                cbits.at(op.classical_bit) = outcome;
                reg.collapse_and_remove(op.targets[0], outcome);
                break;
            }
            case GateOp::Kind::Reset:
                // Measured ancillas have already left the register; they
                // re-enter in |0> at the next gate that touches them.
                if (reg.is_live(op.targets[0]))
                    throw InvalidState("RESET on an unmeasured qubit is not supported");
                break;
        }
    }
    std::uint64_t key = 0;
    for (int i = 0; i < circuit.num_steps; ++i)
        if (cbits[i]) key |= std::uint64_t{1} << i;
    return key;
}

template <typename ShotFn>
SampleRun parallel_sample(int length, std::uint64_t shots, std::uint64_t seed, unsigned threads,
                          ShotFn&& shot_fn) {
    threads = resolve_threads(threads, shots);
    std::vector<std::map<std::uint64_t, double>> partial(threads);
    std::vector<std::thread> workers;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (unsigned t = 0; t < threads; ++t) {
        const std::uint64_t begin = shots * t / threads;
        const std::uint64_t end = shots * (t + 1) / threads;
        workers.emplace_back([&, t, begin, end] {
            try {
                for (std::uint64_t shot = begin; shot < end; ++shot) {
                    ShotRng rng(seed, shot);
                    partial[t][shot_fn(rng)] += 1.0;
                }
            } catch (...) {
                const std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    if (failure) std::rethrow_exception(failure);

    SampleRun run;
    run.seed = seed;
    run.shots = shots;
    run.counts.length = length;
    run.counts.kind = DistKind::Sampled;
    for (const auto& part : partial)
        for (const auto& [key, c] : part) run.counts.entries[key] += c;
    return run;
}

}  // namespace

SampleRun sample_kraus(const BiasedDynamics& dyn, std::uint64_t shots, std::uint64_t seed,
                       unsigned threads) {
    if (shots < 1) throw InvalidState("sample_kraus: shots must be >= 1");
    return parallel_sample(dyn.length(), shots, seed, threads, [&dyn](ShotRng& rng) {
        StateVector psi = dyn.initial_state;
        std::uint64_t key = 0;
        int prev = 0;
        for (int step = 0; step < dyn.length(); ++step) {
            const KrausPair& pair = dyn.steps[step].select(prev);
            const StateVector branch1 = apply(pair.k1, psi);
            const double p1 = branch1.norm_sq() / psi.norm_sq();
            const int outcome = rng.uniform() < p1 ? 1 : 0;
            psi = outcome ? branch1 : apply(pair.k0, psi);
            // renormalize to keep the ratio test well conditioned
            psi.normalize();
            if (outcome) key |= std::uint64_t{1} << step;
            prev = outcome;
        }
        return key;
    });
}

SampleRun run_circuit(const CircuitIR& circuit, std::uint64_t shots, std::uint64_t seed,
                      unsigned threads) {
    if (shots < 1) throw InvalidState("run_circuit: shots must be >= 1");
    return parallel_sample(circuit.num_steps, shots, seed, threads,
                           [&circuit](ShotRng& rng) { return run_one_shot(circuit, rng); });
}

TrajectoryDistribution enumerate_circuit(const CircuitIR& circuit) {
    TrajectoryDistribution dist;
    dist.length = circuit.num_steps;
    dist.kind = DistKind::Exact;
    for (std::uint64_t key = 0; key < (std::uint64_t{1} << circuit.num_steps); ++key)
        dist.entries[key] = 0.0;

    struct Branch {
        Register reg;
        std::vector<int> cbits;
        double weight;
    };

    const std::function<void(Branch&, std::size_t)> walk = [&](Branch& br, std::size_t op_index) {
        for (std::size_t i = op_index; i < circuit.ops.size(); ++i) {
            const GateOp& op = circuit.ops[i];
            switch (op.kind) {
                case GateOp::Kind::StatePrep:
                    br.reg.prep(op.targets[0], op.amplitudes);
                    break;
                case GateOp::Kind::Unitary2q:
                case GateOp::Kind::Unitary3q:
                    for (const int q : op.targets) br.reg.ensure_live(q);
                    br.reg.apply(op.matrix0, op.targets);
                    break;
                case GateOp::Kind::CondUnitary2q: {
                    for (const int q : op.targets) br.reg.ensure_live(q);
                    const int bit = br.cbits.at(op.classical_bit);
                    br.reg.apply(bit ? op.matrix1 : op.matrix0, op.targets);
                    break;
                }
                case GateOp::Kind::Measure: {
                    const double p1 = br.reg.prob_one(op.targets[0]);
                    if (p1 > 0.0) {
                        Branch taken = br;
                        taken.weight *= p1;
                        taken.cbits.at(op.classical_bit) = 1;
                        taken.reg.collapse_and_remove(op.targets[0], 1);
                        walk(taken, i + 1);
                    }
                    const double p0 = 1.0 - p1;
                    if (p0 <= 0.0) return;
                    br.weight *= p0;
                    br.cbits.at(op.classical_bit) = 0;
                    br.reg.collapse_and_remove(op.targets[0], 0);
                    break;
                }
                case GateOp::Kind::Reset:
                    break;
            }
        }
        std::uint64_t key = 0;
        for (int b = 0; b < circuit.num_steps; ++b)
            if (br.cbits[b]) key |= std::uint64_t{1} << b;
        dist.entries[key] += br.weight;
    };

    Branch root{Register{}, std::vector<int>(circuit.num_steps, 0), 1.0};
    walk(root, 0);
    return dist;
}

double tv_distance(const TrajectoryDistribution& a, const TrajectoryDistribution& b) {
    if (a.length != b.length) throw SizeMismatch("tv_distance: length mismatch");
    const TrajectoryDistribution pa = a.normalized();
    const TrajectoryDistribution pb = b.normalized();
    double d = 0.0;
    for (const auto& [key, w] : pa.entries) d += std::abs(w - pb.at(key));
    for (const auto& [key, w] : pb.entries)
        if (pa.entries.find(key) == pa.entries.end()) d += std::abs(w);
    return d / 2.0;
}

Chi2Result chi2_gof(const SampleRun& sample, const TrajectoryDistribution& exact) {
    if (sample.counts.length != exact.length) throw SizeMismatch("chi2_gof: length mismatch");
    const double shots = static_cast<double>(sample.shots);

    struct Bin {
        double expected;
        double observed;
    };
    std::vector<Bin> bins;
    for (const auto& [key, p] : exact.entries)
        bins.push_back({p * shots, sample.counts.at(key)});
    std::sort(bins.begin(), bins.end(),
              [](const Bin& x, const Bin& y) { return x.expected < y.expected; });

    // pool smallest-first until every bin expects at least 5 counts
    std::vector<Bin> pooled;
    Bin pool{0.0, 0.0};
    for (const Bin& b : bins) {
        pool.expected += b.expected;
        pool.observed += b.observed;
        if (pool.expected >= 5.0) {
            pooled.push_back(pool);
            pool = {0.0, 0.0};
        }
    }
    if (pool.expected > 0.0) {
        if (!pooled.empty()) {
            pooled.back().expected += pool.expected;
            pooled.back().observed += pool.observed;
        } else {
            pooled.push_back(pool);
        }
    }

    Chi2Result r;
    if (pooled.size() <= 1) return r;  // degenerate: dof 0, statistic 0
    for (const Bin& b : pooled) {
        const double diff = b.observed - b.expected;
        r.statistic += diff * diff / b.expected;
    }
    r.dof = static_cast<int>(pooled.size()) - 1;
    return r;
}

}  // namespace trajthermo
