#include "trajthermo/collision.hpp"

#include <cmath>
#include <functional>

#include "trajthermo/linalg.hpp"
#include "trajthermo/tolerances.hpp"

namespace trajthermo {

double KrausPair::completeness_residual() const {
    const ComplexMatrix s = k0.adjoint() * k0 + k1.adjoint() * k1;
    return (s - ComplexMatrix::identity(s.rows())).frobenius_norm();
}

double TrajectoryDistribution::total() const {
    double s = 0.0;
    for (const auto& [key, w] : entries) s += w;
    return s;
}

double TrajectoryDistribution::at(std::uint64_t key) const {
    const auto it = entries.find(key);
    return it == entries.end() ? 0.0 : it->second;
}

TrajectoryDistribution TrajectoryDistribution::normalized() const {
    if (kind == DistKind::Exact) return *this;
    TrajectoryDistribution out = *this;
    const double t = total();
    if (t <= 0.0) throw InvalidState("cannot normalize empty sample");
    for (auto& [key, w] : out.entries) w /= t;
    out.kind = DistKind::Exact;
    return out;
}

std::uint64_t key_from_bits(const Trajectory& k) {
    std::uint64_t key = 0;
    for (std::size_t i = 0; i < k.size(); ++i)
        if (k[i]) key |= std::uint64_t{1} << i;
    return key;
}

Trajectory bits_from_key(std::uint64_t key, int n) {
    Trajectory k(n);
    for (int i = 0; i < n; ++i) k[i] = static_cast<int>((key >> i) & 1u);
    return k;
}

std::string bitstring(std::uint64_t key, int n) {
    std::string s(n, '0');
    for (int i = 0; i < n; ++i)
        if ((key >> i) & 1u) s[i] = '1';
    return s;
}

ComplexMatrix build_hamiltonian(const ModelParams& params) {
    const ComplexMatrix drive = kron(ComplexMatrix::identity(2), sigma_x()) * cplx(params.omega);
    const ComplexMatrix exchange =
        (kron(sigma_plus(), sigma_minus()) + kron(sigma_minus(), sigma_plus())) * cplx(params.kappa);
    return drive + exchange;
}

KrausPair kraus_from_unitary(const ComplexMatrix& u) {
    if (u.rows() != 4 || u.cols() != 4) throw SizeMismatch("kraus_from_unitary: expected 4x4");
    if (!u.is_unitary(tols().unitary)) throw NotUnitary("kraus_from_unitary: U is not unitary");
    KrausPair pair{ComplexMatrix(2, 2), ComplexMatrix(2, 2)};
    // Composite index = system*2 + ancilla; K_k[s', s] = <s', k|U|s, 0>.
    for (std::size_t sp = 0; sp < 2; ++sp)
        for (std::size_t s = 0; s < 2; ++s) {
            pair.k0(sp, s) = u(sp * 2 + 0, s * 2 + 0);
            pair.k1(sp, s) = u(sp * 2 + 1, s * 2 + 0);
        }
    return pair;
}

double trajectory_prob(const KrausPair& kraus, const StateVector& psi0, const Trajectory& k) {
    StateVector psi = psi0;
    for (const int bit : k) psi = apply(bit ? kraus.k1 : kraus.k0, psi);
    return psi.norm_sq();
}

TrajectoryDistribution enumerate_ensemble(const KrausPair& kraus, const StateVector& psi0, int n) {
    if (n < 1) throw SizeMismatch("enumerate_ensemble: N must be >= 1");
    if (n > 20) throw LengthTooLarge("enumerate_ensemble: N > 20 exceeds enumeration guard");

    TrajectoryDistribution dist;
    dist.length = n;
    dist.kind = DistKind::Exact;

    const std::function<void(const StateVector&, int, std::uint64_t)> walk =
        [&](const StateVector& psi, int depth, std::uint64_t key) {
            if (depth == n) {
                dist.entries[key] = psi.norm_sq();
                return;
            }
            walk(apply(kraus.k0, psi), depth + 1, key);
            walk(apply(kraus.k1, psi), depth + 1, key | (std::uint64_t{1} << depth));
        };
    walk(psi0, 0, 0);
    return dist;
}

ComplexMatrix average_map(const KrausPair& kraus, const ComplexMatrix& rho) {
    if (!rho.is_hermitian(tols().hermitian) || std::abs(rho.trace() - cplx(1.0)) > 1e-9 ||
        !rho.is_psd(tols().psd_clamp))
        throw InvalidState("average_map: rho must be a Hermitian trace-one PSD state");
    return kraus.k0 * rho * kraus.k0.adjoint() + kraus.k1 * rho * kraus.k1.adjoint();
}

}  // namespace trajthermo
