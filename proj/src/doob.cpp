#include "trajthermo/doob.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "trajthermo/linalg.hpp"
#include "trajthermo/tolerances.hpp"

namespace trajthermo {

namespace {

void check_invertible(const ComplexMatrix& g, int step) {
    const auto [smin, smax] = singular_extent(g);
    if (smax == 0.0 || smin < tols().inverse_rcond * smax) {
        std::ostringstream msg;
        msg << "gauge matrix G at step " << step
            << " is numerically singular (smin/smax = " << (smax > 0 ? smin / smax : 0.0)
            << "); the bias annihilates all trajectory weight along some state direction";
        throw SingularG(step, msg.str());
    }
}

StateVector rotate_initial(const ComplexMatrix& g0, const StateVector& psi0, double* norm_sq) {
    StateVector rotated = apply(g0, psi0);
    *norm_sq = rotated.norm_sq();
    if (*norm_sq < tols().mgf_floor)
        throw DegenerateNormalization("initial rotation annihilates psi_0");
    rotated.normalize();
    return rotated;
}

}  // namespace

ComplexMatrix tilted_dual_apply(const KrausPair& kraus, double weight0, double weight1,
                                const ComplexMatrix& x) {
    return kraus.k0.adjoint() * x * kraus.k0 * cplx(weight0) +
           kraus.k1.adjoint() * x * kraus.k1 * cplx(weight1);
}

namespace {

// Exponent bound past which weights are factored out rather than
// exponentiated directly; also the matrix-norm window that triggers a
// rescale of the running G.
constexpr double kLogSpaceThreshold = 700.0;
constexpr double kNormRescale = 1e100;

// Pulls an overall scale out of g into log_scale when the norm leaves
// [1/kNormRescale, kNormRescale]. No-op at desk-scale parameters, so the
// direct arithmetic path stays untouched there.
void renormalize(ComplexMatrix& g, double& log_scale) {
    const double norm = g.frobenius_norm();
    if (norm > 0.0 && (norm > kNormRescale || norm < 1.0 / kNormRescale)) {
        g = g * cplx(1.0 / norm);
        log_scale += std::log(norm);
    }
}

}  // namespace

GSequenceField g_sequence_field(const KrausPair& kraus, double s, const std::vector<double>& p,
                                int n) {
    if (static_cast<int>(p.size()) != n)
        throw SizeMismatch("g_sequence_field: field vector not sized to N");

    GSequenceField seq;
    seq.g.assign(n + 1, ComplexMatrix::identity(2));
    seq.log_scale.assign(n + 1, 0.0);

    // All-zero tilt leaves the gauge trivial; keep the G's exactly identity
    // so the s = 0 dynamics reproduces the unbiased pair bit-for-bit.
    const bool trivial = std::all_of(p.begin(), p.end(), [&](double pn) { return s * pn == 0.0; });
    if (trivial) return seq;

    for (int step = n; step >= 1; --step) {
        const double sn = s * p[step - 1];
        // Factor out the dominant weight when e^{-s_n} would overflow.
        const double shift = (-sn > kLogSpaceThreshold) ? -sn : 0.0;
        const ComplexMatrix gsq = seq.g[step] * seq.g[step];
        ComplexMatrix g =
            mat_sqrt_psd(tilted_dual_apply(kraus, std::exp(-shift), std::exp(-sn + shift), gsq));
        double ls = seq.log_scale[step] + shift / 2.0;
        renormalize(g, ls);
        check_invertible(g, step - 1);
        seq.g[step - 1] = std::move(g);
        seq.log_scale[step - 1] = ls;
    }
    return seq;
}

BiasedDynamics biased_dynamics_field(const KrausPair& kraus, double s,
                                     const std::vector<double>& p, int n,
                                     const StateVector& psi0) {
    const GSequenceField seq = g_sequence_field(kraus, s, p, n);

    BiasedDynamics dyn;
    dyn.initial_state = rotate_initial(seq.g[0], psi0, &dyn.norm_factor);
    dyn.norm_factor *= std::exp(2.0 * seq.log_scale[0]);
    dyn.steps.reserve(n);
    for (int step = 1; step <= n; ++step) {
        const double sn = s * p[step - 1];
        const double dls = seq.log_scale[step] - seq.log_scale[step - 1];
        const ComplexMatrix ginv = mat_inv(seq.g[step - 1]);
        StepKraus sk;
        sk.conditioned = false;
        sk.pairs[0].k0 = seq.g[step] * kraus.k0 * ginv * cplx(std::exp(dls));
        sk.pairs[0].k1 = seq.g[step] * kraus.k1 * ginv * cplx(std::exp(-sn / 2.0 + dls));
        dyn.steps.push_back(std::move(sk));
    }
    return dyn;
}

GSequenceNN g_sequence_nn(const KrausPair& kraus, double s, int n) {
    if (n < 2) throw SizeMismatch("g_sequence_nn: N must be >= 2");

    GSequenceNN seq;
    seq.g.assign(n + 1, {ComplexMatrix::identity(2), ComplexMatrix::identity(2)});
    seq.log_scale.assign(n + 1, 0.0);
    if (s == 0.0) return seq;

    // The weight exponents are +-s; factor out e^{|s|} when direct
    // exponentiation would overflow.
    const double shift = (std::abs(s) > kLogSpaceThreshold) ? std::abs(s) : 0.0;

    // n >= 2: G_{n-1|k_{n-1}} = sqrt( sum_{k_n} e^{-s sig_n sig_{n-1}}
    //                                 K_{k_n}^dag G_{n|k_n}^2 K_{k_n} )
    for (int step = n; step >= 2; --step) {
        double ls = seq.log_scale[step] + shift / 2.0;
        double max_norm = 0.0;
        for (int prev = 0; prev < 2; ++prev) {
            const double sig_prev = 1.0 - 2.0 * prev;
            ComplexMatrix acc(2, 2);
            for (int cur = 0; cur < 2; ++cur) {
                const double sig_cur = 1.0 - 2.0 * cur;
                const ComplexMatrix& g = seq.g[step][cur];
                const ComplexMatrix& k = cur ? kraus.k1 : kraus.k0;
                acc = acc +
                      k.adjoint() * (g * g) * k * cplx(std::exp(-s * sig_cur * sig_prev - shift));
            }
            seq.g[step - 1][prev] = mat_sqrt_psd(acc);
            max_norm = std::max(max_norm, seq.g[step - 1][prev].frobenius_norm());
        }
        // Common rescale so the pair keeps its relative magnitudes.
        if (max_norm > 0.0 && (max_norm > kNormRescale || max_norm < 1.0 / kNormRescale)) {
            for (int prev = 0; prev < 2; ++prev)
                seq.g[step - 1][prev] = seq.g[step - 1][prev] * cplx(1.0 / max_norm);
            ls += std::log(max_norm);
        }
        seq.log_scale[step - 1] = ls;
        for (int prev = 0; prev < 2; ++prev) check_invertible(seq.g[step - 1][prev], step - 1);
    }

    // The first-step transfer entry carries no weight, so G_0 does not
    // depend on a fictitious k_0.
    ComplexMatrix acc(2, 2);
    for (int cur = 0; cur < 2; ++cur) {
        const ComplexMatrix& g = seq.g[1][cur];
        const ComplexMatrix& k = cur ? kraus.k1 : kraus.k0;
        acc = acc + k.adjoint() * (g * g) * k;
    }
    ComplexMatrix g0 = mat_sqrt_psd(acc);
    double ls0 = seq.log_scale[1];
    renormalize(g0, ls0);
    check_invertible(g0, 0);
    seq.g[0] = {g0, g0};
    seq.log_scale[0] = ls0;
    return seq;
}

BiasedDynamics biased_dynamics_nn(const KrausPair& kraus, double s, int n,
                                  const StateVector& psi0) {
    const GSequenceNN seq = g_sequence_nn(kraus, s, n);

    BiasedDynamics dyn;
    dyn.initial_state = rotate_initial(seq.g[0][0], psi0, &dyn.norm_factor);
    dyn.norm_factor *= std::exp(2.0 * seq.log_scale[0]);
    dyn.steps.reserve(n);

    const ComplexMatrix g0inv = mat_inv(seq.g[0][0]);
    const double dls1 = seq.log_scale[1] - seq.log_scale[0];
    StepKraus first;
    first.conditioned = false;
    first.pairs[0].k0 = seq.g[1][0] * kraus.k0 * g0inv * cplx(std::exp(dls1));
    first.pairs[0].k1 = seq.g[1][1] * kraus.k1 * g0inv * cplx(std::exp(dls1));
    dyn.steps.push_back(std::move(first));

    for (int step = 2; step <= n; ++step) {
        const double dls = seq.log_scale[step] - seq.log_scale[step - 1];
        StepKraus sk;
        sk.conditioned = true;
        for (int prev = 0; prev < 2; ++prev) {
            const double sig_prev = 1.0 - 2.0 * prev;
            const ComplexMatrix ginv = mat_inv(seq.g[step - 1][prev]);
            for (int cur = 0; cur < 2; ++cur) {
                const double sig_cur = 1.0 - 2.0 * cur;
                const ComplexMatrix& k = cur ? kraus.k1 : kraus.k0;
                ComplexMatrix kt = seq.g[step][cur] * k * ginv *
                                   cplx(std::exp(-s * sig_cur * sig_prev / 2.0 + dls));
                (cur ? sk.pairs[prev].k1 : sk.pairs[prev].k0) = std::move(kt);
            }
        }
        dyn.steps.push_back(std::move(sk));
    }
    return dyn;
}

double biased_trajectory_prob(const BiasedDynamics& dyn, const Trajectory& k) {
    if (static_cast<int>(k.size()) != dyn.length())
        throw SizeMismatch("biased_trajectory_prob: trajectory length mismatch");
    StateVector psi = dyn.initial_state;
    int prev = 0;
    for (int step = 0; step < dyn.length(); ++step) {
        const KrausPair& pair = dyn.steps[step].select(prev);
        psi = apply(k[step] ? pair.k1 : pair.k0, psi);
        prev = k[step];
    }
    return psi.norm_sq();
}

TrajectoryDistribution enumerate_biased(const BiasedDynamics& dyn) {
    const int n = dyn.length();
    if (n > 20) throw LengthTooLarge("enumerate_biased: N > 20 exceeds enumeration guard");

    TrajectoryDistribution dist;
    dist.length = n;
    dist.kind = DistKind::Exact;

    const std::function<void(const StateVector&, int, int, std::uint64_t)> walk =
        [&](const StateVector& psi, int depth, int prev, std::uint64_t key) {
            if (depth == n) {
                dist.entries[key] = psi.norm_sq();
                return;
            }
            const KrausPair& pair = dyn.steps[depth].select(prev);
            walk(apply(pair.k0, psi), depth + 1, 0, key);
            walk(apply(pair.k1, psi), depth + 1, 1, key | (std::uint64_t{1} << depth));
        };
    walk(dyn.initial_state, 0, 0, 0);
    return dist;
}

}  // namespace trajthermo
