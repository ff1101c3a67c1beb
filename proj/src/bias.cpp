#include "trajthermo/bias.hpp"

#include <cmath>

#include "trajthermo/tolerances.hpp"

namespace trajthermo {

EnergySpec EnergySpec::field(std::vector<double> p, double s) {
    EnergySpec e;
    e.variant = Variant::Field;
    e.p = std::move(p);
    e.s = s;
    return e;
}

EnergySpec EnergySpec::pairwise(std::vector<double> p,
                                std::vector<std::tuple<int, int, double>> q, double s) {
    EnergySpec e;
    e.variant = Variant::Pairwise;
    e.p = std::move(p);
    e.q = std::move(q);
    e.s = s;
    return e;
}

EnergySpec EnergySpec::nearest_neighbor(double s) {
    EnergySpec e;
    e.variant = Variant::NearestNeighbor;
    e.s = s;
    return e;
}

double energy(const EnergySpec& spec, const Trajectory& k) {
    const int n = static_cast<int>(k.size());
    switch (spec.variant) {
        case EnergySpec::Variant::Field:
        case EnergySpec::Variant::Pairwise: {
            if (static_cast<int>(spec.p.size()) != n)
                throw SizeMismatch("energy: field vector not sized to trajectory");
            double e = 0.0;
            for (int i = 0; i < n; ++i) e += spec.p[i] * k[i];
            if (spec.variant == EnergySpec::Variant::Pairwise) {
                for (const auto& [a, b, w] : spec.q) {
                    if (a <= b || a >= n || b < 0)
                        throw SizeMismatch("energy: pairwise index out of range");
                    e += w * k[a] * k[b];
                }
            }
            return e;
        }
        case EnergySpec::Variant::NearestNeighbor: {
            double e = 0.0;
            for (int i = 1; i < n; ++i)
                e += (1.0 - 2.0 * k[i]) * (1.0 - 2.0 * k[i - 1]);
            return e;
        }
    }
    throw InvalidState("energy: unknown variant");
}

double energy(const EnergySpec& spec, std::uint64_t key, int n) {
    return energy(spec, bits_from_key(key, n));
}

TrajectoryDistribution reweight(const TrajectoryDistribution& dist, const EnergySpec& spec) {
    if (dist.kind != DistKind::Exact) throw InvalidState("reweight: needs an exact distribution");
    TrajectoryDistribution out = dist;
    double z = 0.0;
    for (auto& [key, w] : out.entries) {
        w *= std::exp(-spec.s * energy(spec, key, dist.length));
        z += w;
    }
    if (z < tols().mgf_floor)
        throw DegenerateNormalization("reweight: normalization underflowed");
    for (auto& [key, w] : out.entries) w /= z;
    return out;
}

double mgf(const TrajectoryDistribution& dist, const EnergySpec& spec) {
    if (dist.kind != DistKind::Exact) throw InvalidState("mgf: needs an exact distribution");
    double z = 0.0;
    for (const auto& [key, w] : dist.entries)
        z += w * std::exp(-spec.s * energy(spec, key, dist.length));
    return z;
}

std::map<double, double> marginal_energy_histogram(const TrajectoryDistribution& dist,
                                                   const EnergySpec& spec) {
    std::map<double, double> hist;
    for (const auto& [key, w] : dist.entries) {
        const double e = energy(spec, key, dist.length);
        // round to 1e-9 so user-real field entries bin stably
        const double binned = std::round(e * 1e9) / 1e9;
        hist[binned] += w;
    }
    return hist;
}

std::vector<double> step_marginals(const TrajectoryDistribution& dist) {
    std::vector<double> m(dist.length, 0.0);
    for (const auto& [key, w] : dist.entries)
        for (int i = 0; i < dist.length; ++i)
            if ((key >> i) & 1u) m[i] += w;
    const double t = dist.total();
    if (t > 0.0)
        for (auto& v : m) v /= t;
    return m;
}

}  // namespace trajthermo
