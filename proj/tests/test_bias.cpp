#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "trajthermo/bias.hpp"
#include "trajthermo/linalg.hpp"

using namespace trajthermo;

namespace {

TrajectoryDistribution reference_dist(int n) {
    const KrausPair pair = kraus_from_unitary(mat_exp_mi(build_hamiltonian({1.0, 1.0})));
    return enumerate_ensemble(pair, StateVector::basis(2, 0), n);
}

}  // namespace

TEST_CASE("energy: field examples") {
    const EnergySpec spec = EnergySpec::field({1.0, 1.0, 1.0}, 0.0);
    CHECK(energy(spec, {0, 0, 0}) == 0.0);
    CHECK(energy(spec, {1, 0, 1}) == 2.0);
}

TEST_CASE("energy: nearest-neighbor aligned and alternating") {
    const EnergySpec spec = EnergySpec::nearest_neighbor(0.0);
    CHECK(energy(spec, {0, 0, 0, 0}) == 3.0);
    CHECK(energy(spec, {0, 1, 0, 1}) == -3.0);
}

TEST_CASE("energy: single active pair") {
    const EnergySpec spec = EnergySpec::pairwise({0.0, 0.0}, {{1, 0, 1.0}}, 0.0);
    CHECK(energy(spec, {1, 1}) == 1.0);
    CHECK(energy(spec, {1, 0}) == 0.0);
}

TEST_CASE("energy: size mismatch") {
    CHECK_THROWS_AS(energy(EnergySpec::field({1.0}, 0.0), {0, 1}), SizeMismatch);
}

TEST_CASE("reweight: s=0 is the identity") {
    const TrajectoryDistribution d = reference_dist(4);
    const TrajectoryDistribution r = reweight(d, EnergySpec::field({1, 1, 1, 1}, 0.0));
    for (const auto& [key, w] : d.entries) CHECK(r.at(key) == doctest::Approx(w).epsilon(1e-15));
}

TEST_CASE("reweight: two-outcome closed form at N=1") {
    const TrajectoryDistribution d = reference_dist(1);
    const double s = 1.3;
    const TrajectoryDistribution r = reweight(d, EnergySpec::field({1.0}, s));
    CHECK(r.at(1) / r.at(0) ==
          doctest::Approx(std::exp(-s) * d.at(1) / d.at(0)).epsilon(1e-12));
}

TEST_CASE("reweight: normalized output, uniform field s=2, N=6") {
    const TrajectoryDistribution r =
        reweight(reference_dist(6), EnergySpec::field(std::vector<double>(6, 1.0), 2.0));
    CHECK(r.total() == doctest::Approx(1.0).epsilon(1e-9));
    // positive s enhances low p.k trajectories
    CHECK(r.at(0) > reference_dist(6).at(0));
}

TEST_CASE("reweight: s then -s recovers the input") {
    const TrajectoryDistribution d = reference_dist(5);
    for (const double s : {0.7, 2.0}) {
        const EnergySpec fwd = EnergySpec::field(std::vector<double>(5, 1.0), s);
        const EnergySpec bwd = EnergySpec::field(std::vector<double>(5, 1.0), -s);
        const TrajectoryDistribution back = reweight(reweight(d, fwd), bwd);
        for (const auto& [key, w] : d.entries)
            CHECK(back.at(key) == doctest::Approx(w).epsilon(1e-9));
    }
}

TEST_CASE("reweight: field log-ratio identity") {
    const TrajectoryDistribution d = reference_dist(4);
    const std::vector<double> p = {0.5, -1.0, 2.0, 1.0};
    const double s = 1.1;
    const TrajectoryDistribution r = reweight(d, EnergySpec::field(p, s));
    const EnergySpec spec = EnergySpec::field(p, s);
    for (std::uint64_t a = 0; a < 16; ++a)
        for (std::uint64_t b = a + 1; b < 16; ++b) {
            if (d.at(a) <= 0 || d.at(b) <= 0) continue;
            const double lhs = std::log(r.at(a) / r.at(b)) - std::log(d.at(a) / d.at(b));
            const double rhs = -s * (energy(spec, a, 4) - energy(spec, b, 4));
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
        }
}

TEST_CASE("reweight: degenerate normalization is rejected") {
    // ancilla flip: only the all-ones trajectory survives, so an extreme
    // field drives Z below the floor
    const KrausPair pair = kraus_from_unitary(kron(ComplexMatrix::identity(2), sigma_x()));
    const TrajectoryDistribution d = enumerate_ensemble(pair, StateVector::basis(2, 0), 2);
    CHECK_THROWS_AS(reweight(d, EnergySpec::field({400.0, 400.0}, 1.0)), DegenerateNormalization);
}

TEST_CASE("mgf: s=0 gives 1") {
    CHECK(mgf(reference_dist(5), EnergySpec::field(std::vector<double>(5, 1.0), 0.0)) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mgf: deterministic trajectory at N=1") {
    const KrausPair pair = kraus_from_unitary(ComplexMatrix::identity(4));
    const TrajectoryDistribution d = enumerate_ensemble(pair, StateVector::basis(2, 0), 1);
    CHECK(mgf(d, EnergySpec::field({1.0}, 2.0)) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("mgf: log-convex in s") {
    const TrajectoryDistribution d = reference_dist(5);
    for (const auto variant :
         {EnergySpec::field(std::vector<double>(5, 1.0), 0.0), EnergySpec::nearest_neighbor(0.0)}) {
        for (double s = -2.0; s <= 1.0; s += 1.0) {
            EnergySpec lo = variant, mid = variant, hi = variant;
            lo.s = s;
            mid.s = s + 0.5;
            hi.s = s + 1.0;
            CHECK(mgf(d, mid) * mgf(d, mid) <= mgf(d, lo) * mgf(d, hi) * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("NN energy is invariant under global bit flip") {
    const EnergySpec spec = EnergySpec::nearest_neighbor(0.0);
    for (std::uint64_t key = 0; key < 32; ++key) {
        const std::uint64_t flipped = ~key & 31u;
        CHECK(energy(spec, key, 5) == energy(spec, flipped, 5));
    }
}

TEST_CASE("marginal_energy_histogram: identity collision, uniform field") {
    const KrausPair pair = kraus_from_unitary(ComplexMatrix::identity(4));
    const TrajectoryDistribution d = enumerate_ensemble(pair, StateVector::basis(2, 0), 2);
    const auto hist = marginal_energy_histogram(d, EnergySpec::field({1.0, 1.0}, 0.0));
    REQUIRE(hist.size() == 3);  // zero-probability trajectories keep their bins
    CHECK(hist.at(0.0) == 1.0);
    CHECK(hist.at(1.0) == 0.0);
}

TEST_CASE("marginal_energy_histogram: injective dyadic field gives singleton bins") {
    const TrajectoryDistribution d = reference_dist(4);
    const auto hist = marginal_energy_histogram(d, EnergySpec::field({1.0, 2.0, 4.0, 8.0}, 0.0));
    CHECK(hist.size() == 16);
}

TEST_CASE("marginal_energy_histogram: uniform field N=6 has 7 bins matching enumeration") {
    const TrajectoryDistribution d = reference_dist(6);
    const EnergySpec spec = EnergySpec::field(std::vector<double>(6, 1.0), 0.0);
    const auto hist = marginal_energy_histogram(d, spec);
    REQUIRE(hist.size() == 7);
    double direct[7] = {};
    for (const auto& [key, w] : d.entries) direct[__builtin_popcountll(key)] += w;
    for (int e = 0; e <= 6; ++e)
        CHECK(hist.at(static_cast<double>(e)) == doctest::Approx(direct[e]).epsilon(1e-12));
}
