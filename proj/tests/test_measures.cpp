#include "doctest.h"

#include <cmath>

#include "herdlab/errors.hpp"
#include "herdlab/fokker_planck.hpp"
#include "herdlab/measures.hpp"
#include "herdlab/rng.hpp"

using namespace herdlab;

namespace {

EmpiricalMeasure random_cloud(Rng& rng, int n, int d, double scale) {
    std::vector<double> flat(static_cast<std::size_t>(n) * d);
    for (auto& v : flat) v = scale * (2.0 * rng.uniform() - 1.0);
    return EmpiricalMeasure(std::move(flat), d);
}

}  // namespace

TEST_CASE("wasserstein_1d sorted pairing") {
    EmpiricalMeasure mu({0.0, 2.0}, 1);
    EmpiricalMeasure nu({1.0, 3.0}, 1);
    // brute force over both assignments of 2 points: min(1+1, 3+1)/2 = 1
    CHECK(wasserstein_1d(mu, nu, 1.0) == doctest::Approx(1.0).epsilon(1e-12));

    Rng rng(7);
    EmpiricalMeasure same = random_cloud(rng, 9, 1, 3.0);
    CHECK(wasserstein_1d(same, same, 2.0) == doctest::Approx(0.0));

    EmpiricalMeasure a({0.0}, 1), b({-2.5}, 1);
    for (double q : {1.0, 2.0, 3.5})
        CHECK(wasserstein_1d(a, b, q) == doctest::Approx(2.5).epsilon(1e-12));

    CHECK_THROWS_AS(wasserstein_1d(mu, EmpiricalMeasure({1.0}, 1), 1.0), SizeError);
}

TEST_CASE("wasserstein_assignment exact transport") {
    EmpiricalMeasure mu({0.0, 0.0, 1.0, 1.0}, 2);
    EmpiricalMeasure nu({1.0, 1.0, 0.0, 0.0}, 2);
    CHECK(wasserstein_assignment(mu, nu, 1.0) == doctest::Approx(0.0));

    EmpiricalMeasure mu2({0.0, 0.0, 2.0, 0.0}, 2);
    EmpiricalMeasure nu2({0.0, 1.0, 2.0, 1.0}, 2);
    // two assignments: identity costs (1+1)/2 = 1, swap costs (2+2)/2 = 2
    CHECK(wasserstein_assignment(mu2, nu2, 1.0) == doctest::Approx(1.0).epsilon(1e-12));

    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        int d = 1 + static_cast<int>(rng.below(3));
        EmpiricalMeasure a = random_cloud(rng, 5, d, 2.0);
        EmpiricalMeasure b = random_cloud(rng, 5, d, 2.0);
        double fast = wasserstein_assignment(a, b, 2.0);
        double brute = wasserstein_bruteforce(a, b, 2.0);
        CHECK(fast == doctest::Approx(brute).epsilon(1e-10));
    }

    CHECK_THROWS_AS(wasserstein_assignment(mu, nu, 1.0, 1), CapacityError);
}

TEST_CASE("wasserstein_assignment agrees with the 1-d solver") {
    Rng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        EmpiricalMeasure a = random_cloud(rng, 16, 1, 4.0);
        EmpiricalMeasure b = random_cloud(rng, 16, 1, 4.0);
        for (double q : {1.0, 2.0})
            CHECK(wasserstein_assignment(a, b, q) ==
                  doctest::Approx(wasserstein_1d(a, b, q)).epsilon(1e-10));
    }
}

TEST_CASE("moment_p") {
    EmpiricalMeasure sym({1.0, -1.0}, 1);
    CHECK(moment_p(sym, 2.0) == doctest::Approx(1.0));
    EmpiricalMeasure origin({0.0}, 1);
    for (double q : {1.0, 2.0, 4.0}) CHECK(moment_p(origin, q) == doctest::Approx(0.0));
    EmpiricalMeasure two({0.0, 3.0}, 1);
    CHECK(moment_p(two, 1.0) == doctest::Approx(1.5));

    // bounded by the max atom norm
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        EmpiricalMeasure c = random_cloud(rng, 12, 2, 5.0);
        double maxn = 0.0;
        for (int i = 0; i < c.size(); ++i) maxn = std::max(maxn, c.point(i).max_norm());
        CHECK(moment_p(c, 3.0) <= maxn + 1e-12);
    }
}

TEST_CASE("coupled_distance_bound dominates the assignment distance") {
    EmpiricalMeasure mu({0.0, 2.0}, 1);
    EmpiricalMeasure nu({2.0, 0.0}, 1);
    CHECK(coupled_distance_bound(mu, nu, 1.0) == doctest::Approx(2.0));
    CHECK(wasserstein_assignment(mu, nu, 1.0) == doctest::Approx(0.0));

    EmpiricalMeasure x({0.5}, 1), y({-1.0}, 1);
    CHECK(coupled_distance_bound(x, y, 1.0) == doctest::Approx(1.5));
    CHECK(coupled_distance_bound(mu, mu, 2.0) == doctest::Approx(0.0));

    Rng rng(19);
    for (int trial = 0; trial < 20; ++trial) {
        EmpiricalMeasure a = random_cloud(rng, 8, 2, 2.0);
        EmpiricalMeasure b = random_cloud(rng, 8, 2, 2.0);
        double q = trial % 2 == 0 ? 1.0 : 2.0;
        CHECK(wasserstein_assignment(a, b, q) <= coupled_distance_bound(a, b, q) + 1e-12);
    }
}

TEST_CASE("monotonicity of W_q in q") {
    Rng rng(23);
    for (int trial = 0; trial < 15; ++trial) {
        int d = 1 + static_cast<int>(rng.below(3));
        EmpiricalMeasure a = random_cloud(rng, 6, d, 3.0);
        EmpiricalMeasure b = random_cloud(rng, 6, d, 3.0);
        double q1 = 1.0 + 2.0 * rng.uniform();
        double q2 = q1 + 2.0 * rng.uniform();
        CHECK(wasserstein_assignment(a, b, q1) <= wasserstein_assignment(a, b, q2) + 1e-12);
    }
}

TEST_CASE("triangle inequality on sampled triples") {
    Rng rng(29);
    for (int trial = 0; trial < 15; ++trial) {
        int d = 1 + static_cast<int>(rng.below(3));
        EmpiricalMeasure a = random_cloud(rng, 5, d, 2.0);
        EmpiricalMeasure b = random_cloud(rng, 5, d, 2.0);
        EmpiricalMeasure c = random_cloud(rng, 5, d, 2.0);
        for (double q : {1.0, 2.0}) {
            double ab = wasserstein_assignment(a, b, q);
            double bc = wasserstein_assignment(b, c, q);
            double ac = wasserstein_assignment(a, c, q);
            CHECK(ac <= ab + bc + 1e-10);
        }
    }
}

TEST_CASE("Kantorovich-Rubinstein lower bound with bank test functions") {
    Rng rng(31);
    TestFunctionBank bank = TestFunctionBank::standard(2, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        EmpiricalMeasure a = random_cloud(rng, 8, 2, 2.0);
        EmpiricalMeasure b = random_cloud(rng, 8, 2, 2.0);
        double w1 = wasserstein_assignment(a, b, 1.0);
        for (const auto& phi : bank.functions) {
            double pa = 0.0, pb = 0.0;
            for (int i = 0; i < a.size(); ++i) pa += phi.value(a.point(i));
            for (int i = 0; i < b.size(); ++i) pb += phi.value(b.point(i));
            pa /= a.size();
            pb /= b.size();
            // normalize by the function's own Lipschitz bound
            CHECK(std::abs(pa - pb) / phi.lipschitz <= w1 + 1e-10);
        }
    }
}

TEST_CASE("feature vector") {
    const double r = 10.0;

    EmpiricalMeasure dirac0 = EmpiricalMeasure::dirac(Vec{0.0, 0.0});
    FeatureVector f0 = features(dirac0, r);
    for (int j = 0; j < 4; ++j) CHECK(f0[j] == doctest::Approx(0.0));

    // translation equivariance of the mean features inside the clip radius
    Rng rng(37);
    EmpiricalMeasure cloud = random_cloud(rng, 10, 2, 1.0);
    std::vector<double> shifted = cloud.flat();
    for (std::size_t i = 0; i < shifted.size(); i += 2) {
        shifted[i] += 0.5;
        shifted[i + 1] -= 0.25;
    }
    FeatureVector fa = features(cloud, r);
    FeatureVector fb = features(EmpiricalMeasure(shifted, 2), r);
    CHECK(fb[0] - fa[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fb[1] - fa[1] == doctest::Approx(-0.25).epsilon(1e-12));

    // every feature is 1-Lipschitz w.r.t. W_1 on sampled pairs
    for (int trial = 0; trial < 10; ++trial) {
        EmpiricalMeasure a = random_cloud(rng, 10, 2, 3.0);
        std::vector<double> perturbed = a.flat();
        for (auto& v : perturbed) v += 0.3 * (2.0 * rng.uniform() - 1.0);
        EmpiricalMeasure b(perturbed, 2);
        double w1 = wasserstein_assignment(a, b, 1.0);
        FeatureVector f1 = features(a, r);
        FeatureVector f2 = features(b, r);
        for (int j = 0; j < f1.size(); ++j)
            CHECK(std::abs(f1[j] - f2[j]) <= w1 + 1e-10);
    }

    CHECK(features(dirac0, r).size() == feature_count(2));
}

TEST_CASE("assignment equals factorial brute force for n <= 6") {
    Rng rng(41);
    for (int trial = 0; trial < 40; ++trial) {
        int n = 2 + static_cast<int>(rng.below(5));
        int d = 1 + static_cast<int>(rng.below(3));
        double q = (trial % 2 == 0) ? 1.0 : 2.0;
        EmpiricalMeasure a = random_cloud(rng, n, d, 2.5);
        EmpiricalMeasure b = random_cloud(rng, n, d, 2.5);
        CHECK(wasserstein_assignment(a, b, q) ==
              doctest::Approx(wasserstein_bruteforce(a, b, q)).epsilon(1e-10));
    }
}
