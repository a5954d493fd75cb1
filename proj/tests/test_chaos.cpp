#include "doctest.h"

#include <cmath>

#include "herdlab/chaos.hpp"
#include "herdlab/dynamics.hpp"
#include "herdlab/errors.hpp"
#include "herdlab/measures.hpp"
#include "herdlab/rng.hpp"
#include "test_support.hpp"

using namespace herdlab;
using namespace testlab;

TEST_CASE("predicted_exponent reproduces the rate case table") {
    RateExponents a = predicted_exponent(1.0, 1, 4.0);
    CHECK(a.exponent == doctest::Approx(-0.5));
    CHECK_FALSE(a.log_factor);
    CHECK(a.regime == RateRegime::AboveHalfD);

    RateExponents b = predicted_exponent(1.0, 3, 4.0);
    CHECK(b.exponent == doctest::Approx(-1.0 / 3.0));
    CHECK(b.regime == RateRegime::BelowHalfD);

    RateExponents c = predicted_exponent(1.0, 2, 4.0);
    CHECK(c.exponent == doctest::Approx(-0.5));
    CHECK(c.log_factor);
    CHECK(c.regime == RateRegime::AtHalfD);

    // hand-coded case table across the admissible domain
    for (double q : {1.0, 1.5, 2.0, 2.5}) {
        for (int d : {1, 2, 3}) {
            for (double p : {3.0, 4.0, 6.0, 8.0}) {
                if (q >= p || p == 2.0 * q) continue;
                if (q < 0.5 * d && p == d / (d - q)) continue;
                RateExponents e = predicted_exponent(q, d, p);
                double moment = (p - q) / p;
                double expected;
                if (q > 0.5 * d) {
                    expected = -std::min(0.5, moment);
                } else if (q == 0.5 * d) {
                    expected = moment < 0.5 ? -moment : -0.5;
                } else {
                    expected = -std::min(q / d, moment);
                }
                CHECK(e.exponent == doctest::Approx(expected));
            }
        }
    }

    CHECK_THROWS_AS(predicted_exponent(4.0, 1, 4.0), UnsupportedError);  // q = p
    CHECK_THROWS_AS(predicted_exponent(2.0, 1, 4.0), UnsupportedError);  // p = 2q
    CHECK_THROWS_AS(predicted_exponent(0.5, 1, 4.0), UnsupportedError);  // q < 1
    CHECK_THROWS_AS(predicted_exponent(1.0, 4, 4.0), UnsupportedError);
}

TEST_CASE("fit_loglog_slope") {
    RateTable t;
    t.q = 1.0;
    for (int n : {64, 128, 256, 512}) {
        RateRow r;
        r.N = n;
        r.coupled_err = 3.0 / std::sqrt(static_cast<double>(n));
        r.wq_err = 2.0;  // constant column
        t.rows.push_back(r);
    }
    FitResult f = fit_loglog_slope(t, RateColumn::Coupled);
    CHECK(f.slope == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(f.r2 == doctest::Approx(1.0));
    FitResult c = fit_loglog_slope(t, RateColumn::Wq);
    CHECK(c.slope == doctest::Approx(0.0));

    // multiplicative perturbations up to 5% stay within +-0.08 of -1/2
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        RateTable tp = t;
        for (auto& r : tp.rows)
            r.coupled_err *= 1.0 + 0.05 * (2.0 * rng.uniform() - 1.0);
        FitResult fp = fit_loglog_slope(tp, RateColumn::Coupled);
        CHECK(std::abs(fp.slope + 0.5) <= 0.08);
    }

    RateTable bad = t;
    bad.rows[1].coupled_err = 0.0;
    CHECK_THROWS_AS(fit_loglog_slope(bad, RateColumn::Coupled), FitError);
    RateTable small;
    small.rows.resize(2);
    CHECK_THROWS_AS(fit_loglog_slope(small, RateColumn::Coupled), FitError);
}

TEST_CASE("identical coupling gives exactly zero error columns") {
    SystemSpec s = ou_spec(64, 2, 1.0, 0.5, 1.0, 0.05);
    RateTable t = run_rate_experiment(s, zero_control(s), {64}, 64, 8, 1.0, 5, 2);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0].coupled_err == 0.0);
    CHECK(t.rows[0].wq_err == 0.0);
}

TEST_CASE("frozen i.i.d. clouds reproduce the d=1 LLN rate") {
    SystemSpec s = frozen_spec(64, 1);
    RateTable t =
        run_rate_experiment(s, zero_control(s), {64, 128, 256, 512, 1024}, 4096, 16, 1.0, 9, 2);
    REQUIRE(t.rows.size() == 5);
    FitResult f = fit_loglog_slope(t, RateColumn::Wq);
    CHECK(f.slope == doctest::Approx(-0.5).epsilon(0.4));  // loose band at 16 replicas
    // coupled column is zero here (no dynamics): identical particles
    for (const auto& r : t.rows) CHECK(r.coupled_err == 0.0);
}

TEST_CASE("OU coupling errors decrease in N and respect the coupled bound") {
    SystemSpec s = ou_spec(32, 2, 1.0, 0.5, 1.0, 0.05);
    std::vector<int> N_list = {32, 64, 128, 256};
    RateTable t = run_rate_experiment(s, zero_control(s), N_list, 1024, 12, 1.0, 17, 2);
    REQUIRE(t.rows.size() == N_list.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        CHECK(t.rows[i].coupled_err >= 0.0);
        if (i > 0) {
            double band = 2.0 * std::hypot(t.rows[i].coupled_se, t.rows[i - 1].coupled_se);
            CHECK(t.rows[i].coupled_err <= t.rows[i - 1].coupled_err + band);
        }
    }

    // index-paired bound at T: W_q <= coupled_distance_bound <= max_n error
    const int N = 64;
    SystemSpec s_n = s;
    s_n.N = N;
    ControlParams u0 = zero_control(s);
    TrajectoryBundle fin = simulate_finite(s_n, u0, 17, 0);
    SystemSpec ref_spec = s;
    ref_spec.N = N;
    MeanFieldFlow flow = simulate_mean_field_reference(ref_spec, u0, 1024, 17, 0);
    const int K = fin.steps;
    std::vector<double> tracked(flow.cloud_at(K).data, flow.cloud_at(K).data + N);
    EmpiricalMeasure ref_cloud(tracked, 1);
    EmpiricalMeasure mu_n = fin.measure_at(K);
    double w = wasserstein_assignment(mu_n, ref_cloud, 1.0);
    double bound = coupled_distance_bound(mu_n, ref_cloud, 1.0);
    double worst = 0.0;
    for (int n = 0; n < N; ++n)
        worst = std::max(worst,
                         max_norm_diff(flow.ensemble->herd_point(K, n), fin.herd_point(K, n)));
    CHECK(w <= bound + 1e-12);
    CHECK(bound <= worst + 1e-12);
}

TEST_CASE("rate experiment is bit-reproducible") {
    SystemSpec s = ou_spec(32, 2, 1.0, 0.5, 0.5, 0.05);
    RateTable a = run_rate_experiment(s, zero_control(s), {32, 64}, 256, 8, 1.0, 23, 2);
    RateTable b = run_rate_experiment(s, zero_control(s), {32, 64}, 256, 8, 1.0, 23, 1);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].coupled_err == b.rows[i].coupled_err);
        CHECK(a.rows[i].wq_err == b.rows[i].wq_err);
    }
}

TEST_CASE("run_rate_experiment validates its inputs") {
    SystemSpec s = ou_spec(16);
    CHECK_THROWS_AS(run_rate_experiment(s, zero_control(s), {}, 64, 8, 1.0, 1), ValidationError);
    CHECK_THROWS_AS(run_rate_experiment(s, zero_control(s), {64, 32}, 64, 8, 1.0, 1),
                    ValidationError);
    CHECK_THROWS_AS(run_rate_experiment(s, zero_control(s), {32}, 16, 8, 1.0, 1),
                    ValidationError);
    CHECK_THROWS_AS(run_rate_experiment(s, zero_control(s), {16}, 64, 4, 1.0, 1),
                    ValidationError);
    CHECK_THROWS_AS(run_rate_experiment(s, zero_control(s), {16}, 64, 8, 4.0, 1),
                    UnsupportedError);
}

TEST_CASE("conditional chaos: independence is preserved without common noise") {
    SystemSpec s = frozen_spec(8, 1);
    Observable phi = clipped_coordinate_observable(0, 50.0);
    CovarianceReport rep = conditional_chaos_test(s, zero_control(s), 8, phi, phi, 24, 16, 3, 2);
    CHECK(std::abs(rep.unconditional) <= 3.0 * rep.unconditional_se + 1e-12);
    CHECK(std::abs(rep.conditional) <= 3.0 * rep.conditional_se + 1e-12);
}

TEST_CASE("pure common noise: unconditional covariance equals sigma_c^2 T") {
    const double sigma_c = 0.7, T = 1.0;
    SystemSpec s = common_noise_spec(8, sigma_c, T, 0.05);
    Observable phi = clipped_coordinate_observable(0, 50.0);
    CovarianceReport rep =
        conditional_chaos_test(s, zero_control(s), 8, phi, phi, 64, 16, 13, 2);
    const double truth = sigma_c * sigma_c * T;  // Cov = Var(sigma_c W_c(T))
    CHECK(std::abs(rep.unconditional - truth) <= 4.0 * rep.unconditional_se);
    CHECK(std::abs(rep.conditional) <= 3.0 * rep.conditional_se + 1e-12);
    CHECK(rep.unconditional > 10.0 * std::abs(rep.conditional));
}

TEST_CASE("conditional covariance magnitude does not grow with N") {
    const double sigma_c = 0.5;
    SystemSpec s = common_noise_spec(8, sigma_c, 0.5, 0.05);
    s.noises.sigma_i = NoiseCoefficient::constant(Mat::scaled_identity(1, 0.3));
    Observable phi = clipped_coordinate_observable(0, 50.0);
    double prev = 0.0, prev_se = 0.0;
    for (int N : {8, 16, 32}) {
        CovarianceReport rep =
            conditional_chaos_test(s, zero_control(s), N, phi, phi, 32, 12, 29, 2);
        if (N > 8)
            CHECK(std::abs(rep.conditional) <=
                  std::abs(prev) + 2.0 * std::hypot(rep.conditional_se, prev_se) + 1e-12);
        prev = rep.conditional;
        prev_se = rep.conditional_se;
    }
}

TEST_CASE("observables outside their declared bound are rejected") {
    SystemSpec s = common_noise_spec(4, 1.0, 1.0, 0.1);
    Observable bad;
    bad.name = "unbounded";
    bad.bound = 1e-6;
    bad.fn = [](const Vec& x) { return x[0]; };
    CHECK_THROWS_AS(conditional_chaos_test(s, zero_control(s), 4, bad, bad, 4, 4, 1),
                    ObservableError);
}
