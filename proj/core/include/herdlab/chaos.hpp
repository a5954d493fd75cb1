#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "herdlab/control.hpp"
#include "herdlab/model.hpp"

namespace herdlab {

struct RateRow {
    int N = 0;
    int replicas = 0;  // successful replicas behind the row
    double q = 1.0;
    double coupled_err = 0.0;  // mean of max_n sup_t |X_n - X_n^(N)|^q
    double coupled_se = 0.0;
    double wq_err = 0.0;  // mean of W_q^q(mu_N(T), reference subsample)
    double wq_se = 0.0;
};

struct RateTable {
    int d = 1;
    double p = 2.0;
    double q = 1.0;
    std::vector<RateRow> rows;
};

enum class RateRegime { AboveHalfD, AtHalfD, BelowHalfD };

struct RateExponents {
    double q = 1.0;
    int d = 1;
    double p = 2.0;
    double exponent = 0.0;  // dominant (slowest) exponent, negative
    RateRegime regime = RateRegime::AboveHalfD;
    bool log_factor = false;  // N^{-1/2} log(1+N) regime
};

// Dominant term of the quantitative LLN rate for E[W_q^q(mu_N, mu)] given
// (q, d, p); rejects the parameter combinations with no quantitative bound.
RateExponents predicted_exponent(double q, int d, double p);

// Couples simulate_finite with the shared-stream reference ensemble for every
// N and records pathwise and W_q^q errors, averaged over replicas.
RateTable run_rate_experiment(const SystemSpec& spec, const ControlParams& control,
                              const std::vector<int>& N_list, int N_ref, int replicas, double q,
                              std::uint64_t seed, int threads = 1);

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

enum class RateColumn { Coupled, Wq };

// Ordinary least squares on (log N, log value).
FitResult fit_loglog_slope(const RateTable& table, RateColumn column);

struct Observable {
    std::string name;
    double bound = 1.0;  // declared sup bound, checked on samples
    std::function<double(const Vec&)> fn;
};

Observable clipped_coordinate_observable(int coordinate, double clip_radius);

struct CovarianceReport {
    int N = 0;
    int outer = 0;  // common-noise replicas
    int inner = 0;  // idiosyncratic replicas per common path
    double unconditional = 0.0;
    double unconditional_se = 0.0;
    double conditional = 0.0;  // covariance within each common path, averaged
    double conditional_se = 0.0;
};

// Pair covariance of two observables along particles 0 and 1: pooled
// (unconditional) and within-common-path (conditional) versions.
CovarianceReport conditional_chaos_test(const SystemSpec& spec, const ControlParams& control,
                                        int N, const Observable& phi1, const Observable& phi2,
                                        int outer_replicas, int inner_replicas,
                                        std::uint64_t seed, int threads = 1);

}  // namespace herdlab
