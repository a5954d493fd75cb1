#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "herdlab/control.hpp"
#include "herdlab/model.hpp"

namespace herdlab {

// Brownian increments over the uniform grid: one common d-dimensional stream
// shared by the whole replica and one idiosyncratic stream per particle.
// Increments are keyed by (seed, replica, particle, step), so particle n
// draws the same path in every system that tracks it, whatever the ensemble
// size around it.
struct NoisePaths {
    int steps = 0;      // K
    int particles = 0;  // N
    int d = 0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t replica = 0;
    std::vector<double> common;         // steps * d
    std::vector<double> idiosyncratic;  // particles * steps * d

    Vec common_inc(int k) const {
        Vec w(d);
        for (int j = 0; j < d; ++j) w[j] = common[static_cast<std::size_t>(k) * d + j];
        return w;
    }
    Vec idio_inc(int n, int k) const {
        Vec w(d);
        const std::size_t base = (static_cast<std::size_t>(n) * steps + k) * d;
        for (int j = 0; j < d; ++j) w[j] = idiosyncratic[base + j];
        return w;
    }
};

NoisePaths sample_noise_paths(const SystemSpec& spec, std::uint64_t seed, std::uint64_t replica);
NoisePaths sample_noise_paths_n(const SystemSpec& spec, std::uint64_t seed,
                                std::uint64_t replica, int particles);

// Brownian increments assembled from different stream addresses for the
// common and idiosyncratic parts; used to hold one common path fixed while
// idiosyncratic draws vary.
NoisePaths sample_noise_paths_split(const SystemSpec& spec, std::uint64_t seed,
                                    std::uint64_t common_replica,
                                    std::uint64_t idio_replica, int particles);

// i.i.d. draws from the herd initial law, one stream per particle index.
std::vector<double> sample_initial_herd(const SystemSpec& spec, std::uint64_t seed,
                                        std::uint64_t replica, int particles);

struct TrajectoryBundle {
    int steps = 0;  // K
    int n = 0;
    int m = 0;
    int d = 0;
    std::vector<double> times;    // K+1
    std::vector<double> herd;     // (K+1) * n * d
    std::vector<double> herders;  // (K+1) * m * d

    CloudRef herd_at(int k) const {
        return CloudRef{herd.data() + static_cast<std::size_t>(k) * n * d, n, d};
    }
    HerdersRef herders_at(int k) const {
        return HerdersRef{herders.data() + static_cast<std::size_t>(k) * m * d, m, d};
    }
    EmpiricalMeasure measure_at(int k) const;
    Vec herd_point(int k, int i) const { return herd_at(k).point(i); }
    Vec herder_point(int k, int i) const { return herders_at(k).point(i); }
};

// One explicit Euler-Maruyama update with coefficients frozen at the step's
// left endpoint. Throws BlowupError (carrying step_index) on non-finite output.
Vec euler_step_herd(const Vec& x, double dt, const Vec& drift, const Mat& sigma_i,
                    const Mat& sigma_c, const Vec& dw_i, const Vec& dw_c, int step_index = -1);
Vec euler_step_herder(const Vec& y, double dt, const Vec& drift, int step_index = -1);

// Integrates the coupled system for the given noise paths and initial herd
// positions (particle count taken from the paths).
TrajectoryBundle simulate_with(const SystemSpec& spec, const ControlParams& control,
                               const NoisePaths& paths, const std::vector<double>& herd0);

// Full deterministic run of the N-particle finite system.
TrajectoryBundle simulate_finite(const SystemSpec& spec, const ControlParams& control,
                                 std::uint64_t seed, std::uint64_t replica);

// Empirical-measure flow of a large ensemble sharing the replica's common
// path: the operational stand-in for the conditional law mu^(i).
struct MeanFieldFlow {
    std::shared_ptr<const TrajectoryBundle> ensemble;
    std::shared_ptr<const NoisePaths> paths;
    int tracked = 0;  // leading particles coupled to the finite system

    int steps() const { return ensemble->steps; }
    double time(int k) const { return ensemble->times[k]; }
    CloudRef cloud_at(int k) const { return ensemble->herd_at(k); }
    EmpiricalMeasure measure_at(int k) const { return ensemble->measure_at(k); }
};

// Simulates an N_ref-particle ensemble whose first spec.N particles reuse the
// idiosyncratic streams and initial data of simulate_finite(spec, ...) with
// the same (seed, replica): the synchronous coupling of the mean-field limit
// estimates. Requires N_ref >= spec.N.
MeanFieldFlow simulate_mean_field_reference(const SystemSpec& spec, const ControlParams& control,
                                            int N_ref, std::uint64_t seed,
                                            std::uint64_t replica);

}  // namespace herdlab
