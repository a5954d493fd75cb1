#include "herdlab/dynamics.hpp"

#include <cmath>

#include "herdlab/errors.hpp"
#include "herdlab/rng.hpp"

namespace herdlab {

namespace {

void fill_gaussian_block(Rng& rng, double* out, int count, double scale) {
    for (int i = 0; i < count; ++i) out[i] = scale * rng.normal();
}

NoisePaths make_paths(const SystemSpec& spec, std::uint64_t seed, std::uint64_t common_replica,
                      std::uint64_t idio_replica, int particles) {
    NoisePaths p;
    p.steps = spec.steps();
    p.particles = particles;
    p.d = spec.d;
    p.dt = spec.step_size();
    p.seed = seed;
    p.replica = idio_replica;
    const double scale = std::sqrt(p.dt);
    p.common.resize(static_cast<std::size_t>(p.steps) * p.d);
    {
        Rng rng = make_stream(seed, common_replica, streams::kCommonParticle, streams::kCommon);
        fill_gaussian_block(rng, p.common.data(), static_cast<int>(p.common.size()), scale);
    }
    p.idiosyncratic.resize(static_cast<std::size_t>(particles) * p.steps * p.d);
    for (int n = 0; n < particles; ++n) {
        Rng rng = make_stream(seed, idio_replica, static_cast<std::uint64_t>(n),
                              streams::kIdiosyncratic);
        fill_gaussian_block(rng,
                            p.idiosyncratic.data() + static_cast<std::size_t>(n) * p.steps * p.d,
                            p.steps * p.d, scale);
    }
    return p;
}

}  // namespace

NoisePaths sample_noise_paths(const SystemSpec& spec, std::uint64_t seed,
                              std::uint64_t replica) {
    return make_paths(spec, seed, replica, replica, spec.N);
}

NoisePaths sample_noise_paths_n(const SystemSpec& spec, std::uint64_t seed,
                                std::uint64_t replica, int particles) {
    return make_paths(spec, seed, replica, replica, particles);
}

NoisePaths sample_noise_paths_split(const SystemSpec& spec, std::uint64_t seed,
                                    std::uint64_t common_replica, std::uint64_t idio_replica,
                                    int particles) {
    return make_paths(spec, seed, common_replica, idio_replica, particles);
}

std::vector<double> sample_initial_herd(const SystemSpec& spec, std::uint64_t seed,
                                        std::uint64_t replica, int particles) {
    std::vector<double> herd0(static_cast<std::size_t>(particles) * spec.d);
    for (int n = 0; n < particles; ++n) {
        Rng rng = make_stream(seed, replica, static_cast<std::uint64_t>(n),
                              streams::kInitialData);
        Vec x = spec.initial.sample(rng);
        for (int j = 0; j < spec.d; ++j) herd0[static_cast<std::size_t>(n) * spec.d + j] = x[j];
    }
    return herd0;
}

EmpiricalMeasure TrajectoryBundle::measure_at(int k) const {
    CloudRef c = herd_at(k);
    return EmpiricalMeasure(std::vector<double>(c.data, c.data + static_cast<std::size_t>(n) * d),
                            d);
}

Vec euler_step_herd(const Vec& x, double dt, const Vec& drift, const Mat& sigma_i,
                    const Mat& sigma_c, const Vec& dw_i, const Vec& dw_c, int step_index) {
    Vec out = x + dt * drift + sigma_i.apply(dw_i) + sigma_c.apply(dw_c);
    if (!out.finite())
        throw BlowupError("euler_step_herd: non-finite state", step_index, step_index * dt);
    return out;
}

Vec euler_step_herder(const Vec& y, double dt, const Vec& drift, int step_index) {
    Vec out = y + dt * drift;
    if (!out.finite())
        throw BlowupError("euler_step_herder: non-finite state", step_index, step_index * dt);
    return out;
}

TrajectoryBundle simulate_with(const SystemSpec& spec, const ControlParams& control,
                               const NoisePaths& paths, const std::vector<double>& herd0) {
    spec.check_basic();
    const int K = spec.steps();
    const int n = paths.particles;
    const int d = spec.d;
    const int m = spec.M;
    if (paths.steps != K) throw ValidationError("simulate_with: paths use a different grid");
    if (herd0.size() != static_cast<std::size_t>(n) * d)
        throw DimensionError("simulate_with: initial herd size mismatch");

    TrajectoryBundle out;
    out.steps = K;
    out.n = n;
    out.m = m;
    out.d = d;
    out.times.resize(K + 1);
    const double dt = spec.step_size();
    for (int k = 0; k <= K; ++k) out.times[k] = (k == K) ? spec.T : k * dt;
    out.herd.resize(static_cast<std::size_t>(K + 1) * n * d);
    out.herders.resize(static_cast<std::size_t>(K + 1) * m * d);

    std::copy(herd0.begin(), herd0.end(), out.herd.begin());
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < d; ++j)
            out.herders[static_cast<std::size_t>(i) * d + j] = spec.herder_start[i][j];

    const bool control_feat = control.uses_features();
    const bool need_feat = spec.needs_features_in_dynamics(control_feat);
    const bool need_pairwise =
        (spec.noises.sigma_i.uses_features() &&
         static_cast<int>(spec.noises.sigma_i.coef_feat().size()) > 2 * d &&
         spec.noises.sigma_i.coef_feat()[2 * d] != 0.0) ||
        (spec.noises.sigma_c.uses_features() &&
         static_cast<int>(spec.noises.sigma_c.coef_feat().size()) > 2 * d &&
         spec.noises.sigma_c.coef_feat()[2 * d] != 0.0);
    const double clip_r = spec.feature_clip_radius();
    const bool si_zero = spec.noises.sigma_i.is_zero();
    const bool sc_zero = spec.noises.sigma_c.is_zero();

    FeatureVector feat;
    feat.clip_radius = clip_r;
    feat.v.assign(feature_count(d), 0.0);

    for (int k = 0; k < K; ++k) {
        const double t = out.times[k];
        CloudRef cloud = out.herd_at(k);
        HerdersRef y = out.herders_at(k);
        if (need_feat) feat = features(cloud, clip_r, need_pairwise);

        std::vector<Vec> u = instantiate_control(spec, control, t, y, feat);

        KernelConvolver conv_h1(spec.kernels.H1, cloud);
        KernelConvolver conv_k2(spec.kernels.K2, cloud);

        double* herders_next = out.herders.data() + static_cast<std::size_t>(k + 1) * m * d;
        for (int i = 0; i < m; ++i) {
            Vec drift = eval_drift_herder(spec, i, y, conv_k2, u[i]);
            Vec yn = euler_step_herder(y.point(i), dt, drift, k);
            for (int j = 0; j < d; ++j) herders_next[static_cast<std::size_t>(i) * d + j] = yn[j];
        }

        double* herd_next = out.herd.data() + static_cast<std::size_t>(k + 1) * n * d;
        Vec dwc = paths.common_inc(k);
        const Mat zero = Mat::zero(d);
        for (int i = 0; i < n; ++i) {
            Vec x = cloud.point(i);
            Vec drift = eval_drift_herd(spec, x, y, conv_h1);
            Mat si = si_zero ? zero : spec.noises.sigma_i.eval(t, y, x, feat);
            Mat sc = sc_zero ? zero : spec.noises.sigma_c.eval(t, y, x, feat);
            Vec dwi = paths.idio_inc(i, k);
            Vec xn = euler_step_herd(x, dt, drift, si, sc, dwi, dwc, k);
            for (int j = 0; j < d; ++j) herd_next[static_cast<std::size_t>(i) * d + j] = xn[j];
        }
    }
    return out;
}

TrajectoryBundle simulate_finite(const SystemSpec& spec, const ControlParams& control,
                                 std::uint64_t seed, std::uint64_t replica) {
    NoisePaths paths = sample_noise_paths(spec, seed, replica);
    std::vector<double> herd0 = sample_initial_herd(spec, seed, replica, spec.N);
    return simulate_with(spec, control, paths, herd0);
}

MeanFieldFlow simulate_mean_field_reference(const SystemSpec& spec,
                                            const ControlParams& control, int N_ref,
                                            std::uint64_t seed, std::uint64_t replica) {
    if (N_ref < spec.N)
        throw ValidationError("simulate_mean_field_reference: N_ref must be >= spec.N");
    auto paths = std::make_shared<NoisePaths>(sample_noise_paths_n(spec, seed, replica, N_ref));
    std::vector<double> herd0 = sample_initial_herd(spec, seed, replica, N_ref);
    auto bundle =
        std::make_shared<TrajectoryBundle>(simulate_with(spec, control, *paths, herd0));
    MeanFieldFlow flow;
    flow.ensemble = std::move(bundle);
    flow.paths = std::move(paths);
    flow.tracked = spec.N;
    return flow;
}

}  // namespace herdlab
