#include "herdlab/fokker_planck.hpp"

#include <cmath>

#include "herdlab/errors.hpp"
#include "herdlab/parallel.hpp"
#include "herdlab/rng.hpp"

namespace herdlab {

TestFunction gaussian_bump(int d, const Vec& center, double width) {
    TestFunction f;
    f.id = "gauss_w" + std::to_string(width);
    const double w2 = width * width;
    Vec c = center;
    f.value = [c, w2](const Vec& x) { return std::exp(-(x - c).norm2_sq() / (2.0 * w2)); };
    f.gradient = [c, w2](const Vec& x) {
        double v = std::exp(-(x - c).norm2_sq() / (2.0 * w2));
        return (-v / w2) * (x - c);
    };
    f.hessian = [c, w2, d](const Vec& x) {
        double v = std::exp(-(x - c).norm2_sq() / (2.0 * w2));
        Vec z = x - c;
        Mat h(d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                h(i, j) = v * (z[i] * z[j] / (w2 * w2) - (i == j ? 1.0 / w2 : 0.0));
        return h;
    };
    f.lipschitz = std::sqrt(static_cast<double>(d)) * std::exp(-0.5) / width;
    return f;
}

TestFunction smooth_square_function(int d, double a) {
    TestFunction f;
    f.id = "smooth_sq_a" + std::to_string(a);
    const double a2 = a * a;
    f.value = [a2](const Vec& x) { return a2 * (1.0 - std::exp(-x.norm2_sq() / a2)); };
    f.gradient = [a2](const Vec& x) {
        return 2.0 * std::exp(-x.norm2_sq() / a2) * x;
    };
    f.hessian = [a2, d](const Vec& x) {
        double e = std::exp(-x.norm2_sq() / a2);
        Mat h(d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                h(i, j) = 2.0 * e * ((i == j ? 1.0 : 0.0) - 2.0 * x[i] * x[j] / a2);
        return h;
    };
    f.lipschitz = std::sqrt(static_cast<double>(d)) * std::sqrt(2.0) * a * std::exp(-0.5);
    return f;
}

TestFunction tanh_coordinate(int d, int coordinate, double width) {
    TestFunction f;
    f.id = "tanh_x" + std::to_string(coordinate);
    f.value = [coordinate, width](const Vec& x) {
        return width * std::tanh(x[coordinate] / width);
    };
    f.gradient = [coordinate, width, d](const Vec& x) {
        double c = std::cosh(x[coordinate] / width);
        Vec g(d);
        g[coordinate] = 1.0 / (c * c);
        return g;
    };
    f.hessian = [coordinate, width, d](const Vec& x) {
        double u = x[coordinate] / width;
        double sech2 = 1.0 / (std::cosh(u) * std::cosh(u));
        Mat h(d);
        h(coordinate, coordinate) = -2.0 * std::tanh(u) * sech2 / width;
        return h;
    };
    f.lipschitz = 1.0;
    return f;
}

namespace {
// Quintic smoothstep pieces: C^2 at both ends.
inline double s5(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
inline double s5p(double t) { return 30.0 * t * t * (t - 1.0) * (t - 1.0); }
inline double s5pp(double t) { return 60.0 * t * (2.0 * t - 1.0) * (t - 1.0); }
}  // namespace

TestFunction plateau_bump(int d, double inner_radius, double outer_radius) {
    TestFunction f;
    f.id = "plateau_r" + std::to_string(inner_radius);
    f.plateau_radius = inner_radius;
    const double r0 = inner_radius, r1 = outer_radius, sw = outer_radius - inner_radius;
    auto psi = [r0, r1, sw](double r) {
        if (r <= r0) return 1.0;
        if (r >= r1) return 0.0;
        return 1.0 - s5((r - r0) / sw);
    };
    auto psi_p = [r0, r1, sw](double r) {
        if (r <= r0 || r >= r1) return 0.0;
        return -s5p((r - r0) / sw) / sw;
    };
    auto psi_pp = [r0, r1, sw](double r) {
        if (r <= r0 || r >= r1) return 0.0;
        return -s5pp((r - r0) / sw) / (sw * sw);
    };
    f.value = [psi](const Vec& x) { return psi(std::sqrt(x.norm2_sq())); };
    f.gradient = [psi_p, r0, d](const Vec& x) {
        double r = std::sqrt(x.norm2_sq());
        if (r <= r0 || r == 0.0) return Vec::zero(d);
        return (psi_p(r) / r) * x;
    };
    f.hessian = [psi_p, psi_pp, r0, d](const Vec& x) {
        double r = std::sqrt(x.norm2_sq());
        if (r <= r0 || r == 0.0) return Mat::zero(d);
        double dp = psi_p(r), dpp = psi_pp(r);
        Mat h(d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double xij = x[i] * x[j] / (r * r);
                h(i, j) = dpp * xij + dp * ((i == j ? 1.0 : 0.0) - xij) / r;
            }
        return h;
    };
    f.lipschitz = std::sqrt(static_cast<double>(d)) * 1.875 / sw;
    return f;
}

TestFunctionBank TestFunctionBank::standard(int d, double scale) {
    TestFunctionBank bank;
    bank.functions.push_back(gaussian_bump(d, Vec::zero(d), scale));
    Vec off(d);
    for (int j = 0; j < d; ++j) off[j] = 0.6 * scale;
    bank.functions.push_back(gaussian_bump(d, off, 0.7 * scale));
    bank.functions.push_back(smooth_square_function(d, 2.0 * scale));
    bank.functions.push_back(tanh_coordinate(d, 0, scale));
    bank.functions.push_back(plateau_bump(d, 4.0 * scale, 6.0 * scale));
    return bank;
}

namespace {

double trace_product(const Mat& h, const Mat& s) {
    double acc = 0.0;
    for (int i = 0; i < h.dim(); ++i)
        for (int j = 0; j < h.dim(); ++j) acc += h(i, j) * s(i, j);
    return acc;
}

void require_no_common_noise(const SystemSpec& spec, const char* who) {
    if (!spec.noises.sigma_c.is_zero())
        throw UnsupportedError(std::string(who) + ": requires sigma_c == 0");
}

}  // namespace

WeakResidualReport weak_residual(const MeanFieldFlow& flow, const SystemSpec& spec,
                                 const ControlParams& /*control*/, const TestFunctionBank& bank,
                                 const NoisePaths* common) {
    const TrajectoryBundle& traj = *flow.ensemble;
    const int K = traj.steps;
    const int n = traj.n;
    const int d = traj.d;
    const double dt = spec.step_size();
    const bool sc_zero = spec.noises.sigma_c.is_zero();
    if (common == nullptr) common = flow.paths.get();
    if (!sc_zero && (common == nullptr || common->common.empty()))
        throw MissingNoiseError("weak_residual: common increments missing with sigma_c != 0");

    const double clip_r = spec.feature_clip_radius();
    const bool sigma_feat =
        spec.noises.sigma_i.uses_features() || spec.noises.sigma_c.uses_features();

    WeakResidualReport report;
    report.dt = dt;
    report.ensemble = n;

    const std::size_t nf = bank.functions.size();
    std::vector<double> pair0(nf, 0.0), drift_int(nf, 0.0), noise_int(nf, 0.0);
    for (std::size_t f = 0; f < nf; ++f) {
        WeakResidualSeries s;
        s.phi_id = bank.functions[f].id;
        s.t.assign(traj.times.begin(), traj.times.end());
        s.residual.assign(K + 1, 0.0);
        report.series.push_back(std::move(s));
        CloudRef c0 = traj.herd_at(0);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += bank.functions[f].value(c0.point(i));
        pair0[f] = acc / n;
    }

    FeatureVector feat;
    feat.clip_radius = clip_r;
    feat.v.assign(feature_count(d), 0.0);

    for (int k = 0; k < K; ++k) {
        const double t = traj.times[k];
        CloudRef cloud = traj.herd_at(k);
        HerdersRef y = traj.herders_at(k);
        if (sigma_feat) feat = features(cloud, clip_r, false);
        KernelConvolver conv_h1(spec.kernels.H1, cloud);
        Vec dwc = (!sc_zero) ? common->common_inc(k) : Vec::zero(d);

        for (std::size_t f = 0; f < nf; ++f) {
            const TestFunction& phi = bank.functions[f];
            double a = 0.0, b = 0.0;
            for (int i = 0; i < n; ++i) {
                Vec x = cloud.point(i);
                Vec grad = phi.gradient(x);
                Vec v = eval_drift_herd(spec, x, y, conv_h1);
                double ga = 0.0;
                for (int j = 0; j < d; ++j) ga += grad[j] * v[j];
                Mat si = spec.noises.sigma_i.eval(t, y, x, feat);
                Mat sstar = si.gram();
                if (!sc_zero) {
                    Mat sc = spec.noises.sigma_c.eval(t, y, x, feat);
                    sstar += sc.gram();
                    Vec push = sc.apply(dwc);
                    for (int j = 0; j < d; ++j) b += grad[j] * push[j];
                }
                a += ga + 0.5 * trace_product(phi.hessian(x), sstar);
            }
            drift_int[f] += dt * a / n;
            noise_int[f] += b / n;

            CloudRef next = traj.herd_at(k + 1);
            double pair_next = 0.0;
            for (int i = 0; i < n; ++i) pair_next += phi.value(next.point(i));
            pair_next /= n;
            double r = pair_next - pair0[f] - drift_int[f] - noise_int[f];
            report.series[f].residual[k + 1] = r;
            report.max_abs = std::max(report.max_abs, std::abs(r));
        }
    }
    return report;
}

FeynmanKacEstimate feynman_kac_u(const SystemSpec& spec, const MeanFieldFlow& flow,
                                 const TestFunction& phi, const Vec& x, double t,
                                 int inner_replicas, std::uint64_t seed) {
    require_no_common_noise(spec, "feynman_kac_u");
    if (inner_replicas < 1) throw ValidationError("feynman_kac_u: inner_replicas must be >= 1");
    const TrajectoryBundle& traj = *flow.ensemble;
    const int K = traj.steps;
    const double dt = spec.step_size();
    int k0 = static_cast<int>(std::lround(t / dt));
    k0 = std::min(std::max(k0, 0), K);

    const double clip_r = spec.feature_clip_radius();
    const bool sigma_feat = spec.noises.sigma_i.uses_features();
    const bool si_zero = spec.noises.sigma_i.is_zero();

    // Frozen flow: precompute per-step features and convolvers once.
    std::vector<FeatureVector> feats(K);
    for (int k = k0; k < K; ++k) {
        if (sigma_feat) {
            feats[k] = features(traj.herd_at(k), clip_r, false);
        } else {
            feats[k].clip_radius = clip_r;
            feats[k].v.assign(feature_count(spec.d), 0.0);
        }
    }

    double sum = 0.0, sum_sq = 0.0;
    for (int r = 0; r < inner_replicas; ++r) {
        Rng rng = make_stream(seed, static_cast<std::uint64_t>(r),
                              static_cast<std::uint64_t>(k0), streams::kFeynmanKac);
        Vec xi = x;
        for (int k = k0; k < K; ++k) {
            CloudRef cloud = traj.herd_at(k);
            HerdersRef y = traj.herders_at(k);
            KernelConvolver conv_h1(spec.kernels.H1, cloud);
            Vec v = eval_drift_herd(spec, xi, y, conv_h1);
            Vec step = dt * v;
            if (!si_zero) {
                Mat si = spec.noises.sigma_i.eval(traj.times[k], y, xi, feats[k]);
                Vec dw(spec.d);
                for (int j = 0; j < spec.d; ++j) dw[j] = std::sqrt(dt) * rng.normal();
                step += si.apply(dw);
            }
            xi += step;
            if (!xi.finite())
                throw BlowupError("feynman_kac_u: non-finite inner path", k, traj.times[k]);
        }
        double val = phi.value(xi);
        sum += val;
        sum_sq += val * val;
    }
    FeynmanKacEstimate est;
    est.replicas = inner_replicas;
    est.value = sum / inner_replicas;
    if (inner_replicas > 1) {
        double var = (sum_sq - sum * sum / inner_replicas) / (inner_replicas - 1.0);
        est.se = std::sqrt(std::max(var, 0.0) / inner_replicas);
    }
    return est;
}

DualityReport duality_check(const SystemSpec& spec, const ControlParams& control,
                            const TestFunctionBank& bank, int N_ref, int inner_replicas,
                            std::uint64_t seed, int threads) {
    require_no_common_noise(spec, "duality_check");
    MeanFieldFlow flow = simulate_mean_field_reference(spec, control, N_ref, seed, 0);
    const TrajectoryBundle& traj = *flow.ensemble;
    const int K = traj.steps;
    const int n = traj.n;
    const double dt = spec.step_size();
    const double clip_r = spec.feature_clip_radius();
    const bool sigma_feat = spec.noises.sigma_i.uses_features();
    const bool si_zero = spec.noises.sigma_i.is_zero();

    std::vector<FeatureVector> feats(K);
    for (int k = 0; k < K; ++k) {
        if (sigma_feat) {
            feats[k] = features(traj.herd_at(k), clip_r, false);
        } else {
            feats[k].clip_radius = clip_r;
            feats[k].v.assign(feature_count(spec.d), 0.0);
        }
    }

    // One backward-diffusion bundle serves every bank function: simulate the
    // Feynman-Kac paths once from each initial atom and evaluate all phis.
    std::vector<std::vector<double>> terminal(n);  // per atom: inner_replicas terminal points*d
    parallel_for(n, threads, [&](int j) {
        terminal[j].assign(static_cast<std::size_t>(inner_replicas) * spec.d, 0.0);
        Vec x0 = traj.herd_at(0).point(j);
        for (int r = 0; r < inner_replicas; ++r) {
            Rng rng = make_stream(seed, static_cast<std::uint64_t>(j) * inner_replicas + r, 1,
                                  streams::kFeynmanKac);
            Vec xi = x0;
            for (int k = 0; k < K; ++k) {
                CloudRef cloud = traj.herd_at(k);
                HerdersRef y = traj.herders_at(k);
                KernelConvolver conv_h1(spec.kernels.H1, cloud);
                Vec v = eval_drift_herd(spec, xi, y, conv_h1);
                Vec step = dt * v;
                if (!si_zero) {
                    Mat si = spec.noises.sigma_i.eval(traj.times[k], y, xi, feats[k]);
                    Vec dw(spec.d);
                    for (int c = 0; c < spec.d; ++c) dw[c] = std::sqrt(dt) * rng.normal();
                    step += si.apply(dw);
                }
                xi += step;
            }
            for (int c = 0; c < spec.d; ++c)
                terminal[j][static_cast<std::size_t>(r) * spec.d + c] = xi[c];
        }
    });

    DualityReport report;
    for (const auto& phi : bank.functions) {
        double lhs_sum = 0.0, lhs_sq = 0.0;
        CloudRef end = traj.herd_at(K);
        for (int i = 0; i < n; ++i) {
            double v = phi.value(end.point(i));
            lhs_sum += v;
            lhs_sq += v * v;
        }
        double lhs = lhs_sum / n;
        double lhs_var = (lhs_sq - lhs_sum * lhs_sum / n) / (n - 1.0);
        double lhs_se = std::sqrt(std::max(lhs_var, 0.0) / n);

        double rhs_sum = 0.0, rhs_sq = 0.0;
        const double count = static_cast<double>(n) * inner_replicas;
        for (int j = 0; j < n; ++j)
            for (int r = 0; r < inner_replicas; ++r) {
                Vec xi(spec.d);
                for (int c = 0; c < spec.d; ++c)
                    xi[c] = terminal[j][static_cast<std::size_t>(r) * spec.d + c];
                double v = phi.value(xi);
                rhs_sum += v;
                rhs_sq += v * v;
            }
        double rhs = rhs_sum / count;
        double rhs_var = (rhs_sq - rhs_sum * rhs_sum / count) / (count - 1.0);
        double rhs_se = std::sqrt(std::max(rhs_var, 0.0) / count);

        DualityRow row;
        row.phi_id = phi.id;
        row.lhs = lhs;
        row.rhs = rhs;
        row.gap = lhs - rhs;
        row.se = std::sqrt(lhs_se * lhs_se + rhs_se * rhs_se);
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace herdlab
