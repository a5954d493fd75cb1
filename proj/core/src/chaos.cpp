#include "herdlab/chaos.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "herdlab/dynamics.hpp"
#include "herdlab/errors.hpp"
#include "herdlab/measures.hpp"
#include "herdlab/parallel.hpp"
#include "herdlab/rng.hpp"

namespace herdlab {

RateExponents predicted_exponent(double q, int d, double p) {
    if (d < 1 || d > 3) throw UnsupportedError("predicted_exponent: d must be in {1,2,3}");
    if (q < 1.0) throw UnsupportedError("predicted_exponent: q must be >= 1");
    if (q >= p)
        throw UnsupportedError("predicted_exponent: no quantitative estimate when q >= p");

    RateExponents e;
    e.q = q;
    e.d = d;
    e.p = p;
    const double half_d = 0.5 * d;
    const double moment_term = (p - q) / p;

    if (q > half_d) {
        if (p == 2.0 * q)
            throw UnsupportedError("predicted_exponent: excluded case p = 2q");
        e.regime = RateRegime::AboveHalfD;
        e.exponent = -std::min(0.5, moment_term);
        e.log_factor = false;
    } else if (q == half_d) {
        if (p == 2.0 * q)
            throw UnsupportedError("predicted_exponent: excluded case p = 2q");
        e.regime = RateRegime::AtHalfD;
        if (moment_term < 0.5) {
            e.exponent = -moment_term;
            e.log_factor = false;
        } else {
            e.exponent = -0.5;
            e.log_factor = true;
        }
    } else {
        if (p == static_cast<double>(d) / (d - q))
            throw UnsupportedError("predicted_exponent: excluded case p = d/(d-q)");
        e.regime = RateRegime::BelowHalfD;
        e.exponent = -std::min(q / d, moment_term);
        e.log_factor = false;
    }
    return e;
}

namespace {

double pow_q(double x, double q) {
    if (q == 1.0) return x;
    if (q == 2.0) return x * x;
    return std::pow(x, q);
}

// N indices into [0, n_from), seeded and without replacement. Prefers indices
// outside the tracked block so the subsample is independent of mu_N.
std::vector<int> seeded_subsample(int n_from, int count, int tracked, Rng& rng) {
    int lo = (n_from - tracked >= count) ? tracked : 0;
    std::vector<int> pool(n_from - lo);
    std::iota(pool.begin(), pool.end(), lo);
    for (int i = 0; i < count; ++i) {
        int j = i + static_cast<int>(rng.below(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    return pool;
}

struct ReplicaErrors {
    std::vector<double> coupled;  // per N
    std::vector<double> wq;
    std::vector<char> failed;  // per N; a reference blowup fails every row
};

}  // namespace

RateTable run_rate_experiment(const SystemSpec& spec, const ControlParams& control,
                              const std::vector<int>& N_list, int N_ref, int replicas, double q,
                              std::uint64_t seed, int threads) {
    if (N_list.empty()) throw ValidationError("run_rate_experiment: empty N list");
    for (std::size_t i = 0; i < N_list.size(); ++i) {
        if (N_list[i] < 1 || N_list[i] > N_ref)
            throw ValidationError("run_rate_experiment: need 1 <= N <= N_ref");
        if (i > 0 && N_list[i] <= N_list[i - 1])
            throw ValidationError("run_rate_experiment: N list must be strictly increasing");
    }
    if (replicas < 8) throw ValidationError("run_rate_experiment: replicas must be >= 8");
    if (q < 1.0 || q >= spec.p) throw UnsupportedError("run_rate_experiment: need 1 <= q < p");

    const int n_rows = static_cast<int>(N_list.size());
    std::vector<ReplicaErrors> results(replicas);

    parallel_for(replicas, threads, [&](int r) {
        ReplicaErrors& out = results[r];
        out.coupled.assign(n_rows, 0.0);
        out.wq.assign(n_rows, 0.0);
        out.failed.assign(n_rows, 0);
        SystemSpec ref_spec = spec;
        ref_spec.N = N_list.back();
        std::shared_ptr<const TrajectoryBundle> ref;
        try {
            ref = simulate_mean_field_reference(ref_spec, control, N_ref, seed,
                                                static_cast<std::uint64_t>(r))
                      .ensemble;
        } catch (const BlowupError&) {
            out.failed.assign(n_rows, 1);
            return;
        }
        const int K = ref->steps;

        for (int row = 0; row < n_rows; ++row) {
            const int N = N_list[row];
            SystemSpec spec_n = spec;
            spec_n.N = N;
            TrajectoryBundle fin;
            try {
                fin = simulate_finite(spec_n, control, seed, static_cast<std::uint64_t>(r));
            } catch (const BlowupError&) {
                out.failed[row] = 1;
                continue;
            }

            double worst = 0.0;
            for (int n = 0; n < N; ++n) {
                double sup = 0.0;
                for (int k = 0; k <= K; ++k)
                    sup = std::max(sup,
                                   max_norm_diff(ref->herd_point(k, n), fin.herd_point(k, n)));
                worst = std::max(worst, sup);
            }
            out.coupled[row] = pow_q(worst, q);

            Rng sub_rng = make_stream(seed, static_cast<std::uint64_t>(r),
                                      static_cast<std::uint64_t>(N), streams::kSubsample);
            std::vector<int> pick = seeded_subsample(N_ref, N, N, sub_rng);
            std::vector<double> proxy(static_cast<std::size_t>(N) * spec.d);
            CloudRef ref_cloud = ref->herd_at(K);
            for (int i = 0; i < N; ++i)
                for (int j = 0; j < spec.d; ++j)
                    proxy[static_cast<std::size_t>(i) * spec.d + j] =
                        ref_cloud.data[static_cast<std::size_t>(pick[i]) * spec.d + j];
            EmpiricalMeasure proxy_mu(std::move(proxy), spec.d);
            EmpiricalMeasure mu_n = fin.measure_at(K);
            double w = (spec.d == 1) ? wasserstein_1d(mu_n, proxy_mu, q)
                                     : wasserstein_assignment(mu_n, proxy_mu, q);
            out.wq[row] = pow_q(w, q);
        }
    });

    RateTable table;
    table.d = spec.d;
    table.p = spec.p;
    table.q = q;
    for (int row = 0; row < n_rows; ++row) {
        int ok = 0;
        double sc = 0.0, sw = 0.0;
        for (const auto& res : results) {
            if (res.failed[row]) continue;
            ++ok;
            sc += res.coupled[row];
            sw += res.wq[row];
        }
        if (ok * 10 < replicas * 9) continue;  // > 10% failures: drop the row
        RateRow out;
        out.N = N_list[row];
        out.replicas = ok;
        out.q = q;
        out.coupled_err = sc / ok;
        out.wq_err = sw / ok;
        double vc = 0.0, vw = 0.0;
        for (const auto& res : results) {
            if (res.failed[row]) continue;
            vc += (res.coupled[row] - out.coupled_err) * (res.coupled[row] - out.coupled_err);
            vw += (res.wq[row] - out.wq_err) * (res.wq[row] - out.wq_err);
        }
        if (ok > 1) {
            out.coupled_se = std::sqrt(vc / (static_cast<double>(ok) * (ok - 1)));
            out.wq_se = std::sqrt(vw / (static_cast<double>(ok) * (ok - 1)));
        }
        table.rows.push_back(out);
    }
    return table;
}

FitResult fit_loglog_slope(const RateTable& table, RateColumn column) {
    if (table.rows.size() < 3) throw FitError("fit_loglog_slope: need at least 3 rows");
    std::vector<double> xs, ys;
    for (const auto& row : table.rows) {
        double v = column == RateColumn::Coupled ? row.coupled_err : row.wq_err;
        if (!(v > 0.0)) throw FitError("fit_loglog_slope: non-positive value in column");
        xs.push_back(std::log(static_cast<double>(row.N)));
        ys.push_back(std::log(v));
    }
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    FitResult f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

Observable clipped_coordinate_observable(int coordinate, double clip_radius) {
    Observable o;
    o.name = "clip_x" + std::to_string(coordinate);
    o.bound = clip_radius;
    o.fn = [coordinate, clip_radius](const Vec& x) { return clip(x[coordinate], clip_radius); };
    return o;
}

namespace {

double bessel_cov(const std::vector<double>& a, const std::vector<double>& b) {
    const int n = static_cast<int>(a.size());
    double ma = 0.0, mb = 0.0;
    for (int i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += (a[i] - ma) * (b[i] - mb);
    return s / (n - 1);
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / v.size();
}

double se_of_mean(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / (v.size() * (v.size() - 1.0)));
}

// Total covariance = E[cov within block] + cov of block means.
double total_cov(const std::vector<double>& within, const std::vector<double>& m1,
                 const std::vector<double>& m2) {
    return mean_of(within) + bessel_cov(m1, m2);
}

double jackknife_se(const std::vector<double>& within, const std::vector<double>& m1,
                    const std::vector<double>& m2) {
    const int b = static_cast<int>(within.size());
    if (b < 3) return 0.0;
    std::vector<double> stats;
    stats.reserve(b);
    for (int drop = 0; drop < b; ++drop) {
        std::vector<double> w, a, c;
        for (int i = 0; i < b; ++i) {
            if (i == drop) continue;
            w.push_back(within[i]);
            a.push_back(m1[i]);
            c.push_back(m2[i]);
        }
        stats.push_back(total_cov(w, a, c));
    }
    double m = mean_of(stats);
    double s = 0.0;
    for (double x : stats) s += (x - m) * (x - m);
    return std::sqrt(s * (b - 1.0) / b);
}

}  // namespace

CovarianceReport conditional_chaos_test(const SystemSpec& spec, const ControlParams& control,
                                        int N, const Observable& phi1, const Observable& phi2,
                                        int outer_replicas, int inner_replicas,
                                        std::uint64_t seed, int threads) {
    if (N < 2) throw ValidationError("conditional_chaos_test: need N >= 2 for a pair");
    if (outer_replicas < 3 || inner_replicas < 2)
        throw ValidationError("conditional_chaos_test: need outer >= 3 and inner >= 2");

    SystemSpec spec_n = spec;
    spec_n.N = N;

    std::vector<std::vector<double>> f1(outer_replicas), f2(outer_replicas);
    parallel_for(outer_replicas, threads, [&](int o) {
        f1[o].assign(inner_replicas, 0.0);
        f2[o].assign(inner_replicas, 0.0);
        for (int i = 0; i < inner_replicas; ++i) {
            std::uint64_t idio_replica =
                static_cast<std::uint64_t>(o) * inner_replicas + i + 1;
            NoisePaths paths = sample_noise_paths_split(spec_n, seed,
                                                        static_cast<std::uint64_t>(o),
                                                        idio_replica, N);
            std::vector<double> herd0 = sample_initial_herd(spec_n, seed, idio_replica, N);
            TrajectoryBundle traj = simulate_with(spec_n, control, paths, herd0);
            Vec x1 = traj.herd_point(traj.steps, 0);
            Vec x2 = traj.herd_point(traj.steps, 1);
            double v1 = phi1.fn(x1);
            double v2 = phi2.fn(x2);
            if (std::abs(v1) > phi1.bound * (1.0 + 1e-12) ||
                std::abs(v2) > phi2.bound * (1.0 + 1e-12))
                throw ObservableError("conditional_chaos_test: observable exceeds its bound");
            f1[o][i] = v1;
            f2[o][i] = v2;
        }
    });

    std::vector<double> within(outer_replicas), m1(outer_replicas), m2(outer_replicas);
    for (int o = 0; o < outer_replicas; ++o) {
        within[o] = bessel_cov(f1[o], f2[o]);
        m1[o] = mean_of(f1[o]);
        m2[o] = mean_of(f2[o]);
    }

    CovarianceReport rep;
    rep.N = N;
    rep.outer = outer_replicas;
    rep.inner = inner_replicas;
    rep.conditional = mean_of(within);
    rep.conditional_se = se_of_mean(within);
    rep.unconditional = total_cov(within, m1, m2);
    rep.unconditional_se = jackknife_se(within, m1, m2);
    return rep;
}

}  // namespace herdlab
