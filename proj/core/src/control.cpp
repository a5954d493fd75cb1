#include "herdlab/control.hpp"

#include <algorithm>
#include <cmath>

#include "herdlab/dynamics.hpp"
#include "herdlab/errors.hpp"
#include "herdlab/parallel.hpp"
#include "herdlab/rng.hpp"

namespace herdlab {

ControlParams ControlParams::default_init(const SystemSpec& spec, int pieces) {
    ControlParams p;
    p.pieces = std::max(1, pieces);
    p.ell = spec.bounds.ell;
    const int hdim = spec.d * p.ell;
    p.h.assign(spec.M, std::vector<double>(static_cast<std::size_t>(p.pieces) * hdim, 0.0));
    GShape g;
    g.w_y.assign(static_cast<std::size_t>(p.ell) * spec.d * spec.M, 0.0);
    g.w_feat.assign(static_cast<std::size_t>(p.ell) * control_feature_count(spec.d), 0.0);
    g.bias.assign(p.ell, 1.0);
    p.g.assign(spec.M, g);
    project_admissible(spec, p);
    return p;
}

bool ControlParams::uses_features() const {
    for (const auto& gm : g)
        for (double w : gm.w_feat)
            if (w != 0.0) return true;
    return false;
}

std::vector<double> ControlParams::h_at(const SystemSpec& spec, int m, double t) const {
    const int hdim = spec.d * ell;
    int b = static_cast<int>(t / spec.T * pieces);
    b = std::min(std::max(b, 0), pieces - 1);
    auto first = h[m].begin() + static_cast<std::size_t>(b) * hdim;
    return std::vector<double>(first, first + hdim);
}

void project_admissible(const SystemSpec& spec, ControlParams& params) {
    const int hdim = spec.d * params.ell;
    for (auto& hm : params.h)
        for (std::size_t i = 0; i < hm.size(); ++i) {
            std::size_t coord = i % hdim;
            hm[i] = std::max(spec.bounds.U_lo[coord], std::min(spec.bounds.U_hi[coord], hm[i]));
        }
    const int f = control_feature_count(spec.d);
    const int ydim = spec.d * spec.M;
    for (auto& gm : params.g) {
        for (int row = 0; row < params.ell; ++row) {
            double total = 0.0;
            for (int j = 0; j < ydim; ++j) total += std::abs(gm.w_y[row * ydim + j]);
            for (int j = 0; j < f; ++j) total += std::abs(gm.w_feat[row * f + j]);
            if (total > spec.bounds.L) {
                // slightly conservative so reprojection is a bit-exact no-op
                double s = spec.bounds.L / total * (1.0 - 1e-12);
                for (int j = 0; j < ydim; ++j) gm.w_y[row * ydim + j] *= s;
                for (int j = 0; j < f; ++j) gm.w_feat[row * f + j] *= s;
            }
        }
        for (auto& b : gm.bias) b = clip(b, spec.bounds.Mprime);
    }
}

bool is_admissible(const SystemSpec& spec, const ControlParams& params) {
    ControlParams copy = params;
    project_admissible(spec, copy);
    if (copy.h != params.h) return false;
    for (std::size_t m = 0; m < params.g.size(); ++m)
        if (copy.g[m].w_y != params.g[m].w_y || copy.g[m].w_feat != params.g[m].w_feat ||
            copy.g[m].bias != params.g[m].bias)
            return false;
    return true;
}

std::vector<double> eval_g(const SystemSpec& spec, const GShape& g, HerdersRef y,
                           const FeatureVector& feat) {
    const int f = control_feature_count(spec.d);
    const int ydim = spec.d * spec.M;
    const double clip_in = spec.feature_clip_radius();
    std::vector<double> out(g.bias.size());
    for (std::size_t row = 0; row < g.bias.size(); ++row) {
        double s = g.bias[row];
        for (int j = 0; j < ydim; ++j)
            s += g.w_y[row * ydim + j] * clip(y.data[j], clip_in);
        for (int j = 0; j < f && j < feat.size(); ++j) s += g.w_feat[row * f + j] * feat[j];
        out[row] = clip(s, spec.bounds.Mprime);
    }
    return out;
}

std::vector<Vec> instantiate_control(const SystemSpec& spec, const ControlParams& params,
                                     double t, HerdersRef y, const FeatureVector& feat) {
    std::vector<Vec> u(spec.M, Vec::zero(spec.d));
    for (int m = 0; m < spec.M; ++m) {
        std::vector<double> hm = params.h_at(spec, m, t);
        std::vector<double> gm = eval_g(spec, params.g[m], y, feat);
        Vec um(spec.d);
        for (int i = 0; i < spec.d; ++i) {
            double s = 0.0;
            for (int j = 0; j < params.ell; ++j)
                s += hm[static_cast<std::size_t>(i) * params.ell + j] * gm[j];
            um[i] = s;
        }
        u[m] = um;
    }
    return u;
}

namespace {

struct ReplicaCost {
    double running = 0.0, transient = 0.0, endpoint = 0.0;
    bool failed = false;
};

// Left-endpoint quadrature of the three cost pieces along one trajectory.
ReplicaCost integrate_costs(const SystemSpec& spec, const ControlParams& params,
                            const TrajectoryBundle& traj) {
    ReplicaCost out;
    const double dt = spec.step_size();
    const int K = traj.steps;
    const bool need_feat = spec.costs.psi_tau.uses_features() ||
                           spec.costs.psi_eps.uses_features() || params.uses_features();
    const bool need_pairwise = false;
    const double clip_r = spec.feature_clip_radius();

    FeatureVector feat;
    feat.clip_radius = clip_r;
    feat.v.assign(feature_count(spec.d), 0.0);

    for (int k = 0; k < K; ++k) {
        const double t = traj.times[k];
        HerdersRef y = traj.herders_at(k);
        if (need_feat) feat = features(traj.herd_at(k), clip_r, need_pairwise);
        double rho = 0.0;
        for (int m = 0; m < spec.M; ++m) {
            std::vector<double> hm = params.h_at(spec, m, t);
            std::vector<double> gm = eval_g(spec, params.g[m], y, feat);
            rho += spec.costs.psi_rho.eval(hm, gm);
        }
        out.running += dt * rho / spec.M;
        out.transient += dt * spec.costs.psi_tau.eval(t, y, feat);
    }
    if (need_feat) feat = features(traj.herd_at(K), clip_r, need_pairwise);
    out.endpoint = spec.costs.psi_eps.eval(traj.times[K], traj.herders_at(K), feat);
    return out;
}

CostBreakdown reduce_costs(std::vector<ReplicaCost>& rows) {
    int ok = 0;
    for (const auto& r : rows)
        if (!r.failed) ++ok;
    const int total = static_cast<int>(rows.size());
    if (ok < total && (total - ok) * 10 > total)
        throw EvaluationError("cost evaluation: more than 10% of replicas blew up");
    if (ok == 0) throw EvaluationError("cost evaluation: no successful replicas");

    CostBreakdown out;
    out.replicas = ok;
    double sr = 0.0, st = 0.0, se_ = 0.0;
    for (const auto& r : rows) {
        if (r.failed) continue;
        sr += r.running;
        st += r.transient;
        se_ += r.endpoint;
    }
    out.running = sr / ok;
    out.transient = st / ok;
    out.endpoint = se_ / ok;
    out.total = out.running + out.transient + out.endpoint;
    if (ok > 1) {
        double vr = 0.0, vt = 0.0, ve = 0.0, vtot = 0.0;
        for (const auto& r : rows) {
            if (r.failed) continue;
            double tr = r.running + r.transient + r.endpoint;
            vr += (r.running - out.running) * (r.running - out.running);
            vt += (r.transient - out.transient) * (r.transient - out.transient);
            ve += (r.endpoint - out.endpoint) * (r.endpoint - out.endpoint);
            vtot += (tr - out.total) * (tr - out.total);
        }
        double norm = static_cast<double>(ok) * (ok - 1);
        out.running_se = std::sqrt(vr / norm);
        out.transient_se = std::sqrt(vt / norm);
        out.endpoint_se = std::sqrt(ve / norm);
        out.total_se = std::sqrt(vtot / norm);
    }
    return out;
}

}  // namespace

CostBreakdown eval_cost_finite(const SystemSpec& spec, const ControlParams& params, int replicas,
                               std::uint64_t seed, int threads) {
    if (replicas < 1) throw ValidationError("eval_cost_finite: replicas must be >= 1");
    std::vector<ReplicaCost> rows(replicas);
    parallel_for(replicas, threads, [&](int r) {
        try {
            TrajectoryBundle traj =
                simulate_finite(spec, params, seed, static_cast<std::uint64_t>(r));
            rows[r] = integrate_costs(spec, params, traj);
        } catch (const BlowupError&) {
            rows[r].failed = true;
        }
    });
    return reduce_costs(rows);
}

CostBreakdown eval_cost_mean_field(const SystemSpec& spec, const ControlParams& params,
                                   int N_ref, int replicas, std::uint64_t seed, int threads) {
    if (replicas < 1) throw ValidationError("eval_cost_mean_field: replicas must be >= 1");
    std::vector<ReplicaCost> rows(replicas);
    parallel_for(replicas, threads, [&](int r) {
        try {
            MeanFieldFlow flow = simulate_mean_field_reference(spec, params, N_ref, seed,
                                                               static_cast<std::uint64_t>(r));
            rows[r] = integrate_costs(spec, params, *flow.ensemble);
        } catch (const BlowupError&) {
            rows[r].failed = true;
        }
    });
    return reduce_costs(rows);
}

namespace {

// Flat coordinate access over (h, g) with per-coordinate step scales.
struct ParamVector {
    std::vector<double*> slots;
    std::vector<double> scales;

    static ParamVector map(const SystemSpec& spec, ControlParams& p) {
        ParamVector v;
        const int hdim = spec.d * p.ell;
        for (auto& hm : p.h)
            for (std::size_t i = 0; i < hm.size(); ++i) {
                std::size_t coord = i % hdim;
                v.slots.push_back(&hm[i]);
                v.scales.push_back(0.25 * (spec.bounds.U_hi[coord] - spec.bounds.U_lo[coord]));
            }
        for (auto& gm : p.g) {
            for (auto& w : gm.w_y) {
                v.slots.push_back(&w);
                v.scales.push_back(0.25 * spec.bounds.L);
            }
            for (auto& w : gm.w_feat) {
                v.slots.push_back(&w);
                v.scales.push_back(0.25 * spec.bounds.L);
            }
            for (auto& b : gm.bias) {
                v.slots.push_back(&b);
                v.scales.push_back(0.25 * spec.bounds.Mprime);
            }
        }
        return v;
    }
};

ControlParams random_admissible(const SystemSpec& spec, const ControlParams& like, Rng& rng) {
    ControlParams p = like;
    const int hdim = spec.d * p.ell;
    for (auto& hm : p.h)
        for (std::size_t i = 0; i < hm.size(); ++i) {
            std::size_t coord = i % hdim;
            hm[i] = spec.bounds.U_lo[coord] +
                    (spec.bounds.U_hi[coord] - spec.bounds.U_lo[coord]) * rng.uniform();
        }
    for (auto& gm : p.g) {
        for (auto& w : gm.w_y) w = spec.bounds.L * (rng.uniform() - 0.5);
        for (auto& w : gm.w_feat) w = spec.bounds.L * (rng.uniform() - 0.5);
        for (auto& b : gm.bias) b = spec.bounds.Mprime * (2.0 * rng.uniform() - 1.0);
    }
    project_admissible(spec, p);
    return p;
}

}  // namespace

OptResult minimize_cost(const SystemSpec& spec, const CostEvaluator& evaluator,
                        const ControlParams& init, int budget, std::uint64_t seed) {
    if (budget < 1) throw ValidationError("minimize_cost: budget must be >= 1");

    OptResult result;
    result.best = init;
    project_admissible(spec, result.best);

    int evals = 0;
    auto evaluate = [&](const ControlParams& p) {
        CostBreakdown c = evaluator(p);
        ++evals;
        return c;
    };

    result.cost = evaluate(result.best);
    double best_total = result.cost.total;
    result.trace.push_back({evals, best_total, best_total});

    Rng restart_rng = make_stream(seed, 0, 0, streams::kOptimizer);
    double step = 1.0;  // multiplier on per-coordinate scales
    const double step_floor = 1e-3;

    ControlParams current = result.best;
    ParamVector coords = ParamVector::map(spec, current);

    while (evals < budget) {
        bool improved_in_sweep = false;
        for (std::size_t c = 0; c < coords.slots.size() && evals < budget; ++c) {
            bool moved = false;
            for (double sign : {+1.0, -1.0}) {
                if (evals >= budget) break;
                double saved = *coords.slots[c];
                *coords.slots[c] = saved + sign * step * coords.scales[c];
                ControlParams candidate = current;
                project_admissible(spec, candidate);
                *coords.slots[c] = saved;
                CostBreakdown cost = evaluate(candidate);
                if (cost.total < best_total) {
                    best_total = cost.total;
                    result.best = candidate;
                    result.cost = cost;
                    current = candidate;
                    coords = ParamVector::map(spec, current);
                    improved_in_sweep = true;
                    moved = true;
                }
                result.trace.push_back({evals, cost.total, best_total});
                if (moved) break;  // opportunistic: move on from this coordinate
            }
        }
        if (!improved_in_sweep) {
            step *= 0.5;
            if (step < step_floor) {
                current = random_admissible(spec, result.best, restart_rng);
                coords = ParamVector::map(spec, current);
                step = 1.0;
                if (evals < budget) {
                    CostBreakdown cost = evaluate(current);
                    if (cost.total < best_total) {
                        best_total = cost.total;
                        result.best = current;
                        result.cost = cost;
                    }
                    result.trace.push_back({evals, cost.total, best_total});
                }
            }
        }
    }
    return result;
}

GammaReport gamma_experiment(const SystemSpec& base, const GammaOptions& opt) {
    if (opt.N_list.empty()) throw ValidationError("gamma_experiment: empty N list");
    for (std::size_t i = 1; i < opt.N_list.size(); ++i)
        if (opt.N_list[i] <= opt.N_list[i - 1])
            throw ValidationError("gamma_experiment: N list must be increasing");
    if (opt.N_star < opt.N_list.back())
        throw ValidationError("gamma_experiment: N_star must dominate the N list");

    const int n_seeds = static_cast<int>(opt.seeds.size());
    const int n_rows = static_cast<int>(opt.N_list.size());
    ControlParams init = ControlParams::default_init(base, opt.pieces);

    std::vector<double> fstar(n_seeds, 0.0), fzero(n_seeds, 0.0);
    std::vector<std::vector<double>> fn(n_rows, std::vector<double>(n_seeds, 0.0));
    std::vector<std::vector<double>> cross(n_rows, std::vector<double>(n_seeds, 0.0));

    for (int s = 0; s < n_seeds; ++s) {
        const std::uint64_t seed = opt.seeds[s];
        const std::uint64_t star_seed = stream_key(seed, 0, 0, streams::kOptimizer) >> 1;

        auto star_eval = [&](const ControlParams& p) {
            return eval_cost_mean_field(base, p, opt.N_star, opt.replicas, star_seed,
                                        opt.threads);
        };
        OptResult star = minimize_cost(base, star_eval, init, opt.budget, seed);
        fstar[s] = star.cost.total;

        ControlParams zero = init;  // h = 0 projected: the unactuated control
        fzero[s] = star_eval(zero).total;

        for (int i = 0; i < n_rows; ++i) {
            SystemSpec spec_n = base;
            spec_n.N = opt.N_list[i];
            const std::uint64_t crn_seed =
                stream_key(seed, static_cast<std::uint64_t>(opt.N_list[i]), 0,
                           streams::kOptimizer) >>
                1;
            auto eval_n = [&](const ControlParams& p) {
                return eval_cost_finite(spec_n, p, opt.replicas, crn_seed, opt.threads);
            };
            OptResult res = minimize_cost(spec_n, eval_n, init, opt.budget, seed);
            fn[i][s] = res.cost.total;
            cross[i][s] = star_eval(res.best).total;
        }
    }

    auto mean_se = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        m /= v.size();
        double var = 0.0;
        for (double x : v) var += (x - m) * (x - m);
        double se = v.size() > 1 ? std::sqrt(var / (v.size() * (v.size() - 1.0))) : 0.0;
        return std::pair<double, double>(m, se);
    };

    GammaReport report;
    report.N_star = opt.N_star;
    auto [fsm, fss] = mean_se(fstar);
    report.fstar_min = fsm;
    report.fstar_se = fss;
    report.fstar_zero_control = mean_se(fzero).first;
    for (int i = 0; i < n_rows; ++i) {
        std::vector<double> gaps(n_seeds);
        for (int s = 0; s < n_seeds; ++s) gaps[s] = std::abs(fn[i][s] - fstar[s]);
        GammaRow row;
        row.N = opt.N_list[i];
        auto [m, se] = mean_se(fn[i]);
        row.min_fn = m;
        row.se = se;
        auto [gm, gse] = mean_se(gaps);
        row.gap_to_fstar = gm;
        row.gap_se = gse;
        auto [cm, cse] = mean_se(cross[i]);
        row.cross_eval = cm;
        row.cross_se = cse;
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace herdlab
