#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "herdlab/model.hpp"

namespace herdlab {

// Shape function g_m: clipped affine map from (herder positions, measure
// features) to R^ell. Inputs are coordinate-clipped, the weight rows carry an
// L1 cap enforcing the Lipschitz bound, and the output is clipped at M'.
// Controls read the mean and second-moment features only; those cost O(n)
// per step, which keeps optimizer evaluations linear in the ensemble size.
inline int control_feature_count(int d) { return 2 * d; }

struct GShape {
    std::vector<double> w_y;     // ell x (d*M), row-major
    std::vector<double> w_feat;  // ell x control_feature_count(d)
    std::vector<double> bias;    // ell
};

// Separated control u_m(t, y, nu) = h_m(t) g_m(y, nu): a piecewise-constant
// time profile h_m with `pieces` left-closed pieces, each a d x ell matrix in
// the U box, and a shape g_m as above.
struct ControlParams {
    int pieces = 1;
    int ell = 1;
    std::vector<std::vector<double>> h;  // [M], each pieces * (d*ell), row-major d x ell
    std::vector<GShape> g;               // [M]

    // h = 0 (projected into the U box), g = clipped constant ones.
    static ControlParams default_init(const SystemSpec& spec, int pieces);

    bool uses_features() const;
    // The d x ell block for herder m on the piece containing t, flattened.
    std::vector<double> h_at(const SystemSpec& spec, int m, double t) const;
};

// Clips every h piece into the U box, caps each g weight row's L1 norm at L
// (slightly conservatively, so a second projection is a bit-exact no-op) and
// clips g biases at M'.
void project_admissible(const SystemSpec& spec, ControlParams& params);
bool is_admissible(const SystemSpec& spec, const ControlParams& params);

std::vector<double> eval_g(const SystemSpec& spec, const GShape& g, HerdersRef y,
                           const FeatureVector& feat);

// u_m = h_m(piece containing t) * g_m(Y, features), one vector per herder.
std::vector<Vec> instantiate_control(const SystemSpec& spec, const ControlParams& params,
                                     double t, HerdersRef y, const FeatureVector& feat);

struct CostBreakdown {
    double running = 0.0;
    double transient = 0.0;
    double endpoint = 0.0;
    double total = 0.0;  // always running + transient + endpoint
    double running_se = 0.0;
    double transient_se = 0.0;
    double endpoint_se = 0.0;
    double total_se = 0.0;
    int replicas = 0;
};

// Monte Carlo value of F_N: left-endpoint quadrature of Psi_rho and Psi_tau
// along simulate_finite trajectories plus Psi_eps at T, averaged over
// replicas. Replicas that blow up are excluded; >10% failures is an error.
CostBreakdown eval_cost_finite(const SystemSpec& spec, const ControlParams& params, int replicas,
                               std::uint64_t seed, int threads = 1);

// Same quadrature over the mean-field proxy flow (N_ref-particle ensemble per
// common-noise replica). With sigma_c == 0 a single replica already carries
// the degenerate outer expectation.
CostBreakdown eval_cost_mean_field(const SystemSpec& spec, const ControlParams& params, int N_ref,
                                   int replicas, std::uint64_t seed, int threads = 1);

using CostEvaluator = std::function<CostBreakdown(const ControlParams&)>;

struct OptTracePoint {
    int eval_id = 0;
    double total = 0.0;
    double best_so_far = 0.0;
};

struct OptResult {
    ControlParams best;
    CostBreakdown cost;
    std::vector<OptTracePoint> trace;
};

// Projected compass search with shrinking steps and seeded random restarts.
// The evaluator must use a fixed seed per candidate (common random numbers),
// which makes the best-so-far trace deterministic and monotone.
OptResult minimize_cost(const SystemSpec& spec, const CostEvaluator& evaluator,
                        const ControlParams& init, int budget, std::uint64_t seed);

struct GammaRow {
    int N = 0;
    double min_fn = 0.0;
    double se = 0.0;
    double gap_to_fstar = 0.0;
    double gap_se = 0.0;
    double cross_eval = 0.0;  // minimizer of F_N evaluated under the mean-field cost
    double cross_se = 0.0;
};

struct GammaReport {
    std::vector<GammaRow> rows;
    int N_star = 0;
    double fstar_min = 0.0;
    double fstar_se = 0.0;
    double fstar_zero_control = 0.0;  // mean-field cost of the unactuated run
};

struct GammaOptions {
    std::vector<int> N_list;
    int N_star = 2000;
    int budget = 300;
    int replicas = 4;                   // CRN replicas inside each evaluation
    std::vector<std::uint64_t> seeds = {1};  // independent optimization seeds
    int threads = 1;
    int pieces = 4;
};

// Minimizes every F_N and the mean-field stand-in F (N_star proxy), then
// reports the minima sequence, the gaps to min F and the cross-evaluation of
// each finite minimizer under the mean-field cost.
GammaReport gamma_experiment(const SystemSpec& base, const GammaOptions& opt);

}  // namespace herdlab
