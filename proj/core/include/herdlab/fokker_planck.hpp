#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "herdlab/control.hpp"
#include "herdlab/dynamics.hpp"
#include "herdlab/model.hpp"

namespace herdlab {

// Smooth test function with analytically coded derivatives. True compact
// support is approximated by fast decay; the plateau radius (when set) marks
// the region where the function is exactly constant 1.
struct TestFunction {
    std::string id;
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;
    std::function<Mat(const Vec&)> hessian;
    double lipschitz = 1.0;       // bound w.r.t. the max-coordinate norm
    double plateau_radius = 0.0;  // > 0 only for the flat-plateau bump
};

TestFunction gaussian_bump(int d, const Vec& center, double width);
TestFunction smooth_square_function(int d, double a);  // a^2 (1 - exp(-|x|^2/a^2))
TestFunction tanh_coordinate(int d, int coordinate, double width);
TestFunction plateau_bump(int d, double inner_radius, double outer_radius);

struct TestFunctionBank {
    std::vector<TestFunction> functions;
    // Two Gaussian bumps, the smoothed square, a tanh coordinate clip and a
    // flat plateau, all sized by `scale`.
    static TestFunctionBank standard(int d, double scale);
};

struct WeakResidualSeries {
    std::string phi_id;
    std::vector<double> t;
    std::vector<double> residual;  // residual(0) = 0 by construction
};

struct WeakResidualReport {
    std::vector<WeakResidualSeries> series;
    double max_abs = 0.0;
    double dt = 0.0;
    int ensemble = 0;
};

// Residual of the weak stochastic Fokker-Planck identity along the simulated
// flow: <mu(t),phi> - <mu(0),phi> - int <mu, grad phi . V + 1/2 tr(H sigma*)>
// - sum <mu, grad phi . sigma_c dW_c>, with left-endpoint quadrature. The
// common increments default to the flow's own; they are required whenever
// sigma_c is not identically zero.
WeakResidualReport weak_residual(const MeanFieldFlow& flow, const SystemSpec& spec,
                                 const ControlParams& control, const TestFunctionBank& bank,
                                 const NoisePaths* common = nullptr);

struct FeynmanKacEstimate {
    double value = 0.0;
    double se = 0.0;
    int replicas = 0;
};

// Monte Carlo solution u(t,x) = E[phi(xi_T)] of the backward Kolmogorov
// problem with the measure flow frozen to `flow`; pure idiosyncratic case
// only (sigma_c must vanish).
FeynmanKacEstimate feynman_kac_u(const SystemSpec& spec, const MeanFieldFlow& flow,
                                 const TestFunction& phi, const Vec& x, double t,
                                 int inner_replicas, std::uint64_t seed);

struct DualityRow {
    std::string phi_id;
    double lhs = 0.0;  // <mu(T), phi>
    double rhs = 0.0;  // <mu_0, u(0,.)>
    double gap = 0.0;
    double se = 0.0;  // combined standard error of the gap
};

struct DualityReport {
    std::vector<DualityRow> rows;
};

// Checks <mu_0, u(0,.)> = <mu(T), phi> for every bank function by averaging
// feynman_kac_u over the initial cloud.
DualityReport duality_check(const SystemSpec& spec, const ControlParams& control,
                            const TestFunctionBank& bank, int N_ref, int inner_replicas,
                            std::uint64_t seed, int threads = 1);

}  // namespace herdlab
