#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "herdlab/measures.hpp"
#include "herdlab/vec.hpp"

namespace herdlab {

class Rng;

// Regular-grid d-linear interpolation table for user-supplied coefficients,
// d <= 3. Queries are clamped to the grid box, so the interpolant stays
// bounded and keeps its grid Lipschitz constant outside the box.
class TabulatedField {
public:
    TabulatedField() = default;
    TabulatedField(Vec lo, Vec hi, std::vector<int> shape, std::vector<double> values,
                   int value_dim);

    Vec eval(const Vec& x) const;  // value_dim components
    int value_dim() const { return value_dim_; }
    bool empty() const { return values_.empty(); }
    const Vec& lo() const { return lo_; }
    const Vec& hi() const { return hi_; }
    const std::vector<int>& shape() const { return shape_; }
    const std::vector<double>& values() const { return values_; }

private:
    double node(int axis, int idx) const;
    Vec lo_, hi_;
    std::vector<int> shape_;
    std::vector<double> values_;  // row-major over grid, value_dim components per node
    int dim_ = 0;
    int value_dim_ = 0;
};

// Interaction kernel: a vector field R^d -> R^d.
class Kernel {
public:
    enum class Family { Zero, Linear, ClippedLinear, BoundedRadial, Tabulated };

    static Kernel zero(int d);
    static Kernel linear(const Mat& a);
    // A * clip_box(z, clip): each coordinate of z clipped to [-clip, clip].
    static Kernel clipped_linear(const Mat& a, double clip_radius);
    // amplitude * z * exp(-|z|_2^2 / (2 width^2)): smooth, bounded, Lipschitz.
    static Kernel bounded_radial(int d, double amplitude, double width);
    static Kernel tabulated(int d, TabulatedField table);

    Vec operator()(const Vec& z) const;
    Family family() const { return family_; }
    int dim() const { return d_; }
    bool is_zero() const { return family_ == Family::Zero; }
    const Mat& matrix() const { return a_; }
    double clip_radius() const { return clip_; }
    double amplitude() const { return amplitude_; }
    double width() const { return width_; }
    const TabulatedField& table() const { return table_; }

private:
    Family family_ = Family::Zero;
    int d_ = 1;
    Mat a_;
    double clip_ = 0.0;
    double amplitude_ = 0.0;
    double width_ = 1.0;
    TabulatedField table_;
};

// Per-step convolution helper: (k * mu)(x) = (1/n) sum_i k(x - p_i).
// For the linear family this is A (x - mean(mu)), so the mean is taken once
// at construction and each query is O(1); other families sum directly.
class KernelConvolver {
public:
    KernelConvolver(const Kernel& k, CloudRef cloud);
    Vec operator()(const Vec& x) const;

private:
    const Kernel* k_;
    CloudRef cloud_;
    Vec mean_;
};

// Non-owning view of the M herder positions (flat, point-major).
struct HerdersRef {
    const double* data = nullptr;
    int m = 0;
    int d = 0;

    Vec point(int i) const {
        Vec p(d);
        for (int j = 0; j < d; ++j) p[j] = data[static_cast<std::size_t>(i) * d + j];
        return p;
    }
    double max_norm() const {
        double v = 0.0;
        for (int i = 0; i < m * d; ++i) v = std::max(v, std::abs(data[i]));
        return v;
    }
};

// Diffusion coefficient sigma(t, Y, x, nu) -> d x d matrix; the nu-dependence
// goes through the feature vector.
class NoiseCoefficient {
public:
    enum class Family { Zero, Constant, IsotropicAffine, TabulatedIsotropic };

    static NoiseCoefficient zero(int d);
    static NoiseCoefficient constant(const Mat& m);
    // (base + coef_t*t + coef_x*clip(|x|, clip) + coef_y*clip(|Y|, clip)
    //  + <coef_feat, features>) * Id
    static NoiseCoefficient isotropic_affine(int d, double base, double coef_t, double coef_x,
                                             double coef_y, std::vector<double> coef_feat,
                                             double clip_radius);
    static NoiseCoefficient tabulated_isotropic(int d, TabulatedField table);

    Mat eval(double t, HerdersRef y, const Vec& x, const FeatureVector& feat) const;
    bool is_zero() const;
    bool uses_features() const;
    Family family() const { return family_; }
    const Mat& matrix() const { return mat_; }
    double base() const { return base_; }
    double coef_t() const { return coef_t_; }
    double coef_x() const { return coef_x_; }
    double coef_y() const { return coef_y_; }
    const std::vector<double>& coef_feat() const { return coef_feat_; }
    double clip_radius() const { return clip_; }
    const TabulatedField& table() const { return table_; }

private:
    Family family_ = Family::Zero;
    int d_ = 1;
    Mat mat_;
    double base_ = 0.0, coef_t_ = 0.0, coef_x_ = 0.0, coef_y_ = 0.0;
    std::vector<double> coef_feat_;
    double clip_ = 1e9;
    TabulatedField table_;
};

struct KernelSet {
    Kernel H1, H2, K1, K2;
};

struct NoiseSet {
    NoiseCoefficient sigma_i, sigma_c;
};

struct AssumptionBounds {
    double L = 1.0;       // shared Lipschitz bound for kernels, noises, g
    double Mprime = 1.0;  // sup bound for control shapes g
    int ell = 1;          // control output dimension
    std::vector<double> U_lo, U_hi;  // box in R^{d*ell}, row-major d x ell
};

// Sampler for the herd initial law plus the fixed herder start positions.
class InitialLaw {
public:
    enum class Family { Gaussian, Uniform, PointMixture };

    static InitialLaw gaussian(Vec mean, Vec stddev);
    static InitialLaw uniform(Vec lo, Vec hi);
    static InitialLaw point_mixture(std::vector<Vec> points, std::vector<double> weights);

    Vec sample(Rng& rng) const;
    double scale() const;  // magnitude estimate driving the feature clip radius
    Family family() const { return family_; }
    const Vec& mean() const { return a_; }
    const Vec& stddev() const { return b_; }
    const Vec& lo() const { return a_; }
    const Vec& hi() const { return b_; }
    const std::vector<Vec>& points() const { return points_; }
    const std::vector<double>& weights() const { return weights_; }
    int dim() const { return d_; }

private:
    Family family_ = Family::Gaussian;
    int d_ = 1;
    Vec a_, b_;
    std::vector<Vec> points_;
    std::vector<double> weights_;  // cumulative at construction
    std::vector<double> cumulative_;
};

// Running / transient / endpoint cost coefficients.
class RunningCost {  // Psi_rho(h, g)
public:
    enum class Family { Zero, Quadratic, HTarget };
    static RunningCost zero();
    static RunningCost quadratic(double weight_h, double weight_g);
    static RunningCost h_target(std::vector<double> target, double weight);  // w |h - h*|_F^2

    double eval(const std::vector<double>& h_flat, const std::vector<double>& g_value) const;
    Family family() const { return family_; }
    double weight_h() const { return weight_h_; }
    double weight_g() const { return weight_g_; }
    const std::vector<double>& target() const { return target_; }

private:
    Family family_ = Family::Zero;
    double weight_h_ = 0.0, weight_g_ = 0.0;
    std::vector<double> target_;
};

class StateCost {  // Psi_tau(t, Y, nu) and Psi_eps(Y, nu)
public:
    enum class Family { Zero, Constant, MeanToTarget, SecondMoment, HerderToTarget };
    static StateCost zero();
    static StateCost constant(double value);
    // w * |clipped mean features - target|_2^2
    static StateCost mean_to_target(Vec target, double weight);
    // w * sum_j clipped-second-moment features
    static StateCost second_moment(double weight);
    // w * |Y - target|_2^2 with coordinates clipped before differencing
    static StateCost herder_to_target(std::vector<Vec> targets, double weight, double clip_radius);

    double eval(double t, HerdersRef y, const FeatureVector& feat) const;
    bool uses_features() const;
    Family family() const { return family_; }
    double value() const { return value_; }
    double weight() const { return weight_; }
    const Vec& target() const { return target_; }
    const std::vector<Vec>& herder_targets() const { return herder_targets_; }
    double clip_radius() const { return clip_; }

private:
    Family family_ = Family::Zero;
    double value_ = 0.0;
    double weight_ = 0.0;
    Vec target_;
    std::vector<Vec> herder_targets_;
    double clip_ = 1e9;
};

struct CostSpec {
    RunningCost psi_rho;
    StateCost psi_tau;
    StateCost psi_eps;
};

// Full problem instance. Immutable after construction; every operation that
// takes a SystemSpec is a pure function of it.
struct SystemSpec {
    int d = 1;
    int N = 1;
    int M = 1;
    double T = 1.0;
    double p = 2.0;
    double dt = 0.1;
    KernelSet kernels;
    NoiseSet noises;
    InitialLaw initial = InitialLaw::gaussian(Vec{0.0}, Vec{1.0});
    std::vector<Vec> herder_start;
    AssumptionBounds bounds;
    CostSpec costs;
    double feature_clip = 0.0;  // 0 -> derived as 10 x initial scale

    void check_basic() const;  // d, N, M, T, p, dt invariants
    int steps() const;         // ceil(T/dt)
    double step_size() const { return T / steps(); }
    double feature_clip_radius() const;
    bool needs_features_in_dynamics(bool control_uses_features) const;
};

struct CoefficientCheck {
    std::string name;
    double estimate = 0.0;  // max sampled difference quotient (or violation)
    double bound = 0.0;
    bool pass = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<CoefficientCheck> checks;
    bool pass() const;
    std::string summary() const;
};

// Samples dense grids plus random pairs and reports, per coefficient, the
// largest difference quotient against bounds.L (kernels, noises) together
// with the cost-function checks of the control assumptions. Deterministic:
// the sampling stream is keyed by a fixed validation constant.
ValidationReport validate_assumptions(const SystemSpec& spec, int grid_size);

// V(t, mu, x) = H1*mu(x) + (1/M) sum_m K1(Y_m - x)
Vec eval_drift_herd(const SystemSpec& spec, const Vec& x, HerdersRef y,
                    const EmpiricalMeasure& mu);
Vec eval_drift_herd(const SystemSpec& spec, const Vec& x, HerdersRef y,
                    const KernelConvolver& h1_conv);

// K2*mu(Y_m) + (1/M) sum_j H2(Y_m - Y_j) + u_m ; the j = m self term is kept.
Vec eval_drift_herder(const SystemSpec& spec, int m, HerdersRef y, const EmpiricalMeasure& mu,
                      const Vec& u_m);
Vec eval_drift_herder(const SystemSpec& spec, int m, HerdersRef y,
                      const KernelConvolver& k2_conv, const Vec& u_m);

// (sigma_i, sigma_c) at (t, Y, x, features(mu)).
std::pair<Mat, Mat> eval_diffusions(const SystemSpec& spec, double t, HerdersRef y, const Vec& x,
                                    const EmpiricalMeasure& mu);

}  // namespace herdlab
