#include "herdlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "herdlab/errors.hpp"
#include "herdlab/rng.hpp"

namespace herdlab {

// ---------------------------------------------------------------------------
// TabulatedField

TabulatedField::TabulatedField(Vec lo, Vec hi, std::vector<int> shape,
                               std::vector<double> values, int value_dim)
    : lo_(lo), hi_(hi), shape_(std::move(shape)), values_(std::move(values)),
      dim_(lo.dim()), value_dim_(value_dim) {
    if (dim_ < 1 || dim_ > 3) throw DimensionError("TabulatedField: d must be in {1,2,3}");
    if (static_cast<int>(shape_.size()) != dim_)
        throw ParseError("TabulatedField: shape size != d");
    std::size_t nodes = 1;
    for (int s : shape_) {
        if (s < 2) throw ParseError("TabulatedField: each axis needs >= 2 nodes");
        nodes *= static_cast<std::size_t>(s);
    }
    for (int j = 0; j < dim_; ++j)
        if (!(lo_[j] < hi_[j])) throw ParseError("TabulatedField: lo must be < hi per axis");
    if (values_.size() != nodes * static_cast<std::size_t>(value_dim_))
        throw ParseError("TabulatedField: values size does not match shape");
    for (double v : values_)
        if (!std::isfinite(v)) throw ValidationError("TabulatedField: non-finite table value");
}

double TabulatedField::node(int axis, int idx) const {
    return lo_[axis] + (hi_[axis] - lo_[axis]) * idx / (shape_[axis] - 1);
}

Vec TabulatedField::eval(const Vec& x) const {
    int base_idx[3] = {0, 0, 0};
    double frac[3] = {0.0, 0.0, 0.0};
    for (int j = 0; j < dim_; ++j) {
        double c = std::min(hi_[j], std::max(lo_[j], x[j]));
        double t = (c - lo_[j]) / (hi_[j] - lo_[j]) * (shape_[j] - 1);
        int i = std::min(shape_[j] - 2, static_cast<int>(t));
        base_idx[j] = i;
        frac[j] = t - i;
    }
    Vec out(value_dim_);
    int corners = 1 << dim_;
    for (int c = 0; c < corners; ++c) {
        double w = 1.0;
        std::size_t flat = 0;
        for (int j = 0; j < dim_; ++j) {
            int bit = (c >> j) & 1;
            w *= bit ? frac[j] : (1.0 - frac[j]);
            flat = flat * shape_[j] + static_cast<std::size_t>(base_idx[j] + bit);
        }
        const double* v = &values_[flat * value_dim_];
        for (int k = 0; k < value_dim_; ++k) out[k] += w * v[k];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Kernel

Kernel Kernel::zero(int d) {
    Kernel k;
    k.family_ = Family::Zero;
    k.d_ = d;
    return k;
}

Kernel Kernel::linear(const Mat& a) {
    Kernel k;
    k.family_ = Family::Linear;
    k.d_ = a.dim();
    k.a_ = a;
    return k;
}

Kernel Kernel::clipped_linear(const Mat& a, double clip_radius) {
    Kernel k;
    k.family_ = Family::ClippedLinear;
    k.d_ = a.dim();
    k.a_ = a;
    k.clip_ = clip_radius;
    return k;
}

Kernel Kernel::bounded_radial(int d, double amplitude, double width) {
    Kernel k;
    k.family_ = Family::BoundedRadial;
    k.d_ = d;
    k.amplitude_ = amplitude;
    k.width_ = width;
    return k;
}

Kernel Kernel::tabulated(int d, TabulatedField table) {
    if (table.value_dim() != d) throw DimensionError("tabulated kernel: value_dim != d");
    Kernel k;
    k.family_ = Family::Tabulated;
    k.d_ = d;
    k.table_ = std::move(table);
    return k;
}

Vec Kernel::operator()(const Vec& z) const {
    switch (family_) {
        case Family::Zero:
            return Vec::zero(d_);
        case Family::Linear:
            return a_.apply(z);
        case Family::ClippedLinear: {
            Vec c(d_);
            for (int j = 0; j < d_; ++j) c[j] = clip(z[j], clip_);
            return a_.apply(c);
        }
        case Family::BoundedRadial: {
            double s = std::exp(-z.norm2_sq() / (2.0 * width_ * width_));
            return (amplitude_ * s) * z;
        }
        case Family::Tabulated:
            return table_.eval(z);
    }
    return Vec::zero(d_);
}

KernelConvolver::KernelConvolver(const Kernel& k, CloudRef cloud) : k_(&k), cloud_(cloud) {
    if (k.family() == Kernel::Family::Linear) mean_ = cloud.mean();
}

Vec KernelConvolver::operator()(const Vec& x) const {
    switch (k_->family()) {
        case Kernel::Family::Zero:
            return Vec::zero(k_->dim());
        case Kernel::Family::Linear:
            return k_->matrix().apply(x - mean_);
        default: {
            Vec acc(k_->dim());
            for (int i = 0; i < cloud_.n; ++i) acc += (*k_)(x - cloud_.point(i));
            acc *= 1.0 / cloud_.n;
            return acc;
        }
    }
}

// ---------------------------------------------------------------------------
// NoiseCoefficient

NoiseCoefficient NoiseCoefficient::zero(int d) {
    NoiseCoefficient n;
    n.family_ = Family::Zero;
    n.d_ = d;
    n.mat_ = Mat::zero(d);
    return n;
}

NoiseCoefficient NoiseCoefficient::constant(const Mat& m) {
    NoiseCoefficient n;
    n.family_ = Family::Constant;
    n.d_ = m.dim();
    n.mat_ = m;
    return n;
}

NoiseCoefficient NoiseCoefficient::isotropic_affine(int d, double base, double coef_t,
                                                    double coef_x, double coef_y,
                                                    std::vector<double> coef_feat,
                                                    double clip_radius) {
    NoiseCoefficient n;
    n.family_ = Family::IsotropicAffine;
    n.d_ = d;
    n.base_ = base;
    n.coef_t_ = coef_t;
    n.coef_x_ = coef_x;
    n.coef_y_ = coef_y;
    n.coef_feat_ = std::move(coef_feat);
    n.clip_ = clip_radius;
    return n;
}

NoiseCoefficient NoiseCoefficient::tabulated_isotropic(int d, TabulatedField table) {
    if (table.value_dim() != 1)
        throw DimensionError("tabulated_isotropic noise: table must be scalar-valued");
    NoiseCoefficient n;
    n.family_ = Family::TabulatedIsotropic;
    n.d_ = d;
    n.table_ = std::move(table);
    return n;
}

Mat NoiseCoefficient::eval(double t, HerdersRef y, const Vec& x,
                           const FeatureVector& feat) const {
    switch (family_) {
        case Family::Zero:
            return Mat::zero(d_);
        case Family::Constant:
            return mat_;
        case Family::IsotropicAffine: {
            double s = base_ + coef_t_ * t + coef_x_ * clip(x.max_norm(), clip_) +
                       coef_y_ * clip(y.max_norm(), clip_);
            for (std::size_t j = 0; j < coef_feat_.size() && j < static_cast<std::size_t>(feat.size()); ++j)
                s += coef_feat_[j] * feat[static_cast<int>(j)];
            return Mat::scaled_identity(d_, s);
        }
        case Family::TabulatedIsotropic:
            return Mat::scaled_identity(d_, table_.eval(x)[0]);
    }
    return Mat::zero(d_);
}

bool NoiseCoefficient::is_zero() const {
    if (family_ == Family::Zero) return true;
    if (family_ == Family::Constant) return mat_.is_zero();
    return false;
}

bool NoiseCoefficient::uses_features() const {
    if (family_ != Family::IsotropicAffine) return false;
    for (double c : coef_feat_)
        if (c != 0.0) return true;
    return false;
}

// ---------------------------------------------------------------------------
// InitialLaw

InitialLaw InitialLaw::gaussian(Vec mean, Vec stddev) {
    InitialLaw l;
    l.family_ = Family::Gaussian;
    l.d_ = mean.dim();
    l.a_ = mean;
    l.b_ = stddev;
    return l;
}

InitialLaw InitialLaw::uniform(Vec lo, Vec hi) {
    InitialLaw l;
    l.family_ = Family::Uniform;
    l.d_ = lo.dim();
    l.a_ = lo;
    l.b_ = hi;
    return l;
}

InitialLaw InitialLaw::point_mixture(std::vector<Vec> points, std::vector<double> weights) {
    if (points.empty() || points.size() != weights.size())
        throw ParseError("point_mixture: points/weights mismatch");
    InitialLaw l;
    l.family_ = Family::PointMixture;
    l.d_ = points[0].dim();
    l.points_ = std::move(points);
    l.weights_ = weights;
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw ParseError("point_mixture: negative weight");
        total += w;
    }
    if (total <= 0.0) throw ParseError("point_mixture: weights sum to zero");
    double acc = 0.0;
    for (double w : weights) {
        acc += w / total;
        l.cumulative_.push_back(acc);
    }
    l.cumulative_.back() = 1.0;
    return l;
}

Vec InitialLaw::sample(Rng& rng) const {
    switch (family_) {
        case Family::Gaussian: {
            Vec x(d_);
            for (int j = 0; j < d_; ++j) x[j] = a_[j] + b_[j] * rng.normal();
            return x;
        }
        case Family::Uniform: {
            Vec x(d_);
            for (int j = 0; j < d_; ++j) x[j] = a_[j] + (b_[j] - a_[j]) * rng.uniform();
            return x;
        }
        case Family::PointMixture: {
            double u = rng.uniform();
            for (std::size_t i = 0; i < cumulative_.size(); ++i)
                if (u <= cumulative_[i]) return points_[i];
            return points_.back();
        }
    }
    return Vec::zero(d_);
}

double InitialLaw::scale() const {
    double s = 0.0;
    switch (family_) {
        case Family::Gaussian:
            for (int j = 0; j < d_; ++j) s = std::max(s, std::abs(a_[j]) + 3.0 * b_[j]);
            break;
        case Family::Uniform:
            s = std::max(a_.max_norm(), b_.max_norm());
            break;
        case Family::PointMixture:
            for (const auto& p : points_) s = std::max(s, p.max_norm());
            break;
    }
    return std::max(s, 0.5);
}

// ---------------------------------------------------------------------------
// Costs

RunningCost RunningCost::zero() { return RunningCost{}; }

RunningCost RunningCost::quadratic(double weight_h, double weight_g) {
    RunningCost c;
    c.family_ = Family::Quadratic;
    c.weight_h_ = weight_h;
    c.weight_g_ = weight_g;
    return c;
}

RunningCost RunningCost::h_target(std::vector<double> target, double weight) {
    RunningCost c;
    c.family_ = Family::HTarget;
    c.target_ = std::move(target);
    c.weight_h_ = weight;
    return c;
}

double RunningCost::eval(const std::vector<double>& h_flat,
                         const std::vector<double>& g_value) const {
    switch (family_) {
        case Family::Zero:
            return 0.0;
        case Family::Quadratic: {
            double sh = 0.0, sg = 0.0;
            for (double v : h_flat) sh += v * v;
            for (double v : g_value) sg += v * v;
            return weight_h_ * sh + weight_g_ * sg;
        }
        case Family::HTarget: {
            double s = 0.0;
            for (std::size_t i = 0; i < h_flat.size(); ++i) {
                double t = i < target_.size() ? target_[i] : 0.0;
                double diff = h_flat[i] - t;
                s += diff * diff;
            }
            return weight_h_ * s;
        }
    }
    return 0.0;
}

StateCost StateCost::zero() { return StateCost{}; }

StateCost StateCost::constant(double value) {
    StateCost c;
    c.family_ = Family::Constant;
    c.value_ = value;
    return c;
}

StateCost StateCost::mean_to_target(Vec target, double weight) {
    StateCost c;
    c.family_ = Family::MeanToTarget;
    c.target_ = target;
    c.weight_ = weight;
    return c;
}

StateCost StateCost::second_moment(double weight) {
    StateCost c;
    c.family_ = Family::SecondMoment;
    c.weight_ = weight;
    return c;
}

StateCost StateCost::herder_to_target(std::vector<Vec> targets, double weight,
                                      double clip_radius) {
    StateCost c;
    c.family_ = Family::HerderToTarget;
    c.herder_targets_ = std::move(targets);
    c.weight_ = weight;
    c.clip_ = clip_radius;
    return c;
}

double StateCost::eval(double /*t*/, HerdersRef y, const FeatureVector& feat) const {
    switch (family_) {
        case Family::Zero:
            return 0.0;
        case Family::Constant:
            return value_;
        case Family::MeanToTarget: {
            double s = 0.0;
            for (int j = 0; j < target_.dim(); ++j) {
                double diff = feat[j] - target_[j];
                s += diff * diff;
            }
            return weight_ * s;
        }
        case Family::SecondMoment: {
            double s = 0.0;
            int d = feat.size() > 0 ? (feat.size() - 1) / 2 : 0;
            for (int j = 0; j < d; ++j) s += feat[d + j];
            return weight_ * s;
        }
        case Family::HerderToTarget: {
            double s = 0.0;
            for (int m = 0; m < y.m; ++m) {
                const Vec target = m < static_cast<int>(herder_targets_.size())
                                       ? herder_targets_[m]
                                       : Vec::zero(y.d);
                Vec ym = y.point(m);
                for (int j = 0; j < y.d; ++j) {
                    double diff = clip(ym[j], clip_) - target[j];
                    s += diff * diff;
                }
            }
            return weight_ * s / std::max(1, y.m);
        }
    }
    return 0.0;
}

bool StateCost::uses_features() const {
    return family_ == Family::MeanToTarget || family_ == Family::SecondMoment;
}

// ---------------------------------------------------------------------------
// SystemSpec

void SystemSpec::check_basic() const {
    if (d < 1 || d > 3) throw ValidationError("spec: d must be in {1,2,3}");
    if (N < 1) throw ValidationError("spec: N must be >= 1");
    if (M < 1) throw ValidationError("spec: M must be >= 1");
    if (!(p >= 2.0)) throw ValidationError("spec: p must be >= 2");
    if (!(T > 0.0)) throw ValidationError("spec: T must be > 0");
    if (!(dt > 0.0 && dt <= T)) throw ValidationError("spec: need 0 < dt <= T");
    if (static_cast<int>(herder_start.size()) != M)
        throw ValidationError("spec: herder_start must list M positions");
    for (const auto& yv : herder_start)
        if (yv.dim() != d || !yv.finite())
            throw ValidationError("spec: herder_start entries must be finite R^d points");
    if (bounds.L <= 0.0) throw ValidationError("spec: bounds.L must be > 0");
    if (bounds.Mprime <= 0.0) throw ValidationError("spec: bounds.Mprime must be > 0");
    if (bounds.ell < 1) throw ValidationError("spec: bounds.ell must be >= 1");
    std::size_t box = static_cast<std::size_t>(d) * bounds.ell;
    if (bounds.U_lo.size() != box || bounds.U_hi.size() != box)
        throw ValidationError("spec: U box must have d*ell per-coordinate bounds");
    for (std::size_t i = 0; i < box; ++i)
        if (!(bounds.U_lo[i] < bounds.U_hi[i]) || !std::isfinite(bounds.U_lo[i]) ||
            !std::isfinite(bounds.U_hi[i]))
            throw ValidationError("spec: U box bounds must be finite and strictly ordered");
}

int SystemSpec::steps() const {
    int k = static_cast<int>(std::ceil(T / dt - 1e-9));
    return std::max(k, 1);
}

double SystemSpec::feature_clip_radius() const {
    if (feature_clip > 0.0) return feature_clip;
    return 10.0 * initial.scale();
}

bool SystemSpec::needs_features_in_dynamics(bool control_uses_features) const {
    return noises.sigma_i.uses_features() || noises.sigma_c.uses_features() ||
           control_uses_features;
}

// ---------------------------------------------------------------------------
// Drift / diffusion assembly

namespace {
void check_dims(const SystemSpec& spec, const Vec& x, HerdersRef y, const EmpiricalMeasure& mu) {
    if (x.dim() != spec.d || mu.dim() != spec.d || y.d != spec.d || y.m != spec.M)
        throw DimensionError("drift evaluation: dimension mismatch with spec");
}
}  // namespace

Vec eval_drift_herd(const SystemSpec& spec, const Vec& x, HerdersRef y,
                    const KernelConvolver& h1_conv) {
    Vec v = h1_conv(x);
    if (!spec.kernels.K1.is_zero()) {
        Vec acc(spec.d);
        for (int m = 0; m < y.m; ++m) acc += spec.kernels.K1(y.point(m) - x);
        v += (1.0 / y.m) * acc;
    }
    return v;
}

Vec eval_drift_herd(const SystemSpec& spec, const Vec& x, HerdersRef y,
                    const EmpiricalMeasure& mu) {
    check_dims(spec, x, y, mu);
    KernelConvolver conv(spec.kernels.H1, mu.ref());
    return eval_drift_herd(spec, x, y, conv);
}

Vec eval_drift_herder(const SystemSpec& spec, int m, HerdersRef y,
                      const KernelConvolver& k2_conv, const Vec& u_m) {
    if (m < 0 || m >= y.m) throw IndexError("eval_drift_herder: herder index out of range");
    Vec ym = y.point(m);
    Vec v = k2_conv(ym);
    if (!spec.kernels.H2.is_zero()) {
        Vec acc(spec.d);
        for (int j = 0; j < y.m; ++j) acc += spec.kernels.H2(ym - y.point(j));
        v += (1.0 / y.m) * acc;
    }
    v += u_m;
    return v;
}

Vec eval_drift_herder(const SystemSpec& spec, int m, HerdersRef y, const EmpiricalMeasure& mu,
                      const Vec& u_m) {
    check_dims(spec, u_m, y, mu);
    KernelConvolver conv(spec.kernels.K2, mu.ref());
    return eval_drift_herder(spec, m, y, conv, u_m);
}

std::pair<Mat, Mat> eval_diffusions(const SystemSpec& spec, double t, HerdersRef y, const Vec& x,
                                    const EmpiricalMeasure& mu) {
    if (t < 0.0 || t > spec.T + 1e-12)
        throw ValidationError("eval_diffusions: t outside [0, T]");
    check_dims(spec, x, y, mu);
    bool need_pairwise =
        spec.noises.sigma_i.uses_features() || spec.noises.sigma_c.uses_features();
    FeatureVector feat = features(mu.ref(), spec.feature_clip_radius(), need_pairwise);
    Mat si = spec.noises.sigma_i.eval(t, y, x, feat);
    Mat sc = spec.noises.sigma_c.eval(t, y, x, feat);
    if (!si.finite() || !sc.finite())
        throw CoefficientError("eval_diffusions: non-finite coefficient value");
    return {si, sc};
}

// ---------------------------------------------------------------------------
// Assumption validation

namespace {

constexpr std::uint64_t kValidationSeed = 0x5eed;

std::string describe_point(const Vec& x) {
    std::ostringstream os;
    os << "(";
    for (int j = 0; j < x.dim(); ++j) os << (j ? "," : "") << x[j];
    os << ")";
    return os.str();
}

// Grid + random points in [-r, r]^d.
std::vector<Vec> sample_points(int d, double r, int grid_size, int n_random, Rng& rng) {
    std::vector<Vec> pts;
    if (d == 1) {
        for (int i = 0; i < grid_size; ++i) {
            Vec x(1);
            x[0] = -r + 2.0 * r * i / (grid_size - 1);
            pts.push_back(x);
        }
    } else {
        int per_axis = std::min(grid_size, d == 2 ? 9 : 5);
        int idx[3] = {0, 0, 0};
        int total = 1;
        for (int j = 0; j < d; ++j) total *= per_axis;
        for (int c = 0; c < total; ++c) {
            int rem = c;
            Vec x(d);
            for (int j = 0; j < d; ++j) {
                idx[j] = rem % per_axis;
                rem /= per_axis;
                x[j] = -r + 2.0 * r * idx[j] / (per_axis - 1);
            }
            pts.push_back(x);
        }
    }
    for (int i = 0; i < n_random; ++i) {
        Vec x(d);
        for (int j = 0; j < d; ++j) x[j] = -r + 2.0 * r * rng.uniform();
        pts.push_back(x);
    }
    return pts;
}

CoefficientCheck check_kernel(const std::string& name, const Kernel& k,
                              const std::vector<Vec>& pts, double bound) {
    CoefficientCheck c;
    c.name = name;
    c.bound = bound;
    double worst = 0.0;
    std::string worst_detail;
    std::vector<Vec> values;
    values.reserve(pts.size());
    for (const auto& x : pts) {
        Vec v = k(x);
        if (!v.finite())
            throw ValidationError("validate_assumptions: kernel " + name +
                                  " non-finite at " + describe_point(x));
        values.push_back(v);
    }
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            double dx = max_norm_diff(pts[i], pts[j]);
            if (dx < 1e-12) continue;
            double quotient = max_norm_diff(values[i], values[j]) / dx;
            if (quotient > worst) {
                worst = quotient;
                worst_detail = describe_point(pts[i]) + " vs " + describe_point(pts[j]);
            }
        }
    c.estimate = worst;
    c.pass = worst <= bound * (1.0 + 1e-9);
    c.detail = worst_detail;
    return c;
}

struct NoiseSample {
    double t;
    std::vector<double> y_flat;
    Vec x;
    EmpiricalMeasure cloud;
    FeatureVector feat;
};

CoefficientCheck check_noise(const std::string& name, const NoiseCoefficient& sigma,
                             const std::vector<NoiseSample>& samples, int m, int d,
                             double bound) {
    CoefficientCheck c;
    c.name = name;
    c.bound = bound;
    double worst = 0.0;
    std::vector<Mat> values;
    values.reserve(samples.size());
    for (const auto& s : samples) {
        HerdersRef y{s.y_flat.data(), m, d};
        Mat v = sigma.eval(s.t, y, s.x, s.feat);
        if (!v.finite())
            throw ValidationError("validate_assumptions: noise " + name + " non-finite at " +
                                  describe_point(s.x));
        values.push_back(v);
    }
    // Lipschitz in (Y, x, nu) at equal times.
    for (std::size_t i = 0; i < samples.size(); ++i)
        for (std::size_t j = i + 1; j < samples.size(); ++j) {
            if (samples[i].t != samples[j].t) continue;
            double dy = 0.0;
            for (std::size_t k = 0; k < samples[i].y_flat.size(); ++k)
                dy = std::max(dy, std::abs(samples[i].y_flat[k] - samples[j].y_flat[k]));
            double dx = max_norm_diff(samples[i].x, samples[j].x);
            double dw = wasserstein_assignment(samples[i].cloud, samples[j].cloud, 1.0);
            double denom = dy + dx + dw;
            if (denom < 1e-10) continue;
            double num = 0.0;
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b)
                    num = std::max(num, std::abs(values[i](a, b) - values[j](a, b)));
            worst = std::max(worst, num / denom);
        }
    c.estimate = worst;
    c.pass = worst <= bound * (1.0 + 1e-9);
    return c;
}

}  // namespace

bool ValidationReport::pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    for (const auto& c : checks)
        os << c.name << ": estimate=" << c.estimate << " bound=" << c.bound
           << (c.pass ? " pass" : " FAIL") << "\n";
    return os.str();
}

ValidationReport validate_assumptions(const SystemSpec& spec, int grid_size) {
    spec.check_basic();
    if (grid_size < 2) throw ValidationError("validate_assumptions: grid_size must be >= 2");

    ValidationReport report;
    const double r = spec.feature_clip_radius();
    Rng rng = make_stream(kValidationSeed, 0, 0, streams::kValidation);
    std::vector<Vec> pts = sample_points(spec.d, r, grid_size, 64, rng);

    report.checks.push_back(check_kernel("H1", spec.kernels.H1, pts, spec.bounds.L));
    report.checks.push_back(check_kernel("H2", spec.kernels.H2, pts, spec.bounds.L));
    report.checks.push_back(check_kernel("K1", spec.kernels.K1, pts, spec.bounds.L));
    report.checks.push_back(check_kernel("K2", spec.kernels.K2, pts, spec.bounds.L));

    // Noise samples: a few times, random herder blocks, small clouds.
    std::vector<NoiseSample> samples;
    const int n_noise_samples = 24;
    const int cloud_size = 8;
    for (int i = 0; i < n_noise_samples; ++i) {
        NoiseSample s;
        s.t = spec.T * (i % 3) / 2.0;
        s.y_flat.resize(static_cast<std::size_t>(spec.M) * spec.d);
        for (auto& v : s.y_flat) v = -r + 2.0 * r * rng.uniform();
        s.x = Vec(spec.d);
        for (int j = 0; j < spec.d; ++j) s.x[j] = -r + 2.0 * r * rng.uniform();
        std::vector<double> flat(static_cast<std::size_t>(cloud_size) * spec.d);
        for (auto& v : flat) v = -0.5 * r + r * rng.uniform();
        s.cloud = EmpiricalMeasure(std::move(flat), spec.d);
        s.feat = features(s.cloud.ref(), r, true);
        samples.push_back(std::move(s));
    }
    report.checks.push_back(
        check_noise("sigma_i", spec.noises.sigma_i, samples, spec.M, spec.d, spec.bounds.L));
    report.checks.push_back(
        check_noise("sigma_c", spec.noises.sigma_c, samples, spec.M, spec.d, spec.bounds.L));

    // Psi_rho: midpoint convexity in the first argument over the U box.
    {
        CoefficientCheck c;
        c.name = "psi_rho_convexity";
        c.bound = 1e-9;
        double worst = 0.0;
        std::size_t hdim = spec.bounds.U_lo.size();
        std::vector<double> g_val(static_cast<std::size_t>(spec.bounds.ell), 0.0);
        for (int trial = 0; trial < 64; ++trial) {
            std::vector<double> ha(hdim), hb(hdim), hm(hdim);
            for (std::size_t i = 0; i < hdim; ++i) {
                ha[i] = spec.bounds.U_lo[i] +
                        (spec.bounds.U_hi[i] - spec.bounds.U_lo[i]) * rng.uniform();
                hb[i] = spec.bounds.U_lo[i] +
                        (spec.bounds.U_hi[i] - spec.bounds.U_lo[i]) * rng.uniform();
                hm[i] = 0.5 * (ha[i] + hb[i]);
            }
            for (auto& gv : g_val) gv = -spec.bounds.Mprime + 2.0 * spec.bounds.Mprime * rng.uniform();
            double fa = spec.costs.psi_rho.eval(ha, g_val);
            double fb = spec.costs.psi_rho.eval(hb, g_val);
            double fm = spec.costs.psi_rho.eval(hm, g_val);
            if (!std::isfinite(fa) || !std::isfinite(fb) || !std::isfinite(fm))
                throw ValidationError("validate_assumptions: psi_rho non-finite on U box");
            worst = std::max(worst, fm - 0.5 * (fa + fb));
        }
        c.estimate = worst;
        c.pass = worst <= c.bound;
        report.checks.push_back(c);
    }

    // Psi_tau, Psi_eps: finite uniform-continuity modulus on sampled pairs.
    for (const auto* named : {&spec.costs.psi_tau, &spec.costs.psi_eps}) {
        CoefficientCheck c;
        c.name = (named == &spec.costs.psi_tau) ? "psi_tau_modulus" : "psi_eps_modulus";
        c.bound = std::numeric_limits<double>::infinity();
        double worst = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            HerdersRef yi{samples[i].y_flat.data(), spec.M, spec.d};
            double fi = named->eval(samples[i].t, yi, samples[i].feat);
            if (!std::isfinite(fi))
                throw ValidationError("validate_assumptions: " + c.name + " non-finite");
            for (std::size_t j = i + 1; j < samples.size(); ++j) {
                HerdersRef yj{samples[j].y_flat.data(), spec.M, spec.d};
                double fj = named->eval(samples[j].t, yj, samples[j].feat);
                double dy = 0.0;
                for (std::size_t k = 0; k < samples[i].y_flat.size(); ++k)
                    dy = std::max(dy, std::abs(samples[i].y_flat[k] - samples[j].y_flat[k]));
                double dfeat = 0.0;
                for (int k = 0; k < samples[i].feat.size(); ++k)
                    dfeat = std::max(dfeat, std::abs(samples[i].feat[k] - samples[j].feat[k]));
                double denom = dy + dfeat;
                if (denom < 1e-10) continue;
                worst = std::max(worst, std::abs(fi - fj) / denom);
            }
        }
        c.estimate = worst;
        c.pass = std::isfinite(worst);
        report.checks.push_back(c);
    }

    return report;
}

}  // namespace herdlab
