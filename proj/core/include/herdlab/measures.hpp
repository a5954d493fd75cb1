#pragma once

#include <vector>

#include "herdlab/vec.hpp"

namespace herdlab {

// Equally weighted point cloud: mu = (1/n) sum_i delta_{x_i}.
class EmpiricalMeasure {
public:
    EmpiricalMeasure() = default;
    EmpiricalMeasure(std::vector<double> flat, int d);
    static EmpiricalMeasure from_points(const std::vector<Vec>& pts);
    static EmpiricalMeasure dirac(const Vec& x);

    int size() const { return n_; }
    int dim() const { return d_; }
    Vec point(int i) const { return ref().point(i); }
    CloudRef ref() const { return CloudRef{data_.data(), n_, d_}; }
    const std::vector<double>& flat() const { return data_; }

private:
    std::vector<double> data_;
    int n_ = 0;
    int d_ = 0;
};

// Exact W_q on the line by sorted pairing; requires d = 1 and equal sizes.
double wasserstein_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double q);

// Exact W_q between equal-size clouds in d <= 3 by optimal assignment with
// pair cost |x - y|^q in the max-coordinate norm. O(n^3) worst case.
double wasserstein_assignment(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double q,
                              int size_cap = 4096);
double wasserstein_assignment(CloudRef mu, CloudRef nu, double q, int size_cap = 4096);

// ((1/n) sum_k |x_k|^q)^(1/q); bounded above by max_k |x_k|.
double moment_p(const EmpiricalMeasure& mu, double q);
double moment_p(CloudRef mu, double q);

// Index-paired transport cost: an upper bound for W_q when the labels of the
// two clouds correspond to coupled particles.
double coupled_distance_bound(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double q);
double coupled_distance_bound(CloudRef mu, CloudRef nu, double q);

// Fixed finite summary of a measure used wherever coefficients take a
// nu-argument: clipped coordinate means, clipped second moments and one
// clipped pairwise-kernel average. Every entry is 1-Lipschitz w.r.t. W_1.
struct FeatureVector {
    std::vector<double> v;
    double clip_radius = 0.0;

    int size() const { return static_cast<int>(v.size()); }
    double operator[](int i) const { return v[i]; }
};

inline int feature_count(int d) { return 2 * d + 1; }

FeatureVector features(const EmpiricalMeasure& mu, double clip_radius);
// with_pairwise=false skips the O(n^2) entry (left at 0); only valid when no
// consumer reads it.
FeatureVector features(CloudRef cloud, double clip_radius, bool with_pairwise = true);

// Exhaustive minimum over all n! assignments; test oracle for small n.
double wasserstein_bruteforce(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double q);

}  // namespace herdlab
