#include "herdlab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "herdlab/errors.hpp"

namespace herdlab {

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> flat, int d)
    : data_(std::move(flat)), d_(d) {
    if (d < 1 || d > 3) throw DimensionError("EmpiricalMeasure: d must be in {1,2,3}");
    if (data_.empty() || data_.size() % d != 0)
        throw SizeError("EmpiricalMeasure: flat size not a multiple of d");
    n_ = static_cast<int>(data_.size()) / d;
    for (double x : data_)
        if (!std::isfinite(x)) throw ValidationError("EmpiricalMeasure: non-finite coordinate");
}

EmpiricalMeasure EmpiricalMeasure::from_points(const std::vector<Vec>& pts) {
    if (pts.empty()) throw SizeError("EmpiricalMeasure: empty point list");
    int d = pts[0].dim();
    std::vector<double> flat;
    flat.reserve(pts.size() * d);
    for (const auto& p : pts) {
        if (p.dim() != d) throw DimensionError("EmpiricalMeasure: mixed dimensions");
        for (int j = 0; j < d; ++j) flat.push_back(p[j]);
    }
    return EmpiricalMeasure(std::move(flat), d);
}

EmpiricalMeasure EmpiricalMeasure::dirac(const Vec& x) { return from_points({x}); }

namespace {

double pair_cost(CloudRef a, int i, CloudRef b, int j, double q) {
    double m = 0.0;
    for (int k = 0; k < a.d; ++k) {
        double diff = std::abs(a.data[static_cast<std::size_t>(i) * a.d + k] -
                               b.data[static_cast<std::size_t>(j) * b.d + k]);
        m = std::max(m, diff);
    }
    if (q == 1.0) return m;
    if (q == 2.0) return m * m;
    return std::pow(m, q);
}

void check_sizes(CloudRef mu, CloudRef nu) {
    if (mu.d != nu.d) throw DimensionError("wasserstein: dimension mismatch");
    if (mu.n != nu.n) throw SizeError("wasserstein: clouds must have equal point counts");
}

}  // namespace

double wasserstein_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double q) {
    if (mu.dim() != 1 || nu.dim() != 1) throw DimensionError("wasserstein_1d: requires d = 1");
    if (mu.size() != nu.size()) throw SizeError("wasserstein_1d: unequal cloud sizes");
    if (q < 1.0) throw UnsupportedError("wasserstein_1d: q must be >= 1");
    std::vector<double> a = mu.flat();
    std::vector<double> b = nu.flat();
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        double diff = std::abs(a[k] - b[k]);
        acc += (q == 1.0) ? diff : ((q == 2.0) ? diff * diff : std::pow(diff, q));
    }
    acc /= static_cast<double>(a.size());
    return (q == 1.0) ? acc : std::pow(acc, 1.0 / q);
}

// Jonker-Volgenant style shortest augmenting path over an implicit cost
// matrix; costs are evaluated on the fly so no n^2 buffer is kept.
double wasserstein_assignment(CloudRef mu, CloudRef nu, double q, int size_cap) {
    check_sizes(mu, nu);
    if (q < 1.0) throw UnsupportedError("wasserstein_assignment: q must be >= 1");
    int n = mu.n;
    if (n > size_cap)
        throw CapacityError("wasserstein_assignment: cloud size exceeds cap; subsample first");

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);

    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = pair_cost(mu, i0 - 1, nu, j - 1, q) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }

    double total = 0.0;
    for (int j = 1; j <= n; ++j)
        if (p[j]) total += pair_cost(mu, p[j] - 1, nu, j - 1, q);
    total /= static_cast<double>(n);
    return (q == 1.0) ? total : std::pow(total, 1.0 / q);
}

double wasserstein_assignment(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double q,
                              int size_cap) {
    return wasserstein_assignment(mu.ref(), nu.ref(), q, size_cap);
}

double moment_p(CloudRef mu, double q) {
    if (q < 1.0) throw UnsupportedError("moment_p: q must be >= 1");
    double acc = 0.0;
    for (int i = 0; i < mu.n; ++i) {
        double m = mu.point(i).max_norm();
        if (!std::isfinite(m)) throw ValidationError("moment_p: non-finite input point");
        acc += (q == 1.0) ? m : ((q == 2.0) ? m * m : std::pow(m, q));
    }
    acc /= static_cast<double>(mu.n);
    return (q == 1.0) ? acc : std::pow(acc, 1.0 / q);
}

double moment_p(const EmpiricalMeasure& mu, double q) { return moment_p(mu.ref(), q); }

double coupled_distance_bound(CloudRef mu, CloudRef nu, double q) {
    check_sizes(mu, nu);
    double acc = 0.0;
    for (int i = 0; i < mu.n; ++i) {
        double diff = pair_cost(mu, i, nu, i, q);
        acc += diff;
    }
    acc /= static_cast<double>(mu.n);
    return (q == 1.0) ? acc : std::pow(acc, 1.0 / q);
}

double coupled_distance_bound(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double q) {
    return coupled_distance_bound(mu.ref(), nu.ref(), q);
}

FeatureVector features(CloudRef cloud, double clip_radius, bool with_pairwise) {
    const int d = cloud.d;
    const double r = clip_radius;
    FeatureVector f;
    f.clip_radius = r;
    f.v.assign(feature_count(d), 0.0);
    const double invn = 1.0 / static_cast<double>(cloud.n);

    for (int i = 0; i < cloud.n; ++i) {
        for (int j = 0; j < d; ++j) {
            double c = clip(cloud.data[static_cast<std::size_t>(i) * d + j], r);
            f.v[j] += c;
            f.v[d + j] += c * c / (2.0 * r);
        }
    }
    for (int j = 0; j < 2 * d; ++j) f.v[j] *= invn;

    if (with_pairwise) {
        // (1/n^2) sum_{i,j} (r/4) exp(-|x_i-x_j|_2^2 / (2 r^2)); the 1/4 keeps
        // the two-variable Lipschitz constant below 1 in W_1.
        double acc = 0.0;
        for (int i = 0; i < cloud.n; ++i) {
            Vec xi = cloud.point(i);
            for (int j = 0; j < cloud.n; ++j) {
                double s = (xi - cloud.point(j)).norm2_sq();
                acc += std::exp(-s / (2.0 * r * r));
            }
        }
        f.v[2 * d] = 0.25 * r * acc * invn * invn;
    }
    return f;
}

FeatureVector features(const EmpiricalMeasure& mu, double clip_radius) {
    return features(mu.ref(), clip_radius, true);
}

double wasserstein_bruteforce(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double q) {
    check_sizes(mu.ref(), nu.ref());
    int n = mu.size();
    if (n > 8) throw CapacityError("wasserstein_bruteforce: n too large for n! search");
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (int i = 0; i < n; ++i) total += pair_cost(mu.ref(), i, nu.ref(), perm[i], q);
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    best /= static_cast<double>(n);
    return (q == 1.0) ? best : std::pow(best, 1.0 / q);
}

}  // namespace herdlab
