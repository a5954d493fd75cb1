#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace herdlab {

// Points live in R^d with d in {1,2,3}. The scalar norm used throughout is
// the max-coordinate norm |x| := max_i |x_i|.
class Vec {
public:
    Vec() = default;
    explicit Vec(int dim) : dim_(dim) {}
    Vec(std::initializer_list<double> xs) : dim_(static_cast<int>(xs.size())) {
        int i = 0;
        for (double x : xs) c_[i++] = x;
    }

    static Vec zero(int dim) { return Vec(dim); }

    int dim() const { return dim_; }
    double& operator[](int i) { return c_[i]; }
    double operator[](int i) const { return c_[i]; }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
        return *this;
    }
    Vec& operator*=(double s) {
        for (int i = 0; i < dim_; ++i) c_[i] *= s;
        return *this;
    }

    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(double s, Vec a) { return a *= s; }
    friend Vec operator*(Vec a, double s) { return a *= s; }

    double max_norm() const {
        double m = 0.0;
        for (int i = 0; i < dim_; ++i) m = std::max(m, std::abs(c_[i]));
        return m;
    }
    double norm2_sq() const {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) s += c_[i] * c_[i];
        return s;
    }
    bool finite() const {
        for (int i = 0; i < dim_; ++i)
            if (!std::isfinite(c_[i])) return false;
        return true;
    }

private:
    std::array<double, 3> c_{0.0, 0.0, 0.0};
    int dim_ = 0;
};

inline double max_norm_diff(const Vec& a, const Vec& b) { return (a - b).max_norm(); }

// Square d x d matrix, row-major.
class Mat {
public:
    Mat() = default;
    explicit Mat(int dim) : dim_(dim) {}

    static Mat identity(int dim) {
        Mat m(dim);
        for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }
    static Mat zero(int dim) { return Mat(dim); }
    static Mat scaled_identity(int dim, double s) {
        Mat m(dim);
        for (int i = 0; i < dim; ++i) m(i, i) = s;
        return m;
    }

    int dim() const { return dim_; }
    double& operator()(int i, int j) { return a_[i * dim_ + j]; }
    double operator()(int i, int j) const { return a_[i * dim_ + j]; }

    Vec apply(const Vec& x) const {
        Vec y(dim_);
        for (int i = 0; i < dim_; ++i) {
            double s = 0.0;
            for (int j = 0; j < dim_; ++j) s += (*this)(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }

    // this * this^T
    Mat gram() const {
        Mat g(dim_);
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) {
                double s = 0.0;
                for (int k = 0; k < dim_; ++k) s += (*this)(i, k) * (*this)(j, k);
                g(i, j) = s;
            }
        return g;
    }

    Mat& operator+=(const Mat& o) {
        for (int i = 0; i < dim_ * dim_; ++i) a_[i] += o.a_[i];
        return *this;
    }
    friend Mat operator+(Mat a, const Mat& b) { return a += b; }
    Mat& operator*=(double s) {
        for (int i = 0; i < dim_ * dim_; ++i) a_[i] *= s;
        return *this;
    }

    double max_abs() const {
        double m = 0.0;
        for (int i = 0; i < dim_ * dim_; ++i) m = std::max(m, std::abs(a_[i]));
        return m;
    }
    bool finite() const {
        for (int i = 0; i < dim_ * dim_; ++i)
            if (!std::isfinite(a_[i])) return false;
        return true;
    }
    bool is_zero() const {
        for (int i = 0; i < dim_ * dim_; ++i)
            if (a_[i] != 0.0) return false;
        return true;
    }

private:
    std::array<double, 9> a_{};
    int dim_ = 0;
};

inline double clip(double x, double r) { return std::max(-r, std::min(r, x)); }

// Non-owning view of n points in R^d stored contiguously (point-major).
struct CloudRef {
    const double* data = nullptr;
    int n = 0;
    int d = 0;

    Vec point(int i) const {
        Vec p(d);
        for (int j = 0; j < d; ++j) p[j] = data[static_cast<std::size_t>(i) * d + j];
        return p;
    }
    Vec mean() const {
        Vec m(d);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j) m[j] += data[static_cast<std::size_t>(i) * d + j];
        if (n > 0) m *= 1.0 / n;
        return m;
    }
};

}  // namespace herdlab
