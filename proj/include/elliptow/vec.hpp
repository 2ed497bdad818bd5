#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace elliptow {

/// Small dense vector in R^N, N <= kMaxDim. Dimension is a runtime value so
/// 2-D and 3-D experiments share one code path.
class Vec {
public:
    static constexpr int kMaxDim = 8;

    Vec() = default;
    explicit Vec(int dim) : n_(check_dim(dim)) {}
    Vec(std::initializer_list<double> xs) : n_(check_dim(static_cast<int>(xs.size()))) {
        int i = 0;
        for (double x : xs) c_[i++] = x;
    }
    static Vec zero(int dim) { return Vec(dim); }
    static Vec unit(int dim, int axis) {
        Vec v(dim);
        v[axis] = 1.0;
        return v;
    }
    static Vec from(const std::vector<double>& xs) {
        Vec v(static_cast<int>(xs.size()));
        for (int i = 0; i < v.n_; ++i) v.c_[i] = xs[i];
        return v;
    }

    int dim() const { return n_; }
    double operator[](int i) const { return c_[i]; }
    double& operator[](int i) { return c_[i]; }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < n_; ++i) c_[i] += o.c_[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < n_; ++i) c_[i] -= o.c_[i];
        return *this;
    }
    Vec& operator*=(double s) {
        for (int i = 0; i < n_; ++i) c_[i] *= s;
        return *this;
    }
    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(double s, Vec a) { return a *= s; }
    friend Vec operator*(Vec a, double s) { return a *= s; }
    friend Vec operator-(Vec a) {
        for (int i = 0; i < a.n_; ++i) a.c_[i] = -a.c_[i];
        return a;
    }

    friend double dot(const Vec& a, const Vec& b) {
        double s = 0.0;
        for (int i = 0; i < a.n_; ++i) s += a.c_[i] * b.c_[i];
        return s;
    }
    double norm2() const { return dot(*this, *this); }
    double norm() const { return std::sqrt(norm2()); }

    /// Unit vector in the same direction; the zero vector stays zero.
    Vec normalized_or_zero(double tol = 0.0) const {
        double n = norm();
        if (n <= tol) return Vec(n_);
        Vec v = *this;
        v *= 1.0 / n;
        return v;
    }

    std::vector<double> to_std() const { return std::vector<double>(c_.begin(), c_.begin() + n_); }
    std::string str() const;

private:
    static int check_dim(int dim) {
        if (dim < 0 || dim > kMaxDim) throw std::invalid_argument("Vec: dimension out of range");
        return dim;
    }
    std::array<double, kMaxDim> c_{};
    int n_ = 0;
};

/// Symmetric N x N matrix stored dense; only used by test-function oracles.
class SymMat {
public:
    SymMat() = default;
    explicit SymMat(int dim) : n_(dim) {}
    int dim() const { return n_; }
    double operator()(int i, int j) const { return m_[i * Vec::kMaxDim + j]; }
    double& operator()(int i, int j) { return m_[i * Vec::kMaxDim + j]; }

    Vec apply(const Vec& x) const {
        Vec y(n_);
        for (int i = 0; i < n_; ++i) {
            double s = 0.0;
            for (int j = 0; j < n_; ++j) s += (*this)(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }
    double trace() const {
        double s = 0.0;
        for (int i = 0; i < n_; ++i) s += (*this)(i, i);
        return s;
    }
    /// <M : d (x) d> for a unit direction d.
    double quad(const Vec& d) const { return dot(apply(d), d); }

private:
    std::array<double, Vec::kMaxDim * Vec::kMaxDim> m_{};
    int n_ = 0;
};

/// Axis-aligned box.
struct BBox {
    Vec lo;
    Vec hi;

    int dim() const { return lo.dim(); }
    bool contains(const Vec& x, double slack = 0.0) const {
        for (int i = 0; i < dim(); ++i)
            if (x[i] < lo[i] - slack || x[i] > hi[i] + slack) return false;
        return true;
    }
    BBox inflated(double margin) const {
        BBox b = *this;
        for (int i = 0; i < dim(); ++i) {
            b.lo[i] -= margin;
            b.hi[i] += margin;
        }
        return b;
    }
    double max_extent() const {
        double m = 0.0;
        for (int i = 0; i < dim(); ++i) m = std::max(m, hi[i] - lo[i]);
        return m;
    }
};

}  // namespace elliptow
