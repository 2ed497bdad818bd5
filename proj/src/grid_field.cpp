#include "elliptow/grid_field.hpp"

#include <cmath>

#include "elliptow/error.hpp"

namespace elliptow {

namespace {
class LambdaData final : public DataFunction {
public:
    LambdaData(std::string name, PointFn f) : name_(std::move(name)), f_(std::move(f)) {}
    double value(const Vec& x) const override { return f_(x); }
    std::string name() const override { return name_; }

private:
    std::string name_;
    PointFn f_;
};
}  // namespace

DataFnPtr make_data_fn(std::string name, PointFn f) {
    return std::make_shared<LambdaData>(std::move(name), std::move(f));
}

GridField::GridField(const BBox& requested_box, double h, DataFnPtr boundary)
    : h_(h), dim_(requested_box.dim()), boundary_(std::move(boundary)) {
    if (!(h > 0.0)) throw ParamError("GridField: spacing must be positive");
    if (!boundary_) throw ParamError("GridField: boundary data function required");
    // Snap the box to the lattice with one guard cell per side so every
    // interpolation cell touched by in-box points is fully allocated.
    long total = 1;
    box_.lo = Vec(dim_);
    box_.hi = Vec(dim_);
    for (int i = 0; i < dim_; ++i) {
        double extent = requested_box.hi[i] - requested_box.lo[i];
        int cells = static_cast<int>(std::ceil(extent / h - 1e-12)) + 2;
        box_.lo[i] = requested_box.lo[i] - h;
        box_.hi[i] = box_.lo[i] + cells * h;
        shape_[i] = cells + 1;
        total *= shape_[i];
        if (total > (1L << 31)) throw ParamError("GridField: lattice too large");
    }
    stride_[0] = 1;
    for (int i = 1; i < dim_; ++i) stride_[i] = stride_[i - 1] * shape_[i - 1];
    values_.assign(total, 0.0);
}

Vec GridField::point(long flat) const {
    Vec x(dim_);
    for (int i = 0; i < dim_; ++i) {
        long c = (flat / stride_[i]) % shape_[i];
        x[i] = box_.lo[i] + c * h_;
    }
    return x;
}

long GridField::flat_index(const Vec& x) const {
    long f = 0;
    for (int i = 0; i < dim_; ++i) {
        long c = std::lround((x[i] - box_.lo[i]) / h_);
        c = std::max(0L, std::min(static_cast<long>(shape_[i]) - 1, c));
        f += c * stride_[i];
    }
    return f;
}

double GridField::interpolate(const Vec& x) const {
    long base = 0;
    double frac[Vec::kMaxDim];
    for (int i = 0; i < dim_; ++i) {
        double t = (x[i] - box_.lo[i]) / h_;
        long c = static_cast<long>(std::floor(t));
        c = std::max(0L, std::min(static_cast<long>(shape_[i]) - 2, c));
        frac[i] = std::min(1.0, std::max(0.0, t - c));
        base += c * stride_[i];
    }
    double acc = 0.0;
    int corners = 1 << dim_;
    for (int m = 0; m < corners; ++m) {
        double w = 1.0;
        long off = 0;
        for (int i = 0; i < dim_; ++i) {
            if (m & (1 << i)) {
                w *= frac[i];
                off += stride_[i];
            } else {
                w *= 1.0 - frac[i];
            }
        }
        acc += w * values_[base + off];
    }
    return acc;
}

double GridField::eval(const Domain& dom, const Vec& x) const {
    if (!box_.contains(x, 1e-12 * (1.0 + box_.max_extent())))
        throw Error("GridField::eval: point outside the inflated box");
    if (!dom.contains(x)) return boundary_->value(x);
    return interpolate(x);
}

}  // namespace elliptow
