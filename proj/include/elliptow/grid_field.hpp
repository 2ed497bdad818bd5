#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "elliptow/averaging.hpp"
#include "elliptow/geometry.hpp"
#include "elliptow/vec.hpp"

namespace elliptow {

/// Bounded continuous data function F on R^N.
class DataFunction {
public:
    virtual ~DataFunction() = default;
    virtual double value(const Vec& x) const = 0;
    virtual std::string name() const { return "data"; }
};

using DataFnPtr = std::shared_ptr<const DataFunction>;

DataFnPtr make_data_fn(std::string name, PointFn f);

/// Lattice of values over an axis-aligned box with multilinear interpolation
/// and a boundary-data fallback outside the domain. Lattice points outside
/// the domain hold F exactly.
class GridField {
public:
    GridField(const BBox& requested_box, double h, DataFnPtr boundary);

    int dim() const { return dim_; }
    double spacing() const { return h_; }
    const BBox& box() const { return box_; }
    int shape(int axis) const { return shape_[axis]; }
    long size() const { return static_cast<long>(values_.size()); }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }
    double value(long flat) const { return values_[flat]; }
    double& value(long flat) { return values_[flat]; }

    Vec point(long flat) const;
    long flat_index(const Vec& x) const;  // nearest lattice point

    const DataFunction& boundary() const { return *boundary_; }
    const DataFnPtr& boundary_ptr() const { return boundary_; }

    /// Raw multilinear interpolation of the stored lattice values.
    double interpolate(const Vec& x) const;

    /// Field evaluation: F(x) outside the domain, interpolation inside.
    /// Throws if x leaves the inflated box.
    double eval(const Domain& dom, const Vec& x) const;

    /// Solver provenance, set by solve_dpp; used to validate strategy reuse.
    std::optional<double> eps;
    std::optional<Params> params;

private:
    BBox box_;
    double h_ = 0.0;
    int dim_ = 0;
    std::array<int, Vec::kMaxDim> shape_{};
    std::array<long, Vec::kMaxDim> stride_{};
    std::vector<double> values_;
    DataFnPtr boundary_;
};

}  // namespace elliptow
