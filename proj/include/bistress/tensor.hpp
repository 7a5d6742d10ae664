#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "bistress/errors.hpp"
#include "bistress/linalg.hpp"

namespace bistress {

enum class Variance { up, down };

// Which bundle a tensor slot lives in. Slots tied to the map's target pull
// back along the map, so "target" covers the pullback bundle as well.
enum class Space { source, target };

struct Slot {
    Variance variance;
    Space space;
};

// Pointwise tensor components with explicit valence. Dense row-major with
// one extent per slot.
class TensorValue {
  public:
    TensorValue() = default;
    TensorValue(std::vector<Slot> slots, std::vector<int> dims, Point base_point)
        : slots_(std::move(slots)), dims_(std::move(dims)), base_point_(std::move(base_point)) {
        if (slots_.size() != dims_.size())
            throw DimensionError("TensorValue: slot/extent count mismatch");
        std::size_t n = 1;
        for (int d : dims_) n *= static_cast<std::size_t>(d);
        data_.assign(n, 0.0);
    }

    const std::vector<Slot>& slots() const { return slots_; }
    const std::vector<int>& dims() const { return dims_; }
    const Point& base_point() const { return base_point_; }
    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }
    int rank() const { return static_cast<int>(slots_.size()); }

    double& at(std::initializer_list<int> idx) { return data_[offset(idx)]; }
    double at(std::initializer_list<int> idx) const { return data_[offset(idx)]; }

    // Plain Euclidean norm of the component array. Metric-weighted norms
    // live next to the objects that know the metric.
    double frobenius() const {
        double s = 0.0;
        for (double x : data_) s += x * x;
        return std::sqrt(s);
    }

    double max_abs() const {
        double s = 0.0;
        for (double x : data_) s = std::max(s, std::fabs(x));
        return s;
    }

  private:
    std::size_t offset(std::initializer_list<int> idx) const {
        if (idx.size() != dims_.size())
            throw DimensionError("TensorValue: index rank mismatch");
        std::size_t off = 0;
        auto it = idx.begin();
        for (std::size_t k = 0; k < dims_.size(); ++k, ++it)
            off = off * static_cast<std::size_t>(dims_[k]) + static_cast<std::size_t>(*it);
        return off;
    }

    std::vector<Slot> slots_;
    std::vector<int> dims_;
    Point base_point_;
    std::vector<double> data_;
};

inline TensorValue make_vector(Space space, int dim, Point base) {
    return TensorValue({{Variance::up, space}}, {dim}, std::move(base));
}

inline TensorValue make_one_form(Space space, int dim, Point base) {
    return TensorValue({{Variance::down, space}}, {dim}, std::move(base));
}

inline TensorValue make_2covariant(Space space, int dim, Point base) {
    return TensorValue({{Variance::down, space}, {Variance::down, space}}, {dim, dim},
                       std::move(base));
}

}  // namespace bistress
