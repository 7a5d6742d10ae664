#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bistress/jet.hpp"
#include "bistress/linalg.hpp"
#include "bistress/rng.hpp"

namespace bistress {

// Axis-aligned chart domain.
struct Box {
    std::vector<double> lo, hi;

    int dim() const { return static_cast<int>(lo.size()); }

    bool contains(std::span<const double> p, double slack = 0.0) const {
        if (static_cast<int>(p.size()) != dim()) return false;
        for (int i = 0; i < dim(); ++i)
            if (p[i] < lo[i] - slack || p[i] > hi[i] + slack) return false;
        return true;
    }

    // Uniform point in the box shrunk by `margin` (fraction of the width on
    // each side). Keeps samples away from chart seams and angular poles.
    Point sample(SplitMix64& rng, double margin = 0.1) const {
        Point p(static_cast<std::size_t>(dim()));
        for (int i = 0; i < dim(); ++i) {
            double w = hi[i] - lo[i];
            p[i] = rng.uniform(lo[i] + margin * w, hi[i] - margin * w);
        }
        return p;
    }

    // Halton point with the same margin convention; index-deterministic.
    Point halton_point(std::uint64_t index, double margin = 0.1) const {
        Point p(static_cast<std::size_t>(dim()));
        for (int i = 0; i < dim(); ++i) {
            double w = hi[i] - lo[i];
            double t = halton(index + 1, halton_base(i));
            p[i] = lo[i] + margin * w + t * w * (1.0 - 2.0 * margin);
        }
        return p;
    }
};

// Describes how a compact manifold is integrated: the chart box covers the
// manifold up to a measure-zero seam set, with a tensor-product composite
// Gauss rule over it.
struct IntegrationSpec {
    Box box;
    int default_resolution = 64;  // cells per axis
};

// A coordinate chart with jet-evaluable metric components. Metric functions
// are always called with the chart coordinates seeded as jet variables at
// the evaluation point (see ScalarFn in jet.hpp).
struct ChartedManifold {
    std::string name;
    int dim = 0;
    Box domain;
    MetricFn metric;
    bool flat = false;  // metric has identically vanishing Christoffels in this chart
    std::optional<IntegrationSpec> integration;
    // Restrictions of globally smooth scalar functions to the chart
    // (e.g. ambient coordinates of an embedded sphere). Used to build
    // variation tensors that are smooth across chart seams.
    std::vector<ScalarFn> smooth_generators;

    JetMat metric_at(std::span<const JetScalar> vars) const {
        JetMat g(dim);
        metric(vars, g);
        return g;
    }

    // Metric value matrix at a plain point.
    Mat metric_values(std::span<const double> p) const;
};

using ManifoldPtr = std::shared_ptr<const ChartedManifold>;

enum class MapKind { generic, riemannian_immersion, submersion, identity_conformal };

// A map between charted manifolds, given by jet-evaluable coordinate
// components. Same seeded-variable convention as the metric.
struct SmoothMap {
    std::string name;
    ManifoldPtr source;
    ManifoldPtr target;
    MapFn components;
    MapKind kind = MapKind::generic;

    std::vector<JetScalar> components_at(std::span<const JetScalar> vars) const {
        std::vector<JetScalar> y;
        components(vars, y);
        return y;
    }

    Point image_of(std::span<const double> p) const;
};

// Helpers shared by the catalog and the variation engine.

// Euclidean space of the given dimension on a box chart.
ManifoldPtr make_euclidean(int dim, Box box, std::string name = "");

// Same chart/domain as `base` with the metric replaced.
ManifoldPtr with_metric(const ManifoldPtr& base, MetricFn metric, bool flat,
                        std::string name);

Mat metric_values_of(const ChartedManifold& man, std::span<const double> p);

}  // namespace bistress
