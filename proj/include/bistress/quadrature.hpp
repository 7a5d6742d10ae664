#pragma once

#include <functional>

#include "bistress/manifold.hpp"
#include "bistress/parallel.hpp"

namespace bistress {

// Scalar field given by plain point evaluation (the integrand seeds its own
// jets internally when it needs derivatives).
using ScalarPointFn = std::function<double(std::span<const double>)>;

// Tensor-product composite Gauss rule over the integration box of a compact
// chart. `resolution` counts cells per axis; each cell carries a 2-point
// Gauss-Legendre rule per axis, so the rule has order 4.
struct QuadratureMesh {
    ManifoldPtr manifold;
    std::vector<Point> nodes;
    std::vector<double> weights;  // rule weights only; v_g enters at integration time
    int resolution = 0;

    std::size_t size() const { return nodes.size(); }
};

QuadratureMesh build_mesh(const ManifoldPtr& man, int resolution_cells_per_axis);

// Default cells-per-axis by chart dimension.
int default_resolution(int dim);

// Sum of w_i * f(p_i) * sqrt(det g(p_i)).
double integrate(const ScalarPointFn& f, const QuadratureMesh& mesh,
                 Exec exec = Exec::parallel);

// Same rule with the volume factor taken from an overriding metric
// (used when integrating against a deformed metric g_t).
double integrate_with_metric(const ScalarPointFn& f, const QuadratureMesh& mesh,
                             const MetricFn& metric, Exec exec = Exec::parallel);

}  // namespace bistress
