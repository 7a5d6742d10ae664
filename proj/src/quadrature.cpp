#include "bistress/quadrature.hpp"

#include <cmath>

#include "bistress/geometry.hpp"

namespace bistress {

namespace {
// 2-point Gauss-Legendre on [0,1].
constexpr double kGaussOffset = 0.28867513459481287;  // 1/(2*sqrt(3))
const double kGaussPos[2] = {0.5 - kGaussOffset, 0.5 + kGaussOffset};
}  // namespace

int default_resolution(int dim) {
    if (dim <= 2) return 64;
    if (dim == 3) return 24;
    if (dim == 4) return 8;
    return 4;
}

QuadratureMesh build_mesh(const ManifoldPtr& man, int resolution) {
    if (!man->integration)
        throw MeshError("manifold '" + man->name + "' has no integration parametrization");
    if (resolution < 1) throw MeshError("mesh resolution must be positive");

    const Box& box = man->integration->box;
    const int dim = box.dim();
    QuadratureMesh mesh;
    mesh.manifold = man;
    mesh.resolution = resolution;

    std::vector<double> h(static_cast<std::size_t>(dim));
    for (int a = 0; a < dim; ++a) h[a] = (box.hi[a] - box.lo[a]) / resolution;

    const int per_axis = 2 * resolution;
    std::size_t total = 1;
    for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(per_axis);
    mesh.nodes.reserve(total);
    mesh.weights.reserve(total);

    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    Point p(static_cast<std::size_t>(dim));
    for (std::size_t flat = 0; flat < total; ++flat) {
        double w = 1.0;
        std::size_t rem = flat;
        for (int a = dim - 1; a >= 0; --a) {
            int k = static_cast<int>(rem % per_axis);
            rem /= per_axis;
            int cell = k / 2;
            int gp = k % 2;
            p[a] = box.lo[a] + (cell + kGaussPos[gp]) * h[a];
            w *= 0.5 * h[a];  // each Gauss point carries half the cell measure
        }
        mesh.nodes.push_back(p);
        mesh.weights.push_back(w);
    }
    return mesh;
}

double integrate(const ScalarPointFn& f, const QuadratureMesh& mesh, Exec exec) {
    if (mesh.nodes.empty()) throw MeshError("integrate: empty mesh");
    const ChartedManifold& man = *mesh.manifold;
    return map_reduce(
        mesh.size(),
        [&](std::size_t i) {
            const Point& p = mesh.nodes[i];
            MetricJets mj(man, p, 0, false);
            return mesh.weights[i] * f(p) * mj.sqrt_det.value();
        },
        exec);
}

double integrate_with_metric(const ScalarPointFn& f, const QuadratureMesh& mesh,
                             const MetricFn& metric, Exec exec) {
    if (mesh.nodes.empty()) throw MeshError("integrate: empty mesh");
    const int dim = mesh.manifold->dim;
    return map_reduce(
        mesh.size(),
        [&](std::size_t i) {
            const Point& p = mesh.nodes[i];
            MetricJets mj(dim, metric, false, p, 0, false);
            return mesh.weights[i] * f(p) * mj.sqrt_det.value();
        },
        exec);
}

}  // namespace bistress
