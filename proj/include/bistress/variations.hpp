#pragma once

#include <optional>

#include "bistress/fields.hpp"
#include "bistress/quadrature.hpp"
#include "bistress/rng.hpp"
#include "bistress/tensor.hpp"

namespace bistress {

// A symmetric 2-tensor variation direction omega together with the largest
// parameter range on which g + t omega stays positive definite over the
// mesh nodes.
struct MetricVariation {
    MetricFn omega;
    double t_max = 0.0;
};

// Builds the deformed metric g + t omega of a chart.
MetricFn perturbed_metric(const ChartedManifold& man, const MetricFn& omega, double t);

// Certifies a variation direction against the metric over the mesh nodes
// (positive definiteness of g + t omega for |t| <= t_max).
MetricVariation make_variation(const ChartedManifold& man, MetricFn omega,
                               const QuadratureMesh& mesh);

// Homothety direction omega = g.
MetricFn metric_direction(const ChartedManifold& man);

// Random smooth variation direction omega = f g + sym(du x dv) with f, u, v
// drawn from the manifold's globally smooth generator functions. Smoothness
// across chart seams keeps the integration-by-parts identities honest.
MetricFn random_omega(const ChartedManifold& man, SplitMix64& rng, double amplitude = 0.3);

// F(g) = 1/2 int |tau|^2 v_g over the mesh, optionally under a deformed
// source metric.
double bienergy(const SmoothMap& map, const QuadratureMesh& mesh,
                const MetricFn* metric_override = nullptr, Exec exec = Exec::parallel);

// Central finite difference of t -> F(g + t omega) at 0, one Richardson
// extrapolation level by default.
double first_variation_fd(const SmoothMap& map, const MetricVariation& var,
                          const QuadratureMesh& mesh, double h_step = 1e-4,
                          bool richardson = true, Exec exec = Exec::parallel);

// Stress-energy values cached over the mesh nodes, reusable across many
// variation directions.
struct S2NodeCache {
    std::vector<S2Values> nodes;
};
S2NodeCache cache_s2(const SmoothMap& map, const QuadratureMesh& mesh,
                     Exec exec = Exec::parallel);

// -1/2 int <S2, omega> v_g by quadrature.
double first_variation_s2(const S2NodeCache& cache, const MetricFn& omega,
                          const QuadratureMesh& mesh, Exec exec = Exec::parallel);
double first_variation_s2(const SmoothMap& map, const MetricFn& omega,
                          const QuadratureMesh& mesh, Exec exec = Exec::parallel);

// xi = (Div omega)# - 1/2 grad(trace omega).
TensorValue xi_field(const ChartedManifold& man, const MetricFn& omega,
                     std::span<const double> p);

// Pointwise residual of the first-variation integrand identity
//   d/dt |tau_t|^2 = -2 <tau . nabla dphi, omega> - 2 <tau, dphi(xi)>
// with the left side obtained by finite differences in t.
double pointwise_variation_residual(const SmoothMap& map, const MetricFn& omega,
                                    std::span<const double> p, double h_step = 1e-5);

// L2-orthogonal projection of omega against g: omega' = omega - c g with
// c = int <g, omega> v_g / (m vol). The projected direction generates
// volume-preserving variations to first order.
struct IsovolumetricProjection {
    MetricFn omega;
    double c = 0.0;
    double trace_integral_after = 0.0;  // int <g, omega'> v_g, ~0
};
IsovolumetricProjection isovolumetric_project(const ChartedManifold& man,
                                              const MetricFn& omega,
                                              const QuadratureMesh& mesh,
                                              Exec exec = Exec::parallel);

// Best constant lambda with S2 ~ lambda g in L2(v_g), and the L2 residual.
struct LambdaFit {
    double lambda = 0.0;
    double residual_l2 = 0.0;
    double volume = 0.0;
};
LambdaFit lambda_g_residual(const SmoothMap& map, const QuadratureMesh& mesh,
                            Exec exec = Exec::parallel);
LambdaFit lambda_g_residual(const S2NodeCache& cache, const QuadratureMesh& mesh,
                            Exec exec = Exec::parallel);

// One full variation run: both routes to the first variation and their gap.
struct VariationReport {
    double F_at_g = 0.0;
    double dF_fd = 0.0;
    double dF_s2 = 0.0;
    double relative_gap = 0.0;
    std::optional<double> xi_check;
    std::uint64_t seed = 0;
};

VariationReport run_variation(const SmoothMap& map, const MetricVariation& var,
                              const QuadratureMesh& mesh, const S2NodeCache& cache,
                              double h_step = 1e-4, Exec exec = Exec::parallel);

// log F((1+t) g) - log F(g) - (m-4)/2 log(1+t); zero for every map.
double homothety_residual(const SmoothMap& map, const QuadratureMesh& mesh, double t,
                          Exec exec = Exec::parallel);

// Relative mismatch between int trace S2 v_g computed directly and through
// the integrated trace identity (4-m)/2 int |tau|^2 v_g.
double trace_integral_consistency(const SmoothMap& map, const QuadratureMesh& mesh,
                                  Exec exec = Exec::parallel);

}  // namespace bistress
