#pragma once

#include <optional>

#include "bistress/geometry.hpp"
#include "bistress/manifold.hpp"
#include "bistress/tensor.hpp"

namespace bistress {

// One-form field on a chart (same seeded-variable convention as ScalarFn).
using OneFormFn = std::function<void(std::span<const JetScalar>, std::vector<JetScalar>&)>;
// Vector field on a chart.
using VectorFieldFn = OneFormFn;

// Jet-order requirements of the map-level operations, all within the cap 4:
// tau needs two derivatives of the map, nabla tau three, the stress-energy
// tensor of the bienergy as a differentiable field (for its divergence and
// covariant derivative) four.
inline constexpr int kOrderTau = 2;
inline constexpr int kOrderS2 = 3;
inline constexpr int kOrderField = 4;

// Caches every jet needed at one evaluation point of a map: source metric
// jets, map component jets, target metric and target Christoffels pulled
// back through the map (by exact jet composition), first derivatives,
// second fundamental form and tension field.
struct MapJets {
    const SmoothMap* map = nullptr;
    Point p;
    int order = 0;  // jet order carried by the map components
    int m = 0, n = 0;

    MetricJets src;
    std::vector<JetScalar> phi;        // [a], order q
    Point y0;                          // phi(p)
    std::optional<MetricJets> tgt;     // target-side jets at y0 (absent iff target flat)
    JetMat h;                          // h along phi, order q
    Mat h0;                            // h values at y0
    std::vector<JetScalar> ngamma;     // target Christoffels along phi [a][b][s], order q-1
    std::vector<JetScalar> dphi;       // [a][i], order q-1
    std::vector<JetScalar> B;          // nabla dphi [a][i][j], order q-2
    std::vector<JetScalar> tau;        // [a], order q-2

    MapJets(const SmoothMap& map, std::span<const double> p, int order,
            const MetricFn* source_metric_override = nullptr);

    bool target_flat() const { return !tgt.has_value(); }

    const JetScalar& dPhi(int a, int i) const {
        return dphi[static_cast<std::size_t>(a) * m + i];
    }
    const JetScalar& Bj(int a, int i, int j) const {
        return B[(static_cast<std::size_t>(a) * m + i) * m + j];
    }
    const JetScalar& NGamma(int a, int b, int s) const {
        return ngamma[(static_cast<std::size_t>(a) * n + b) * n + s];
    }

    // Pullback covariant derivative of a section of the pulled-back target
    // bundle; sigma is [a] at some order k, result is [a][i] at order k-1.
    std::vector<JetScalar> pullback_derivative(const std::vector<JetScalar>& sigma) const;

    // |sigma|^2 in the target metric, as a jet.
    JetScalar target_norm_sq(const std::vector<JetScalar>& sigma) const;

    // tau . nabla tau machinery shared by several operations.
    struct S2Jets {
        JetMat s2, t1, t2;       // symmetric source 2-tensors, order q-3
        JetScalar tau_sq;        // |tau|^2, order q-3
        JetScalar dphi_nabla_tau;  // <dphi, nabla tau>, order q-3
        std::vector<JetScalar> nabla_tau;  // [a][i], order q-3
    };
    S2Jets s2_jets() const;

    std::vector<double> tau_values() const;
    std::vector<double> tau2_values() const;  // needs order 4

    Mat dphi_values() const;  // n x m
    Mat pullback_metric_values() const;
};

// --- Map-level tensors -----------------------------------------------------

TensorValue tension(const SmoothMap& map, std::span<const double> p);
TensorValue bitension(const SmoothMap& map, std::span<const double> p);

// Stress-energy tensor of the energy: S = 1/2 |dphi|^2 g - phi^* h.
TensorValue stress_energy(const SmoothMap& map, std::span<const double> p);

struct BiStress {
    TensorValue S2;  // symmetric 2-covariant
    TensorValue T1;  // trace part
    TensorValue T2;  // mixed <dphi, nabla tau> part
};

// Stress-energy tensor of the bienergy and its two constituents.
BiStress stress_energy_bienergy(const SmoothMap& map, std::span<const double> p);

// Divergence of a symmetric 2-tensor field on a chart: (Div S)(Y) =
// sum_i (nabla_i S)(X_i, Y) as a one-form.
TensorValue divergence_2tensor(const ChartedManifold& man, const MetricFn& field,
                               std::span<const double> p);

// Covariant derivative (nabla S2)(Z, X, Y); vanishing norm characterizes
// maps with parallel stress-energy tensor.
TensorValue nabla_s2(const SmoothMap& map, std::span<const double> p);

struct ImmersionGeometry {
    TensorValue B;                 // [i][j][a] second fundamental form
    TensorValue H;                 // mean curvature vector
    TensorValue A_H;               // shape operator in direction H, [i][j] = (A_H)^i_j
    TensorValue A_tau;             // shape operator in direction tau
    TensorValue normal_projector;  // [a][b] projector onto the normal bundle
    double pseudo_umbilical_residual = 0.0;  // |A_tau - (|tau|^2/m) I|
    double tau_norm = 0.0;
};

ImmersionGeometry immersion_geometry(const SmoothMap& map, std::span<const double> p);

// |Div S2(Y) + <tau2, dphi(Y)>| for one direction Y.
double divergence_identity_residual(const SmoothMap& map, std::span<const double> p,
                                    std::span<const double> Y);

// Batch form: everything needed to test the divergence identity for many Y
// at one point.
struct DivergenceCheck {
    std::vector<double> div_s2;  // one-form components
    std::vector<double> tau2;
    Mat dphi;  // n x m
    Mat h0;
    double tau2_norm = 0.0;
    double div_s2_norm = 0.0;

    double residual(std::span<const double> Y) const;
    double pairing_lhs(std::span<const double> Y) const;  // Div S2(Y)
    double pairing_rhs(std::span<const double> Y) const;  // -<tau2, dphi(Y)>
};
DivergenceCheck divergence_check(const SmoothMap& map, std::span<const double> p);

// Residual of <theta, Div sigma> - Div(C(theta,sigma)#) + <sym(nabla theta), sigma>.
double contraction_div_identity(const ChartedManifold& man, const OneFormFn& theta,
                                const MetricFn& sigma, std::span<const double> p);

// Divergence of the vector field (sigma(X, .))# for a vector field X;
// vanishes when X is Killing and sigma is the stress-energy tensor of a
// biharmonic map.
double divergence_contraction_vector(const ChartedManifold& man, const VectorFieldFn& X,
                                     const MetricFn& sigma, std::span<const double> p);

// Residual of Div (dphi.tau)# - |tau|^2 - <dphi, nabla tau>.
double divergence_sharp_identity(const SmoothMap& map, std::span<const double> p);

// Residual of the conformal change law for the stress-energy tensor of a
// 4-dimensional Riemannian immersion under g = e^{2 rho} g_bar.
double conformal_immersion_relation(const SmoothMap& immersion, const ScalarFn& rho,
                                    std::span<const double> p);

// Tangent part of the bitension of an immersion from its intrinsic data:
// -m(-(m/2) grad |H|^2 + 2 trace (nabla A_H)). Returned as a source vector.
TensorValue tangent_bitension(const SmoothMap& map, std::span<const double> p);

// h-orthogonal projection of a target vector onto dphi(T_p M), from a
// 4th-order context (used to cross-check tangent_bitension and the
// vanishing of the tangent part of tau2).
std::vector<double> tangential_part(const MapJets& ctx, std::span<const double> v);

// Norm of the tangential part of tau2.
double tangent_bitension_projected_norm(const SmoothMap& map, std::span<const double> p);

// Residual field of the reformulation of S2 = 0 for m != 2:
// 1/(m-2) |tau|^2 <X,Y> + <nabla_X tau, dphi(Y)> + <nabla_Y tau, dphi(X)>.
double equivalent_form_residual(const SmoothMap& map, std::span<const double> p);

// One-pass diagnostics used by the catalog classifier (order-4 context).
struct PointDiagnostics {
    double tau_norm = 0, tau2_norm = 0, s2_norm = 0, nabla_s2_norm = 0, div_s2_norm = 0;
    double tau_sq = 0, dphi_nabla_tau = 0, trace_s2 = 0;
    Mat s2, g, ginv;
    double sqrt_det = 0;
};
PointDiagnostics diagnostics(const SmoothMap& map, std::span<const double> p);

// Adapts the stress-energy tensor of a map to a chart tensor field usable
// wherever a MetricFn is expected (orders <= 1).
MetricFn s2_field_of(const SmoothMap& map);

// Same for the stress-energy tensor of the energy (orders <= 2).
MetricFn stress_energy_field_of(const SmoothMap& map);

// g-norm of Div S + <tau, dphi(.)>; vanishes identically.
double stress_energy_divergence_residual(const SmoothMap& map, std::span<const double> p);

// Values of the stress-energy tensor, the metric and the volume factor at a
// point (order-3 context; enough for integrands).
struct S2Values {
    Mat s2, g, ginv;
    double sqrt_det = 0;
    double tau_sq = 0;
    double dphi_nabla_tau = 0;
};
S2Values s2_values(const SmoothMap& map, std::span<const double> p);

// |tau|^2 and volume factor under an optional source metric override
// (order-2 context; the bienergy integrand).
struct TensionDensity {
    double tau_sq = 0;
    double sqrt_det = 0;
};
TensionDensity tension_density(const SmoothMap& map, std::span<const double> p,
                               const MetricFn* metric_override = nullptr);

// Riemann components of a MetricJets context (values), [l][i][j][k] as in
// riemann(); requires order >= 2.
std::vector<double> riemann_values(const MetricJets& mj);

}  // namespace bistress
