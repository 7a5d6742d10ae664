#pragma once

#include <optional>

#include "bistress/jet.hpp"
#include "bistress/linalg.hpp"
#include "bistress/manifold.hpp"
#include "bistress/tensor.hpp"

namespace bistress {

// Positive-definiteness floor for metric eigenvalues at evaluation points.
inline constexpr double kEigenFloor = 1e-12;

// Evaluates a chart scalar function as a jet at p.
JetScalar jet_eval(const ScalarFn& f, std::span<const double> p, int order);

// Everything metric-level at one point, carried to a requested jet order:
// 0 gives values, k gives k more derivative orders on top. Christoffel
// symbols come out one order lower than the metric jets.
struct MetricJets {
    int dim = 0;
    int order = 0;
    Point p;
    std::vector<JetScalar> vars;
    JetMat g, ginv;
    JetScalar det, sqrt_det;
    bool flat = false;
    std::vector<JetScalar> gamma;  // [k][i][j], order-1; empty when order == 0

    MetricJets() = default;
    MetricJets(int dim, const MetricFn& metric, bool flat_chart, std::span<const double> p,
               int order, bool check_positive_definite = true);
    MetricJets(const ChartedManifold& man, std::span<const double> p, int order,
               bool check_positive_definite = true)
        : MetricJets(man.dim, man.metric, man.flat, p, order, check_positive_definite) {}

    const JetScalar& Gamma(int k, int i, int j) const {
        return gamma[(static_cast<std::size_t>(k) * dim + i) * dim + j];
    }

    Mat g_values() const;
    Mat ginv_values() const;
};

struct ChristoffelResult {
    TensorValue gamma;                // [k][i][j]
    std::optional<TensorValue> d1;    // [k][i][j][a]   = d_a Gamma^k_ij
    std::optional<TensorValue> d2;    // [k][i][j][a][b]
};

// Christoffel symbols of the chart metric, optionally with their first and
// second coordinate derivatives (with_derivatives in {0,1,2}).
ChristoffelResult christoffel(const ChartedManifold& man, std::span<const double> p,
                              int with_derivatives = 0);

// Curvature components: at({l,i,j,k}) is the dx^l component of R(d_i,d_j)d_k
// for R(X,Y)Z = [nabla_X,nabla_Y]Z - nabla_[X,Y]Z.
TensorValue riemann(const ChartedManifold& man, std::span<const double> p);

// sqrt(det g) at p; throws DegenerateMetricError off the positive cone.
double volume_form(const ChartedManifold& man, std::span<const double> p);

// Rows are the frame vectors' coordinate components: X_i = F(i,k) d_k,
// produced by Gram-Schmidt on the coordinate frame in a fixed order.
Mat orthonormal_frame(const Mat& g);

// g-orthonormalizes the rows of `vectors` against the inner product `gram`
// (general-purpose version used for pullback frames in the target).
Mat gram_schmidt(const Mat& vectors, const Mat& gram);

// Norm helpers weighting component arrays with a metric (inverse metric for
// covariant slots).
double norm_vector(const Mat& metric, std::span<const double> v);
double norm_one_form(const Mat& metric_inv, std::span<const double> theta);
double norm_2covariant(const Mat& metric_inv, const Mat& s);
double norm_3covariant(const Mat& metric_inv, std::span<const double> t, int dim);

// <S,T> with all-covariant slots raised by ginv.
double inner_2covariant(const Mat& metric_inv, const Mat& s, const Mat& t);

}  // namespace bistress
