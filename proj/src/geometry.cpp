#include "bistress/geometry.hpp"

#include <cmath>

namespace bistress {

JetScalar jet_eval(const ScalarFn& f, std::span<const double> p, int order) {
    const JetSpace& s = JetSpace::get(static_cast<int>(p.size()), order);
    auto vars = seed_point(s, p);
    return f(vars);
}

MetricJets::MetricJets(int dim_in, const MetricFn& metric, bool flat_chart,
                       std::span<const double> point, int order_in,
                       bool check_positive_definite) {
    dim = dim_in;
    order = order_in;
    p.assign(point.begin(), point.end());
    flat = flat_chart;

    const JetSpace& space = JetSpace::get(dim, order);
    vars = seed_point(space, point);
    g = JetMat(dim);
    metric(vars, g);

    if (check_positive_definite) {
        Mat gv(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) gv.at(i, j) = g.at(i, j).value();
        if (min_eigenvalue_sym(gv) <= kEigenFloor)
            throw DegenerateMetricError("metric not positive definite at evaluation point");
    }

    ginv = jet_mat_inverse(g, &det);
    if (det.value() <= 0.0)
        throw DegenerateMetricError("metric determinant not positive at evaluation point");
    sqrt_det = sqrt(det);

    if (order >= 1) {
        gamma.resize(static_cast<std::size_t>(dim) * dim * dim);
        const int lower = order - 1;
        // dg[l][i][j] = d_j g_li at order-1
        std::vector<JetScalar> dg(static_cast<std::size_t>(dim) * dim * dim);
        auto dg_at = [&](int l, int i, int j) -> JetScalar& {
            return dg[(static_cast<std::size_t>(l) * dim + i) * dim + j];
        };
        for (int l = 0; l < dim; ++l)
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j) dg_at(l, i, j) = g.at(l, i).derivative(j);

        std::vector<JetScalar> ginv_low(static_cast<std::size_t>(dim) * dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                ginv_low[static_cast<std::size_t>(i) * dim + j] =
                    ginv.at(i, j).truncated(lower);

        for (int k = 0; k < dim; ++k)
            for (int i = 0; i < dim; ++i)
                for (int j = i; j < dim; ++j) {
                    JetScalar sum =
                        JetScalar::constant(JetSpace::get(dim, lower), 0.0);
                    for (int l = 0; l < dim; ++l) {
                        JetScalar term = dg_at(l, i, j) + dg_at(l, j, i) - dg_at(i, j, l);
                        sum += ginv_low[static_cast<std::size_t>(k) * dim + l] * term;
                    }
                    sum *= 0.5;
                    gamma[(static_cast<std::size_t>(k) * dim + i) * dim + j] = sum;
                    gamma[(static_cast<std::size_t>(k) * dim + j) * dim + i] = sum;
                }
    }
}

Mat MetricJets::g_values() const {
    Mat m(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m.at(i, j) = g.at(i, j).value();
    return m;
}

Mat MetricJets::ginv_values() const {
    Mat m(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m.at(i, j) = ginv.at(i, j).value();
    return m;
}

ChristoffelResult christoffel(const ChartedManifold& man, std::span<const double> p,
                              int with_derivatives) {
    if (with_derivatives < 0 || with_derivatives > 2)
        throw UnsupportedOrderError("christoffel: with_derivatives must be 0, 1 or 2");
    MetricJets mj(man, p, 1 + with_derivatives);
    const int m = man.dim;
    Point base(p.begin(), p.end());

    ChristoffelResult out{TensorValue({{Variance::up, Space::source},
                                       {Variance::down, Space::source},
                                       {Variance::down, Space::source}},
                                      {m, m, m}, base),
                          std::nullopt,
                          std::nullopt};
    for (int k = 0; k < m; ++k)
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) out.gamma.at({k, i, j}) = mj.Gamma(k, i, j).value();

    if (with_derivatives >= 1) {
        TensorValue d1({{Variance::up, Space::source},
                        {Variance::down, Space::source},
                        {Variance::down, Space::source},
                        {Variance::down, Space::source}},
                       {m, m, m, m}, base);
        for (int k = 0; k < m; ++k)
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    for (int a = 0; a < m; ++a)
                        d1.at({k, i, j, a}) = mj.Gamma(k, i, j).derivative(a).value();
        out.d1 = std::move(d1);
    }
    if (with_derivatives == 2) {
        TensorValue d2({{Variance::up, Space::source},
                        {Variance::down, Space::source},
                        {Variance::down, Space::source},
                        {Variance::down, Space::source},
                        {Variance::down, Space::source}},
                       {m, m, m, m, m}, base);
        for (int k = 0; k < m; ++k)
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    for (int a = 0; a < m; ++a) {
                        JetScalar da = mj.Gamma(k, i, j).derivative(a);
                        for (int b = 0; b < m; ++b)
                            d2.at({k, i, j, a, b}) = da.derivative(b).value();
                    }
        out.d2 = std::move(d2);
    }
    return out;
}

TensorValue riemann(const ChartedManifold& man, std::span<const double> p) {
    MetricJets mj(man, p, 2);
    const int m = man.dim;
    TensorValue r({{Variance::up, Space::source},
                   {Variance::down, Space::source},
                   {Variance::down, Space::source},
                   {Variance::down, Space::source}},
                  {m, m, m, m}, Point(p.begin(), p.end()));

    // dGamma[k][i][j][a] = d_a Gamma^k_ij (values)
    std::vector<double> dgam(static_cast<std::size_t>(m) * m * m * m);
    auto dg = [&](int k, int i, int j, int a) -> double& {
        return dgam[((static_cast<std::size_t>(k) * m + i) * m + j) * m + a];
    };
    for (int k = 0; k < m; ++k)
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                for (int a = 0; a < m; ++a) dg(k, i, j, a) = mj.Gamma(k, i, j).derivative(a).value();

    for (int l = 0; l < m; ++l)
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                for (int k = 0; k < m; ++k) {
                    double v = dg(l, j, k, i) - dg(l, i, k, j);
                    for (int a = 0; a < m; ++a)
                        v += mj.Gamma(l, i, a).value() * mj.Gamma(a, j, k).value() -
                             mj.Gamma(l, j, a).value() * mj.Gamma(a, i, k).value();
                    r.at({l, i, j, k}) = v;
                }
    return r;
}

double volume_form(const ChartedManifold& man, std::span<const double> p) {
    MetricJets mj(man, p, 0);
    return mj.sqrt_det.value();
}

Mat gram_schmidt(const Mat& vectors, const Mat& gram) {
    const int rows = vectors.rows, n = vectors.cols;
    Mat f = vectors;
    auto inner = [&](const double* x, const double* y) {
        double s = 0.0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) s += gram.at(a, b) * x[a] * y[b];
        return s;
    };
    for (int i = 0; i < rows; ++i) {
        double* xi = &f.a[static_cast<std::size_t>(i) * n];
        for (int j = 0; j < i; ++j) {
            const double* xj = &f.a[static_cast<std::size_t>(j) * n];
            double c = inner(xi, xj);
            for (int a = 0; a < n; ++a) xi[a] -= c * xj[a];
        }
        double nrm = std::sqrt(inner(xi, xi));
        if (nrm <= 1e-14)
            throw DegenerateMetricError("gram_schmidt: linearly dependent frame");
        for (int a = 0; a < n; ++a) xi[a] /= nrm;
    }
    return f;
}

Mat orthonormal_frame(const Mat& g) { return gram_schmidt(Mat::identity(g.rows), g); }

double norm_vector(const Mat& metric, std::span<const double> v) {
    double s = 0.0;
    for (int a = 0; a < metric.rows; ++a)
        for (int b = 0; b < metric.rows; ++b) s += metric.at(a, b) * v[a] * v[b];
    return std::sqrt(std::max(0.0, s));
}

double norm_one_form(const Mat& metric_inv, std::span<const double> theta) {
    return norm_vector(metric_inv, theta);
}

double inner_2covariant(const Mat& metric_inv, const Mat& s, const Mat& t) {
    const int m = metric_inv.rows;
    double acc = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k)
                for (int l = 0; l < m; ++l)
                    acc += metric_inv.at(i, k) * metric_inv.at(j, l) * s.at(i, j) * t.at(k, l);
    return acc;
}

double norm_2covariant(const Mat& metric_inv, const Mat& s) {
    return std::sqrt(std::max(0.0, inner_2covariant(metric_inv, s, s)));
}

double norm_3covariant(const Mat& metric_inv, std::span<const double> t, int dim) {
    auto at = [&](int a, int b, int c) {
        return t[(static_cast<std::size_t>(a) * dim + b) * dim + c];
    };
    double acc = 0.0;
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b)
            for (int c = 0; c < dim; ++c)
                for (int d = 0; d < dim; ++d)
                    for (int e = 0; e < dim; ++e)
                        for (int f = 0; f < dim; ++f)
                            acc += metric_inv.at(a, d) * metric_inv.at(b, e) *
                                   metric_inv.at(c, f) * at(a, b, c) * at(d, e, f);
    return std::sqrt(std::max(0.0, acc));
}

Mat metric_values_of(const ChartedManifold& man, std::span<const double> p) {
    MetricJets mj(man, p, 0, false);
    return mj.g_values();
}

Mat ChartedManifold::metric_values(std::span<const double> p) const {
    return metric_values_of(*this, p);
}

Point SmoothMap::image_of(std::span<const double> p) const {
    const JetSpace& s = JetSpace::get(source->dim, 0);
    auto vars = seed_point(s, p);
    auto y = components_at(vars);
    Point out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i].value();
    return out;
}

ManifoldPtr make_euclidean(int dim, Box box, std::string name) {
    auto man = std::make_shared<ChartedManifold>();
    man->name = name.empty() ? "euclidean" : std::move(name);
    man->dim = dim;
    man->domain = std::move(box);
    man->flat = true;
    man->metric = [dim](std::span<const JetScalar> x, JetMat& g) {
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                g.at(i, j) = JetScalar::constant_like(x[0], i == j ? 1.0 : 0.0);
    };
    return man;
}

ManifoldPtr with_metric(const ManifoldPtr& base, MetricFn metric, bool flat,
                        std::string name) {
    auto man = std::make_shared<ChartedManifold>(*base);
    man->metric = std::move(metric);
    man->flat = flat;
    if (!name.empty()) man->name = std::move(name);
    return man;
}

}  // namespace bistress
