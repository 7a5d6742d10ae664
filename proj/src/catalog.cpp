#include "bistress/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bistress {

namespace {

constexpr double kBiharmonicRadius = 0.70710678118654752;  // 1/sqrt(2)

JetScalar jconst(std::span<const JetScalar> x, double v) {
    return JetScalar::constant_like(x[0], v);
}

void fill_constants(std::span<const JetScalar> x, JetMat& g, int dim) {
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) g.at(i, j) = jconst(x, 0.0);
}

// Diagonal of the round metric of a sphere of radius r in nested angular
// coordinates x[off..off+k): r^2 (d a_1^2 + sin^2 a_1 d a_2^2 + ...).
std::vector<JetScalar> nested_sphere_diag(std::span<const JetScalar> x, int off, int k,
                                          double r) {
    std::vector<JetScalar> d;
    d.reserve(static_cast<std::size_t>(k));
    d.push_back(jconst(x, r * r));
    for (int i = 1; i < k; ++i) {
        JetScalar s = sin(x[off + i - 1]);
        d.push_back(d.back() * s * s);
    }
    return d;
}

Box angular_box(int k) {
    // Nested chart: all but the last angle in (0, pi), the last in (0, 2 pi).
    Box b;
    b.lo.assign(static_cast<std::size_t>(k), 0.0);
    b.hi.assign(static_cast<std::size_t>(k), M_PI);
    b.hi[static_cast<std::size_t>(k) - 1] = 2.0 * M_PI;
    return b;
}

Box cube(int dim, double half_width) {
    Box b;
    b.lo.assign(static_cast<std::size_t>(dim), -half_width);
    b.hi.assign(static_cast<std::size_t>(dim), half_width);
    return b;
}

Box periodic_box(int dim) {
    Box b;
    b.lo.assign(static_cast<std::size_t>(dim), 0.0);
    b.hi.assign(static_cast<std::size_t>(dim), 2.0 * M_PI);
    return b;
}

// Ambient coordinate functions of the nested sphere chart; smooth on the
// whole sphere, used to build variation tensors without seam artifacts.
std::vector<ScalarFn> sphere_generators(int k, double r, int off = 0) {
    std::vector<ScalarFn> gen;
    for (int a = 0; a <= k; ++a) {
        gen.push_back([k, r, off, a](std::span<const JetScalar> x) {
            JetScalar v = jconst(x, r);
            for (int i = 0; i < std::min(a, k); ++i) v = v * sin(x[off + i]);
            if (a < k) v = v * cos(x[off + a]);
            return v;
        });
    }
    return gen;
}

std::vector<ScalarFn> torus_generators(int m) {
    std::vector<ScalarFn> gen;
    for (int i = 0; i < m; ++i) {
        gen.push_back([i](std::span<const JetScalar> x) { return cos(x[i]); });
        gen.push_back([i](std::span<const JetScalar> x) { return sin(x[i]); });
    }
    return gen;
}

int resolution_for_dim(int dim) {
    switch (dim) {
        case 1: return 64;
        case 2: return 48;
        case 3: return 12;
        case 4: return 6;
        default: return 3;
    }
}

ManifoldPtr nested_sphere(int k, double r, std::string name) {
    auto man = std::make_shared<ChartedManifold>();
    man->name = std::move(name);
    man->dim = k;
    man->domain = angular_box(k);
    man->flat = false;
    man->metric = [k, r](std::span<const JetScalar> x, JetMat& g) {
        fill_constants(x, g, k);
        auto d = nested_sphere_diag(x, 0, k, r);
        for (int i = 0; i < k; ++i) g.at(i, i) = d[static_cast<std::size_t>(i)];
    };
    man->integration = IntegrationSpec{man->domain, resolution_for_dim(k)};
    man->smooth_generators = sphere_generators(k, r);
    return man;
}

int int_param(const std::map<std::string, double>& p, const std::string& k) {
    double v = p.at(k);
    int i = static_cast<int>(std::lround(v));
    if (std::fabs(v - i) > 1e-9)
        throw InvalidParamError("parameter '" + k + "' must be an integer");
    return i;
}

std::string format_instance(const std::string& name,
                            const std::vector<std::pair<std::string, double>>& shown) {
    std::ostringstream os;
    os << name << "(";
    for (std::size_t i = 0; i < shown.size(); ++i) {
        if (i) os << ",";
        os << shown[i].first << "=" << shown[i].second;
    }
    os << ")";
    return os.str();
}

bool near(double a, double b, double tol = 1e-9) { return std::fabs(a - b) <= tol; }

}  // namespace

std::string tag_name(Tag t) {
    switch (t) {
        case Tag::harmonic: return "harmonic";
        case Tag::proper_biharmonic: return "proper_biharmonic";
        case Tag::s2_zero: return "S2_zero";
        case Tag::parallel_s2: return "parallel_S2";
        case Tag::s2_lambda_g: return "S2_lambda_g";
    }
    return "?";
}

std::string tags_to_string(const std::set<Tag>& tags) {
    std::string s = "{";
    bool first = true;
    for (Tag t : tags) {
        if (!first) s += ", ";
        s += tag_name(t);
        first = false;
    }
    return s + "}";
}

const std::vector<RegistryInfo>& registry() {
    static const std::vector<RegistryInfo> reg = {
        {"cubic_curve",
         "curve t -> t^3 a in R^3; zero stress-energy tensor without being harmonic",
         {{"a1", 1.0, "any"}, {"a2", 0.5, "any"}, {"a3", 0.0, "any (|a| > 0)"}}},
        {"circle_arclength",
         "unit-speed circle in R^2; S2(d/dt,d/dt) = (3/2)|tau|^2 for arc-length curves",
         {{"radius", 1.0, "> 0"}}},
        {"warped_projection",
         "projection of the warped product R^k x_{f^2} R^n onto R^k with ln f linear; "
         "basic Killing tension field of constant norm",
         {{"k", 2, "integer >= 1, k+n <= 5"},
          {"n", 2, "integer >= 1"},
          {"slope", 0.4, "nonzero, |slope| <= 2"}}},
        {"conformal_identity_a",
         "identity (M,g) -> (M, e^{2 rho} g) with rho = ln sqrt(f), f affine positive "
         "on the flat target",
         {{"m", 3, "integer in [3,6]"}, {"slope", 0.4, "0 < |slope| <= 0.9"}}},
        {"conformal_identity_b",
         "identity (M,g) -> (M, e^{2 rho} g) with rho affine on the flat target; "
         "proper biharmonic exactly in dimension four",
         {{"m", 4, "integer in [3,6]"}, {"slope", 0.5, "0 < |slope| <= 1"}}},
        {"hypersphere",
         "small hypersphere S^m(a) in S^{m+1}; proper biharmonic iff a = 1/sqrt(2)",
         {{"m", 3, "integer in [2,5]"}, {"a", kBiharmonicRadius, "in (0,1]"}}},
        {"clifford_torus",
         "product S^{m1}(a1) x S^{m2}(a2) in S^{m+1} with a1^2+a2^2=1; parallel "
         "stress-energy tensor, not umbilical",
         {{"m1", 1, "integer >= 1, m1+m2 <= 5"},
          {"m2", 2, "integer >= 1"},
          {"a1", 0.6, "in (0,1)"}}},
        {"minimal_in_umbilical",
         "minimal Clifford torus in S^3(a) composed with S^3(a) in S^4; "
         "pseudo-umbilical with constant mean curvature",
         {{"a", kBiharmonicRadius, "in (0,1)"}}},
        {"horizontally_conformal",
         "horizontally conformal submersion with minimal fibers and affine squared "
         "dilation, as a Riemannian submersion followed by a conformal identity",
         {{"n", 3, "integer >= 1, n != 2, n+k <= 5"},
          {"k", 1, "integer >= 1"},
          {"slope", 0.5, "0 < |slope| <= 0.9"}}},
        {"conformal_identity_torus",
         "identity of a flat torus with a smooth periodic conformal factor; compact "
         "domain for the metric-variation checks",
         {{"m", 3, "integer in [2,4]"}, {"amp", 0.25, "in (0, 0.5]"}}},
    };
    return reg;
}

CatalogEntry build(const std::string& name, const std::map<std::string, double>& user) {
    const RegistryInfo* info = nullptr;
    for (const auto& r : registry())
        if (r.name == name) info = &r;
    if (!info) throw UnknownEntryError("unknown catalog entry '" + name + "'");

    std::map<std::string, double> p;
    for (const auto& ps : info->params) p[ps.name] = ps.default_value;
    for (const auto& [k, v] : user) {
        if (!p.count(k) && !(name == "clifford_torus" && k == "a2"))
            throw InvalidParamError("entry '" + name + "' has no parameter '" + k + "'");
        p[k] = v;
    }

    CatalogEntry e;
    e.name = name;
    e.params = p;

    if (name == "cubic_curve") {
        double a1 = p.at("a1"), a2 = p.at("a2"), a3 = p.at("a3");
        if (a1 * a1 + a2 * a2 + a3 * a3 <= 0.0)
            throw InvalidParamError("cubic_curve: direction vector must be nonzero");
        auto src = make_euclidean(1, cube(1, 1.5), "line");
        auto tgt = make_euclidean(3, cube(3, 8.0), "R3");
        e.map = SmoothMap{"cubic_curve", src, tgt,
                          [a1, a2, a3](std::span<const JetScalar> x, std::vector<JetScalar>& y) {
                              JetScalar t3 = x[0] * x[0] * x[0];
                              y = {t3 * a1, t3 * a2, t3 * a3};
                          },
                          MapKind::generic};
        e.expected = {Tag::proper_biharmonic, Tag::s2_zero, Tag::parallel_s2,
                      Tag::s2_lambda_g};
        e.compact = false;
        e.statement = "S2 = 0 on a non-geodesic cubic curve";
        e.instance = format_instance(name, {{"a1", a1}, {"a2", a2}, {"a3", a3}});
    } else if (name == "circle_arclength") {
        double r = p.at("radius");
        if (r <= 0.0) throw InvalidParamError("circle_arclength: radius must be positive");
        auto src = std::make_shared<ChartedManifold>();
        src->name = "circle_chart";
        src->dim = 1;
        src->domain = Box{{0.0}, {2.0 * M_PI * r}};
        src->flat = true;
        src->metric = [](std::span<const JetScalar> x, JetMat& g) {
            g.at(0, 0) = jconst(x, 1.0);
        };
        src->integration = IntegrationSpec{src->domain, 64};
        src->smooth_generators = {
            [r](std::span<const JetScalar> x) { return cos(x[0] * (1.0 / r)); },
            [r](std::span<const JetScalar> x) { return sin(x[0] * (1.0 / r)); }};
        auto tgt = make_euclidean(2, cube(2, 2.0 + r), "R2");
        e.map = SmoothMap{"circle_arclength", src, tgt,
                          [r](std::span<const JetScalar> x, std::vector<JetScalar>& y) {
                              y = {cos(x[0] * (1.0 / r)) * r, sin(x[0] * (1.0 / r)) * r};
                          },
                          MapKind::riemannian_immersion};
        e.expected = {Tag::parallel_s2, Tag::s2_lambda_g};
        e.compact = true;
        e.statement = "arc-length circle: S2(dt,dt) = (3/2)|tau|^2, nonzero";
        e.instance = format_instance(name, {{"radius", r}});
    } else if (name == "warped_projection") {
        int k = int_param(p, "k"), n = int_param(p, "n");
        double c = p.at("slope");
        if (k < 1 || n < 1 || k + n > 5)
            throw InvalidParamError("warped_projection: need k,n >= 1 and k+n <= 5");
        if (c == 0.0 || std::fabs(c) > 2.0)
            throw InvalidParamError("warped_projection: slope must be nonzero with |slope| <= 2");
        int m = k + n;
        auto src = std::make_shared<ChartedManifold>();
        src->name = "warped_product";
        src->dim = m;
        src->domain = cube(m, 1.0);
        src->flat = false;
        src->metric = [k, c, m](std::span<const JetScalar> x, JetMat& g) {
            fill_constants(x, g, m);
            JetScalar f2 = exp(x[0] * (2.0 * c));  // f = e^{c x1}, warped by f^2
            for (int i = 0; i < k; ++i) g.at(i, i) = jconst(x, 1.0);
            for (int i = k; i < m; ++i) g.at(i, i) = f2;
        };
        auto tgt = make_euclidean(k, cube(k, 1.0), "base");
        e.map = SmoothMap{"warped_projection", src, tgt,
                          [k](std::span<const JetScalar> x, std::vector<JetScalar>& y) {
                              y.assign(x.begin(), x.begin() + k);
                          },
                          MapKind::submersion};
        e.expected = {Tag::proper_biharmonic, Tag::parallel_s2, Tag::s2_lambda_g};
        e.compact = false;
        e.statement =
            "warped projection with affine ln f: tau = n grad(ln f), S2 = (|tau|^2/2) g";
        e.instance =
            format_instance(name, {{"k", double(k)}, {"n", double(n)}, {"slope", c}});
    } else if (name == "conformal_identity_a" || name == "conformal_identity_b") {
        const bool case_a = (name == "conformal_identity_a");
        int m = int_param(p, "m");
        double s = p.at("slope");
        if (m < 3 || m > 6)
            throw InvalidParamError(name + ": m must be an integer in [3,6]");
        double cap = case_a ? 0.9 : 1.0;
        if (s == 0.0 || std::fabs(s) > cap)
            throw InvalidParamError(name + ": slope must be nonzero with |slope| <= " +
                                    std::to_string(cap));
        auto src = std::make_shared<ChartedManifold>();
        src->name = name + "_domain";
        src->dim = m;
        src->domain = cube(m, 1.0);
        src->flat = false;
        if (case_a) {
            // rho = ln sqrt(f), f = 1 + s x1 affine positive on the flat
            // target; the source metric is g = e^{-2 rho} delta = delta / f.
            src->metric = [m, s](std::span<const JetScalar> x, JetMat& g) {
                fill_constants(x, g, m);
                JetScalar invf = 1.0 / (x[0] * s + 1.0);
                for (int i = 0; i < m; ++i) g.at(i, i) = invf;
            };
        } else {
            // rho = s x1 affine on the flat target; g = e^{-2 rho} delta.
            src->metric = [m, s](std::span<const JetScalar> x, JetMat& g) {
                fill_constants(x, g, m);
                JetScalar w = exp(x[0] * (-2.0 * s));
                for (int i = 0; i < m; ++i) g.at(i, i) = w;
            };
        }
        auto tgt = make_euclidean(m, cube(m, 1.0), "flat_target");
        e.map = SmoothMap{name, src, tgt,
                          [](std::span<const JetScalar> x, std::vector<JetScalar>& y) {
                              y.assign(x.begin(), x.end());
                          },
                          MapKind::identity_conformal};
        if (case_a) {
            e.expected = {Tag::proper_biharmonic, Tag::parallel_s2, Tag::s2_lambda_g};
            e.statement =
                "conformal identity, rho = ln sqrt(affine): parallel tension, S2 = (c^2/2) g";
        } else {
            e.expected = (m == 4) ? std::set<Tag>{Tag::proper_biharmonic} : std::set<Tag>{};
            e.statement = "conformal identity, affine rho: proper biharmonic iff m = 4";
        }
        e.compact = false;
        e.instance = format_instance(name, {{"m", double(m)}, {"slope", s}});
    } else if (name == "hypersphere") {
        int m = int_param(p, "m");
        double a = p.at("a");
        if (m < 2 || m > 5)
            throw InvalidParamError("hypersphere: m must be an integer in [2,5]");
        if (!(a > 0.0 && a <= 1.0)) throw InvalidParamError("hypersphere: a must lie in (0,1]");
        double b = std::sqrt(std::max(0.0, 1.0 - a * a));
        double psi0 = std::acos(b);  // latitude with sin(psi0) = a
        auto src = nested_sphere(m, a, "sphere_source");
        auto tgt = nested_sphere(m + 1, 1.0, "sphere_target");
        e.map = SmoothMap{"hypersphere", src, tgt,
                          [m, psi0](std::span<const JetScalar> x, std::vector<JetScalar>& y) {
                              y.clear();
                              y.push_back(jconst(x, psi0));
                              for (int i = 0; i < m; ++i) y.push_back(x[i]);
                          },
                          MapKind::riemannian_immersion};
        e.expected = {Tag::parallel_s2, Tag::s2_lambda_g};
        if (near(a, 1.0))
            e.expected = {Tag::harmonic, Tag::s2_zero, Tag::parallel_s2, Tag::s2_lambda_g};
        else {
            if (m == 4) e.expected.insert(Tag::s2_zero);
            if (near(a, kBiharmonicRadius)) e.expected.insert(Tag::proper_biharmonic);
        }
        e.compact = true;
        e.statement = "hypersphere S^m(a) in S^{m+1}: umbilical, biharmonic iff a = 1/sqrt(2)";
        e.instance = format_instance(name, {{"m", double(m)}, {"a", a}});
    } else if (name == "clifford_torus") {
        int m1 = int_param(p, "m1"), m2 = int_param(p, "m2");
        double a1 = p.at("a1");
        if (m1 < 1 || m2 < 1 || m1 + m2 > 5)
            throw InvalidParamError("clifford_torus: need m1,m2 >= 1 and m1+m2 <= 5");
        if (!(a1 > 0.0 && a1 < 1.0))
            throw InvalidParamError("clifford_torus: a1 must lie in (0,1)");
        double a2 = std::sqrt(1.0 - a1 * a1);
        if (p.count("a2") && std::fabs(a1 * a1 + p.at("a2") * p.at("a2") - 1.0) > 1e-12)
            throw InvalidParamError("clifford_torus: a1^2 + a2^2 must equal 1");
        int m = m1 + m2;
        double s0 = std::acos(a1);  // cos s0 = a1, sin s0 = a2

        auto src = std::make_shared<ChartedManifold>();
        src->name = "product_spheres";
        src->dim = m;
        {
            Box b1 = angular_box(m1), b2 = angular_box(m2);
            Box b;
            b.lo = b1.lo;
            b.lo.insert(b.lo.end(), b2.lo.begin(), b2.lo.end());
            b.hi = b1.hi;
            b.hi.insert(b.hi.end(), b2.hi.begin(), b2.hi.end());
            src->domain = b;
        }
        src->flat = false;
        src->metric = [m, m1, m2, a1, a2](std::span<const JetScalar> x, JetMat& g) {
            fill_constants(x, g, m);
            auto d1 = nested_sphere_diag(x, 0, m1, a1);
            auto d2 = nested_sphere_diag(x, m1, m2, a2);
            for (int i = 0; i < m1; ++i) g.at(i, i) = d1[static_cast<std::size_t>(i)];
            for (int i = 0; i < m2; ++i) g.at(m1 + i, m1 + i) = d2[static_cast<std::size_t>(i)];
        };
        src->integration = IntegrationSpec{src->domain, resolution_for_dim(m)};
        src->smooth_generators = sphere_generators(m1, a1, 0);
        {
            auto g2 = sphere_generators(m2, a2, m1);
            src->smooth_generators.insert(src->smooth_generators.end(), g2.begin(), g2.end());
        }

        // Target: S^{m+1} in join coordinates (s, angles1, angles2) with
        // metric ds^2 + cos^2 s sigma_{m1} + sin^2 s sigma_{m2}.
        auto tgt = std::make_shared<ChartedManifold>();
        tgt->name = "sphere_join";
        tgt->dim = m + 1;
        {
            Box b;
            b.lo = {0.0};
            b.hi = {M_PI / 2.0};
            Box b1 = angular_box(m1), b2 = angular_box(m2);
            b.lo.insert(b.lo.end(), b1.lo.begin(), b1.lo.end());
            b.lo.insert(b.lo.end(), b2.lo.begin(), b2.lo.end());
            b.hi.insert(b.hi.end(), b1.hi.begin(), b1.hi.end());
            b.hi.insert(b.hi.end(), b2.hi.begin(), b2.hi.end());
            tgt->domain = b;
        }
        tgt->flat = false;
        tgt->metric = [m, m1, m2](std::span<const JetScalar> x, JetMat& h) {
            fill_constants(x, h, m + 1);
            h.at(0, 0) = jconst(x, 1.0);
            JetScalar c = cos(x[0]), s = sin(x[0]);
            auto d1 = nested_sphere_diag(x, 1, m1, 1.0);
            auto d2 = nested_sphere_diag(x, 1 + m1, m2, 1.0);
            for (int i = 0; i < m1; ++i)
                h.at(1 + i, 1 + i) = d1[static_cast<std::size_t>(i)] * c * c;
            for (int i = 0; i < m2; ++i)
                h.at(1 + m1 + i, 1 + m1 + i) = d2[static_cast<std::size_t>(i)] * s * s;
        };

        e.map = SmoothMap{"clifford_torus", src, tgt,
                          [s0](std::span<const JetScalar> x, std::vector<JetScalar>& y) {
                              y.clear();
                              y.push_back(jconst(x, s0));
                              for (const auto& xi : x) y.push_back(xi);
                          },
                          MapKind::riemannian_immersion};
        bool minimal = near(m1 * a2 * a2, m2 * a1 * a1);
        if (minimal)
            e.expected = {Tag::harmonic, Tag::s2_zero, Tag::parallel_s2, Tag::s2_lambda_g};
        else {
            e.expected = {Tag::parallel_s2};
            if (near(a1, kBiharmonicRadius)) e.expected.insert(Tag::proper_biharmonic);
        }
        e.compact = true;
        e.statement = "Clifford torus: parallel second fundamental form, never umbilical";
        e.instance =
            format_instance(name, {{"m1", double(m1)}, {"m2", double(m2)}, {"a1", a1}});
    } else if (name == "minimal_in_umbilical") {
        double a = p.at("a");
        if (!(a > 0.0 && a < 1.0))
            throw InvalidParamError("minimal_in_umbilical: a must lie in (0,1)");
        double s0 = std::asin(a);
        double r = a / std::sqrt(2.0);

        auto src = std::make_shared<ChartedManifold>();
        src->name = "flat_torus_factor";
        src->dim = 2;
        src->domain = periodic_box(2);
        src->flat = true;  // constant multiple of the flat metric
        src->metric = [r](std::span<const JetScalar> x, JetMat& g) {
            fill_constants(x, g, 2);
            g.at(0, 0) = jconst(x, r * r);
            g.at(1, 1) = jconst(x, r * r);
        };
        src->integration = IntegrationSpec{src->domain, 48};
        src->smooth_generators = torus_generators(2);

        // Target: S^4 as (s,t,alpha,beta) -> (sin s cos t e^{i alpha},
        // sin s sin t e^{i beta}, cos s) with the induced round metric.
        auto tgt = std::make_shared<ChartedManifold>();
        tgt->name = "sphere4_bitorus";
        tgt->dim = 4;
        tgt->domain =
            Box{{0.0, 0.0, 0.0, 0.0}, {M_PI, M_PI / 2.0, 2.0 * M_PI, 2.0 * M_PI}};
        tgt->flat = false;
        tgt->metric = [](std::span<const JetScalar> x, JetMat& h) {
            fill_constants(x, h, 4);
            JetScalar ss = sin(x[0]), ct = cos(x[1]), st = sin(x[1]);
            h.at(0, 0) = jconst(x, 1.0);
            h.at(1, 1) = ss * ss;
            h.at(2, 2) = ss * ss * ct * ct;
            h.at(3, 3) = ss * ss * st * st;
        };

        e.map = SmoothMap{"minimal_in_umbilical", src, tgt,
                          [s0](std::span<const JetScalar> x, std::vector<JetScalar>& y) {
                              y = {jconst(x, s0), jconst(x, M_PI / 4.0), x[0], x[1]};
                          },
                          MapKind::riemannian_immersion};
        e.expected = {Tag::parallel_s2, Tag::s2_lambda_g};
        if (near(a, kBiharmonicRadius)) e.expected.insert(Tag::proper_biharmonic);
        e.compact = true;
        e.statement =
            "minimal torus in S^3(a) composed with the umbilical S^3(a) in S^4: "
            "pseudo-umbilical, constant mean curvature";
        e.instance = format_instance(name, {{"a", a}});
    } else if (name == "horizontally_conformal") {
        int n = int_param(p, "n"), k = int_param(p, "k");
        double s = p.at("slope");
        if (n < 1 || n == 2 || k < 1 || n + k > 5)
            throw InvalidParamError(
                "horizontally_conformal: need n >= 1 (n != 2), k >= 1, n+k <= 5");
        if (s == 0.0 || std::fabs(s) > 0.9)
            throw InvalidParamError(
                "horizontally_conformal: slope must be nonzero with |slope| <= 0.9");
        int m = n + k;
        auto src = std::make_shared<ChartedManifold>();
        src->name = "dilated_product";
        src->dim = m;
        src->domain = cube(m, 1.0);
        src->flat = false;
        // dilation^2 = 1 + s y1, metric = dilation^{-2} delta_n + delta_k;
        // the fibers {y} x R^k are totally geodesic.
        src->metric = [n, m, s](std::span<const JetScalar> x, JetMat& g) {
            fill_constants(x, g, m);
            JetScalar w = 1.0 / (x[0] * s + 1.0);
            for (int i = 0; i < n; ++i) g.at(i, i) = w;
            for (int i = n; i < m; ++i) g.at(i, i) = jconst(x, 1.0);
        };
        auto tgt = make_euclidean(n, cube(n, 1.0), "conformal_base");
        e.map = SmoothMap{"horizontally_conformal", src, tgt,
                          [n](std::span<const JetScalar> x, std::vector<JetScalar>& y) {
                              y.assign(x.begin(), x.begin() + n);
                          },
                          MapKind::submersion};
        e.expected = {Tag::proper_biharmonic, Tag::parallel_s2, Tag::s2_lambda_g};
        e.compact = false;
        e.statement =
            "horizontally conformal submersion, minimal fibers, affine squared dilation: "
            "proper biharmonic for n != 2";
        e.instance =
            format_instance(name, {{"n", double(n)}, {"k", double(k)}, {"slope", s}});
    } else if (name == "conformal_identity_torus") {
        int m = int_param(p, "m");
        double amp = p.at("amp");
        if (m < 2 || m > 4)
            throw InvalidParamError("conformal_identity_torus: m must be an integer in [2,4]");
        if (!(amp > 0.0 && amp <= 0.5))
            throw InvalidParamError("conformal_identity_torus: amp must lie in (0, 0.5]");
        auto rho = [amp](std::span<const JetScalar> x) {
            return sin(x[0]) * cos(x[1]) * amp;
        };
        auto src = std::make_shared<ChartedManifold>();
        src->name = "conformal_torus";
        src->dim = m;
        src->domain = periodic_box(m);
        src->flat = false;
        src->metric = [m, rho](std::span<const JetScalar> x, JetMat& g) {
            fill_constants(x, g, m);
            JetScalar w = exp(rho(x) * (-2.0));
            for (int i = 0; i < m; ++i) g.at(i, i) = w;
        };
        src->integration =
            IntegrationSpec{src->domain, m == 2 ? 48 : (m == 3 ? 12 : 6)};
        src->smooth_generators = torus_generators(m);

        auto tgt = std::make_shared<ChartedManifold>();
        tgt->name = "flat_torus";
        tgt->dim = m;
        tgt->domain = periodic_box(m);
        tgt->flat = true;
        tgt->metric = [m](std::span<const JetScalar> x, JetMat& h) {
            fill_constants(x, h, m);
            for (int i = 0; i < m; ++i) h.at(i, i) = jconst(x, 1.0);
        };
        tgt->integration = IntegrationSpec{tgt->domain, src->integration->default_resolution};

        e.map = SmoothMap{"conformal_identity_torus", src, tgt,
                          [](std::span<const JetScalar> x, std::vector<JetScalar>& y) {
                              y.assign(x.begin(), x.end());
                          },
                          MapKind::identity_conformal};
        e.expected = (m == 2) ? std::set<Tag>{Tag::harmonic, Tag::s2_zero, Tag::parallel_s2,
                                              Tag::s2_lambda_g}
                              : std::set<Tag>{};
        e.compact = true;
        e.statement = "conformal identity on a flat torus; compact variation test bed";
        e.instance = format_instance(name, {{"m", double(m)}, {"amp", amp}});
    } else {
        throw UnknownEntryError("unknown catalog entry '" + name + "'");
    }

    e.default_resolution = e.compact && e.map.source->integration
                               ? e.map.source->integration->default_resolution
                               : 0;
    return e;
}

QuadratureMesh CatalogEntry::mesh(int resolution_override) const {
    if (!compact || !map.source->integration)
        throw MeshError("entry '" + instance + "' has no quadrature mesh (non-compact)");
    int res = resolution_override > 0 ? resolution_override : default_resolution;
    return build_mesh(map.source, res);
}

std::vector<CatalogEntry> default_entries() {
    std::vector<CatalogEntry> out;
    for (const auto& r : registry()) out.push_back(build(r.name));
    return out;
}

void validate_map(const CatalogEntry& entry, int n_samples) {
    const SmoothMap& map = entry.map;
    for (int s = 0; s < n_samples; ++s) {
        Point p = entry.halton_sample(static_cast<std::uint64_t>(s) + 7);
        MapJets ctx(map, p, 1);
        if (map.kind == MapKind::riemannian_immersion) {
            Mat pb = ctx.pullback_metric_values();
            Mat g = ctx.src.g_values();
            double mismatch = 0.0, scale = 0.0;
            for (int i = 0; i < ctx.m; ++i)
                for (int j = 0; j < ctx.m; ++j) {
                    mismatch = std::max(mismatch, std::fabs(pb.at(i, j) - g.at(i, j)));
                    scale = std::max(scale, std::fabs(g.at(i, j)));
                }
            if (mismatch > 1e-8 * (1.0 + scale))
                throw NotAnIsometryError(entry.instance + ": pullback metric mismatch");
        } else if (map.kind == MapKind::submersion) {
            if (rank(ctx.dphi_values()) != ctx.n)
                throw DegenerateMetricError(entry.instance + ": differential rank deficient");
        }
    }
}

Classification classify(const CatalogEntry& entry, int n_samples, double tol_pass,
                        double tol_reject, Exec exec) {
    std::vector<PointDiagnostics> diag(static_cast<std::size_t>(n_samples));
    for_indexed(
        static_cast<std::size_t>(n_samples),
        [&](std::size_t s) {
            Point p = entry.halton_sample(s);
            diag[s] = diagnostics(entry.map, p);
        },
        exec);

    Classification out;
    const int m = entry.map.source->dim;

    // lambda by least squares over the samples: sum <S2,g> / sum <g,g>.
    double num = 0.0;
    for (const auto& d : diag) num += d.trace_s2;
    out.lambda = num / (static_cast<double>(n_samples) * m);

    double tau = 0, tau2 = 0, s2 = 0, nab = 0, lam = 0;
    for (const auto& d : diag) {
        tau = std::max(tau, d.tau_norm);
        tau2 = std::max(tau2, d.tau2_norm);
        s2 = std::max(s2, d.s2_norm);
        nab = std::max(nab, d.nabla_s2_norm);
        Mat r = d.s2;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) r.at(i, j) -= out.lambda * d.g.at(i, j);
        lam = std::max(lam, norm_2covariant(d.ginv, r));
    }
    out.residuals = {{"tau", tau},
                     {"tau2", tau2},
                     {"s2", s2},
                     {"nabla_s2", nab},
                     {"s2_lambda_g", lam}};

    auto decide = [&](const std::string& key, double r, Tag tag) {
        if (r < tol_pass)
            out.tags.insert(tag);
        else if (r <= tol_reject)
            out.inconclusive.push_back(key);
    };
    decide("tau", tau, Tag::harmonic);
    decide("tau2", tau2, Tag::proper_biharmonic);  // refined below
    decide("s2", s2, Tag::s2_zero);
    decide("nabla_s2", nab, Tag::parallel_s2);
    decide("s2_lambda_g", lam, Tag::s2_lambda_g);

    // "proper" means biharmonic without being harmonic.
    if (out.tags.count(Tag::harmonic)) out.tags.erase(Tag::proper_biharmonic);
    return out;
}

Classification classify_or_throw(const CatalogEntry& entry, int n_samples, double tol_pass,
                                 double tol_reject, Exec exec) {
    Classification c = classify(entry, n_samples, tol_pass, tol_reject, exec);
    if (c.is_inconclusive()) {
        std::string what = entry.instance + ": residual in the inconclusive band:";
        for (const auto& k : c.inconclusive)
            what += " " + k + "=" + std::to_string(c.residuals.at(k));
        throw InconclusiveError(what);
    }
    return c;
}

}  // namespace bistress
