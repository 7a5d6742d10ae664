#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bistress/catalog.hpp"
#include "bistress/variations.hpp"

using namespace bistress;

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752;
}

TEST_CASE("bienergy of the equator map vanishes; S^2(a) matches the closed form") {
    auto eq = build("hypersphere", {{"m", 2}, {"a", 1.0}});
    auto mesh_eq = eq.mesh(16);
    CHECK(bienergy(eq.map, mesh_eq) < 1e-18);

    // F = 1/2 vol(S^2(a)) |tau|^2 = 8 pi (1 - a^2)
    double a = 0.8;
    auto e = build("hypersphere", {{"m", 2}, {"a", a}});
    auto mesh = e.mesh(32);
    double expected = 8.0 * M_PI * (1.0 - a * a);
    CHECK(bienergy(e.map, mesh) == doctest::Approx(expected).epsilon(1e-7));
}

TEST_CASE("zero variation direction gives zero first variation") {
    auto e = build("hypersphere", {{"m", 2}, {"a", 0.8}});
    auto mesh = e.mesh(12);
    MetricFn zero = [](std::span<const JetScalar> x, JetMat& w) {
        for (auto& v : w.a) v = JetScalar::constant_like(x[0], 0.0);
    };
    auto var = make_variation(*e.map.source, zero, mesh);
    CHECK(first_variation_fd(e.map, var, mesh) == doctest::Approx(0.0));
    CHECK(first_variation_s2(e.map, zero, mesh) == doctest::Approx(0.0));
}

TEST_CASE("homothety direction: dF matches the (m-4)/2 scaling law") {
    for (int m : {2, 3}) {
        auto e = build("hypersphere", {{"m", double(m)}, {"a", 0.8}});
        auto mesh = e.mesh(m == 2 ? 24 : 8);
        double F = bienergy(e.map, mesh);
        auto var = make_variation(*e.map.source, metric_direction(*e.map.source), mesh);
        double expected = 0.5 * (m - 4.0) * F;  // d/dt (1+t)^{(m-4)/2} F at 0
        CHECK(first_variation_fd(e.map, var, mesh, 1e-4) ==
              doctest::Approx(expected).epsilon(1e-7));
    }
}

TEST_CASE("homothety law at finite t for m in {2,3,4,5}") {
    for (int m : {2, 3, 4, 5}) {
        auto e = build("hypersphere", {{"m", double(m)}, {"a", 0.8}});
        auto mesh = e.mesh(m <= 2 ? 16 : (m == 3 ? 6 : 3));
        for (double t : {0.1, -0.1, 0.01, -0.01}) {
            CAPTURE(m);
            CAPTURE(t);
            CHECK(std::fabs(homothety_residual(e.map, mesh, t)) < 1e-8);
        }
    }
}

TEST_CASE("fd and stress-energy routes agree on random variations (sphere)") {
    auto e = build("hypersphere", {{"m", 2}, {"a", 0.8}});
    auto mesh = e.mesh(16);
    auto cache = cache_s2(e.map, mesh);
    SplitMix64 rng(4242);
    for (int trial = 0; trial < 5; ++trial) {
        auto var = make_variation(*e.map.source, random_omega(*e.map.source, rng), mesh);
        auto rep = run_variation(e.map, var, mesh, cache);
        CAPTURE(trial);
        CAPTURE(rep.dF_fd);
        CAPTURE(rep.dF_s2);
        CHECK(rep.relative_gap < 1e-4);
    }
}

TEST_CASE("fd and stress-energy routes agree on the conformal torus") {
    auto e = build("conformal_identity_torus", {{"m", 3}, {"amp", 0.25}});
    auto mesh = e.mesh(8);
    auto cache = cache_s2(e.map, mesh);
    SplitMix64 rng(777);
    for (int trial = 0; trial < 3; ++trial) {
        auto var = make_variation(*e.map.source, random_omega(*e.map.source, rng), mesh);
        auto rep = run_variation(e.map, var, mesh, cache);
        CHECK(rep.relative_gap < 1e-3);
    }
}

TEST_CASE("S2 = 0 maps have vanishing first variation in every direction") {
    // S^4(a) in S^5 is pseudo-umbilical in dimension 4, so S2 = 0 and the
    // stress-energy route gives exactly zero.
    auto e = build("hypersphere", {{"m", 4}, {"a", 0.7}});
    auto mesh = e.mesh(2);
    SplitMix64 rng(31);
    for (int trial = 0; trial < 2; ++trial) {
        auto omega = random_omega(*e.map.source, rng);
        CHECK(std::fabs(first_variation_s2(e.map, omega, mesh)) < 1e-10);
    }
}

TEST_CASE("trace direction in dimension four integrates to zero") {
    auto e = build("hypersphere", {{"m", 4}, {"a", 0.8}});
    auto mesh = e.mesh(3);
    CHECK(std::fabs(first_variation_s2(e.map, metric_direction(*e.map.source), mesh)) <
          1e-9);
}

TEST_CASE("xi field closed forms") {
    // omega = g on a flat chart: xi = 0
    auto flat = make_euclidean(3, Box{{-1, -1, -1}, {1, 1, 1}});
    auto xi0 = xi_field(*flat, flat->metric, Point{0.2, 0.1, -0.4});
    CHECK(xi0.max_abs() < 1e-13);

    // omega = f g: xi = (1 - m/2) grad f (checked on the round sphere)
    auto sphere = build("hypersphere", {{"m", 2}, {"a", 1.0}}).map.source;
    ScalarFn f = [](std::span<const JetScalar> x) { return sin(x[0]) * cos(x[1]); };
    MetricFn fg = [&sphere, &f](std::span<const JetScalar> x, JetMat& w) {
        sphere->metric(x, w);
        JetScalar fv = f(x);
        for (auto& v : w.a) v = v * fv;
    };
    SplitMix64 rng(8);
    for (int t = 0; t < 4; ++t) {
        Point p = sphere->domain.sample(rng, 0.2);
        auto xi = xi_field(*sphere, fg, p);
        MetricJets mj(*sphere, p, 1);
        JetScalar fj = f(mj.vars);
        Mat ginv = mj.ginv_values();
        for (int k = 0; k < 2; ++k) {
            double grad_k = 0.0;
            for (int l = 0; l < 2; ++l) grad_k += ginv.at(k, l) * fj.derivative(l).value();
            CHECK(xi.at({k}) == doctest::Approx((1.0 - 1.0) * grad_k).epsilon(1e-9));
        }
    }
    // and for m = 3 on the conformal torus chart: coefficient (1 - 3/2)
    auto torus = build("conformal_identity_torus", {{"m", 3}, {"amp", 0.2}}).map.source;
    MetricFn fg3 = [&torus, &f](std::span<const JetScalar> x, JetMat& w) {
        torus->metric(x, w);
        JetScalar fv = f(x);
        for (auto& v : w.a) v = v * fv;
    };
    for (int t = 0; t < 4; ++t) {
        Point p = torus->domain.sample(rng, 0.1);
        auto xi = xi_field(*torus, fg3, p);
        MetricJets mj(*torus, p, 1);
        JetScalar fj = f(mj.vars);
        Mat ginv = mj.ginv_values();
        for (int k = 0; k < 3; ++k) {
            double grad_k = 0.0;
            for (int l = 0; l < 3; ++l) grad_k += ginv.at(k, l) * fj.derivative(l).value();
            CHECK(xi.at({k}) == doctest::Approx(-0.5 * grad_k).epsilon(1e-9));
        }
    }
}

TEST_CASE("pointwise variation identity for the tension density") {
    auto e = build("hypersphere", {{"m", 2}, {"a", 0.8}});
    SplitMix64 rng(9);
    auto mesh = e.mesh(8);
    for (int t = 0; t < 4; ++t) {
        auto omega = random_omega(*e.map.source, rng);
        Point p = e.sample(rng);
        CHECK(pointwise_variation_residual(e.map, omega, p) < 1e-5);
    }
}

TEST_CASE("isovolumetric projection removes the trace and is idempotent") {
    auto e = build("hypersphere", {{"m", 2}, {"a", 0.9}});
    auto mesh = e.mesh(16);
    auto man = e.map.source;

    // omega = g projects to zero
    auto proj_g = isovolumetric_project(*man, metric_direction(*man), mesh);
    CHECK(proj_g.c == doctest::Approx(1.0).epsilon(1e-10));
    SplitMix64 rng(10);
    Point p = e.sample(rng);
    const JetSpace& s = JetSpace::get(2, 0);
    auto vars = seed_point(s, p);
    JetMat w(2);
    proj_g.omega(vars, w);
    for (const auto& v : w.a) CHECK(std::fabs(v.value()) < 1e-12);

    // random omega: projected trace integral vanishes; applying the
    // projection twice changes nothing.
    auto omega = random_omega(*man, rng);
    auto proj = isovolumetric_project(*man, omega, mesh);
    CHECK(std::fabs(proj.trace_integral_after) < 1e-10);
    auto twice = isovolumetric_project(*man, proj.omega, mesh);
    CHECK(std::fabs(twice.c) < 1e-12);

    // already trace-orthogonal directions are unchanged
    auto thrice = isovolumetric_project(*man, twice.omega, mesh);
    CHECK(std::fabs(thrice.c) < 1e-12);
}

TEST_CASE("lambda fit on hyperspheres and Clifford tori") {
    // S^3(a) in S^4: S2 = lambda g with lambda = |tau|^2 / 6
    double a = 0.75;
    auto e = build("hypersphere", {{"m", 3}, {"a", a}});
    auto mesh = e.mesh(8);
    auto fit = lambda_g_residual(e.map, mesh);
    double tau_sq = 9.0 * (1.0 - a * a) / (a * a);
    CHECK(fit.lambda == doctest::Approx(tau_sq / 6.0).epsilon(1e-9));
    CHECK(fit.residual_l2 < 1e-8);

    // m = 4: lambda = 0
    auto e4 = build("hypersphere", {{"m", 4}, {"a", 0.8}});
    auto fit4 = lambda_g_residual(e4.map, e4.mesh(3));
    CHECK(std::fabs(fit4.lambda) < 1e-10);
    CHECK(fit4.residual_l2 < 1e-8);

    // non-umbilical Clifford torus: residual bounded away from zero
    auto cl = build("clifford_torus", {{"m1", 1}, {"m2", 2}, {"a1", 0.6}});
    auto fitc = lambda_g_residual(cl.map, cl.mesh(8));
    CHECK(fitc.residual_l2 > 1e-3);
}

TEST_CASE("isovolumetric criticality of S2 = lambda g immersions") {
    auto e = build("hypersphere", {{"m", 3}, {"a", kInvSqrt2}});
    auto mesh = e.mesh(6);
    auto man = e.map.source;
    double F = bienergy(e.map, mesh);
    SplitMix64 rng(11);
    for (int t = 0; t < 3; ++t) {
        auto omega = random_omega(*man, rng);
        auto proj = isovolumetric_project(*man, omega, mesh);
        auto var = make_variation(*man, proj.omega, mesh);
        double d = first_variation_fd(e.map, var, mesh);
        CHECK(std::fabs(d) < 1e-5 * (1.0 + std::fabs(F)));
    }
}

TEST_CASE("integrated trace identity: two quadrature routes agree") {
    for (const char* name : {"circle_arclength", "minimal_in_umbilical"}) {
        auto e = build(name);
        CHECK(trace_integral_consistency(e.map, e.mesh()) < 1e-5);
    }
    auto s2 = build("hypersphere", {{"m", 2}, {"a", 0.8}});
    CHECK(trace_integral_consistency(s2.map, s2.mesh(24)) < 1e-5);
    auto s3 = build("hypersphere", {{"m", 3}, {"a", 0.7}});
    CHECK(trace_integral_consistency(s3.map, s3.mesh(10)) < 1e-5);
    auto torus = build("conformal_identity_torus", {{"m", 3}, {"amp", 0.25}});
    CHECK(trace_integral_consistency(torus.map, torus.mesh(8)) < 1e-5);
}

TEST_CASE("steps outside the certified range are rejected") {
    auto e = build("hypersphere", {{"m", 2}, {"a", 0.8}});
    auto mesh = e.mesh(8);
    auto var = make_variation(*e.map.source, metric_direction(*e.map.source), mesh);
    CHECK(var.t_max > 0.1);  // omega = g allows steps up to ~0.9/sqrt(2)
    CHECK_THROWS_AS(first_variation_fd(e.map, var, mesh, 10.0), StepTooLargeError);
    CHECK_THROWS_AS(first_variation_fd(e.map, var, mesh, -1.0), StepTooLargeError);
}

TEST_CASE("bienergy requires a mesh") {
    auto e = build("cubic_curve");
    QuadratureMesh empty;
    empty.manifold = e.map.source;
    CHECK_THROWS_AS(bienergy(e.map, empty), MeshError);
}
