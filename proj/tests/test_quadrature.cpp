#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bistress/catalog.hpp"
#include "bistress/quadrature.hpp"

using namespace bistress;

TEST_CASE("sphere area to 1e-6 relative at the default resolution") {
    auto man = build("hypersphere", {{"m", 2}, {"a", 1.0}}).map.source;
    auto mesh = build_mesh(man, default_resolution(2));
    double area = integrate([](std::span<const double>) { return 1.0; }, mesh);
    CHECK(std::fabs(area - 4.0 * M_PI) / (4.0 * M_PI) < 1e-6);
}

TEST_CASE("clifford torus volume equals the product of circumferences") {
    // S^1(1/sqrt 2) x S^1(1/sqrt 2): (2 pi / sqrt 2)^2 = 2 pi^2
    auto man = build("clifford_torus", {{"m1", 1}, {"m2", 1}, {"a1", 1.0 / std::sqrt(2.0)}})
                   .map.source;
    auto mesh = build_mesh(man, 64);
    double vol = integrate([](std::span<const double>) { return 1.0; }, mesh);
    CHECK(std::fabs(vol - 2.0 * M_PI * M_PI) / (2.0 * M_PI * M_PI) < 1e-6);
}

TEST_CASE("odd integrand over the sphere cancels") {
    auto man = build("hypersphere", {{"m", 2}, {"a", 1.0}}).map.source;
    auto mesh = build_mesh(man, 64);
    double v = integrate([](std::span<const double> p) { return std::cos(p[0]); }, mesh);
    CHECK(std::fabs(v) < 1e-9);
}

TEST_CASE("sphere volumes for higher dimensions") {
    // vol S^3(1) = 2 pi^2, vol S^3(a) = a^3 vol S^3(1)
    double a = 0.8;
    auto man = build("hypersphere", {{"m", 3}, {"a", a}}).map.source;
    auto mesh = build_mesh(man, 16);
    double vol = integrate([](std::span<const double>) { return 1.0; }, mesh);
    double expected = a * a * a * 2.0 * M_PI * M_PI;
    CHECK(std::fabs(vol - expected) / expected < 1e-5);
}

TEST_CASE("doubling the resolution reduces the error by at least 4x") {
    auto man = build("hypersphere", {{"m", 2}, {"a", 1.0}}).map.source;
    // Non-symmetric smooth integrand to avoid accidental exactness.
    auto f = [](std::span<const double> p) { return std::exp(0.3 * std::cos(p[0])) + 0.2 * std::sin(p[1]); };
    auto fine = build_mesh(man, 192);
    double reference = integrate(f, fine);
    double e1 = std::fabs(integrate(f, build_mesh(man, 6)) - reference);
    double e2 = std::fabs(integrate(f, build_mesh(man, 12)) - reference);
    CHECK(e1 >= 4.0 * e2);
}

TEST_CASE("empty or missing meshes raise") {
    auto man = build("cubic_curve").map.source;  // non-compact
    CHECK_THROWS_AS(build_mesh(man, 8), MeshError);
    QuadratureMesh empty;
    empty.manifold = build("hypersphere").map.source;
    CHECK_THROWS_AS(integrate([](std::span<const double>) { return 1.0; }, empty), MeshError);
}

TEST_CASE("deterministic nodes and weights") {
    auto man = build("hypersphere", {{"m", 2}, {"a", 0.9}}).map.source;
    auto m1 = build_mesh(man, 10);
    auto m2 = build_mesh(man, 10);
    REQUIRE(m1.size() == m2.size());
    for (std::size_t i = 0; i < m1.size(); ++i) {
        CHECK(m1.weights[i] == m2.weights[i]);
        CHECK(m1.nodes[i] == m2.nodes[i]);
    }
}
