#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bistress/jet.hpp"
#include "bistress/rng.hpp"
#include "fixtures.hpp"

using namespace bistress;

namespace {

JetScalar var(const JetSpace& s, int axis, double v) { return JetScalar::variable(s, axis, v); }

}  // namespace

TEST_CASE("polynomial partials are exact") {
    // f(x) = x1^2 x2, third mixed partial d^3 f / dx1^2 dx2 = 2
    const JetSpace& s = JetSpace::get(2, 3);
    auto x = seed_point(s, std::vector<double>{1.0, 1.0});
    JetScalar f = x[0] * x[0] * x[1];
    CHECK(f.partial(std::vector<int>{2, 1}) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(f.value() == doctest::Approx(1.0));
    CHECK(f.partial(std::vector<int>{1, 0}) == doctest::Approx(2.0));
}

TEST_CASE("exp chain rule to order 4") {
    // f(x) = e^{2x}: fourth derivative at 0 is 16
    const JetSpace& s = JetSpace::get(1, 4);
    auto x = seed_point(s, std::vector<double>{0.0});
    JetScalar f = exp(x[0] * 2.0);
    CHECK(f.partial(std::vector<int>{4}) == doctest::Approx(16.0).epsilon(1e-13));
}

TEST_CASE("round sphere metric component second derivative") {
    // g_theta_theta = sin^2(theta) on the unit 2-sphere; at theta = pi/2 the
    // second derivative is -2.
    const JetSpace& s = JetSpace::get(2, 2);
    auto x = seed_point(s, std::vector<double>{M_PI / 2.0, 0.0});
    JetScalar f = sin(x[0]) * sin(x[0]);
    CHECK(f.partial(std::vector<int>{2, 0}) == doctest::Approx(-2.0).epsilon(1e-13));
}

TEST_CASE("fixture partials match closed forms to 1e-12 relative") {
    for (const auto& fx : jet_fixtures()) {
        CAPTURE(fx.name);
        const JetSpace& s = JetSpace::get(fx.dim, 4);
        auto x = seed_point(s, fx.point);
        JetScalar f = fx.eval(x);
        for (int i = 0; i < s.size(); ++i) {
            auto e = s.exponents(i);
            std::vector<int> alpha(e.begin(), e.end());
            double expected = fx.closed_form(alpha, fx.point);
            double got = f.partial(alpha);
            double scale = std::max(1.0, std::fabs(expected));
            CHECK(std::fabs(got - expected) <= 1e-12 * scale);
        }
    }
    CHECK(jet_fixtures().size() >= 20);
}

TEST_CASE("product and chain rules hold for random polynomial pairs") {
    SplitMix64 rng(31337);
    const JetSpace& s = JetSpace::get(3, 4);
    for (int trial = 0; trial < 20; ++trial) {
        Point p = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        auto x = seed_point(s, p);
        double c1 = rng.uniform(-2, 2), c2 = rng.uniform(-2, 2);
        JetScalar f = x[0] * x[1] * c1 + x[2] * x[2] * x[0] + c2;
        JetScalar g = x[1] * x[1] - x[0] * c2 + 1.5;
        JetScalar prod = f * g;
        // Leibniz at first order in every axis.
        for (int axis = 0; axis < 3; ++axis) {
            std::vector<int> a{0, 0, 0};
            a[axis] = 1;
            double lhs = prod.partial(a);
            double rhs = f.partial(a) * g.value() + f.value() * g.partial(a);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        }
        // Division undoes multiplication.
        JetScalar back = prod / g;
        for (int i = 0; i < s.size(); ++i)
            CHECK(back.coeff(i) == doctest::Approx(f.coeff(i)).epsilon(1e-10));
    }
}

TEST_CASE("composition reproduces direct evaluation") {
    // outer(u,v) = sin(u) * v expanded at (u0, v0), composed with
    // u = x^2 + y, v = x - y as jets.
    const JetSpace& xs = JetSpace::get(2, 4);
    SplitMix64 rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        Point p = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
        auto x = seed_point(xs, p);
        JetScalar u = x[0] * x[0] + x[1];
        JetScalar v = x[0] - x[1];

        const JetSpace& ys = JetSpace::get(2, 4);
        auto y = seed_point(ys, std::vector<double>{u.value(), v.value()});
        JetScalar outer = sin(y[0]) * y[1];

        std::vector<JetScalar> args{u, v};
        JetScalar composed = compose(outer, args);
        JetScalar direct = sin(u) * v;
        for (int i = 0; i < xs.size(); ++i)
            CHECK(composed.coeff(i) == doctest::Approx(direct.coeff(i)).epsilon(1e-11));
    }
}

TEST_CASE("derivative operator lowers order and matches coefficients") {
    const JetSpace& s = JetSpace::get(2, 3);
    auto x = seed_point(s, std::vector<double>{0.7, -0.3});
    JetScalar f = exp(x[0]) * sin(x[1]);
    JetScalar fx = f.derivative(0);
    CHECK(fx.order() == 2);
    CHECK(fx.value() == doctest::Approx(std::exp(0.7) * std::sin(-0.3)));
    CHECK(fx.partial(std::vector<int>{0, 1}) ==
          doctest::Approx(std::exp(0.7) * std::cos(-0.3)).epsilon(1e-13));
}

TEST_CASE("domain errors are raised") {
    const JetSpace& s = JetSpace::get(1, 2);
    auto x = seed_point(s, std::vector<double>{-1.0});
    CHECK_THROWS_AS((void)log(x[0]), DomainError);
    CHECK_THROWS_AS((void)sqrt(x[0]), DomainError);
    CHECK_THROWS_AS((void)(1.0 / (x[0] + 1.0)), DomainError);
}

TEST_CASE("orders above the cap are rejected") {
    CHECK_THROWS_AS(JetSpace::get(2, 5), UnsupportedOrderError);
}

TEST_CASE("jet matrix inverse solves against identity") {
    const JetSpace& s = JetSpace::get(2, 2);
    auto x = seed_point(s, std::vector<double>{0.4, 1.1});
    JetMat g(2);
    g.at(0, 0) = exp(x[0]) + 1.0;
    g.at(0, 1) = x[0] * x[1] * 0.1;
    g.at(1, 0) = g.at(0, 1);
    g.at(1, 1) = sin(x[1]) + 2.0;
    JetScalar det;
    JetMat inv = jet_mat_inverse(g, &det);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            JetScalar acc = JetScalar::constant(s, 0.0);
            for (int k = 0; k < 2; ++k) acc += g.at(i, k) * inv.at(k, j);
            for (int c = 0; c < s.size(); ++c)
                CHECK(acc.coeff(c) == doctest::Approx(i == j ? (c == 0 ? 1.0 : 0.0) : 0.0)
                                          .epsilon(1e-12));
        }
    double detv = (std::exp(0.4) + 1.0) * (std::sin(1.1) + 2.0) - 0.4 * 1.1 * 0.1 * 0.4 * 1.1 * 0.1;
    (void)detv;
    CHECK(det.value() ==
          doctest::Approx((std::exp(0.4) + 1.0) * (std::sin(1.1) + 2.0) -
                          (0.4 * 1.1 * 0.1) * (0.4 * 1.1 * 0.1)));
}
