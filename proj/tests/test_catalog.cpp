#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bistress/catalog.hpp"

using namespace bistress;

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752;
}

TEST_CASE("registry carries the nine required constructions") {
    std::vector<std::string> required = {
        "cubic_curve",      "circle_arclength",     "warped_projection",
        "conformal_identity_a", "conformal_identity_b", "hypersphere",
        "clifford_torus",   "minimal_in_umbilical", "horizontally_conformal"};
    for (const auto& name : required) {
        bool found = false;
        for (const auto& r : registry()) found |= (r.name == name);
        CAPTURE(name);
        CHECK(found);
    }
}

TEST_CASE("build validates names and parameters") {
    CHECK_THROWS_AS(build("moebius_strip"), UnknownEntryError);
    CHECK_THROWS_AS(build("hypersphere", {{"a", 1.5}}), InvalidParamError);
    CHECK_THROWS_AS(build("hypersphere", {{"a", 0.0}}), InvalidParamError);
    CHECK_THROWS_AS(build("hypersphere", {{"m", 7}}), InvalidParamError);
    CHECK_THROWS_AS(build("hypersphere", {{"m", 2.5}}), InvalidParamError);
    CHECK_THROWS_AS(build("clifford_torus", {{"a1", 0.6}, {"a2", 0.9}}), InvalidParamError);
    CHECK_THROWS_AS(build("clifford_torus", {{"a1", 1.0}}), InvalidParamError);
    CHECK_THROWS_AS(build("cubic_curve", {{"a1", 0}, {"a2", 0}, {"a3", 0}}), InvalidParamError);
    CHECK_THROWS_AS(build("hypersphere", {{"q", 1.0}}), InvalidParamError);
    // a2 consistent with a1 is accepted
    CHECK_NOTHROW(build("clifford_torus", {{"a1", 0.6}, {"a2", 0.8}}));
}

TEST_CASE("kind-specific invariants hold on every default entry") {
    for (const auto& e : default_entries()) {
        CAPTURE(e.instance);
        CHECK_NOTHROW(validate_map(e));
    }
}

TEST_CASE("expected tags for headline parameter choices") {
    auto tags = [](const CatalogEntry& e) { return e.expected; };

    auto b1 = build("hypersphere", {{"m", 3}, {"a", kInvSqrt2}});
    CHECK(tags(b1) == std::set<Tag>{Tag::proper_biharmonic, Tag::parallel_s2,
                                    Tag::s2_lambda_g});
    auto b2 = build("hypersphere", {{"m", 3}, {"a", 1.0}});
    CHECK(tags(b2).count(Tag::harmonic) == 1);
    auto b3 = build("conformal_identity_b", {{"m", 4}, {"slope", 1.0}});
    CHECK(tags(b3) == std::set<Tag>{Tag::proper_biharmonic});
    auto b4 = build("conformal_identity_b", {{"m", 5}, {"slope", 1.0}});
    CHECK(tags(b4).empty());
    auto b5 = build("hypersphere", {{"m", 4}, {"a", 0.8}});
    CHECK(tags(b5).count(Tag::s2_zero) == 1);
    CHECK(tags(b5).count(Tag::proper_biharmonic) == 0);
}

TEST_CASE("classification matches the expected tags across a parameter grid") {
    std::vector<CatalogEntry> grid;
    grid.push_back(build("cubic_curve"));
    grid.push_back(build("circle_arclength"));
    grid.push_back(build("warped_projection"));
    grid.push_back(build("conformal_identity_a"));
    grid.push_back(build("conformal_identity_b", {{"m", 3}}));
    grid.push_back(build("conformal_identity_b", {{"m", 4}}));
    grid.push_back(build("hypersphere", {{"m", 2}, {"a", 0.6}}));
    grid.push_back(build("hypersphere", {{"m", 3}, {"a", kInvSqrt2}}));
    grid.push_back(build("hypersphere", {{"m", 3}, {"a", 1.0}}));
    grid.push_back(build("hypersphere", {{"m", 4}, {"a", 0.8}}));
    grid.push_back(build("clifford_torus", {{"m1", 1}, {"m2", 2}, {"a1", 0.6}}));
    grid.push_back(build("clifford_torus", {{"m1", 1}, {"m2", 2}, {"a1", kInvSqrt2}}));
    grid.push_back(build("clifford_torus", {{"m1", 1}, {"m2", 1}, {"a1", kInvSqrt2}}));
    grid.push_back(build("minimal_in_umbilical", {{"a", kInvSqrt2}}));
    grid.push_back(build("minimal_in_umbilical", {{"a", 0.6}}));
    grid.push_back(build("horizontally_conformal"));
    grid.push_back(build("conformal_identity_torus"));

    for (const auto& e : grid) {
        CAPTURE(e.instance);
        auto c = classify_or_throw(e, 24);
        CAPTURE(tags_to_string(c.tags));
        CAPTURE(tags_to_string(e.expected));
        CHECK(c.tags == e.expected);
    }
}

TEST_CASE("cubic curve classifies as S2 = 0 without being harmonic") {
    auto c = classify_or_throw(build("cubic_curve"), 24);
    CHECK(c.tags.count(Tag::s2_zero) == 1);
    CHECK(c.tags.count(Tag::harmonic) == 0);
    CHECK(c.residuals.at("tau") > 1.0);
}

TEST_CASE("clifford torus 0.6 classifies as parallel but not biharmonic") {
    auto c = classify_or_throw(build("clifford_torus", {{"m1", 1}, {"m2", 2}, {"a1", 0.6}}), 24);
    CHECK(c.tags == std::set<Tag>{Tag::parallel_s2});
    CHECK(c.residuals.at("tau2") > 1e-2);
    CHECK(c.residuals.at("s2_lambda_g") > 1e-3);
}

TEST_CASE("hypersphere(4, 0.8) classifies as S2 = 0 and not harmonic") {
    auto c = classify_or_throw(build("hypersphere", {{"m", 4}, {"a", 0.8}}), 24);
    CHECK(c.tags.count(Tag::s2_zero) == 1);
    CHECK(c.tags.count(Tag::harmonic) == 0);
}

TEST_CASE("surface case: for m = 2 a nonzero tension forces S2 != 0") {
    // contrapositive of the surface proposition: S^2(a) in S^3 with a < 1 is
    // not harmonic, so its stress-energy tensor cannot vanish.
    auto c = classify_or_throw(build("hypersphere", {{"m", 2}, {"a", 0.75}}), 16);
    CHECK(c.residuals.at("tau") > 0.5);
    CHECK(c.residuals.at("s2") > 1e-2);
}

TEST_CASE("prop 3.1 value: circle stress-energy density") {
    auto e = build("circle_arclength");
    auto c = classify_or_throw(e, 16);
    // S2 = (3/2)|tau|^2 dt^2 with |tau| = 1: the lambda fit must find 1.5
    CHECK(c.lambda == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("near-threshold residuals are reported as inconclusive") {
    // S^2(a) with a chosen so |tau| = 2 sqrt(1-a^2)/a falls inside the
    // forbidden band (1e-6, 1e-3).
    double target = 1e-4;  // |tau| target
    double a = 1.0 / std::sqrt(1.0 + target * target / 4.0);
    auto e = build("hypersphere", {{"m", 2}, {"a", a}});
    auto c = classify(e, 8);
    CHECK(c.is_inconclusive());
    CHECK_THROWS_AS(classify_or_throw(e, 8), InconclusiveError);
}

TEST_CASE("no catalog entry is a compact Riemannian submersion with basic tension") {
    // A compact orientable domain would force such a submersion with
    // constant fiber volume to be harmonic; the catalog keeps its
    // submersion examples on non-compact domains, so the constraint is
    // vacuously respected.
    for (const auto& e : default_entries()) {
        if (e.map.kind == MapKind::submersion) CHECK_FALSE(e.compact);
    }
}

TEST_CASE("default entries expose meshes only when compact") {
    for (const auto& e : default_entries()) {
        CAPTURE(e.instance);
        if (e.compact) {
            auto mesh = e.mesh();
            CHECK(mesh.size() > 0);
        } else {
            CHECK_THROWS_AS(e.mesh(), MeshError);
        }
    }
}
