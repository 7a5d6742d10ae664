#pragma once

// Analytic fixtures with hand-derived closed-form mixed partials, used both
// by the jet unit tests and by the acceptance suite.

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bistress/jet.hpp"
#include "bistress/linalg.hpp"

namespace bistress {

struct JetFixture {
    std::string name;
    int dim;
    Point point;
    std::function<JetScalar(std::span<const JetScalar>)> eval;
    std::function<double(std::span<const int>, const Point&)> closed_form;
};

namespace fixture_detail {

inline double falling(double p, int k) {
    double f = 1.0;
    for (int i = 0; i < k; ++i) f *= (p - i);
    return f;
}

inline int total(std::span<const int> a) {
    int s = 0;
    for (int v : a) s += v;
    return s;
}

inline double coeff_prod(std::span<const double> c, std::span<const int> a) {
    double p = 1.0;
    for (std::size_t i = 0; i < a.size(); ++i) p *= std::pow(c[i], a[i]);
    return p;
}

inline double lin(std::span<const double> c, double c0, const Point& x) {
    double u = c0;
    for (std::size_t i = 0; i < x.size(); ++i) u += c[i] * x[i];
    return u;
}

// d^alpha of prod_i x_i^{p_i}
inline double monomial(std::span<const int> powers, std::span<const int> a, const Point& x) {
    double v = 1.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > powers[i]) return 0.0;
        v *= falling(powers[i], a[i]) * std::pow(x[i], powers[i] - a[i]);
    }
    return v;
}

// d^alpha of exp(c . x + c0)
inline double lin_exp(std::span<const double> c, double c0, std::span<const int> a,
                      const Point& x) {
    return coeff_prod(c, a) * std::exp(lin(c, c0, x));
}

// d^alpha of sin(c . x + c0)
inline double lin_sin(std::span<const double> c, double c0, std::span<const int> a,
                      const Point& x) {
    return coeff_prod(c, a) * std::sin(lin(c, c0, x) + total(a) * M_PI / 2.0);
}

inline double lin_cos(std::span<const double> c, double c0, std::span<const int> a,
                      const Point& x) {
    return coeff_prod(c, a) * std::cos(lin(c, c0, x) + total(a) * M_PI / 2.0);
}

// d^alpha of log(c . x + c0)
inline double lin_log(std::span<const double> c, double c0, std::span<const int> a,
                      const Point& x) {
    int k = total(a);
    double u = lin(c, c0, x);
    if (k == 0) return std::log(u);
    double sign = (k % 2 == 1) ? 1.0 : -1.0;
    double fact = 1.0;
    for (int i = 2; i < k; ++i) fact *= i;
    return sign * fact * coeff_prod(c, a) / std::pow(u, k);
}

// d^alpha of (c . x + c0)^p
inline double lin_pow(std::span<const double> c, double c0, double p,
                      std::span<const int> a, const Point& x) {
    int k = total(a);
    double u = lin(c, c0, x);
    return falling(p, k) * coeff_prod(c, a) * std::pow(u, p - k);
}

// n-th derivative of sin at u
inline double dsin(double u, int n) { return std::sin(u + n * M_PI / 2.0); }

}  // namespace fixture_detail

inline const std::vector<JetFixture>& jet_fixtures() {
    using namespace fixture_detail;
    using J = std::span<const JetScalar>;
    using A = std::span<const int>;
    static const std::vector<JetFixture> fixtures = [] {
        std::vector<JetFixture> f;

        f.push_back({"cubic_poly_1d", 1, {0.7},
                     [](J x) { return x[0] * x[0] * x[0] * 2.0 - x[0] + 0.5; },
                     [](A a, const Point& x) {
                         static const int p3[] = {3}, p1[] = {1}, p0[] = {0};
                         return 2.0 * monomial(p3, a, x) - monomial(p1, a, x) +
                                0.5 * monomial(p0, a, x);
                     }});
        f.push_back({"exp_2t", 1, {0.3}, [](J x) { return exp(x[0] * 2.0); },
                     [](A a, const Point& x) {
                         static const double c[] = {2.0};
                         return lin_exp(c, 0.0, a, x);
                     }});
        f.push_back({"sin_3t_m1", 1, {0.4}, [](J x) { return sin(x[0] * 3.0 - 1.0); },
                     [](A a, const Point& x) {
                         static const double c[] = {3.0};
                         return lin_sin(c, -1.0, a, x);
                     }});
        f.push_back({"pow_2p5", 1, {0.2},
                     [](J x) { return pow(x[0] * 0.8 + 1.5, 2.5); },
                     [](A a, const Point& x) {
                         static const double c[] = {0.8};
                         return lin_pow(c, 1.5, 2.5, a, x);
                     }});
        f.push_back({"log_2pt", 1, {0.1}, [](J x) { return log(x[0] + 2.0); },
                     [](A a, const Point& x) {
                         static const double c[] = {1.0};
                         return lin_log(c, 2.0, a, x);
                     }});
        f.push_back({"sin_squared", 1, {M_PI / 5.0},
                     [](J x) { return sin(x[0]) * sin(x[0]); },
                     [](A a, const Point& x) {
                         int k = total(a);
                         if (k == 0) return std::sin(x[0]) * std::sin(x[0]);
                         // sin^2 t = 1/2 - cos(2t)/2
                         return -0.5 * std::pow(2.0, k) *
                                std::cos(2.0 * x[0] + k * M_PI / 2.0);
                     }});
        f.push_back({"x2y", 2, {1.0, 1.0}, [](J x) { return x[0] * x[0] * x[1]; },
                     [](A a, const Point& x) {
                         static const int p[] = {2, 1};
                         return monomial(p, a, x);
                     }});
        f.push_back({"x3y2", 2, {0.8, -0.6},
                     [](J x) { return x[0] * x[0] * x[0] * x[1] * x[1]; },
                     [](A a, const Point& x) {
                         static const int p[] = {3, 2};
                         return monomial(p, a, x);
                     }});
        f.push_back({"exp_x_m2y", 2, {0.3, 0.2},
                     [](J x) { return exp(x[0] - x[1] * 2.0); },
                     [](A a, const Point& x) {
                         static const double c[] = {1.0, -2.0};
                         return lin_exp(c, 0.0, a, x);
                     }});
        f.push_back({"sin_2xpy", 2, {0.5, -0.7},
                     [](J x) { return sin(x[0] * 2.0 + x[1]); },
                     [](A a, const Point& x) {
                         static const double c[] = {2.0, 1.0};
                         return lin_sin(c, 0.0, a, x);
                     }});
        f.push_back({"cos_xmy", 2, {0.4, 0.9},
                     [](J x) { return cos(x[0] - x[1] + 0.5); },
                     [](A a, const Point& x) {
                         static const double c[] = {1.0, -1.0};
                         return lin_cos(c, 0.5, a, x);
                     }});
        f.push_back({"log_aff2", 2, {0.25, -0.1},
                     [](J x) { return log(x[0] + x[1] * 2.0 + 3.0); },
                     [](A a, const Point& x) {
                         static const double c[] = {1.0, 2.0};
                         return lin_log(c, 3.0, a, x);
                     }});
        f.push_back({"inv_aff", 2, {0.3, 0.4},
                     [](J x) { return 1.0 / (x[0] - x[1] + 2.0); },
                     [](A a, const Point& x) {
                         static const double c[] = {1.0, -1.0};
                         return lin_pow(c, 2.0, -1.0, a, x);
                     }});
        f.push_back({"exp_sin_sep", 2, {0.6, 1.1},
                     [](J x) { return exp(x[0]) * sin(x[1]); },
                     [](A a, const Point& x) {
                         return std::exp(x[0]) * dsin(x[1], a[1]);
                     }});
        f.push_back({"x2_cos_sep", 2, {1.2, 0.8},
                     [](J x) { return x[0] * x[0] * cos(x[1]); },
                     [](A a, const Point& x) {
                         static const int p[] = {2};
                         Point x0{x[0]};
                         const int aa[] = {a[0]};
                         return monomial(p, aa, x0) * dsin(x[1] + M_PI / 2.0, a[1]);
                     }});
        f.push_back({"sqrt_exp_sep", 2, {0.4, -0.2},
                     [](J x) { return sqrt(x[0] + 1.5) * exp(x[1]); },
                     [](A a, const Point& x) {
                         static const double c[] = {1.0};
                         Point x0{x[0]};
                         const int aa[] = {a[0]};
                         return lin_pow(c, 1.5, 0.5, aa, x0) * std::exp(x[1]);
                     }});
        f.push_back({"pow_3p5_2d", 2, {0.2, 0.4},
                     [](J x) { return pow(x[0] * 0.5 + x[1] * 0.25 + 1.0, 3.5); },
                     [](A a, const Point& x) {
                         static const double c[] = {0.5, 0.25};
                         return lin_pow(c, 1.0, 3.5, a, x);
                     }});
        f.push_back({"xyz2", 3, {0.9, 1.1, 0.7},
                     [](J x) { return x[0] * x[1] * x[2] * x[2]; },
                     [](A a, const Point& x) {
                         static const int p[] = {1, 1, 2};
                         return monomial(p, a, x);
                     }});
        f.push_back({"exp_sum3", 3, {0.1, 0.2, -0.3},
                     [](J x) { return exp(x[0] + x[1] + x[2]); },
                     [](A a, const Point& x) {
                         static const double c[] = {1.0, 1.0, 1.0};
                         return lin_exp(c, 0.0, a, x);
                     }});
        f.push_back({"sin_triple_sep", 3, {0.7, 0.3, 1.2},
                     [](J x) { return sin(x[0]) * sin(x[1]) * sin(x[2]); },
                     [](A a, const Point& x) {
                         return dsin(x[0], a[0]) * dsin(x[1], a[1]) * dsin(x[2], a[2]);
                     }});
        f.push_back({"log_aff3", 3, {0.3, 0.5, -0.2},
                     [](J x) { return log(x[0] - x[1] + x[2] * 2.0 + 4.0); },
                     [](A a, const Point& x) {
                         static const double c[] = {1.0, -1.0, 2.0};
                         return lin_log(c, 4.0, a, x);
                     }});
        return f;
    }();
    return fixtures;
}

}  // namespace bistress
