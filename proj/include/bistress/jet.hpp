#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#if __has_include(<boost/container/small_vector.hpp>)
#include <boost/container/small_vector.hpp>
#define BISTRESS_HAVE_SMALL_VECTOR 1
#endif

#include "bistress/errors.hpp"

namespace bistress {

inline constexpr int kMaxJetOrder = 4;
inline constexpr int kMaxJetDim = 8;

// Coefficient table shared by every jet of a given (dim, order). Orders the
// multi-indices by total degree first (graded lexicographic), so the
// coefficients of a lower order form a prefix of a higher one.
class JetSpace {
  public:
    // Cached, never destroyed; pointers stay valid for the process lifetime.
    static const JetSpace& get(int dim, int order);

    int dim() const { return dim_; }
    int order() const { return order_; }
    int size() const { return static_cast<int>(exponents_.size()); }

    std::span<const std::uint8_t> exponents(int i) const {
        return {exp_flat_.data() + static_cast<std::size_t>(i) * dim_,
                static_cast<std::size_t>(dim_)};
    }
    int degree(int i) const { return degree_[i]; }
    double factorial(int i) const { return factorial_[i]; }

    // Index of alpha_i + alpha_j, or -1 if the sum exceeds the order.
    int product_index(int i, int j) const {
        return product_[static_cast<std::size_t>(i) * size() + j];
    }
    // Index of alpha_i + e_axis, or -1.
    int raise_index(int i, int axis) const {
        return raise_[static_cast<std::size_t>(i) * dim_ + axis];
    }
    // For i > 0: the first axis with positive exponent and the index of
    // alpha_i - e_axis. Drives monomial recurrences during composition.
    int down_axis(int i) const { return down_axis_[i]; }
    int down_index(int i) const { return down_index_[i]; }

    int index_of(std::span<const int> alpha) const;

  private:
    JetSpace(int dim, int order);

    int dim_, order_;
    std::vector<std::vector<std::uint8_t>> exponents_;  // kept for building only
    std::vector<std::uint8_t> exp_flat_;
    std::vector<int> degree_;
    std::vector<double> factorial_;
    std::vector<int> product_;
    std::vector<int> raise_;
    std::vector<int> down_axis_, down_index_;
    std::vector<int> lookup_;  // dense mixed-radix lookup
    int key_of(std::span<const std::uint8_t> alpha) const;
};

// Truncated multivariate Taylor expansion of a scalar function around an
// evaluation point: coeffs()[k] is the Taylor coefficient for the k-th
// multi-index of the space, i.e. partial derivative divided by alpha!.
class JetScalar {
  public:
#ifdef BISTRESS_HAVE_SMALL_VECTOR
    using Coeffs = boost::container::small_vector<double, 36>;
#else
    using Coeffs = std::vector<double>;
#endif

    JetScalar() : space_(nullptr) {}

    static JetScalar constant(const JetSpace& s, double v) {
        JetScalar j(s);
        j.c_[0] = v;
        return j;
    }
    static JetScalar variable(const JetSpace& s, int axis, double v);
    // Constant in the same space as a model jet.
    static JetScalar constant_like(const JetScalar& model, double v) {
        return constant(*model.space_, v);
    }

    const JetSpace& space() const { return *space_; }
    int dim() const { return space_->dim(); }
    int order() const { return space_->order(); }
    double value() const { return c_[0]; }

    std::span<const double> coeffs() const { return {c_.data(), c_.size()}; }
    double coeff(int i) const { return c_[i]; }
    double& coeff(int i) { return c_[i]; }

    // Mixed partial derivative for the multi-index alpha (Taylor coefficient
    // times alpha!).
    double partial(std::span<const int> alpha) const;

    // d/dx_axis as a jet one order lower.
    JetScalar derivative(int axis) const;

    JetScalar truncated(int order) const;

    JetScalar operator-() const;
    JetScalar& operator+=(const JetScalar& o);
    JetScalar& operator-=(const JetScalar& o);
    JetScalar& operator+=(double v) { c_[0] += v; return *this; }
    JetScalar& operator-=(double v) { c_[0] -= v; return *this; }
    JetScalar& operator*=(double v);

    friend JetScalar operator+(JetScalar a, const JetScalar& b) { a += b; return a; }
    friend JetScalar operator-(JetScalar a, const JetScalar& b) { a -= b; return a; }
    friend JetScalar operator+(JetScalar a, double b) { a += b; return a; }
    friend JetScalar operator+(double a, JetScalar b) { b += a; return b; }
    friend JetScalar operator-(JetScalar a, double b) { a -= b; return a; }
    friend JetScalar operator-(double a, const JetScalar& b) { return (-b) + a; }
    friend JetScalar operator*(JetScalar a, double b) { a *= b; return a; }
    friend JetScalar operator*(double a, JetScalar b) { b *= a; return b; }
    friend JetScalar operator/(JetScalar a, double b) { a *= (1.0 / b); return a; }

    friend JetScalar operator*(const JetScalar& a, const JetScalar& b);
    friend JetScalar operator/(const JetScalar& a, const JetScalar& b);
    friend JetScalar operator/(double a, const JetScalar& b);

    // f(u) for analytic f given the Taylor coefficients of f at u.value().
    // taylor[k] = f^(k)(u0) / k!.
    static JetScalar analytic(const JetScalar& u, std::span<const double> taylor);

  private:
    explicit JetScalar(const JetSpace& s)
        : space_(&s), c_(static_cast<std::size_t>(s.size()), 0.0) {}

    // Aligns two jets on a common space (same dim, min order).
    static void align(JetScalar& a, JetScalar& b);

    const JetSpace* space_;
    Coeffs c_;

    friend JetScalar compose(const JetScalar&, std::span<const JetScalar>);
};

JetScalar exp(const JetScalar& u);
JetScalar log(const JetScalar& u);
JetScalar sqrt(const JetScalar& u);
JetScalar sin(const JetScalar& u);
JetScalar cos(const JetScalar& u);
JetScalar pow(const JetScalar& u, double e);
inline JetScalar sq(const JetScalar& u) { return u * u; }

// Seeds the chart coordinates of a point as independent jet variables.
std::vector<JetScalar> seed_point(const JetSpace& s, std::span<const double> p);

// Evaluates outer (a jet in n variables, expanded at outer's own base values
// args[i].value()) on the n inner jets. Exact chain rule up to the common
// truncation order.
JetScalar compose(const JetScalar& outer, std::span<const JetScalar> args);

// Chart scalar field: receives the chart coordinates seeded as jet
// variables at the evaluation point, returns the field value as a jet.
using ScalarFn = std::function<JetScalar(std::span<const JetScalar>)>;

// Square matrix of jets (metric components, Christoffel slices, ...).
struct JetMat {
    int n = 0;
    std::vector<JetScalar> a;

    JetMat() = default;
    explicit JetMat(int size) : n(size), a(static_cast<std::size_t>(size) * size) {}

    JetScalar& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    const JetScalar& at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

// Field of symmetric 2-tensors / metric components on a chart; same seeded
// variable convention as ScalarFn.
using MetricFn = std::function<void(std::span<const JetScalar>, JetMat&)>;

// Map components on a chart.
using MapFn = std::function<void(std::span<const JetScalar>, std::vector<JetScalar>&)>;

// Inverse and determinant of a jet matrix by Gauss-Jordan elimination with
// value-based partial pivoting.
JetMat jet_mat_inverse(const JetMat& m, JetScalar* det_out = nullptr);
JetScalar jet_mat_det(const JetMat& m);

}  // namespace bistress
