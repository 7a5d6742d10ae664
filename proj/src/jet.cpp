#include "bistress/jet.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace bistress {

namespace {

void enumerate_rec(int dim, int axis, int remaining, std::vector<std::uint8_t>& cur,
                   std::vector<std::vector<std::uint8_t>>& out) {
    if (axis == dim - 1) {
        cur[axis] = static_cast<std::uint8_t>(remaining);
        out.push_back(cur);
        return;
    }
    for (int k = remaining; k >= 0; --k) {
        cur[axis] = static_cast<std::uint8_t>(k);
        enumerate_rec(dim, axis + 1, remaining - k, cur, out);
    }
}

}  // namespace

JetSpace::JetSpace(int dim, int order) : dim_(dim), order_(order) {
    if (dim < 1 || dim > kMaxJetDim)
        throw UnsupportedOrderError("jet dimension out of range");
    if (order < 0 || order > kMaxJetOrder)
        throw UnsupportedOrderError("jet order out of range (cap is 4)");

    std::vector<std::uint8_t> cur(static_cast<std::size_t>(dim), 0);
    for (int deg = 0; deg <= order; ++deg) enumerate_rec(dim, 0, deg, cur, exponents_);

    const int n = static_cast<int>(exponents_.size());
    exp_flat_.resize(static_cast<std::size_t>(n) * dim);
    degree_.resize(n);
    factorial_.resize(n);
    for (int i = 0; i < n; ++i) {
        int deg = 0;
        double fact = 1.0;
        for (int v = 0; v < dim; ++v) {
            std::uint8_t e = exponents_[i][v];
            exp_flat_[static_cast<std::size_t>(i) * dim + v] = e;
            deg += e;
            for (int k = 2; k <= e; ++k) fact *= k;
        }
        degree_[i] = deg;
        factorial_[i] = fact;
    }

    lookup_.assign(static_cast<std::size_t>(std::pow(order + 1, dim)) + 1, -1);
    for (int i = 0; i < n; ++i) lookup_[key_of(exponents(i))] = i;

    raise_.assign(static_cast<std::size_t>(n) * dim, -1);
    down_axis_.assign(n, -1);
    down_index_.assign(n, -1);
    std::vector<int> tmp(static_cast<std::size_t>(dim));
    for (int i = 0; i < n; ++i) {
        for (int v = 0; v < dim; ++v) {
            if (degree_[i] + 1 <= order) {
                for (int w = 0; w < dim; ++w) tmp[w] = exponents_[i][w];
                tmp[v] += 1;
                std::vector<int> alpha(tmp.begin(), tmp.end());
                raise_[static_cast<std::size_t>(i) * dim + v] = index_of(alpha);
            }
        }
        if (i > 0) {
            int v = 0;
            while (exponents_[i][v] == 0) ++v;
            down_axis_[i] = v;
            for (int w = 0; w < dim; ++w) tmp[w] = exponents_[i][w];
            tmp[v] -= 1;
            std::vector<int> alpha(tmp.begin(), tmp.end());
            down_index_[i] = index_of(alpha);
        }
    }

    product_.assign(static_cast<std::size_t>(n) * n, -1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (degree_[i] + degree_[j] > order) continue;
            std::vector<int> alpha(static_cast<std::size_t>(dim));
            for (int v = 0; v < dim; ++v) alpha[v] = exponents_[i][v] + exponents_[j][v];
            product_[static_cast<std::size_t>(i) * n + j] = index_of(alpha);
        }
}

int JetSpace::key_of(std::span<const std::uint8_t> alpha) const {
    int key = 0;
    for (int v = 0; v < dim_; ++v) key = key * (order_ + 1) + alpha[v];
    return key;
}

int JetSpace::index_of(std::span<const int> alpha) const {
    if (static_cast<int>(alpha.size()) != dim_) return -1;
    int key = 0, deg = 0;
    for (int v = 0; v < dim_; ++v) {
        if (alpha[v] < 0 || alpha[v] > order_) return -1;
        deg += alpha[v];
        key = key * (order_ + 1) + alpha[v];
    }
    if (deg > order_) return -1;
    return lookup_[key];
}

const JetSpace& JetSpace::get(int dim, int order) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, const JetSpace*> cache;
    std::lock_guard lock(mu);
    auto key = std::make_pair(dim, order);
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;
    const JetSpace* s = new JetSpace(dim, order);  // lives forever
    cache.emplace(key, s);
    return *s;
}

JetScalar JetScalar::variable(const JetSpace& s, int axis, double v) {
    JetScalar j(s);
    j.c_[0] = v;
    if (s.order() >= 1) {
        std::vector<int> alpha(static_cast<std::size_t>(s.dim()), 0);
        alpha[axis] = 1;
        j.c_[static_cast<std::size_t>(s.index_of(alpha))] = 1.0;
    }
    return j;
}

double JetScalar::partial(std::span<const int> alpha) const {
    int i = space_->index_of(alpha);
    if (i < 0) throw UnsupportedOrderError("partial: multi-index outside jet order");
    return c_[static_cast<std::size_t>(i)] * space_->factorial(i);
}

JetScalar JetScalar::derivative(int axis) const {
    if (order() == 0)
        throw UnsupportedOrderError("derivative of an order-0 jet");
    const JetSpace& lower = JetSpace::get(dim(), order() - 1);
    JetScalar r(lower);
    // Graded ordering: indices of the lower space coincide with the leading
    // indices of this space.
    for (int i = 0; i < lower.size(); ++i) {
        int j = space_->raise_index(i, axis);
        r.c_[static_cast<std::size_t>(i)] =
            c_[static_cast<std::size_t>(j)] * (space_->exponents(i)[axis] + 1);
    }
    return r;
}

JetScalar JetScalar::truncated(int order) const {
    if (order >= this->order()) return *this;
    const JetSpace& lower = JetSpace::get(dim(), order);
    JetScalar r(lower);
    for (int i = 0; i < lower.size(); ++i) r.c_[i] = c_[i];
    return r;
}

void JetScalar::align(JetScalar& a, JetScalar& b) {
    if (a.space_ == b.space_) return;
    if (a.dim() != b.dim()) throw DimensionError("jet arithmetic: dimension mismatch");
    if (a.order() > b.order())
        a = a.truncated(b.order());
    else
        b = b.truncated(a.order());
}

JetScalar JetScalar::operator-() const {
    JetScalar r = *this;
    for (auto& x : r.c_) x = -x;
    return r;
}

JetScalar& JetScalar::operator+=(const JetScalar& o) {
    if (space_ == o.space_) {
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    JetScalar a = *this, b = o;
    align(a, b);
    for (std::size_t i = 0; i < a.c_.size(); ++i) a.c_[i] += b.c_[i];
    return *this = a;
}

JetScalar& JetScalar::operator-=(const JetScalar& o) {
    if (space_ == o.space_) {
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    JetScalar a = *this, b = o;
    align(a, b);
    for (std::size_t i = 0; i < a.c_.size(); ++i) a.c_[i] -= b.c_[i];
    return *this = a;
}

JetScalar& JetScalar::operator*=(double v) {
    for (auto& x : c_) x *= v;
    return *this;
}

JetScalar operator*(const JetScalar& a, const JetScalar& b) {
    if (a.space_ != b.space_) {
        JetScalar x = a, y = b;
        JetScalar::align(x, y);
        return x * y;
    }
    const JetSpace& s = *a.space_;
    JetScalar r(s);
    const int n = s.size();
    for (int i = 0; i < n; ++i) {
        double ai = a.c_[static_cast<std::size_t>(i)];
        if (ai == 0.0) continue;
        for (int j = 0; j < n; ++j) {
            int k = s.product_index(i, j);
            if (k < 0) break;  // degrees only grow along a row of the table
            r.c_[static_cast<std::size_t>(k)] += ai * b.c_[static_cast<std::size_t>(j)];
        }
    }
    return r;
}

JetScalar JetScalar::analytic(const JetScalar& u, std::span<const double> taylor) {
    // Horner scheme in w = u - u0, which has zero constant term.
    JetScalar w = u;
    w.c_[0] = 0.0;
    JetScalar r = JetScalar::constant(*u.space_, taylor[taylor.size() - 1]);
    for (int k = static_cast<int>(taylor.size()) - 2; k >= 0; --k) {
        r = r * w;
        r.c_[0] += taylor[static_cast<std::size_t>(k)];
    }
    return r;
}

JetScalar operator/(const JetScalar& a, const JetScalar& b) {
    double b0 = b.value();
    if (b0 == 0.0) throw DomainError("jet division by zero value");
    std::vector<double> t(static_cast<std::size_t>(b.order()) + 1);
    double p = 1.0 / b0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        t[k] = (k % 2 == 0 ? p : -p);
        p /= b0;
    }
    return a * JetScalar::analytic(b, t);
}

JetScalar operator/(double a, const JetScalar& b) {
    double b0 = b.value();
    if (b0 == 0.0) throw DomainError("jet division by zero value");
    std::vector<double> t(static_cast<std::size_t>(b.order()) + 1);
    double p = a / b0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        t[k] = (k % 2 == 0 ? p : -p);
        p /= b0;
    }
    return JetScalar::analytic(b, t);
}

JetScalar exp(const JetScalar& u) {
    std::vector<double> t(static_cast<std::size_t>(u.order()) + 1);
    double e = std::exp(u.value());
    double fact = 1.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (k > 0) fact *= static_cast<double>(k);
        t[k] = e / fact;
    }
    return JetScalar::analytic(u, t);
}

JetScalar log(const JetScalar& u) {
    double u0 = u.value();
    if (u0 <= 0.0) throw DomainError("log of non-positive jet value");
    std::vector<double> t(static_cast<std::size_t>(u.order()) + 1);
    t[0] = std::log(u0);
    double p = 1.0 / u0;
    for (std::size_t k = 1; k < t.size(); ++k) {
        t[k] = (k % 2 == 1 ? p : -p) / static_cast<double>(k);
        p /= u0;
    }
    return JetScalar::analytic(u, t);
}

JetScalar pow(const JetScalar& u, double e) {
    double u0 = u.value();
    if (u0 <= 0.0) throw DomainError("pow with non-positive jet base");
    // t[k] = e(e-1)...(e-k+1)/k! * u0^(e-k)
    std::vector<double> t(static_cast<std::size_t>(u.order()) + 1);
    double acc = std::pow(u0, e);
    t[0] = acc;
    double mult = 1.0;
    for (std::size_t k = 1; k < t.size(); ++k) {
        mult *= (e - static_cast<double>(k - 1)) / static_cast<double>(k);
        acc /= u0;
        t[k] = mult * acc;
    }
    return JetScalar::analytic(u, t);
}

JetScalar sqrt(const JetScalar& u) { return pow(u, 0.5); }

JetScalar sin(const JetScalar& u) {
    double s = std::sin(u.value()), c = std::cos(u.value());
    std::vector<double> t(static_cast<std::size_t>(u.order()) + 1);
    double fact = 1.0;
    static const int sign[4] = {1, 1, -1, -1};  // sin, cos, -sin, -cos
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (k > 0) fact *= static_cast<double>(k);
        double d = (k % 2 == 0) ? s : c;
        t[k] = sign[k % 4] * d / fact;
    }
    return JetScalar::analytic(u, t);
}

JetScalar cos(const JetScalar& u) {
    double s = std::sin(u.value()), c = std::cos(u.value());
    std::vector<double> t(static_cast<std::size_t>(u.order()) + 1);
    double fact = 1.0;
    static const int sign[4] = {1, -1, -1, 1};  // cos, -sin, -cos, sin
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (k > 0) fact *= static_cast<double>(k);
        double d = (k % 2 == 0) ? c : s;
        t[k] = sign[k % 4] * d / fact;
    }
    return JetScalar::analytic(u, t);
}

std::vector<JetScalar> seed_point(const JetSpace& s, std::span<const double> p) {
    if (static_cast<int>(p.size()) != s.dim())
        throw DimensionError("seed_point: point dimension mismatch");
    std::vector<JetScalar> vars;
    vars.reserve(p.size());
    for (int i = 0; i < s.dim(); ++i) vars.push_back(JetScalar::variable(s, i, p[i]));
    return vars;
}

JetScalar compose(const JetScalar& outer, std::span<const JetScalar> args) {
    const JetSpace& os = outer.space();
    if (static_cast<int>(args.size()) != os.dim())
        throw DimensionError("compose: argument count mismatch");
    int order = std::min(outer.order(), args[0].order());
    const JetSpace& is = JetSpace::get(args[0].dim(), order);

    // Monomials (args - base)^alpha built by the down-index recurrence.
    std::vector<JetScalar> shifted;
    shifted.reserve(args.size());
    for (const auto& a : args) {
        JetScalar z = a.truncated(order);
        z.coeff(0) = 0.0;
        shifted.push_back(std::move(z));
    }

    std::vector<JetScalar> mono(static_cast<std::size_t>(os.size()));
    mono[0] = JetScalar::constant(is, 1.0);
    JetScalar result = JetScalar::constant(is, outer.coeff(0));
    for (int t = 1; t < os.size(); ++t) {
        if (os.degree(t) > order) break;
        mono[static_cast<std::size_t>(t)] =
            mono[static_cast<std::size_t>(os.down_index(t))] *
            shifted[static_cast<std::size_t>(os.down_axis(t))];
        double c = outer.coeff(t);
        if (c != 0.0)
            result += mono[static_cast<std::size_t>(t)] * c;
    }
    return result;
}

JetMat jet_mat_inverse(const JetMat& m, JetScalar* det_out) {
    const int n = m.n;
    JetMat a = m;
    JetMat inv(n);
    const JetSpace& s = a.at(0, 0).space();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            inv.at(i, j) = JetScalar::constant(s, i == j ? 1.0 : 0.0);
    JetScalar det = JetScalar::constant(s, 1.0);

    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::fabs(a.at(i, k).value()) > std::fabs(a.at(piv, k).value())) piv = i;
        if (a.at(piv, k).value() == 0.0)
            throw DegenerateMetricError("jet matrix is singular at evaluation point");
        if (piv != k) {
            for (int j = 0; j < n; ++j) {
                std::swap(a.at(piv, j), a.at(k, j));
                std::swap(inv.at(piv, j), inv.at(k, j));
            }
            det = -det;
        }
        det = det * a.at(k, k);
        JetScalar p = 1.0 / a.at(k, k);
        for (int j = 0; j < n; ++j) {
            a.at(k, j) = a.at(k, j) * p;
            inv.at(k, j) = inv.at(k, j) * p;
        }
        for (int i = 0; i < n; ++i) {
            if (i == k) continue;
            JetScalar f = a.at(i, k);
            if (f.value() == 0.0) {
                bool zero = true;
                for (double c : f.coeffs())
                    if (c != 0.0) { zero = false; break; }
                if (zero) continue;
            }
            for (int j = 0; j < n; ++j) {
                a.at(i, j) -= f * a.at(k, j);
                inv.at(i, j) -= f * inv.at(k, j);
            }
        }
    }
    if (det_out) *det_out = det;
    return inv;
}

JetScalar jet_mat_det(const JetMat& m) {
    JetScalar det;
    jet_mat_inverse(m, &det);
    return det;
}

}  // namespace bistress
