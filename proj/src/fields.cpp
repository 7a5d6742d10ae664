#include "bistress/fields.hpp"

#include <cmath>

namespace bistress {

namespace {

Slot src_up{Variance::up, Space::source};
Slot src_dn{Variance::down, Space::source};
Slot tgt_up{Variance::up, Space::target};
Slot tgt_dn{Variance::down, Space::target};

JetScalar jz(const JetSpace& s) { return JetScalar::constant(s, 0.0); }

}  // namespace

std::vector<double> riemann_values(const MetricJets& mj) {
    const int m = mj.dim;
    std::vector<double> r(static_cast<std::size_t>(m) * m * m * m, 0.0);
    if (mj.flat) return r;
    if (mj.order < 2)
        throw UnsupportedOrderError("riemann_values: metric jets of order >= 2 required");
    auto at = [&](int l, int i, int j, int k) -> double& {
        return r[((static_cast<std::size_t>(l) * m + i) * m + j) * m + k];
    };
    std::vector<double> dgam(static_cast<std::size_t>(m) * m * m * m);
    auto dg = [&](int k, int i, int j, int a) -> double& {
        return dgam[((static_cast<std::size_t>(k) * m + i) * m + j) * m + a];
    };
    for (int k = 0; k < m; ++k)
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                for (int a = 0; a < m; ++a)
                    dg(k, i, j, a) = mj.Gamma(k, i, j).derivative(a).value();
    for (int l = 0; l < m; ++l)
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                for (int k = 0; k < m; ++k) {
                    double v = dg(l, j, k, i) - dg(l, i, k, j);
                    for (int a = 0; a < m; ++a)
                        v += mj.Gamma(l, i, a).value() * mj.Gamma(a, j, k).value() -
                             mj.Gamma(l, j, a).value() * mj.Gamma(a, i, k).value();
                    at(l, i, j, k) = v;
                }
    return r;
}

MapJets::MapJets(const SmoothMap& the_map, std::span<const double> point, int ord,
                 const MetricFn* source_metric_override) {
    map = &the_map;
    p.assign(point.begin(), point.end());
    order = ord;
    m = the_map.source->dim;
    n = the_map.target->dim;

    const MetricFn& source_metric =
        source_metric_override ? *source_metric_override : the_map.source->metric;
    const bool src_flat = source_metric_override ? false : the_map.source->flat;
    src = MetricJets(m, source_metric, src_flat, point, order);

    phi = the_map.components_at(src.vars);
    if (static_cast<int>(phi.size()) != n)
        throw DimensionError("map components do not match target dimension");
    y0.resize(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) y0[static_cast<std::size_t>(a)] = phi[a].value();

    h = JetMat(n);
    if (the_map.target->flat) {
        // Flat chart: vanishing Christoffels force constant components.
        MetricJets t0(*the_map.target, y0, 0);
        const JetSpace& xs = phi[0].space();
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                h.at(a, b) = JetScalar::constant(xs, t0.g.at(a, b).value());
    } else {
        tgt.emplace(*the_map.target, y0, order);
        std::span<const JetScalar> args(phi.data(), phi.size());
        for (int a = 0; a < n; ++a)
            for (int b = a; b < n; ++b) {
                h.at(a, b) = compose(tgt->g.at(a, b), args);
                if (b != a) h.at(b, a) = h.at(a, b);
            }
        if (order >= 1) {
            std::vector<JetScalar> phi_low;
            phi_low.reserve(phi.size());
            for (const auto& c : phi) phi_low.push_back(c.truncated(order - 1));
            std::span<const JetScalar> args_low(phi_low.data(), phi_low.size());
            ngamma.resize(static_cast<std::size_t>(n) * n * n);
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    for (int s = b; s < n; ++s) {
                        JetScalar c = compose(tgt->Gamma(a, b, s), args_low);
                        ngamma[(static_cast<std::size_t>(a) * n + b) * n + s] = c;
                        ngamma[(static_cast<std::size_t>(a) * n + s) * n + b] = c;
                    }
        }
    }
    h0 = Mat(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) h0.at(a, b) = h.at(a, b).value();

    if (order >= 1) {
        dphi.resize(static_cast<std::size_t>(n) * m);
        for (int a = 0; a < n; ++a)
            for (int i = 0; i < m; ++i)
                dphi[static_cast<std::size_t>(a) * m + i] = phi[a].derivative(i);
    }

    if (order >= 2) {
        const int ob = order - 2;
        B.resize(static_cast<std::size_t>(n) * m * m);
        std::vector<JetScalar> dphi_b(dphi.size());
        for (std::size_t k = 0; k < dphi.size(); ++k) dphi_b[k] = dphi[k].truncated(ob);
        for (int a = 0; a < n; ++a)
            for (int i = 0; i < m; ++i)
                for (int j = i; j < m; ++j) {
                    JetScalar v = dPhi(a, i).derivative(j);
                    for (int k = 0; k < m; ++k)
                        v -= src.Gamma(k, i, j).truncated(ob) *
                             dphi_b[static_cast<std::size_t>(a) * m + k];
                    if (!target_flat()) {
                        for (int b = 0; b < n; ++b)
                            for (int s = 0; s < n; ++s)
                                v += NGamma(a, b, s).truncated(ob) *
                                     dphi_b[static_cast<std::size_t>(b) * m + i] *
                                     dphi_b[static_cast<std::size_t>(s) * m + j];
                    }
                    B[(static_cast<std::size_t>(a) * m + i) * m + j] = v;
                    B[(static_cast<std::size_t>(a) * m + j) * m + i] = v;
                }
        tau.assign(static_cast<std::size_t>(n), jz(JetSpace::get(m, ob)));
        for (int a = 0; a < n; ++a) {
            JetScalar acc = jz(JetSpace::get(m, ob));
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    acc += src.ginv.at(i, j).truncated(ob) * Bj(a, i, j);
            tau[static_cast<std::size_t>(a)] = acc;
        }
    }
}

std::vector<JetScalar> MapJets::pullback_derivative(const std::vector<JetScalar>& sigma) const {
    const int k = sigma[0].order();
    if (k < 1) throw UnsupportedOrderError("pullback_derivative: section has order 0");
    const int ob = k - 1;
    std::vector<JetScalar> out(static_cast<std::size_t>(n) * m);
    std::vector<JetScalar> sig_b(sigma.size());
    for (std::size_t t = 0; t < sigma.size(); ++t) sig_b[t] = sigma[t].truncated(ob);
    for (int a = 0; a < n; ++a)
        for (int i = 0; i < m; ++i) {
            JetScalar v = sigma[static_cast<std::size_t>(a)].derivative(i);
            if (!target_flat()) {
                for (int b = 0; b < n; ++b)
                    for (int s = 0; s < n; ++s)
                        v += NGamma(a, b, s).truncated(ob) *
                             dPhi(b, i).truncated(ob) * sig_b[static_cast<std::size_t>(s)];
            }
            out[static_cast<std::size_t>(a) * m + i] = v;
        }
    return out;
}

JetScalar MapJets::target_norm_sq(const std::vector<JetScalar>& sigma) const {
    const int k = sigma[0].order();
    JetScalar acc = jz(JetSpace::get(m, k));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            acc += h.at(a, b).truncated(k) * sigma[static_cast<std::size_t>(a)] *
                   sigma[static_cast<std::size_t>(b)];
    return acc;
}

MapJets::S2Jets MapJets::s2_jets() const {
    if (order < kOrderS2)
        throw UnsupportedOrderError("stress-energy tensor needs order-3 jets of the map");
    const int ob = order - 3;
    S2Jets out;
    out.nabla_tau = pullback_derivative(tau);

    out.tau_sq = target_norm_sq(tau).truncated(ob);

    auto pair_dphi_ntau = [&](int i, int j) {
        // <dphi(d_i), nabla_j tau>
        JetScalar acc = jz(JetSpace::get(m, ob));
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                acc += h.at(a, b).truncated(ob) * dPhi(a, i).truncated(ob) *
                       out.nabla_tau[static_cast<std::size_t>(b) * m + j];
        return acc;
    };

    JetMat pairing(m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) pairing.at(i, j) = pair_dphi_ntau(i, j);

    out.dphi_nabla_tau = jz(JetSpace::get(m, ob));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            out.dphi_nabla_tau += src.ginv.at(i, j).truncated(ob) * pairing.at(i, j);

    JetScalar coeff = out.tau_sq * 0.5 + out.dphi_nabla_tau;
    out.t1 = JetMat(m);
    out.t2 = JetMat(m);
    out.s2 = JetMat(m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            out.t1.at(i, j) = coeff * src.g.at(i, j).truncated(ob);
            out.t2.at(i, j) = -(pairing.at(i, j) + pairing.at(j, i));
            out.s2.at(i, j) = out.t1.at(i, j) + out.t2.at(i, j);
        }
    return out;
}

std::vector<double> MapJets::tau_values() const {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) v[static_cast<std::size_t>(a)] = tau[static_cast<std::size_t>(a)].value();
    return v;
}

std::vector<double> MapJets::tau2_values() const {
    if (order < kOrderField)
        throw UnsupportedOrderError("bitension needs order-4 jets of the map");
    auto nabla_tau = pullback_derivative(tau);  // [a][i], order 1

    // Second pullback derivative, values only:
    // (nabla^2 tau)^a_{ij} = D_i (nabla_j tau)^a + NGamma^a_{bs} dphi^b_i (nabla_j tau)^s
    //                        - Gamma^k_{ij} (nabla_k tau)^a
    std::vector<double> rough(static_cast<std::size_t>(n), 0.0);
    for (int a = 0; a < n; ++a) {
        double acc = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                double v = nabla_tau[static_cast<std::size_t>(a) * m + j].derivative(i).value();
                if (!target_flat())
                    for (int b = 0; b < n; ++b)
                        for (int s = 0; s < n; ++s)
                            v += NGamma(a, b, s).value() * dPhi(b, i).value() *
                                 nabla_tau[static_cast<std::size_t>(s) * m + j].value();
                for (int k = 0; k < m; ++k)
                    v -= src.Gamma(k, i, j).value() *
                         nabla_tau[static_cast<std::size_t>(a) * m + k].value();
                acc += src.ginv.at(i, j).value() * v;
            }
        rough[static_cast<std::size_t>(a)] = acc;
    }

    std::vector<double> out(static_cast<std::size_t>(n));
    if (target_flat()) {
        for (int a = 0; a < n; ++a) out[static_cast<std::size_t>(a)] = rough[static_cast<std::size_t>(a)];
        return out;
    }

    // Curvature term: sum_{ij} g^{ij} R^N(dphi(d_i), tau) dphi(d_j).
    auto riem = riemann_values(*tgt);
    auto R = [&](int l, int i, int j, int k) {
        return riem[((static_cast<std::size_t>(l) * n + i) * n + j) * n + k];
    };
    for (int a = 0; a < n; ++a) {
        double curv = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                double gij = src.ginv.at(i, j).value();
                if (gij == 0.0) continue;
                double term = 0.0;
                for (int b = 0; b < n; ++b) {
                    double db = dPhi(b, i).value();
                    if (db == 0.0) continue;
                    for (int s = 0; s < n; ++s) {
                        double ts = tau[static_cast<std::size_t>(s)].value();
                        if (ts == 0.0) continue;
                        for (int d = 0; d < n; ++d)
                            term += R(a, b, s, d) * db * ts * dPhi(d, j).value();
                    }
                }
                curv += gij * term;
            }
        out[static_cast<std::size_t>(a)] = rough[static_cast<std::size_t>(a)] - curv;
    }
    return out;
}

Mat MapJets::dphi_values() const {
    Mat d(n, m);
    for (int a = 0; a < n; ++a)
        for (int i = 0; i < m; ++i) d.at(a, i) = dPhi(a, i).value();
    return d;
}

Mat MapJets::pullback_metric_values() const {
    Mat pb(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            double v = 0.0;
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    v += h0.at(a, b) * dPhi(a, i).value() * dPhi(b, j).value();
            pb.at(i, j) = v;
        }
    return pb;
}

// --- public operations ------------------------------------------------------

TensorValue tension(const SmoothMap& map, std::span<const double> p) {
    MapJets ctx(map, p, kOrderTau);
    TensorValue out = make_vector(Space::target, ctx.n, ctx.y0);
    auto tv = ctx.tau_values();
    for (int a = 0; a < ctx.n; ++a) out.at({a}) = tv[static_cast<std::size_t>(a)];
    return out;
}

TensorValue bitension(const SmoothMap& map, std::span<const double> p) {
    MapJets ctx(map, p, kOrderField);
    TensorValue out = make_vector(Space::target, ctx.n, ctx.y0);
    auto tv = ctx.tau2_values();
    for (int a = 0; a < ctx.n; ++a) out.at({a}) = tv[static_cast<std::size_t>(a)];
    return out;
}

TensorValue stress_energy(const SmoothMap& map, std::span<const double> p) {
    MapJets ctx(map, p, 1);
    const int m = ctx.m;
    Mat pb = ctx.pullback_metric_values();
    Mat ginv = ctx.src.ginv_values();
    double dphi_sq = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) dphi_sq += ginv.at(i, j) * pb.at(i, j);

    TensorValue out = make_2covariant(Space::source, m, ctx.p);
    Mat g = ctx.src.g_values();
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            out.at({i, j}) = 0.5 * dphi_sq * g.at(i, j) - pb.at(i, j);
    return out;
}

BiStress stress_energy_bienergy(const SmoothMap& map, std::span<const double> p) {
    MapJets ctx(map, p, kOrderS2);
    auto jets = ctx.s2_jets();
    const int m = ctx.m;
    BiStress out{make_2covariant(Space::source, m, ctx.p),
                 make_2covariant(Space::source, m, ctx.p),
                 make_2covariant(Space::source, m, ctx.p)};
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            out.S2.at({i, j}) = jets.s2.at(i, j).value();
            out.T1.at({i, j}) = jets.t1.at(i, j).value();
            out.T2.at({i, j}) = jets.t2.at(i, j).value();
        }
    return out;
}

namespace {

// One-form values of the divergence of a symmetric 2-tensor of jets
// (field at order >= 1, metric context at matching orders).
std::vector<double> div_2tensor_values(const MetricJets& mj, const JetMat& field) {
    const int m = mj.dim;
    std::vector<double> out(static_cast<std::size_t>(m), 0.0);
    for (int j = 0; j < m; ++j) {
        double acc = 0.0;
        for (int i = 0; i < m; ++i)
            for (int k = 0; k < m; ++k) {
                double v = field.at(k, j).derivative(i).value();
                for (int a = 0; a < m; ++a)
                    v -= mj.Gamma(a, i, k).value() * field.at(a, j).value() +
                         mj.Gamma(a, i, j).value() * field.at(k, a).value();
                acc += mj.ginv.at(i, k).value() * v;
            }
        out[static_cast<std::size_t>(j)] = acc;
    }
    return out;
}

std::vector<double> nabla_2tensor_values(const MetricJets& mj, const JetMat& field) {
    const int m = mj.dim;
    std::vector<double> out(static_cast<std::size_t>(m) * m * m, 0.0);
    for (int l = 0; l < m; ++l)
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                double v = field.at(i, j).derivative(l).value();
                for (int a = 0; a < m; ++a)
                    v -= mj.Gamma(a, l, i).value() * field.at(a, j).value() +
                         mj.Gamma(a, l, j).value() * field.at(i, a).value();
                out[(static_cast<std::size_t>(l) * m + i) * m + j] = v;
            }
    return out;
}

double vector_divergence_values(const MetricJets& mj, const std::vector<JetScalar>& V) {
    const int m = mj.dim;
    double acc = 0.0;
    for (int k = 0; k < m; ++k) {
        acc += V[static_cast<std::size_t>(k)].derivative(k).value();
        for (int a = 0; a < m; ++a)
            acc += mj.Gamma(k, k, a).value() * V[static_cast<std::size_t>(a)].value();
    }
    return acc;
}

}  // namespace

TensorValue divergence_2tensor(const ChartedManifold& man, const MetricFn& field,
                               std::span<const double> p) {
    MetricJets mj(man, p, 1);
    JetMat f(man.dim);
    field(mj.vars, f);
    auto vals = div_2tensor_values(mj, f);
    TensorValue out = make_one_form(Space::source, man.dim, Point(p.begin(), p.end()));
    for (int j = 0; j < man.dim; ++j) out.at({j}) = vals[static_cast<std::size_t>(j)];
    return out;
}

TensorValue nabla_s2(const SmoothMap& map, std::span<const double> p) {
    MapJets ctx(map, p, kOrderField);
    auto jets = ctx.s2_jets();
    auto vals = nabla_2tensor_values(ctx.src, jets.s2);
    const int m = ctx.m;
    TensorValue out({src_dn, src_dn, src_dn}, {m, m, m}, ctx.p);
    for (int l = 0; l < m; ++l)
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                out.at({l, i, j}) = vals[(static_cast<std::size_t>(l) * m + i) * m + j];
    return out;
}

ImmersionGeometry immersion_geometry(const SmoothMap& map, std::span<const double> p) {
    MapJets ctx(map, p, kOrderTau);
    const int m = ctx.m, n = ctx.n;

    Mat pb = ctx.pullback_metric_values();
    Mat g = ctx.src.g_values();
    double mismatch = 0.0, scale = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            mismatch = std::max(mismatch, std::fabs(pb.at(i, j) - g.at(i, j)));
            scale = std::max(scale, std::fabs(g.at(i, j)));
        }
    if (mismatch > 1e-8 * (1.0 + scale))
        throw NotAnIsometryError("pullback metric does not match the source metric");

    ImmersionGeometry out;
    out.B = TensorValue({src_dn, src_dn, tgt_up}, {m, m, n}, ctx.p);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int a = 0; a < n; ++a) out.B.at({i, j, a}) = ctx.Bj(a, i, j).value();

    auto tv = ctx.tau_values();
    out.tau_norm = norm_vector(ctx.h0, tv);
    out.H = make_vector(Space::target, n, ctx.y0);
    for (int a = 0; a < n; ++a) out.H.at({a}) = tv[static_cast<std::size_t>(a)] / m;

    Mat ginv = ctx.src.ginv_values();
    auto shape_operator = [&](std::span<const double> dir, TensorValue& dst) {
        // (A)^i_j = g^{ik} <B_{kj}, dir>_h
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                double v = 0.0;
                for (int k = 0; k < m; ++k) {
                    double inner = 0.0;
                    for (int a = 0; a < n; ++a)
                        for (int b = 0; b < n; ++b)
                            inner += ctx.h0.at(a, b) * ctx.Bj(a, k, j).value() * dir[b];
                    v += ginv.at(i, k) * inner;
                }
                dst.at({i, j}) = v;
            }
    };
    std::vector<double> Hv(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) Hv[static_cast<std::size_t>(a)] = tv[static_cast<std::size_t>(a)] / m;
    out.A_H = TensorValue({src_up, src_dn}, {m, m}, ctx.p);
    out.A_tau = TensorValue({src_up, src_dn}, {m, m}, ctx.p);
    shape_operator(Hv, out.A_H);
    shape_operator(tv, out.A_tau);

    // Normal projector from the h-orthonormalized pushforward frame.
    Mat frame(m, n);
    for (int i = 0; i < m; ++i)
        for (int a = 0; a < n; ++a) frame.at(i, a) = ctx.dPhi(a, i).value();
    Mat e = gram_schmidt(frame, ctx.h0);
    out.normal_projector = TensorValue({tgt_up, tgt_dn}, {n, n}, ctx.y0);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            double v = (a == b) ? 1.0 : 0.0;
            for (int i = 0; i < m; ++i) {
                double flat_b = 0.0;  // (e_i)^flat_b = h_{cb} e_i^c
                for (int c = 0; c < n; ++c) flat_b += ctx.h0.at(c, b) * e.at(i, c);
                v -= e.at(i, a) * flat_b;
            }
            out.normal_projector.at({a, b}) = v;
        }

    // |A_tau - (|tau|^2/m) I| in the g-weighted endomorphism norm.
    double tau_sq = out.tau_norm * out.tau_norm;
    double acc = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k)
                for (int l = 0; l < m; ++l) {
                    double tij = out.A_tau.at({i, j}) - (i == j ? tau_sq / m : 0.0);
                    double tkl = out.A_tau.at({k, l}) - (k == l ? tau_sq / m : 0.0);
                    acc += g.at(i, k) * ginv.at(j, l) * tij * tkl;
                }
    out.pseudo_umbilical_residual = std::sqrt(std::max(0.0, acc));
    return out;
}

DivergenceCheck divergence_check(const SmoothMap& map, std::span<const double> p) {
    MapJets ctx(map, p, kOrderField);
    auto jets = ctx.s2_jets();

    DivergenceCheck out;
    out.div_s2 = div_2tensor_values(ctx.src, jets.s2);
    out.tau2 = ctx.tau2_values();
    out.dphi = ctx.dphi_values();
    out.h0 = ctx.h0;
    out.tau2_norm = norm_vector(ctx.h0, out.tau2);
    out.div_s2_norm = norm_one_form(ctx.src.ginv_values(), out.div_s2);
    return out;
}

double DivergenceCheck::pairing_lhs(std::span<const double> Y) const {
    double v = 0.0;
    for (std::size_t j = 0; j < div_s2.size(); ++j) v += div_s2[j] * Y[j];
    return v;
}

double DivergenceCheck::pairing_rhs(std::span<const double> Y) const {
    const int n = h0.rows, m = dphi.cols;
    double v = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            double dY = 0.0;
            for (int i = 0; i < m; ++i) dY += dphi.at(b, i) * Y[static_cast<std::size_t>(i)];
            v += h0.at(a, b) * tau2[static_cast<std::size_t>(a)] * dY;
        }
    return -v;
}

double DivergenceCheck::residual(std::span<const double> Y) const {
    return std::fabs(pairing_lhs(Y) - pairing_rhs(Y));
}

double divergence_identity_residual(const SmoothMap& map, std::span<const double> p,
                                    std::span<const double> Y) {
    return divergence_check(map, p).residual(Y);
}

double contraction_div_identity(const ChartedManifold& man, const OneFormFn& theta,
                                const MetricFn& sigma, std::span<const double> p) {
    // Order 2 so that one-forms produced by differentiating a scalar inside
    // the callback still carry one derivative order.
    MetricJets mj(man, p, 2);
    const int m = man.dim;
    std::vector<JetScalar> th;
    theta(mj.vars, th);
    JetMat sg(m);
    sigma(mj.vars, sg);

    auto div_sigma = div_2tensor_values(mj, sg);
    Mat ginv = mj.ginv_values();
    double lhs = 0.0;  // <theta, Div sigma>
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            lhs += ginv.at(i, j) * th[static_cast<std::size_t>(i)].value() *
                   div_sigma[static_cast<std::size_t>(j)];

    // V = C(theta, sigma)# with C(theta,sigma)_j = theta^i sigma_ij.
    std::vector<JetScalar> V(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        JetScalar acc = jz(th[0].space());
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i)
                for (int a = 0; a < m; ++a)
                    acc += mj.ginv.at(k, j) * mj.ginv.at(i, a) * th[static_cast<std::size_t>(a)] *
                           sg.at(i, j);
        V[static_cast<std::size_t>(k)] = acc;
    }
    double div_v = vector_divergence_values(mj, V);

    // <sym(nabla theta), sigma>
    Mat sym(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            double v = 0.5 * (th[static_cast<std::size_t>(j)].derivative(i).value() +
                              th[static_cast<std::size_t>(i)].derivative(j).value());
            for (int a = 0; a < m; ++a)
                v -= mj.Gamma(a, i, j).value() * th[static_cast<std::size_t>(a)].value();
            sym.at(i, j) = v;
        }
    double pairing = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b)
                    pairing += ginv.at(i, a) * ginv.at(j, b) * sym.at(i, j) *
                               sg.at(a, b).value();

    return std::fabs(lhs - div_v + pairing);
}

double divergence_contraction_vector(const ChartedManifold& man, const VectorFieldFn& X,
                                     const MetricFn& sigma, std::span<const double> p) {
    MetricJets mj(man, p, 1);
    const int m = man.dim;
    std::vector<JetScalar> xv;
    X(mj.vars, xv);
    JetMat sg(m);
    sigma(mj.vars, sg);
    // V^k = g^{ki} sigma_{ij} X^j
    std::vector<JetScalar> V(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        JetScalar acc = jz(xv[0].space());
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                acc += mj.ginv.at(k, i) * sg.at(i, j) * xv[static_cast<std::size_t>(j)];
        V[static_cast<std::size_t>(k)] = acc;
    }
    return vector_divergence_values(mj, V);
}

double divergence_sharp_identity(const SmoothMap& map, std::span<const double> p) {
    MapJets ctx(map, p, kOrderS2);
    auto jets = ctx.s2_jets();
    const int m = ctx.m;
    const int ob = ctx.order - 2;  // theta carries one order less than tau's context

    // theta_j = <dphi(d_j), tau>
    std::vector<JetScalar> theta(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        JetScalar acc = jz(JetSpace::get(m, ob));
        for (int a = 0; a < ctx.n; ++a)
            for (int b = 0; b < ctx.n; ++b)
                acc += ctx.h.at(a, b).truncated(ob) * ctx.dPhi(a, j).truncated(ob) *
                       ctx.tau[static_cast<std::size_t>(b)];
        theta[static_cast<std::size_t>(j)] = acc;
    }
    std::vector<JetScalar> X(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        JetScalar acc = jz(JetSpace::get(m, ob));
        for (int j = 0; j < m; ++j)
            acc += ctx.src.ginv.at(k, j).truncated(ob) * theta[static_cast<std::size_t>(j)];
        X[static_cast<std::size_t>(k)] = acc;
    }
    double div_x = vector_divergence_values(ctx.src, X);
    return std::fabs(div_x - jets.tau_sq.value() - jets.dphi_nabla_tau.value());
}

double conformal_immersion_relation(const SmoothMap& immersion, const ScalarFn& rho,
                                    std::span<const double> p) {
    const int m = immersion.source->dim;
    if (m != 4) throw DimensionError("conformal relation is specific to 4-dimensional domains");

    // Base immersion quantities w.r.t. g_bar.
    MapJets bar(immersion, p, kOrderS2);
    auto bar_jets = bar.s2_jets();

    // Conformal metric g = e^{2 rho} g_bar.
    const MetricFn& base_metric = immersion.source->metric;
    MetricFn conf = [&base_metric, &rho, m](std::span<const JetScalar> vars, JetMat& g) {
        base_metric(vars, g);
        JetScalar f = exp(rho(vars) * 2.0);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) g.at(i, j) = g.at(i, j) * f;
    };
    MapJets conf_ctx(immersion, p, kOrderS2, &conf);
    auto conf_jets = conf_ctx.s2_jets();

    // rho data w.r.t. g_bar.
    JetScalar rj = jet_eval(rho, p, 2);
    Mat gbar = bar.src.g_values();
    Mat gbar_inv = bar.src.ginv_values();
    std::vector<double> drho(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) drho[static_cast<std::size_t>(i)] = rj.derivative(i).value();
    double grad_sq = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            grad_sq += gbar_inv.at(i, j) * drho[static_cast<std::size_t>(i)] *
                       drho[static_cast<std::size_t>(j)];
    Mat hess(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            double v = rj.derivative(i).derivative(j).value();
            for (int k = 0; k < m; ++k)
                v -= bar.src.Gamma(k, i, j).value() * drho[static_cast<std::size_t>(k)];
            hess.at(i, j) = v;
        }
    double laplace = 0.0;  // geometer's sign: -trace Hess
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) laplace -= gbar_inv.at(i, j) * hess.at(i, j);

    double e2r = std::exp(2.0 * rj.value());
    Mat resid(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            double rhs = bar_jets.s2.at(i, j).value() -
                         2.0 * (grad_sq + laplace) * gbar.at(i, j) +
                         8.0 * drho[static_cast<std::size_t>(i)] * drho[static_cast<std::size_t>(j)] -
                         2.0 * (hess.at(i, j) + hess.at(j, i));
            resid.at(i, j) = e2r * conf_jets.s2.at(i, j).value() - rhs;
        }
    return norm_2covariant(gbar_inv, resid);
}

TensorValue tangent_bitension(const SmoothMap& map, std::span<const double> p) {
    if (map.kind != MapKind::riemannian_immersion)
        throw NotAnIsometryError("tangent_bitension: map is not a Riemannian immersion");
    MapJets ctx(map, p, kOrderS2);
    const int m = ctx.m, n = ctx.n;

    // |H|^2 = |tau|^2 / m^2 as a jet of order 1.
    JetScalar h_sq = ctx.target_norm_sq(ctx.tau) * (1.0 / (static_cast<double>(m) * m));

    Mat ginv = ctx.src.ginv_values();
    std::vector<double> grad_h_sq(static_cast<std::size_t>(m), 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            grad_h_sq[static_cast<std::size_t>(i)] +=
                ginv.at(i, j) * h_sq.derivative(j).value();

    // A_H as a (1,1) field of jets at order 1.
    const int oa = ctx.order - 2;
    std::vector<JetScalar> a_h(static_cast<std::size_t>(m) * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            JetScalar acc = jz(JetSpace::get(m, oa));
            for (int k = 0; k < m; ++k) {
                JetScalar inner = jz(JetSpace::get(m, oa));
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b)
                        inner += ctx.h.at(a, b).truncated(oa) * ctx.Bj(a, k, j) *
                                 ctx.tau[static_cast<std::size_t>(b)];
                acc += ctx.src.ginv.at(i, k).truncated(oa) * inner;
            }
            a_h[static_cast<std::size_t>(i) * m + j] = acc * (1.0 / m);
        }

    // trace (nabla A_H)(.,.) = g^{ij} (nabla_i A_H)(d_j), a source vector.
    std::vector<double> trace_nabla(static_cast<std::size_t>(m), 0.0);
    for (int k = 0; k < m; ++k) {
        double acc = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                double v = a_h[static_cast<std::size_t>(k) * m + j].derivative(i).value();
                for (int a = 0; a < m; ++a)
                    v += ctx.src.Gamma(k, i, a).value() *
                             a_h[static_cast<std::size_t>(a) * m + j].value() -
                         ctx.src.Gamma(a, i, j).value() *
                             a_h[static_cast<std::size_t>(k) * m + a].value();
                acc += ginv.at(i, j) * v;
            }
        trace_nabla[static_cast<std::size_t>(k)] = acc;
    }

    TensorValue out = make_vector(Space::source, m, ctx.p);
    for (int k = 0; k < m; ++k)
        out.at({k}) = -static_cast<double>(m) *
                      (-0.5 * m * grad_h_sq[static_cast<std::size_t>(k)] +
                       2.0 * trace_nabla[static_cast<std::size_t>(k)]);
    return out;
}

std::vector<double> tangential_part(const MapJets& ctx, std::span<const double> v) {
    const int m = ctx.m, n = ctx.n;
    Mat frame(m, n);
    for (int i = 0; i < m; ++i)
        for (int a = 0; a < n; ++a) frame.at(i, a) = ctx.dPhi(a, i).value();
    Mat e = gram_schmidt(frame, ctx.h0);
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < m; ++i) {
        double c = 0.0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) c += ctx.h0.at(a, b) * v[a] * e.at(i, b);
        for (int a = 0; a < n; ++a) out[static_cast<std::size_t>(a)] += c * e.at(i, a);
    }
    return out;
}

double tangent_bitension_projected_norm(const SmoothMap& map, std::span<const double> p) {
    MapJets ctx(map, p, kOrderField);
    auto t2 = ctx.tau2_values();
    auto tang = tangential_part(ctx, t2);
    return norm_vector(ctx.h0, tang);
}

double equivalent_form_residual(const SmoothMap& map, std::span<const double> p) {
    const int m = map.source->dim;
    if (m == 2) throw DimensionError("equivalent form requires m != 2");
    MapJets ctx(map, p, kOrderS2);
    auto jets = ctx.s2_jets();
    const int n = ctx.n;
    Mat g = ctx.src.g_values();
    Mat ginv = ctx.src.ginv_values();

    Mat pairing(m, m);  // <nabla_i tau, dphi_j>
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            double v = 0.0;
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    v += ctx.h0.at(a, b) *
                         jets.nabla_tau[static_cast<std::size_t>(a) * m + i].value() *
                         ctx.dPhi(b, j).value();
            pairing.at(i, j) = v;
        }
    double tau_sq = jets.tau_sq.value();
    Mat e(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            e.at(i, j) = tau_sq / (m - 2.0) * g.at(i, j) + pairing.at(i, j) + pairing.at(j, i);
    return norm_2covariant(ginv, e);
}

PointDiagnostics diagnostics(const SmoothMap& map, std::span<const double> p) {
    MapJets ctx(map, p, kOrderField);
    auto jets = ctx.s2_jets();
    const int m = ctx.m;

    PointDiagnostics out;
    out.g = ctx.src.g_values();
    out.ginv = ctx.src.ginv_values();
    out.sqrt_det = ctx.src.sqrt_det.value();
    out.tau_sq = jets.tau_sq.value();
    out.dphi_nabla_tau = jets.dphi_nabla_tau.value();
    out.tau_norm = std::sqrt(std::max(0.0, out.tau_sq));

    auto t2 = ctx.tau2_values();
    out.tau2_norm = norm_vector(ctx.h0, t2);

    out.s2 = Mat(m, m);
    out.trace_s2 = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            out.s2.at(i, j) = jets.s2.at(i, j).value();
            out.trace_s2 += out.ginv.at(i, j) * out.s2.at(i, j);
        }
    out.s2_norm = norm_2covariant(out.ginv, out.s2);

    auto div_vals = div_2tensor_values(ctx.src, jets.s2);
    out.div_s2_norm = norm_one_form(out.ginv, div_vals);

    auto nab = nabla_2tensor_values(ctx.src, jets.s2);
    out.nabla_s2_norm = norm_3covariant(out.ginv, nab, m);
    return out;
}

MetricFn s2_field_of(const SmoothMap& map) {
    return [&map](std::span<const JetScalar> vars, JetMat& out) {
        const int ord = vars[0].order();
        if (ord > 1)
            throw UnsupportedOrderError("s2_field_of supports jet orders 0 and 1 only");
        Point p(vars.size());
        for (std::size_t i = 0; i < vars.size(); ++i) p[i] = vars[i].value();
        MapJets ctx(map, p, ord + kOrderS2);
        auto jets = ctx.s2_jets();
        const int m = ctx.m;
        out = JetMat(m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) out.at(i, j) = jets.s2.at(i, j);
    };
}

namespace {

// S = 1/2 |dphi|^2 g - phi^* h as jets one order below the context.
JetMat stress_energy_jets(const MapJets& ctx) {
    const int m = ctx.m, n = ctx.n;
    const int ob = ctx.order - 1;
    JetMat pb(m);
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) {
            JetScalar acc = JetScalar::constant(JetSpace::get(m, ob), 0.0);
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    acc += ctx.h.at(a, b).truncated(ob) * ctx.dPhi(a, i) * ctx.dPhi(b, j);
            pb.at(i, j) = acc;
            pb.at(j, i) = acc;
        }
    JetScalar dphi_sq = JetScalar::constant(JetSpace::get(m, ob), 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            dphi_sq += ctx.src.ginv.at(i, j).truncated(ob) * pb.at(i, j);
    JetMat s(m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            s.at(i, j) = ctx.src.g.at(i, j).truncated(ob) * dphi_sq * 0.5 - pb.at(i, j);
    return s;
}

}  // namespace

MetricFn stress_energy_field_of(const SmoothMap& map) {
    return [&map](std::span<const JetScalar> vars, JetMat& out) {
        const int ord = vars[0].order();
        if (ord > 2)
            throw UnsupportedOrderError("stress_energy_field_of supports jet orders <= 2");
        Point p(vars.size());
        for (std::size_t i = 0; i < vars.size(); ++i) p[i] = vars[i].value();
        MapJets ctx(map, p, ord + 1);
        out = stress_energy_jets(ctx);
    };
}

double stress_energy_divergence_residual(const SmoothMap& map, std::span<const double> p) {
    MapJets ctx(map, p, kOrderTau);
    JetMat s = stress_energy_jets(ctx);
    auto div_vals = div_2tensor_values(ctx.src, s);
    auto tv = ctx.tau_values();
    const int m = ctx.m, n = ctx.n;
    std::vector<double> resid(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        double pairing = 0.0;  // <tau, dphi(d_j)>
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                pairing += ctx.h0.at(a, b) * tv[static_cast<std::size_t>(a)] *
                           ctx.dPhi(b, j).value();
        resid[static_cast<std::size_t>(j)] = div_vals[static_cast<std::size_t>(j)] + pairing;
    }
    return norm_one_form(ctx.src.ginv_values(), resid);
}

S2Values s2_values(const SmoothMap& map, std::span<const double> p) {
    MapJets ctx(map, p, kOrderS2);
    auto jets = ctx.s2_jets();
    const int m = ctx.m;
    S2Values out;
    out.g = ctx.src.g_values();
    out.ginv = ctx.src.ginv_values();
    out.sqrt_det = ctx.src.sqrt_det.value();
    out.tau_sq = jets.tau_sq.value();
    out.dphi_nabla_tau = jets.dphi_nabla_tau.value();
    out.s2 = Mat(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) out.s2.at(i, j) = jets.s2.at(i, j).value();
    return out;
}

TensionDensity tension_density(const SmoothMap& map, std::span<const double> p,
                               const MetricFn* metric_override) {
    MapJets ctx(map, p, kOrderTau, metric_override);
    TensionDensity out;
    out.tau_sq = ctx.target_norm_sq(ctx.tau).value();
    out.sqrt_det = ctx.src.sqrt_det.value();
    return out;
}

}  // namespace bistress
