#include "bistress/variations.hpp"

#include <cmath>

namespace bistress {

namespace {

Mat eval_sym_field(const MetricFn& field, int dim, std::span<const double> p) {
    const JetSpace& s = JetSpace::get(dim, 0);
    auto vars = seed_point(s, p);
    JetMat out(dim);
    field(vars, out);
    Mat m(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m.at(i, j) = out.at(i, j).value();
    return m;
}

}  // namespace

MetricFn perturbed_metric(const ChartedManifold& man, const MetricFn& omega, double t) {
    const MetricFn base = man.metric;
    const int dim = man.dim;
    return [base, omega, t, dim](std::span<const JetScalar> vars, JetMat& g) {
        base(vars, g);
        JetMat w(dim);
        omega(vars, w);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) g.at(i, j) += w.at(i, j) * t;
    };
}

MetricVariation make_variation(const ChartedManifold& man, MetricFn omega,
                               const QuadratureMesh& mesh) {
    const int m = man.dim;
    // Bound |t|: g + t omega is positive definite whenever
    // |t| < 1 / max_nodes ||g^{-1} omega||. Probe a subset of nodes.
    double worst = 0.0;
    const std::size_t stride = std::max<std::size_t>(1, mesh.size() / 512);
    for (std::size_t i = 0; i < mesh.size(); i += stride) {
        const Point& p = mesh.nodes[i];
        Mat g = man.metric_values(p);
        Mat w = eval_sym_field(omega, m, p);
        Mat giw = inverse(g);
        // operator bound through the Frobenius norm of g^{-1} omega
        double fro = 0.0;
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) {
                double v = 0.0;
                for (int c = 0; c < m; ++c) v += giw.at(a, c) * w.at(c, b);
                fro += v * v;
            }
        worst = std::max(worst, std::sqrt(fro));
    }
    MetricVariation var;
    var.omega = std::move(omega);
    var.t_max = worst > 0.0 ? 0.9 / worst : 1.0;
    return var;
}

MetricFn metric_direction(const ChartedManifold& man) {
    const MetricFn base = man.metric;
    return [base](std::span<const JetScalar> vars, JetMat& g) { base(vars, g); };
}

MetricFn random_omega(const ChartedManifold& man, SplitMix64& rng, double amplitude) {
    if (man.smooth_generators.empty())
        throw MeshError("manifold '" + man.name + "' has no smooth generators for variations");
    const auto gens = man.smooth_generators;
    const int m = man.dim;
    const MetricFn base = man.metric;

    auto combo = [&rng, &gens, amplitude]() {
        std::vector<double> c(gens.size());
        for (auto& x : c) x = rng.uniform(-amplitude, amplitude);
        return c;
    };
    std::vector<double> cf = combo(), cu = combo(), cv = combo();
    double f0 = rng.uniform(-amplitude, amplitude);

    return [gens, cf, cu, cv, f0, m, base](std::span<const JetScalar> vars, JetMat& out) {
        const int q = vars[0].order();
        if (q + 1 > kMaxJetOrder)
            throw UnsupportedOrderError("variation tensor evaluated above its order budget");
        // Re-seed one order higher so the differentials du, dv come out at
        // the caller's order.
        const JetSpace& hi = JetSpace::get(m, q + 1);
        Point p(vars.size());
        for (std::size_t i = 0; i < vars.size(); ++i) p[i] = vars[i].value();
        auto vhi = seed_point(hi, p);

        JetScalar f = JetScalar::constant(JetSpace::get(m, q), f0);
        JetScalar u = JetScalar::constant(hi, 0.0);
        JetScalar v = JetScalar::constant(hi, 0.0);
        for (std::size_t k = 0; k < gens.size(); ++k) {
            JetScalar gk = gens[k](vhi);
            if (cf[k] != 0.0) f += gk.truncated(q) * cf[k];
            u += gk * cu[k];
            v += gk * cv[k];
        }
        JetMat g(m);
        base(vars, g);
        for (int i = 0; i < m; ++i)
            for (int j = i; j < m; ++j) {
                JetScalar du_i = u.derivative(i), du_j = u.derivative(j);
                JetScalar dv_i = v.derivative(i), dv_j = v.derivative(j);
                JetScalar w = g.at(i, j) * f + (du_i * dv_j + du_j * dv_i) * 0.5;
                out.at(i, j) = w;
                out.at(j, i) = w;
            }
    };
}

double bienergy(const SmoothMap& map, const QuadratureMesh& mesh,
                const MetricFn* metric_override, Exec exec) {
    if (mesh.nodes.empty()) throw MeshError("bienergy: empty mesh");
    return 0.5 * map_reduce(
                     mesh.size(),
                     [&](std::size_t i) {
                         auto d = tension_density(map, mesh.nodes[i], metric_override);
                         return mesh.weights[i] * d.tau_sq * d.sqrt_det;
                     },
                     exec);
}

double first_variation_fd(const SmoothMap& map, const MetricVariation& var,
                          const QuadratureMesh& mesh, double h_step, bool richardson,
                          Exec exec) {
    if (h_step <= 0.0) throw StepTooLargeError("first_variation_fd: step must be positive");
    if (h_step > var.t_max)
        throw StepTooLargeError("first_variation_fd: step leaves the metric cone");
    const ChartedManifold& man = *map.source;
    auto F = [&](double t) {
        MetricFn gt = perturbed_metric(man, var.omega, t);
        return bienergy(map, mesh, &gt, exec);
    };
    auto central = [&](double h) { return (F(h) - F(-h)) / (2.0 * h); };
    double d1 = central(h_step);
    if (!richardson) return d1;
    double d2 = central(h_step / 2.0);
    return (4.0 * d2 - d1) / 3.0;
}

S2NodeCache cache_s2(const SmoothMap& map, const QuadratureMesh& mesh, Exec exec) {
    S2NodeCache cache;
    cache.nodes.resize(mesh.size());
    for_indexed(
        mesh.size(), [&](std::size_t i) { cache.nodes[i] = s2_values(map, mesh.nodes[i]); },
        exec);
    return cache;
}

double first_variation_s2(const S2NodeCache& cache, const MetricFn& omega,
                          const QuadratureMesh& mesh, Exec exec) {
    const int m = mesh.manifold->dim;
    return -0.5 * map_reduce(
                      mesh.size(),
                      [&](std::size_t i) {
                          const S2Values& sv = cache.nodes[i];
                          Mat w = eval_sym_field(omega, m, mesh.nodes[i]);
                          return mesh.weights[i] * inner_2covariant(sv.ginv, sv.s2, w) *
                                 sv.sqrt_det;
                      },
                      exec);
}

double first_variation_s2(const SmoothMap& map, const MetricFn& omega,
                          const QuadratureMesh& mesh, Exec exec) {
    auto cache = cache_s2(map, mesh, exec);
    return first_variation_s2(cache, omega, mesh, exec);
}

TensorValue xi_field(const ChartedManifold& man, const MetricFn& omega,
                     std::span<const double> p) {
    const int m = man.dim;
    MetricJets mj(man, p, 2);
    JetMat w(m);
    omega(mj.vars, w);

    // (Div omega)_j values
    std::vector<double> div(static_cast<std::size_t>(m), 0.0);
    for (int j = 0; j < m; ++j) {
        double acc = 0.0;
        for (int i = 0; i < m; ++i)
            for (int k = 0; k < m; ++k) {
                double v = w.at(k, j).derivative(i).value();
                for (int a = 0; a < m; ++a)
                    v -= mj.Gamma(a, i, k).value() * w.at(a, j).value() +
                         mj.Gamma(a, i, j).value() * w.at(k, a).value();
                acc += mj.ginv.at(i, k).value() * v;
            }
        div[static_cast<std::size_t>(j)] = acc;
    }

    // trace omega = g^{ij} omega_ij as a jet, then its differential
    JetScalar tr = JetScalar::constant(JetSpace::get(m, 1), 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            tr += mj.ginv.at(i, j).truncated(1) * w.at(i, j).truncated(1);

    Mat ginv = mj.ginv_values();
    TensorValue out = make_vector(Space::source, m, Point(p.begin(), p.end()));
    for (int k = 0; k < m; ++k) {
        double v = 0.0;
        for (int l = 0; l < m; ++l)
            v += ginv.at(k, l) *
                 (div[static_cast<std::size_t>(l)] - 0.5 * tr.derivative(l).value());
        out.at({k}) = v;
    }
    return out;
}

double pointwise_variation_residual(const SmoothMap& map, const MetricFn& omega,
                                    std::span<const double> p, double h_step) {
    const ChartedManifold& man = *map.source;
    auto tau_sq_at = [&](double t) {
        MetricFn gt = perturbed_metric(man, omega, t);
        return tension_density(map, p, &gt).tau_sq;
    };
    double lhs = (tau_sq_at(h_step) - tau_sq_at(-h_step)) / (2.0 * h_step);
    {
        double finer = (tau_sq_at(h_step / 2.0) - tau_sq_at(-h_step / 2.0)) / h_step;
        lhs = (4.0 * finer - lhs) / 3.0;
    }

    MapJets ctx(map, p, kOrderTau);
    const int m = ctx.m, n = ctx.n;
    Mat w = eval_sym_field(omega, m, p);
    Mat ginv = ctx.src.ginv_values();
    auto tv = ctx.tau_values();

    // <tau . nabla dphi, omega> = g^{ia} g^{jb} <tau, B_ij> omega_ab
    double tB = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            double inner = 0.0;
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    inner += ctx.h0.at(a, b) * tv[static_cast<std::size_t>(a)] *
                             ctx.Bj(b, i, j).value();
            double raised = 0.0;
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b)
                    raised += ginv.at(i, a) * ginv.at(j, b) * w.at(a, b);
            tB += inner * raised;
        }

    auto xi = xi_field(man, omega, p);
    double txi = 0.0;  // <tau, dphi(xi)>
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            double dxi = 0.0;
            for (int k = 0; k < m; ++k) dxi += ctx.dPhi(b, k).value() * xi.at({k});
            txi += ctx.h0.at(a, b) * tv[static_cast<std::size_t>(a)] * dxi;
        }

    return std::fabs(lhs + 2.0 * tB + 2.0 * txi);
}

IsovolumetricProjection isovolumetric_project(const ChartedManifold& man,
                                              const MetricFn& omega,
                                              const QuadratureMesh& mesh, Exec exec) {
    const int m = man.dim;
    auto trace_integral = [&](const MetricFn& w_fn) {
        return map_reduce(
            mesh.size(),
            [&](std::size_t i) {
                const Point& p = mesh.nodes[i];
                MetricJets mj(man, p, 0, false);
                Mat w = eval_sym_field(w_fn, m, p);
                double tr = 0.0;
                Mat ginv = mj.ginv_values();
                for (int a = 0; a < m; ++a)
                    for (int b = 0; b < m; ++b) tr += ginv.at(a, b) * w.at(a, b);
                return mesh.weights[i] * tr * mj.sqrt_det.value();
            },
            exec);
    };
    double vol = integrate([](std::span<const double>) { return 1.0; }, mesh, exec);
    double c = trace_integral(omega) / (m * vol);

    const MetricFn base = man.metric;
    MetricFn projected = [base, omega, c, m](std::span<const JetScalar> vars, JetMat& out) {
        omega(vars, out);
        JetMat g(m);
        base(vars, g);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) out.at(i, j) -= g.at(i, j) * c;
    };
    IsovolumetricProjection res{projected, c, trace_integral(projected)};
    return res;
}

LambdaFit lambda_g_residual(const S2NodeCache& cache, const QuadratureMesh& mesh,
                            Exec exec) {
    const int m = mesh.manifold->dim;
    double trace_int = map_reduce(
        mesh.size(),
        [&](std::size_t i) {
            const S2Values& sv = cache.nodes[i];
            double tr = 0.0;
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b) tr += sv.ginv.at(a, b) * sv.s2.at(a, b);
            return mesh.weights[i] * tr * sv.sqrt_det;
        },
        exec);
    double vol = map_reduce(
        mesh.size(),
        [&](std::size_t i) { return mesh.weights[i] * cache.nodes[i].sqrt_det; }, exec);

    LambdaFit fit;
    fit.volume = vol;
    fit.lambda = trace_int / (m * vol);
    double res_sq = map_reduce(
        mesh.size(),
        [&](std::size_t i) {
            const S2Values& sv = cache.nodes[i];
            Mat r = sv.s2;
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b) r.at(a, b) -= fit.lambda * sv.g.at(a, b);
            return mesh.weights[i] * inner_2covariant(sv.ginv, r, r) * sv.sqrt_det;
        },
        exec);
    fit.residual_l2 = std::sqrt(std::max(0.0, res_sq));
    return fit;
}

LambdaFit lambda_g_residual(const SmoothMap& map, const QuadratureMesh& mesh, Exec exec) {
    auto cache = cache_s2(map, mesh, exec);
    return lambda_g_residual(cache, mesh, exec);
}

VariationReport run_variation(const SmoothMap& map, const MetricVariation& var,
                              const QuadratureMesh& mesh, const S2NodeCache& cache,
                              double h_step, Exec exec) {
    VariationReport rep;
    rep.F_at_g = bienergy(map, mesh, nullptr, exec);
    rep.dF_fd = first_variation_fd(map, var, mesh, h_step, true, exec);
    rep.dF_s2 = first_variation_s2(cache, var.omega, mesh, exec);
    rep.relative_gap = std::fabs(rep.dF_fd - rep.dF_s2) / (std::fabs(rep.dF_s2) + 1e-12);
    return rep;
}

double homothety_residual(const SmoothMap& map, const QuadratureMesh& mesh, double t,
                          Exec exec) {
    const ChartedManifold& man = *map.source;
    const int m = man.dim;
    double F0 = bienergy(map, mesh, nullptr, exec);
    MetricFn scaled = perturbed_metric(man, metric_direction(man), t);
    double Ft = bienergy(map, mesh, &scaled, exec);
    return std::log(Ft) - std::log(F0) - 0.5 * (m - 4.0) * std::log1p(t);
}

double trace_integral_consistency(const SmoothMap& map, const QuadratureMesh& mesh,
                                  Exec exec) {
    auto cache = cache_s2(map, mesh, exec);
    const int m = mesh.manifold->dim;
    double direct = map_reduce(
        mesh.size(),
        [&](std::size_t i) {
            const S2Values& sv = cache.nodes[i];
            double tr = 0.0;
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b) tr += sv.ginv.at(a, b) * sv.s2.at(a, b);
            return mesh.weights[i] * tr * sv.sqrt_det;
        },
        exec);
    double tau_sq_int = map_reduce(
        mesh.size(),
        [&](std::size_t i) {
            const S2Values& sv = cache.nodes[i];
            return mesh.weights[i] * sv.tau_sq * sv.sqrt_det;
        },
        exec);
    double via_identity = 0.5 * (4.0 - m) * tau_sq_int;
    return std::fabs(direct - via_identity) / (std::fabs(via_identity) + 1e-12);
}

}  // namespace bistress
