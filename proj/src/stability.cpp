#include "khess/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace khess {

QuadraticFormAssembly assemble_Q(const ProblemParams& p, const WeightSpec& spec,
                                 const Nonlinearity& g, const RadialProfile& profile,
                                 std::pair<double, double> window, int mesh_size) {
    const auto [a, b] = window;
    if (!(a > 0) || !(b > a)) throw std::invalid_argument("assemble_Q: invalid window");
    if (a < profile.r_min() * (1 - 1e-12) || b > profile.r_max() * (1 + 1e-12))
        throw std::domain_error("assemble_Q: window outside profile support");
    if (mesh_size < 2) throw std::invalid_argument("assemble_Q: mesh_size >= 2");
    if (!g.gp) throw std::invalid_argument("assemble_Q: nonlinearity derivative required");

    QuadraticFormAssembly asm_;
    asm_.nodes = log_grid(a, b, static_cast<std::size_t>(mesh_size) + 1);
    const std::size_t nel = asm_.nodes.size() - 1;
    const std::size_t unknowns = nel - 1;

    asm_.K_diag.assign(unknowns, 0.0);
    asm_.K_off.assign(unknowns > 0 ? unknowns - 1 : 0, 0.0);
    asm_.A_diag.assign(unknowns, 0.0);
    asm_.A_off.assign(unknowns > 0 ? unknowns - 1 : 0, 0.0);
    asm_.M_diag.assign(unknowns, 0.0);
    asm_.M_off.assign(unknowns > 0 ? unknowns - 1 : 0, 0.0);

    const double wn = p.omega_n();
    const double kc = p.k * p.cnk();
    const double rmin = profile.r_min(), rmax = profile.r_max();

    for (std::size_t e = 0; e < nel; ++e) {
        const double x0 = asm_.nodes[e], x1 = asm_.nodes[e + 1];
        const double h = x1 - x0, mid = 0.5 * (x0 + x1);
        double Ke[2][2] = {{0, 0}, {0, 0}};
        double Ce[2][2] = {{0, 0}, {0, 0}};
        double Me[2][2] = {{0, 0}, {0, 0}};
        for (int q = 0; q < 2; ++q) {
            const double xq = mid + (q == 0 ? -1 : 1) * h / 2 * kGauss2Node;
            const double wq = h / 2;
            const double rq = std::min(std::max(xq, rmin), rmax);
            const double du = std::max(profile.du_at(rq), 0.0);
            const double aq = wn * kc * std::pow(xq, p.n - p.k) * pow_int(du, p.k - 1);
            const double mq = wn * std::pow(xq, p.n - 1);
            const double cq = mq * spec.w(xq) * g.gp(profile.u_at(rq));
            const double phi0 = (x1 - xq) / h, phi1 = (xq - x0) / h;
            const double dphi0 = -1 / h, dphi1 = 1 / h;
            const double phis[2] = {phi0, phi1}, dphis[2] = {dphi0, dphi1};
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    Ke[i][j] += wq * aq * dphis[i] * dphis[j];
                    Ce[i][j] += wq * cq * phis[i] * phis[j];
                    Me[i][j] += wq * mq * phis[i] * phis[j];
                }
        }
        // scatter; global unknowns are nodes 1..nel-1
        for (int i = 0; i < 2; ++i) {
            const std::ptrdiff_t gi = static_cast<std::ptrdiff_t>(e) + i - 1;
            if (gi < 0 || gi >= static_cast<std::ptrdiff_t>(unknowns)) continue;
            asm_.A_diag[gi] += Ke[i][i];
            asm_.K_diag[gi] += Ke[i][i] + Ce[i][i];
            asm_.M_diag[gi] += Me[i][i];
        }
        // local (0,1) couples nodes (e, e+1); present when both are interior
        if (e >= 1 && e + 1 <= unknowns) {
            asm_.A_off[e - 1] += Ke[0][1];
            asm_.K_off[e - 1] += Ke[0][1] + Ce[0][1];
            asm_.M_off[e - 1] += Me[0][1];
        }
    }

    double maxK = 0, maxM = 0;
    for (double x : asm_.K_diag) maxK = std::max(maxK, std::fabs(x));
    for (double x : asm_.K_off) maxK = std::max(maxK, std::fabs(x));
    for (double x : asm_.M_diag) maxM = std::max(maxM, std::fabs(x));
    for (double x : asm_.M_off) maxM = std::max(maxM, std::fabs(x));
    if (!(maxK > 0) || !(maxM > 0) || !std::isfinite(maxK) || !std::isfinite(maxM))
        throw std::runtime_error("assemble_Q: non-finite or void assembly");
    asm_.scale = maxK / maxM;
    return asm_;
}

namespace {

// negative-pivot count of (K - lambda M) via the LDL^T Sturm recurrence
std::size_t inertia_below(std::span<const double> Kd, std::span<const double> Ko,
                          std::span<const double> Md, std::span<const double> Mo, double lambda) {
    const std::size_t n = Kd.size();
    std::size_t count = 0;
    double d_prev = 1.0;
    double d;
    for (std::size_t i = 0; i < n; ++i) {
        const double diag = Kd[i] - lambda * Md[i];
        if (i == 0) {
            d = diag;
        } else {
            const double off = Ko[i - 1] - lambda * Mo[i - 1];
            d = diag - off * off / d_prev;
        }
        if (d == 0) d = -1e-300;  // nudge exact zeros off the pivot
        if (d < 0) ++count;
        d_prev = d;
    }
    return count;
}

double bisect_smallest(std::span<const double> Kd, std::span<const double> Ko,
                       std::span<const double> Md, std::span<const double> Mo) {
    const std::size_t n = Kd.size();
    if (n == 0) throw std::invalid_argument("eigenvalue: empty pencil");
    // Gershgorin-style bracket for the pencil: |lambda| <= maxrow(K)/mindom(M)
    double maxrow = 0, mindom = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        double rowK = std::fabs(Kd[i]);
        double domM = Md[i];
        if (i > 0) {
            rowK += std::fabs(Ko[i - 1]);
            domM -= std::fabs(Mo[i - 1]);
        }
        if (i + 1 < n) {
            rowK += std::fabs(Ko[i]);
            domM -= std::fabs(Mo[i]);
        }
        maxrow = std::max(maxrow, rowK);
        mindom = std::min(mindom, domM);
    }
    if (!(mindom > 0)) throw std::runtime_error("eigenvalue: mass matrix not diagonally dominant");
    double lo = -(maxrow / mindom + 1), hi = maxrow / mindom + 1;
    int guard = 0;
    while (inertia_below(Kd, Ko, Md, Mo, lo) != 0 && guard++ < 60) lo *= 2;
    for (int it = 0; it < 300; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (inertia_below(Kd, Ko, Md, Mo, mid) >= 1)
            hi = mid;
        else
            lo = mid;
        if (hi - lo <= 1e-10 * std::max(1e-300, std::max(std::fabs(lo), std::fabs(hi))) ||
            hi - lo < 1e-14)
            break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double min_eigenvalue(const QuadraticFormAssembly& a) {
    // normalize both sides so the bisection runs on O(1) numbers
    double maxK = 0, maxM = 0;
    for (double x : a.K_diag) maxK = std::max(maxK, std::fabs(x));
    for (double x : a.K_off) maxK = std::max(maxK, std::fabs(x));
    for (double x : a.M_diag) maxM = std::max(maxM, std::fabs(x));
    for (double x : a.M_off) maxM = std::max(maxM, std::fabs(x));
    for (double x : a.K_diag)
        if (!std::isfinite(x)) throw std::runtime_error("min_eigenvalue: non-finite entry");
    std::vector<double> Kd(a.K_diag), Ko(a.K_off), Md(a.M_diag), Mo(a.M_off);
    for (double& x : Kd) x /= maxK;
    for (double& x : Ko) x /= maxK;
    for (double& x : Md) x /= maxM;
    for (double& x : Mo) x /= maxM;
    return bisect_smallest(Kd, Ko, Md, Mo) * (maxK / maxM);
}

double min_eigenvalue_tridiagonal(std::span<const double> diag, std::span<const double> off) {
    std::vector<double> Md(diag.size(), 1.0), Mo(off.size(), 0.0);
    return bisect_smallest(diag, off, Md, Mo);
}

namespace {

// Gauss-5 quadrature of f over the support elements of eta
template <class F>
double quad_over_eta(const PiecewiseLinear& eta, F&& f) {
    double acc = 0;
    for (std::size_t e = 0; e + 1 < eta.x.size(); ++e) {
        const double x0 = eta.x[e], x1 = eta.x[e + 1];
        const double h = x1 - x0, mid = 0.5 * (x0 + x1);
        const double slope = eta.slope(e);
        for (int q = 0; q < 5; ++q) {
            const double xq = mid + h / 2 * kGauss5Nodes[q];
            const double wq = h / 2 * kGauss5Weights[q];
            const double ev = eta.y[e] + slope * (xq - x0);
            acc += wq * f(xq, ev, slope);
        }
    }
    return acc;
}

void require_supported(const PiecewiseLinear& eta, const RadialProfile& profile) {
    if (!eta.compactly_supported())
        throw std::domain_error("test function must vanish at its end nodes");
    if (eta.x.front() < profile.r_min() * (1 - 1e-12) ||
        eta.x.back() > profile.r_max() * (1 + 1e-12))
        throw std::domain_error("test function not supported inside the profile window");
}

}  // namespace

double transformed_form_value(const ProblemParams& p, const WeightSpec& spec,
                              const RadialProfile& profile, const PiecewiseLinear& eta) {
    require_supported(eta, profile);
    const AuxiliaryRate rate(spec, p);
    const double c = p.omega_n() * p.k * p.cnk();
    return c * quad_over_eta(eta, [&](double r, double ev, double es) {
               const double l2 = std::max(profile.du_at(r), 0.0) / r;
               const double lw = std::pow(r, p.n - 1) * pow_int(l2, p.k + 1);
               const double v = rate.v(r);
               const double grad = r * es + v * ev;
               return lw * (grad * grad - rate.radicand(r) * ev * ev);
           });
}

double transformed_form_scale(const ProblemParams& p, const WeightSpec& spec,
                              const RadialProfile& profile, const PiecewiseLinear& eta) {
    require_supported(eta, profile);
    const AuxiliaryRate rate(spec, p);
    const double c = p.omega_n() * p.k * p.cnk();
    return c * quad_over_eta(eta, [&](double r, double ev, double es) {
               const double l2 = std::max(profile.du_at(r), 0.0) / r;
               const double lw = std::pow(r, p.n - 1) * pow_int(l2, p.k + 1);
               const double v = rate.v(r);
               const double grad = r * es + v * ev;
               return lw * (grad * grad + std::fabs(rate.radicand(r)) * ev * ev);
           });
}

double quadratic_form_u_prime_eta(const ProblemParams& p, const WeightSpec& spec,
                                  const Nonlinearity& g, const RadialProfile& profile,
                                  const PiecewiseLinear& eta) {
    require_supported(eta, profile);
    if (!profile.has_d2u())
        throw std::invalid_argument("quadratic_form_u_prime_eta: profile needs u''");
    const double wn = p.omega_n();
    const double kc = p.k * p.cnk();
    return quad_over_eta(eta, [&](double r, double ev, double es) {
        const double du = profile.du_at(r);
        const double xi = du * ev;
        const double dxi = profile.d2u_at(r) * ev + du * es;
        const double aq = wn * kc * std::pow(r, p.n - p.k) * pow_int(std::fabs(du), p.k - 1);
        const double cq = wn * std::pow(r, p.n - 1) * spec.w(r) * g.gp(profile.u_at(r));
        return aq * dxi * dxi + cq * xi * xi;
    });
}

json HardyReport::to_json() const {
    json j;
    j["hypothesis_ok"] = hypothesis_ok;
    j["min_hypothesis"] = min_hypothesis;
    j["argmin_r"] = argmin_r;
    j["origin_limit_ok"] = origin_limit_ok;
    j["inequality_value"] = inequality_value;
    j["scale"] = scale;
    return j;
}

HardyReport hardy_certificate(const ProblemParams& p, const HardyWeight& V,
                              const std::function<double(double)>& rho, double theta,
                              const PiecewiseLinear& eta) {
    if (!eta.compactly_supported())
        throw std::domain_error("hardy_certificate: eta must vanish at its end nodes");
    HardyReport rep;

    // hypothesis theta (r V' + (n - 2 rho - 2) V - theta V) >= 0, sampled on a
    // log grid covering the support of eta
    const double lo = std::min(1e-3, eta.x.front());
    const double hi = std::max(1e3, eta.x.back());
    rep.min_hypothesis = std::numeric_limits<double>::infinity();
    for (double r : log_grid(lo, hi, 2001)) {
        const double H = theta * (V.rVp(r) + (p.n - 2 * rho(r) - 2) * V.V(r) - theta * V.V(r));
        if (H < rep.min_hypothesis) {
            rep.min_hypothesis = H;
            rep.argmin_r = r;
        }
    }
    double hyp_scale = std::fabs(theta) * std::max(1.0, std::fabs(V.V(1.0))) * (p.n + 2);
    rep.hypothesis_ok = rep.min_hypothesis >= -1e-12 * (1 + hyp_scale);

    // lim_{r->0} r^{n-2} V = 0, probed on a decreasing sequence
    double first = std::fabs(std::pow(1e-3, p.n - 2) * V.V(1e-3));
    double last = first;
    bool decreasing = true;
    for (double r = 1e-4; r >= 1e-9; r /= 10) {
        const double val = std::fabs(std::pow(r, p.n - 2) * V.V(r));
        if (val > last * (1 + 1e-9)) decreasing = false;
        last = val;
    }
    rep.origin_limit_ok = decreasing && (last <= 1e-4 * std::max(first, 1e-300) || last < 1e-300);

    double pos = 0, neg = 0;
    rep.inequality_value = quad_over_eta(eta, [&](double r, double ev, double es) {
        const double lw = std::pow(r, p.n - 3) * V.V(r);
        const double grad = r * es + rho(r) * ev;
        const double val = lw * (grad * grad - theta * theta * ev * ev / 4);
        (val >= 0 ? pos : neg) += val;
        return val;
    });
    rep.scale = pos - neg;
    return rep;
}

json StabilityReport::to_json() const {
    json j;
    j["min_eigenvalue"] = min_eigenvalue;
    j["verdict"] = verdict == Verdict::SemiStable
                       ? "semi-stable"
                       : (verdict == Verdict::Unstable ? "unstable" : "inconclusive");
    j["window"] = {r_window.first, r_window.second};
    j["mesh"] = mesh_size;
    json wr = json::array();
    for (const auto& w : windows) {
        wr.push_back({{"window", {w.window.first, w.window.second}},
                      {"mesh", w.mesh},
                      {"min_eigenvalue", w.min_eig},
                      {"scale", w.scale},
                      {"converged", w.converged}});
    }
    j["windows"] = std::move(wr);
    j["warnings"] = warnings;
    return j;
}

StabilityReport is_semistable(const ProblemParams& p, const WeightSpec& spec,
                              const Nonlinearity& g, const RadialProfile& profile,
                              const StabilityOptions& opt) {
    StabilityReport rep;
    rep.min_eigenvalue = std::numeric_limits<double>::infinity();

    bool all_ok = true, any_unstable = false, any_inconclusive = false;
    for (double lo : opt.window_lo) {
        for (double hi : opt.window_hi) {
            const double a = std::max(lo, profile.r_min());
            const double b = std::min(hi, profile.r_max());
            if (!(b > a * (1 + 1e-9))) continue;
            if (a != lo || b != hi)
                rep.warnings.push_back("window clipped to profile support");

            double prev = 0, cur = 0, scale = 0;
            bool converged = false;
            int used_mesh = 0;
            for (std::size_t mi = 0; mi < opt.meshes.size(); ++mi) {
                const auto asm_ = assemble_Q(p, spec, g, profile, {a, b}, opt.meshes[mi]);
                cur = min_eigenvalue(asm_);
                scale = asm_.scale;
                used_mesh = opt.meshes[mi];
                converged = mi > 0 &&
                            std::fabs(cur - prev) <= opt.mesh_convergence * (1 + std::fabs(cur));
                prev = cur;
            }
            rep.windows.push_back({{a, b}, used_mesh, cur, scale, converged});
            const double tol = opt.tol_factor * scale;
            if (cur < rep.min_eigenvalue) {
                rep.min_eigenvalue = cur;
                rep.r_window = {a, b};
                rep.mesh_size = used_mesh;
            }
            if (!converged) {
                rep.warnings.push_back("mesh not converged on a window");
                any_inconclusive = true;
                all_ok = false;
            } else if (cur >= -tol) {
                // window passes
            } else if (cur < -10 * tol) {
                any_unstable = true;
                all_ok = false;
            } else {
                any_inconclusive = true;
                all_ok = false;
            }
        }
    }
    if (rep.windows.empty()) throw std::domain_error("is_semistable: no usable window");

    // monotonicity across nested windows (continuum min eigenvalue cannot
    // increase when the window grows); violations beyond tolerance are logged
    for (const auto& wi : rep.windows)
        for (const auto& wj : rep.windows) {
            if (&wi == &wj) continue;
            const bool contains = wi.window.first <= wj.window.first * (1 + 1e-12) &&
                                  wi.window.second >= wj.window.second * (1 - 1e-12);
            if (!contains) continue;
            const double slack =
                5e-6 * (std::fabs(wj.min_eig) + std::max(wi.scale, wj.scale));
            if (wi.min_eig > wj.min_eig + slack) {
                rep.warnings.push_back("window monotonicity violated beyond tolerance");
                any_inconclusive = true;
                all_ok = false;
            }
        }

    if (all_ok)
        rep.verdict = StabilityReport::Verdict::SemiStable;
    else if (any_unstable)
        rep.verdict = StabilityReport::Verdict::Unstable;
    else
        rep.verdict = StabilityReport::Verdict::Inconclusive;
    (void)any_inconclusive;
    return rep;
}

}  // namespace khess
