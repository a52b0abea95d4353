#include "khess/ode.hpp"

#include <cmath>
#include <limits>

namespace khess {

namespace {

struct Deriv {
    double du, dz;
};

struct RhsContext {
    const ProblemParams& p;
    const WeightSpec& spec;
    const Nonlinearity& g;

    Deriv operator()(double r, double u, double z) const {
        if (z < -1e-300)
            throw std::runtime_error("integrate_outward: negative flux state encountered");
        Deriv d;
        if (r == 0) {
            if (z > 0)
                throw std::runtime_error("integrate_outward: positive flux at the origin");
            d.du = 0.0;
        } else {
            const double zc = std::max(z, 0.0);
            d.du = std::pow(r, 1.0 - p.nk()) * std::pow(zc, 1.0 / p.k);
        }
        const double gu = g.g(u);
        if (!std::isfinite(gu))
            throw std::runtime_error("integrate_outward: nonlinearity evaluation failed");
        d.dz = spec.rpow_w(p.n - 1, r) * gu / p.cnk();
        if (!std::isfinite(d.dz))
            throw std::runtime_error("integrate_outward: weight not evaluable on the step");
        return d;
    }
};

// one RK4 pass with nsub steps, sampling every `stride`-th node into out
void rk4_run(const RhsContext& f, double r0, double u0, double z0, double rmax, int nsub,
             int stride, std::vector<double>* out_r, std::vector<double>* out_u,
             std::vector<double>* out_du, double* u_end, double* z_end) {
    const double h = (rmax - r0) / nsub;
    double r = r0, u = u0, z = z0;
    auto sample = [&](int i) {
        if (!out_r || i % stride != 0) return;
        const Deriv d = f(r, u, z);
        out_r->push_back(r);
        out_u->push_back(u);
        out_du->push_back(d.du);
    };
    sample(0);
    for (int i = 0; i < nsub; ++i) {
        const Deriv k1 = f(r, u, z);
        const Deriv k2 = f(r + h / 2, u + h / 2 * k1.du, z + h / 2 * k1.dz);
        const Deriv k3 = f(r + h / 2, u + h / 2 * k2.du, z + h / 2 * k2.dz);
        const Deriv k4 = f(r + h, u + h * k3.du, z + h * k3.dz);
        u += h / 6 * (k1.du + 2 * k2.du + 2 * k3.du + k4.du);
        z += h / 6 * (k1.dz + 2 * k2.dz + 2 * k3.dz + k4.dz);
        r = r0 + (i + 1) * h;
        if (z < 0 && z > -1e-14 * (1 + std::fabs(z0))) z = 0;  // clamp roundoff
        if (z < 0) throw std::runtime_error("integrate_outward: flux state went negative");
        sample(i + 1);
    }
    if (u_end) *u_end = u;
    if (z_end) *z_end = z;
}

}  // namespace

IntegrationResult integrate_outward_checked(const ProblemParams& p, const WeightSpec& spec,
                                            const Nonlinearity& g, double r0, double u0, double z0,
                                            double rmax, int steps) {
    if (!(rmax > r0)) throw std::invalid_argument("integrate_outward: rmax must exceed r0");
    if (r0 < 0 || z0 < 0) throw std::invalid_argument("integrate_outward: need r0 >= 0, z0 >= 0");
    if (steps < 1) throw std::invalid_argument("integrate_outward: steps >= 1");
    const RhsContext f{p, spec, g};

    double u_coarse = 0, z_coarse = 0;
    rk4_run(f, r0, u0, z0, rmax, steps, steps, nullptr, nullptr, nullptr, &u_coarse, &z_coarse);

    IntegrationResult res;
    std::vector<double> r, u, du;
    r.reserve(steps + 1);
    u.reserve(steps + 1);
    du.reserve(steps + 1);
    double u_fine = 0, z_fine = 0;
    rk4_run(f, r0, u0, z0, rmax, 2 * steps, 2, &r, &u, &du, &u_fine, &z_fine);
    res.error_estimate = std::fabs(u_fine - u_coarse);
    res.profile = RadialProfile(std::move(r), std::move(u), std::move(du));
    return res;
}

RadialProfile integrate_outward(const ProblemParams& p, const WeightSpec& spec,
                                const Nonlinearity& g, double r0, double u0, double z0,
                                double rmax, int steps) {
    return integrate_outward_checked(p, spec, g, r0, u0, z0, rmax, steps).profile;
}

RadialProfile origin_start(const ProblemParams& p, const WeightSpec& spec, const Nonlinearity& g,
                           double u0, double rmax, int steps) {
    if (!(rmax > 0)) throw std::invalid_argument("origin_start: rmax must be positive");
    const double g0 = g.g(u0);
    if (g0 == 0) {
        // degenerate branch: the constant solution
        std::vector<double> r(steps + 1), u(steps + 1, u0), du(steps + 1, 0.0);
        for (int i = 0; i <= steps; ++i) r[i] = rmax * i / steps;
        return RadialProfile(std::move(r), std::move(u), std::move(du));
    }
    if (spec.kind() == WeightKind::Tabulated)
        throw std::domain_error("origin_start: needs a closed-form weight near r = 0");

    const double s1 = spec.sigma1();
    const double q = p.n + s1;  // integrability exponent of s^{n-1} w(s)
    if (!(q > 0)) throw std::domain_error("origin_start: weight not integrable at the origin");

    const double eps = rmax * 1e-6;
    // int_0^eps s^{n-1} w(s) ds = (eps^q / q) * int_0^1 f(eps t^{1/q}) dt with
    // f the bounded correction factor (identically 1 for a pure power law)
    double integral = std::pow(eps, q) / q;
    if (spec.kind() == WeightKind::InterpolatedPower) {
        const double s2 = spec.sigma2(), tau = spec.tau();
        integral *= adaptive_simpson(
            [&](double t) {
                if (t <= 0) return 1.0;
                const double s = eps * std::pow(t, 1.0 / q);
                return std::exp(-tau / s2 * softplus(s2 * std::log(s)));
            },
            0.0, 1.0, {1e-12, 1e-16, 48});
    }
    const double z_eps = g0 / p.cnk() * integral;
    if (z_eps < 0)
        throw std::domain_error("origin_start: bootstrap flux negative (g(u0) < 0)");
    // matching first-order displacement of u on (0, eps]
    const double mu = s1 / p.k + 2;
    const double u_eps =
        u0 + std::pow(eps, 1.0 - p.nk()) * std::pow(z_eps, 1.0 / p.k) * eps / mu;

    RadialProfile tail = integrate_outward(p, spec, g, eps, u_eps, z_eps, rmax, steps);
    std::vector<double> r(1, 0.0), u(1, u0), du(1, 0.0);
    r.insert(r.end(), tail.r.begin(), tail.r.end());
    u.insert(u.end(), tail.u.begin(), tail.u.end());
    du.insert(du.end(), tail.du.begin(), tail.du.end());
    return RadialProfile(std::move(r), std::move(u), std::move(du));
}

json GradientPositivity::to_json() const {
    json j;
    j["positive"] = positive;
    j["constant_profile"] = constant_profile;
    j["min_du"] = min_du;
    j["argmin_r"] = argmin_r;
    return j;
}

GradientPositivity gradient_positivity_check(const RadialProfile& profile) {
    GradientPositivity rep;
    rep.min_du = std::numeric_limits<double>::infinity();
    bool any_positive = false;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        if (!(profile.r[i] > 0)) continue;
        if (profile.du[i] != 0) any_positive = true;
        if (profile.du[i] < rep.min_du) {
            rep.min_du = profile.du[i];
            rep.argmin_r = profile.r[i];
        }
    }
    rep.constant_profile = !any_positive;
    rep.positive = any_positive && rep.min_du > 0;
    return rep;
}

}  // namespace khess
