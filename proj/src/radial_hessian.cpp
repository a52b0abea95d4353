#include "khess/radial_hessian.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace khess {

static void check_order(const ProblemParams& p, int j) {
    if (j < 1 || j > p.n) throw std::invalid_argument("order j must satisfy 1 <= j <= n");
}

double sk_radial(const ProblemParams& p, int j, double lambda1, double lambda2) {
    check_order(p, j);
    const double cnj = binomial(p.n, j) / p.n;
    return cnj * pow_int(lambda2, j - 1) * (p.n * lambda2 + j * (lambda1 - lambda2));
}

double elementary_symmetric_radial(const ProblemParams& p, int j, double lambda1, double lambda2) {
    check_order(p, j);
    return binomial(p.n - 1, j) * pow_int(lambda2, j) +
           lambda1 * binomial(p.n - 1, j - 1) * pow_int(lambda2, j - 1);
}

OperatorEval operator_eval(const ProblemParams& p, double r, double lambda1, double lambda2) {
    OperatorEval e;
    e.r = r;
    e.lambda1 = lambda1;
    e.lambda2 = lambda2;
    e.sj.resize(p.k);
    for (int j = 1; j <= p.k; ++j) e.sj[j - 1] = sk_radial(p, j, lambda1, lambda2);
    return e;
}

double second_derivative_from_equation(const ProblemParams& p, const WeightSpec& spec,
                                       const Nonlinearity& g, double r, double u, double du) {
    if (!(r > 0)) throw std::domain_error("second_derivative_from_equation: r must be positive");
    const double l2 = du / r;
    if (p.k >= 2 && !(du > 0))
        throw degeneracy_error("equation is degenerate at vanishing gradient for k >= 2");
    const double rhs = spec.w(r) * g.g(u) / (p.k * p.cnk());
    const double factor = p.k == 1 ? 1.0 : std::pow(l2, 1.0 - p.k);
    return rhs * factor - (p.n - p.k) / static_cast<double>(p.k) * l2;
}

ResidualReport residual(const ProblemParams& p, const WeightSpec& spec, const Nonlinearity& g,
                        const RadialProfile& profile) {
    ResidualReport rep;
    rep.used_analytic_d2u = profile.has_d2u();
    const std::size_t m = profile.size();
    const std::size_t lo = rep.used_analytic_d2u ? 0 : 1;
    const std::size_t hi = rep.used_analytic_d2u ? m : m - 1;

    double rhs_sup = 0;
    for (std::size_t i = lo; i < hi; ++i) {
        const double r = profile.r[i];
        if (!(r > 0)) continue;  // the equation is read pointwise on r > 0
        double l1;
        if (rep.used_analytic_d2u) {
            l1 = profile.d2u[i];
        } else {
            // centered second difference of u' on a possibly nonuniform grid
            const double hm = profile.r[i] - profile.r[i - 1];
            const double hp = profile.r[i + 1] - profile.r[i];
            l1 = ((profile.du[i + 1] - profile.du[i]) / hp * hm +
                  (profile.du[i] - profile.du[i - 1]) / hm * hp) /
                 (hm + hp);
        }
        const double l2 = profile.du[i] / r;
        const double lhs = sk_radial(p, p.k, l1, l2);
        const double rhs = spec.w(r) * g.g(profile.u[i]);
        rep.r.push_back(r);
        rep.sk.push_back(lhs);
        rep.rhs.push_back(rhs);
        rep.resid.push_back(lhs - rhs);
        rhs_sup = std::max(rhs_sup, std::fabs(rhs));
    }
    double sup = 0;
    for (double x : rep.resid) sup = std::max(sup, std::fabs(x));
    rep.sup_norm = sup / std::max(1.0, rhs_sup);
    return rep;
}

void ResidualReport::to_csv(std::ostream& os) const {
    char buf[160];
    os << "r,Sk,rhs,residual\n";
    for (std::size_t i = 0; i < r.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r[i], sk[i], rhs[i], resid[i]);
        os << buf;
    }
}

json AdmissibilityReport::to_json() const {
    json j;
    j["admissible"] = admissible;
    if (!admissible) {
        j["first_violation_j"] = first_violation_j;
        j["first_violation_r"] = first_violation_r;
    }
    j["min_margin"] = min_margin;
    j["tol"] = tol;
    j["grid"] = {{"r_min", r_min}, {"r_max", r_max}, {"points", grid_points}};
    return j;
}

AdmissibilityReport k_admissibility(const ProblemParams& p, const RadialProfile& profile) {
    AdmissibilityReport rep;
    rep.r_min = profile.r_min();
    rep.r_max = profile.r_max();
    rep.grid_points = profile.size();

    const std::size_t m = profile.size();
    std::vector<double> sj(m * p.k);
    double scale = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = profile.r[i];
        double l1, l2;
        if (r == 0) {
            // lambda2(0) = u''(0) by the L'Hopital limit, since u'(0) = 0
            l1 = profile.has_d2u()
                     ? profile.d2u[0]
                     : (profile.du[1] - profile.du[0]) / (profile.r[1] - profile.r[0]);
            l2 = l1;
        } else {
            l2 = profile.du[i] / r;
            if (profile.has_d2u()) {
                l1 = profile.d2u[i];
            } else if (i == 0) {
                l1 = (profile.du[1] - profile.du[0]) / (profile.r[1] - profile.r[0]);
            } else if (i + 1 == m) {
                l1 = (profile.du[m - 1] - profile.du[m - 2]) / (profile.r[m - 1] - profile.r[m - 2]);
            } else {
                const double hm = profile.r[i] - profile.r[i - 1];
                const double hp = profile.r[i + 1] - profile.r[i];
                l1 = ((profile.du[i + 1] - profile.du[i]) / hp * hm +
                      (profile.du[i] - profile.du[i - 1]) / hm * hp) /
                     (hm + hp);
            }
        }
        for (int j = 1; j <= p.k; ++j) {
            const double s = sk_radial(p, j, l1, l2);
            sj[i * p.k + (j - 1)] = s;
            scale = std::max(scale, std::fabs(s));
        }
    }
    rep.tol = 1e-9 * (1 + scale);
    rep.min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
        for (int j = 1; j <= p.k; ++j) {
            const double s = sj[i * p.k + (j - 1)];
            rep.min_margin = std::min(rep.min_margin, s + rep.tol);
            if (s < -rep.tol && rep.admissible) {
                rep.admissible = false;
                rep.first_violation_j = j;
                rep.first_violation_r = profile.r[i];
            }
        }
    }
    return rep;
}

}  // namespace khess
