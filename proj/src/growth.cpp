#include "khess/growth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace khess {

double dimension_threshold(const ProblemParams& p, double gamma) {
    const double denom = 2.0 * p.k + gamma;
    if (!(denom > 0)) return std::numeric_limits<double>::infinity();
    return p.k * (p.k + 1) / denom;
}

double critical_dimension(const ProblemParams& p, double gamma) {
    return 2.0 * (p.k + 2.0 * gamma / p.k + 4.0);
}

bool is_critical_dimension(const ProblemParams& p, double gamma) {
    return std::fabs(p.n - critical_dimension(p, gamma)) < 1e-9;
}

double psi_rate(const AuxiliaryRate& rate, double s) {
    const double rad = rate.radicand(s);
    if (rad < 0)
        throw std::domain_error("psi_rate: negative radicand (hypotheses violated) at r=" +
                                std::to_string(s));
    return rate.v(s) + std::sqrt(rad);
}

static void check_dimension(const ProblemParams& p, const WeightSpec& spec) {
    if (!(p.n > dimension_threshold(p, spec.gamma_inf())))
        throw std::domain_error("dimension condition n > k(k+1)/(2k+gamma) violated");
}

double alpha_of_r(const ProblemParams& p, const WeightSpec& spec, double r) {
    if (!(r >= 1)) throw std::domain_error("alpha_of_r: defined for r >= 1");
    const AuxiliaryRate rate(spec, p);
    const double T = std::log(r);
    if (T < 1e-14) return psi_rate(rate, 1.0);
    const double integral =
        adaptive_simpson([&](double t) { return psi_rate(rate, std::exp(t)); }, 0.0, T);
    return integral / T;
}

double delta_of_r(const ProblemParams& p, const WeightSpec& spec, double r) {
    check_dimension(p, spec);
    return (-p.n + 2 * alpha_of_r(p, spec, r) + 2 * p.k + 2) / (p.k + 1);
}

DeltaInf delta_inf(const ProblemParams& p, const WeightSpec& spec) {
    check_dimension(p, spec);
    const double gamma = spec.gamma_inf();
    const double vinf = (p.k - 1 + gamma) / (p.k + 1);
    const double s1 = std::sqrt((vinf + 1) / p.k);
    const double arg = p.k * (vinf - 1) + p.n;
    if (arg < 0) throw std::domain_error("delta_inf: k(v_inf - 1) + n negative");
    const double s2 = std::sqrt(arg);

    DeltaInf d;
    d.value = (-p.n + 2 * (vinf + s1 * s2) + 2 * (p.k + 1)) / (p.k + 1);
    d.sign_factor = critical_dimension(p, gamma) - p.n;
    d.C = (p.k * s1 + s2) / ((p.k + 1) * ((p.k + 2) * s1 + s2));
    d.factorized = d.C * d.sign_factor;
    return d;
}

ExponentProfile exponent_profile(const ProblemParams& p, const WeightSpec& spec,
                                 std::vector<double> r_grid) {
    check_dimension(p, spec);
    if (r_grid.empty()) throw std::invalid_argument("exponent_profile: empty grid");
    if (!std::is_sorted(r_grid.begin(), r_grid.end()) || r_grid.front() < 1)
        throw std::invalid_argument("exponent_profile: grid must be ascending with r >= 1");

    const AuxiliaryRate rate(spec, p);
    auto psi_log = [&](double t) { return psi_rate(rate, std::exp(t)); };

    ExponentProfile out;
    out.r = std::move(r_grid);
    out.alpha.resize(out.r.size());
    out.delta.resize(out.r.size());
    out.delta_inf = delta_inf(p, spec).value;

    double acc = 0, t_prev = 0;
    for (std::size_t i = 0; i < out.r.size(); ++i) {
        const double t = std::log(out.r[i]);
        if (t > t_prev) {
            acc += adaptive_simpson(psi_log, t_prev, t);
            t_prev = t;
        }
        out.alpha[i] = t < 1e-14 ? psi_rate(rate, 1.0) : acc / t;
        out.delta[i] = (-p.n + 2 * out.alpha[i] + 2 * p.k + 2) / (p.k + 1);
    }
    return out;
}

void ExponentProfile::to_csv(std::ostream& os) const {
    char buf[128];
    os << "r,alpha,delta\n";
    for (std::size_t i = 0; i < r.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", r[i], alpha[i], delta[i]);
        os << buf;
    }
}

// int_a^b s^{k-n} u'(s)^{-(k+1)} ds by composite trapezoid in t = log s over
// the profile nodes spanning [a,b]
static double tail_integral(const ProblemParams& p, const RadialProfile& profile, double a,
                            double b) {
    if (!(b > a)) return 0.0;
    auto f = [&](double s, double dus) {
        if (!(dus > 0)) throw std::domain_error("essentialg_ratio: vanishing u' in the window");
        // s^{k-n} u'^{-(k+1)} * s  (Jacobian of t = log s)
        return std::exp((p.k - p.n + 1) * std::log(s) - (p.k + 1) * std::log(dus));
    };
    std::vector<double> ts, fs;
    ts.push_back(std::log(a));
    fs.push_back(f(a, profile.du_at(a)));
    for (std::size_t i = 0; i < profile.size(); ++i) {
        const double s = profile.r[i];
        if (s > a && s < b) {
            ts.push_back(std::log(s));
            fs.push_back(f(s, profile.du[i]));
        }
    }
    ts.push_back(std::log(b));
    fs.push_back(f(b, profile.du_at(b)));
    double acc = 0;
    for (std::size_t i = 0; i + 1 < ts.size(); ++i)
        acc += 0.5 * (fs[i] + fs[i + 1]) * (ts[i + 1] - ts[i]);
    return acc;
}

json EssentialgReport::to_json() const {
    json j;
    j["sup_ratio"] = sup_ratio;
    j["argmax_r"] = argmax_r;
    j["r"] = r;
    j["ratio"] = ratio;
    return j;
}

EssentialgReport essentialg_ratio(const ProblemParams& p, const WeightSpec& spec,
                                  const RadialProfile& profile, std::span<const double> r_grid,
                                  double R) {
    check_dimension(p, spec);
    EssentialgReport rep;
    if (r_grid.empty()) return rep;
    std::vector<double> rs(r_grid.begin(), r_grid.end());
    std::sort(rs.begin(), rs.end());
    if (rs.front() < 1 || R > profile.r_max() * (1 + 1e-12) || rs.front() < profile.r_min())
        throw std::domain_error("essentialg_ratio: grid/R outside profile coverage or r < 1");

    ExponentProfile expo = exponent_profile(p, spec, rs);
    // accumulate the tail integral from R downward so each grid point reuses it
    double tail = 0;
    double upper = std::min(R, profile.r_max());
    for (std::size_t idx = rs.size(); idx-- > 0;) {
        const double r = rs[idx];
        if (r < upper) {
            tail += tail_integral(p, profile, r, upper);
            upper = r;
        }
        const double ratio = tail * std::exp(2 * expo.alpha[idx] * std::log(r));
        rep.r.push_back(r);
        rep.ratio.push_back(ratio);
        if (ratio >= rep.sup_ratio) {
            rep.sup_ratio = ratio;
            rep.argmax_r = r;
        }
    }
    std::reverse(rep.r.begin(), rep.r.end());
    std::reverse(rep.ratio.begin(), rep.ratio.end());
    return rep;
}

json DoublingReport::to_json() const {
    json j;
    j["min_ratio"] = min_ratio;
    j["argmin_r"] = argmin_r;
    j["violation"] = violation;
    return j;
}

DoublingReport doubling_check(const ProblemParams& p, const WeightSpec& spec,
                              const RadialProfile& profile, std::span<const double> r_grid) {
    DoublingReport rep;
    rep.min_ratio = std::numeric_limits<double>::infinity();
    if (r_grid.empty()) return rep;
    std::vector<double> rs(r_grid.begin(), r_grid.end());
    std::sort(rs.begin(), rs.end());
    if (rs.front() < 1 || rs.front() < profile.r_min() ||
        2 * rs.back() > profile.r_max() * (1 + 1e-12))
        throw std::domain_error("doubling_check: profile must cover [min r, 2 max r], r >= 1");

    ExponentProfile expo = exponent_profile(p, spec, rs);
    for (std::size_t i = 0; i < rs.size(); ++i) {
        const double r = rs[i];
        const double gap = std::fabs(profile.u_at(std::min(2 * r, profile.r_max())) - profile.u_at(r));
        const double ratio = gap * std::exp(-expo.delta[i] * std::log(r));
        rep.r.push_back(r);
        rep.ratio.push_back(ratio);
        if (ratio < rep.min_ratio) {
            rep.min_ratio = ratio;
            rep.argmin_r = r;
        }
        if (gap == 0) rep.violation = true;
    }
    return rep;
}

json GrowthReport::to_json() const {
    json j;
    j["kind"] = kind == GrowthKind::Bounded ? "bounded" : "unbounded";
    j["critical_dimension"] = critical;
    j["min_ratio"] = min_ratio;
    j["argmin_r"] = argmin_r;
    j["r0"] = r0;
    j["min_ratio_from_1"] = min_ratio_from_1;
    if (kind == GrowthKind::Bounded) {
        j["u_inf"] = u_inf;
        j["u_inf_consistency"] = u_inf_consistency;
        j["dimension_condition_ok"] = dimension_condition_ok;
    }
    return j;
}

GrowthReport growth_theorem_check(const ProblemParams& p, const WeightSpec& spec,
                                  const RadialProfile& profile, GrowthKind kind) {
    check_dimension(p, spec);
    GrowthReport rep;
    rep.kind = kind;
    const double gamma = spec.gamma_inf();
    rep.critical = is_critical_dimension(p, gamma);

    std::vector<double> rs;
    for (double r : profile.r)
        if (r >= 1) rs.push_back(r);
    if (rs.size() < 4) throw std::domain_error("growth_theorem_check: need grid coverage r >= 1");
    ExponentProfile expo = exponent_profile(p, spec, rs);

    if (kind == GrowthKind::Bounded) {
        // u_inf by power-law extrapolation u(R) ~ u_inf + c R^delta(R)
        const double R = profile.r_max() / 4;
        const double d = lerp_at(expo.r, expo.delta, std::max(1.0, std::min(R, expo.r.back())));
        const double uR = profile.u_at(R), u2R = profile.u_at(2 * R), u4R = profile.u_at(4 * R);
        const double twod = std::exp(d * std::numbers::ln2);
        rep.u_inf = uR - (u2R - uR) / (twod - 1);
        const double pred4 = rep.u_inf + (u2R - rep.u_inf) * twod;
        rep.u_inf_consistency = std::fabs(u4R - pred4);
        rep.dimension_condition_ok = p.n > critical_dimension(p, gamma);
    }

    // ratio per grid node
    std::vector<double> ratio(rs.size(), std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < rs.size(); ++i) {
        const double r = rs[i];
        const double val = kind == GrowthKind::Bounded
                               ? std::fabs(profile.u_at(r) - rep.u_inf)
                               : std::fabs(profile.u_at(r));
        if (rep.critical && kind == GrowthKind::Unbounded) {
            if (r > 1) ratio[i] = val / std::log(r);
        } else {
            ratio[i] = val * std::exp(-expo.delta[i] * std::log(r));
        }
    }

    auto min_from = [&](double r0) {
        double m = std::numeric_limits<double>::infinity();
        double arg = r0;
        for (std::size_t i = 0; i < rs.size(); ++i)
            if (rs[i] >= r0 && ratio[i] < m) {
                m = ratio[i];
                arg = rs[i];
            }
        return std::pair<double, double>(m, arg);
    };

    auto [m1, arg1] = min_from(1.0);
    rep.min_ratio_from_1 = m1;

    // scan r0 in {1,2,4,...} for the smallest start where the min stabilizes
    double r0 = 1;
    auto [m_prev, arg_prev] = min_from(r0);
    rep.min_ratio = m_prev;
    rep.argmin_r = arg_prev;
    rep.r0 = r0;
    while (2 * r0 <= rs.back() / 2) {
        auto [m_next, arg_next] = min_from(2 * r0);
        if (std::fabs(m_next - m_prev) <= 0.01 * std::max(std::fabs(m_prev), 1e-300)) break;
        r0 *= 2;
        m_prev = m_next;
        arg_prev = arg_next;
        rep.min_ratio = m_prev;
        rep.argmin_r = arg_prev;
        rep.r0 = r0;
    }
    return rep;
}

}  // namespace khess
