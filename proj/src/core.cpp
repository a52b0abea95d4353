#include "khess/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace khess {

ProblemParams::ProblemParams(int n_, int k_) : n(n_), k(k_) {
    if (n < 1 || k < 1 || k > n)
        throw std::invalid_argument("ProblemParams: require 1 <= k <= n");
}

double ProblemParams::omega_n() const {
    return 2.0 * std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0);
}

// ---------------------------------------------------------------------------
// WeightSpec

WeightSpec WeightSpec::power_law(double sigma1) {
    WeightSpec s;
    s.kind_ = WeightKind::PowerLaw;
    s.sigma1_ = sigma1;
    return s;
}

WeightSpec WeightSpec::interpolated_power(double sigma1, double sigma2, double tau) {
    if (!(sigma2 > 0))
        throw std::invalid_argument("WeightSpec: sigma2 must be positive (it divides the exponent)");
    WeightSpec s;
    s.kind_ = WeightKind::InterpolatedPower;
    s.sigma1_ = sigma1;
    s.sigma2_ = sigma2;
    s.tau_ = tau;
    return s;
}

WeightSpec WeightSpec::tabulated(std::vector<double> r, std::vector<double> w) {
    if (r.size() < 3 || r.size() != w.size())
        throw std::invalid_argument("WeightSpec: tabulated needs >= 3 matching samples");
    WeightSpec s;
    s.kind_ = WeightKind::Tabulated;
    const std::size_t m = r.size();
    s.tab_logr_.resize(m);
    s.tab_logw_.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (!(r[i] > 0) || (i > 0 && !(r[i] > r[i - 1])))
            throw std::invalid_argument("WeightSpec: tabulated grid must be positive increasing");
        if (!(w[i] > 0))
            throw std::invalid_argument("WeightSpec: tabulated weights must be positive");
        s.tab_logr_[i] = std::log(r[i]);
        s.tab_logw_[i] = std::log(w[i]);
    }
    // W = d(log w)/d(log r): centered differences, one-sided at the ends
    auto diff = [](const std::vector<double>& x, const std::vector<double>& y) {
        const std::size_t m = x.size();
        std::vector<double> d(m);
        d[0] = (y[1] - y[0]) / (x[1] - x[0]);
        for (std::size_t i = 1; i + 1 < m; ++i) d[i] = (y[i + 1] - y[i - 1]) / (x[i + 1] - x[i - 1]);
        d[m - 1] = (y[m - 1] - y[m - 2]) / (x[m - 1] - x[m - 2]);
        return d;
    };
    s.tab_W_ = diff(s.tab_logr_, s.tab_logw_);
    s.tab_rWp_ = diff(s.tab_logr_, s.tab_W_);
    return s;
}

double WeightSpec::sigma1() const {
    if (kind_ == WeightKind::Tabulated) throw std::logic_error("sigma1: tabulated weight");
    return sigma1_;
}
double WeightSpec::sigma2() const {
    if (kind_ != WeightKind::InterpolatedPower) throw std::logic_error("sigma2: not interpolated");
    return sigma2_;
}
double WeightSpec::tau() const {
    if (kind_ == WeightKind::Tabulated) throw std::logic_error("tau: tabulated weight");
    return kind_ == WeightKind::PowerLaw ? 0.0 : tau_;
}

void WeightSpec::check_r(double r) {
    if (!(r > 0)) throw std::domain_error("weight evaluation requires r > 0");
}

double WeightSpec::w(double r) const {
    check_r(r);
    const double lr = std::log(r);
    switch (kind_) {
        case WeightKind::PowerLaw:
            return std::exp(sigma1_ * lr);
        case WeightKind::InterpolatedPower:
            return std::exp(sigma1_ * lr - tau_ / sigma2_ * softplus(sigma2_ * lr));
        case WeightKind::Tabulated:
            if (lr < tab_logr_.front() || lr > tab_logr_.back())
                throw std::domain_error("tabulated weight: r outside table (no extrapolation)");
            return std::exp(lerp_at(tab_logr_, tab_logw_, lr));
    }
    return 0;
}

double WeightSpec::W(double r) const {
    check_r(r);
    switch (kind_) {
        case WeightKind::PowerLaw:
            return sigma1_;
        case WeightKind::InterpolatedPower:
            return sigma1_ - tau_ * logistic(sigma2_ * std::log(r));
        case WeightKind::Tabulated: {
            const double lr = std::log(r);
            if (lr < tab_logr_.front() || lr > tab_logr_.back())
                throw std::domain_error("tabulated weight: r outside table (no extrapolation)");
            return lerp_at(tab_logr_, tab_W_, lr);
        }
    }
    return 0;
}

double WeightSpec::rWp(double r) const {
    check_r(r);
    switch (kind_) {
        case WeightKind::PowerLaw:
            return 0.0;
        case WeightKind::InterpolatedPower: {
            const double h = logistic(sigma2_ * std::log(r));
            return -tau_ * sigma2_ * (1 - h) * h;
        }
        case WeightKind::Tabulated: {
            const double lr = std::log(r);
            if (lr < tab_logr_.front() || lr > tab_logr_.back())
                throw std::domain_error("tabulated weight: r outside table (no extrapolation)");
            return lerp_at(tab_logr_, tab_rWp_, lr);
        }
    }
    return 0;
}

double WeightSpec::Gamma() const {
    switch (kind_) {
        case WeightKind::PowerLaw:
        case WeightKind::InterpolatedPower:
            return sigma1_;
        case WeightKind::Tabulated:
            return tab_W_.front();
    }
    return 0;
}

double WeightSpec::gamma_inf() const {
    switch (kind_) {
        case WeightKind::PowerLaw:
            return sigma1_;
        case WeightKind::InterpolatedPower:
            return sigma1_ - tau_;
        case WeightKind::Tabulated:
            return tab_W_.back();
    }
    return 0;
}

double WeightSpec::rpow_w(double p, double r) const {
    if (r < 0) throw std::domain_error("rpow_w: r must be >= 0");
    if (kind_ == WeightKind::Tabulated) {
        return std::pow(r, p) * w(r);
    }
    const double q = p + sigma1_;
    if (r == 0) {
        if (q > 0) return 0.0;
        if (q == 0) return 1.0;  // (1+0)^{-tau/sigma2} = 1
        return std::numeric_limits<double>::infinity();
    }
    const double lr = std::log(r);
    double e = q * lr;
    if (kind_ == WeightKind::InterpolatedPower) e -= tau_ / sigma2_ * softplus(sigma2_ * lr);
    return std::exp(e);
}

json WeightSpec::to_json() const {
    json j;
    switch (kind_) {
        case WeightKind::PowerLaw:
            j["kind"] = "power";
            j["sigma1"] = sigma1_;
            break;
        case WeightKind::InterpolatedPower:
            j["kind"] = "interp";
            j["sigma1"] = sigma1_;
            j["sigma2"] = sigma2_;
            j["tau"] = tau_;
            break;
        case WeightKind::Tabulated: {
            j["kind"] = "tabulated";
            json r = json::array(), w = json::array();
            for (std::size_t i = 0; i < tab_logr_.size(); ++i) {
                r.push_back(std::exp(tab_logr_[i]));
                w.push_back(std::exp(tab_logw_[i]));
            }
            j["r"] = std::move(r);
            j["w"] = std::move(w);
            break;
        }
    }
    return j;
}

WeightSpec WeightSpec::from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "const") return constant();
    if (kind == "power") return power_law(j.at("sigma1").get<double>());
    if (kind == "interp")
        return interpolated_power(j.at("sigma1").get<double>(), j.at("sigma2").get<double>(),
                                  j.at("tau").get<double>());
    if (kind == "tabulated")
        return tabulated(j.at("r").get<std::vector<double>>(), j.at("w").get<std::vector<double>>());
    throw std::invalid_argument("WeightSpec: unknown kind '" + kind + "'");
}

WeightEval weight_eval(const WeightSpec& spec, const ProblemParams& p, double r) {
    if (!(r > 0)) throw std::domain_error("weight_eval: r must be positive");
    WeightEval e;
    e.w = spec.w(r);
    e.W = spec.W(r);
    e.v = (p.k - 1 + e.W) / (p.k + 1);
    e.rvp = spec.rWp(r) / (p.k + 1);
    return e;
}

// ---------------------------------------------------------------------------
// AuxiliaryRate

double AuxiliaryRate::v(double r) const {
    if (r < 0) throw std::domain_error("v: r must be >= 0");
    const double W = (r == 0) ? spec_.Gamma() : spec_.W(r);
    return (p_.k - 1 + W) / (p_.k + 1);
}

double AuxiliaryRate::rvp(double r) const {
    if (r < 0) throw std::domain_error("rvp: r must be >= 0");
    if (r == 0) return 0.0;
    return spec_.rWp(r) / (p_.k + 1);
}

double AuxiliaryRate::radicand(double r) const {
    const double vr = v(r);
    return vr * vr + p_.nk() * vr + p_.nk() - 1 - rvp(r);
}

// ---------------------------------------------------------------------------
// RadialProfile

RadialProfile::RadialProfile(std::vector<double> r_, std::vector<double> u_,
                             std::vector<double> du_, std::vector<double> d2u_)
    : r(std::move(r_)), u(std::move(u_)), du(std::move(du_)), d2u(std::move(d2u_)) {
    if (r.size() < 2 || u.size() != r.size() || du.size() != r.size())
        throw std::invalid_argument("RadialProfile: need matching r/u/du of length >= 2");
    if (!d2u.empty() && d2u.size() != r.size())
        throw std::invalid_argument("RadialProfile: d2u size mismatch");
    if (r.front() < 0) throw std::invalid_argument("RadialProfile: grid must start at r >= 0");
    for (std::size_t i = 0; i + 1 < r.size(); ++i)
        if (!(r[i] < r[i + 1]))
            throw std::invalid_argument("RadialProfile: grid must be strictly increasing");
}

double RadialProfile::d2u_at(double x) const {
    if (!has_d2u()) throw std::logic_error("RadialProfile: d2u not available");
    return lerp_at(r, d2u, x);
}

std::optional<std::string> RadialProfile::invariant_violation() const {
    for (std::size_t i = 0; i + 1 < r.size(); ++i)
        if (u[i + 1] < u[i] - 1e-12 * (1 + std::fabs(u[i])))
            return "u decreases at r=" + std::to_string(r[i + 1]);
    for (std::size_t i = 0; i < r.size(); ++i)
        if (du[i] < -1e-12) return "u' negative at r=" + std::to_string(r[i]);
    if (r.front() == 0.0 && std::fabs(du.front()) > 1e-12)
        return "u'(0) != 0";
    return std::nullopt;
}

void RadialProfile::to_csv(std::ostream& os) const {
    char buf[128];
    os << (has_d2u() ? "r,u,du,d2u\n" : "r,u,du\n");
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (has_d2u())
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r[i], u[i], du[i], d2u[i]);
        else
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", r[i], u[i], du[i]);
        os << buf;
    }
}

RadialProfile RadialProfile::from_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("profile CSV: empty input");
    auto strip = [](std::string s) {
        s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\r'; }),
                s.end());
        return s;
    };
    const std::string header = strip(line);
    bool with_d2u = false;
    if (header == "r,u,du,d2u")
        with_d2u = true;
    else if (header != "r,u,du")
        throw std::invalid_argument("profile CSV: expected header 'r,u,du[,d2u]'");
    std::vector<double> r, u, du, d2u;
    while (std::getline(is, line)) {
        if (strip(line).empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() != (with_d2u ? 4u : 3u))
            throw std::invalid_argument("profile CSV: wrong column count");
        r.push_back(vals[0]);
        u.push_back(vals[1]);
        du.push_back(vals[2]);
        if (with_d2u) d2u.push_back(vals[3]);
    }
    return RadialProfile(std::move(r), std::move(u), std::move(du), std::move(d2u));
}

// ---------------------------------------------------------------------------
// Nonlinearity

Nonlinearity Nonlinearity::constant(double value) {
    Nonlinearity g;
    g.g = [value](double) { return value; };
    g.gp = [](double) { return 0.0; };
    g.claims_nonnegative = value >= 0;
    g.claims_nonincreasing = true;
    return g;
}

std::optional<double> Nonlinearity::flag_violation(std::span<const double> samples) const {
    for (double s : samples) {
        if (claims_nonnegative && g(s) < 0) return s;
        if (claims_nonincreasing && gp(s) > 0) return s;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Hypotheses

json HypothesesReport::to_json() const {
    json j;
    j["W_nonincreasing"] = W_nonincreasing;
    j["limits_finite"] = limits_finite;
    j["dimension_ok"] = dimension_ok;
    j["Gamma"] = Gamma;
    j["gamma"] = gamma;
    j["v_inf"] = v_inf;
    j["dimension_margin"] = dimension_margin;
    j["dimension_threshold"] = dimension_threshold;
    j["warnings"] = warnings;
    j["ok"] = all_ok();
    return j;
}

HypothesesReport validate_hypotheses(const WeightSpec& spec, const ProblemParams& p) {
    HypothesesReport rep;
    rep.Gamma = spec.Gamma();
    rep.gamma = spec.gamma_inf();
    rep.limits_finite = std::isfinite(rep.Gamma) && std::isfinite(rep.gamma);
    if (spec.kind() == WeightKind::Tabulated)
        rep.warnings.push_back("tabulated weight: limits estimated from table edges");

    std::vector<double> grid;
    if (spec.kind() == WeightKind::Tabulated) {
        // sample strictly inside the table
        const json j = spec.to_json();
        const auto r = j.at("r").get<std::vector<double>>();
        grid.assign(r.begin(), r.end());
    } else {
        grid = log_grid(1e-3, 1e3, 400);
    }
    rep.W_nonincreasing = true;
    double prev = spec.W(grid.front());
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double cur = spec.W(grid[i]);
        if (cur > prev + 1e-12 * (1 + std::fabs(prev))) {
            rep.W_nonincreasing = false;
            rep.warnings.push_back("W increases near r=" + std::to_string(grid[i]) +
                                   "; monotone-W hypothesis violated");
            break;
        }
        prev = cur;
    }

    rep.v_inf = (p.k - 1 + rep.gamma) / (p.k + 1);
    rep.dimension_margin = p.nk() * (rep.v_inf + 1) - 1;
    const double denom = 2.0 * p.k + rep.gamma;
    rep.dimension_threshold =
        denom > 0 ? p.k * (p.k + 1) / denom : std::numeric_limits<double>::infinity();
    rep.dimension_ok = denom > 0 && p.n > rep.dimension_threshold;
    return rep;
}

json problem_to_json(const ProblemParams& p, const WeightSpec& spec) {
    json j;
    j["n"] = p.n;
    j["k"] = p.k;
    j["weight"] = spec.to_json();
    return j;
}

}  // namespace khess
