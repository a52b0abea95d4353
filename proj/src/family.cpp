#include "khess/family.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "khess/radial_hessian.hpp"

namespace khess {

WeightSpec FamilyParams::weight() const {
    if (tau == 0) return WeightSpec::power_law(sigma1);
    return WeightSpec::interpolated_power(sigma1, sigma2, tau);
}

bool FamilyParams::is_valid(const ProblemParams& p, std::string* why) const {
    auto fail = [&](const char* msg) {
        if (why) *why = msg;
        return false;
    };
    if (tau < 0) return fail("tau must be >= 0");
    if (!(sigma1 > -p.k)) return fail("sigma1 <= -k");
    if (tau == 0) {
        if (!(p.n > p.k * (p.k + 1) / (2 * p.k + sigma1)))
            return fail("n <= k(k+1)/(2k+sigma1)");
    } else {
        if (!(p.k * (sigma2 - 2) >= sigma1)) return fail("k(sigma2-2) < sigma1");
        if (!(2 * p.k + sigma1 > tau)) return fail("2k+sigma1 <= tau");
        const double bound =
            std::max(std::sqrt(tau * sigma2 / (p.k + 1)) + (2 * p.k - (p.k - 1) * sigma1) / p.k,
                     p.k * (p.k + 1) / (2 * p.k + sigma1 - tau));
        if (!(p.n > bound)) return fail("n below the tau > 0 dimension bound");
    }
    return true;
}

void FamilyParams::validate(const ProblemParams& p) const {
    std::string why;
    if (!is_valid(p, &why)) throw std::invalid_argument("FamilyParams: " + why);
}

json FamilyParams::to_json() const {
    json j;
    j["sigma1"] = sigma1;
    j["sigma2"] = sigma2;
    j["tau"] = tau;
    j["beta"] = beta;
    return j;
}

FamilyParams FamilyParams::from_json(const json& j) {
    FamilyParams fp;
    fp.sigma1 = j.at("sigma1").get<double>();
    fp.sigma2 = j.value("sigma2", 2.0);
    fp.tau = j.value("tau", 0.0);
    fp.beta = j.at("beta").get<double>();
    return fp;
}

HLambda h_lambda(double lambda, double r) {
    if (!(lambda > 0) || r < 0) throw std::domain_error("h_lambda: need lambda > 0, r >= 0");
    const double h = r == 0 ? 0.0 : logistic(lambda * std::log(r));
    return {h, lambda * (1 - h) * h};
}

FamilyPoint family_point(const FamilyParams& fp, const ProblemParams& p, double r) {
    if (r < 0) throw std::domain_error("family_point: r >= 0");
    const double mu = fp.mu(p);
    const double beta = fp.beta;
    FamilyPoint pt;
    if (r == 0) {
        pt.u = beta == 0 ? 0.0 : (beta > 0 ? 1.0 : -1.0);
        pt.du = 0.0;
        const double ab = beta == 0 ? 1.0 : std::fabs(beta);
        pt.lambda2 = mu > 2 ? 0.0 : (mu == 2 ? ab : std::numeric_limits<double>::infinity());
        pt.d2u = pt.lambda2 * (mu - 1);
        return pt;
    }
    const double L = std::log(r);
    const double A = softplus(mu * L);  // log(1 + r^mu)
    if (beta == 0) {
        pt.u = A / mu;
        pt.du = std::exp((mu - 1) * L - A);
        pt.lambda2 = std::exp((mu - 2) * L - A);
    } else {
        const double lb = std::log(std::fabs(beta));
        pt.u = (beta > 0 ? 1.0 : -1.0) * std::exp(beta / mu * A);
        pt.du = std::exp(lb + (mu - 1) * L + (beta / mu - 1) * A);
        pt.lambda2 = std::exp(lb + (mu - 2) * L + (beta / mu - 1) * A);
    }
    pt.d2u = pt.lambda2 * (mu - 1 + (beta - mu) * h_lambda(mu, r).h);
    return pt;
}

double u_beta(const FamilyParams& fp, const ProblemParams& p, double r) {
    return family_point(fp, p, r).u;
}
double u_beta_prime(const FamilyParams& fp, const ProblemParams& p, double r) {
    return family_point(fp, p, r).du;
}
double lambda2_beta(const FamilyParams& fp, const ProblemParams& p, double r) {
    return family_point(fp, p, r).lambda2;
}

RadialProfile family_profile(const FamilyParams& fp, const ProblemParams& p, double rmin,
                             double rmax, std::size_t points, bool with_d2u) {
    std::vector<double> r = log_grid(rmin, rmax, points);
    std::vector<double> u(points), du(points), d2u;
    if (with_d2u) d2u.resize(points);
    for (std::size_t i = 0; i < points; ++i) {
        const FamilyPoint pt = family_point(fp, p, r[i]);
        u[i] = pt.u;
        du[i] = pt.du;
        if (with_d2u) d2u[i] = pt.d2u;
    }
    return RadialProfile(std::move(r), std::move(u), std::move(du), std::move(d2u));
}

// ---------------------------------------------------------------------------
// g_beta

namespace {

struct GCoeffs {
    double n, k, mu, sigma2, tau, beta;
};

// f and f' at a point s > 0 strictly inside I for beta != 0, through
// log-domain primitives (s^{mu/beta} = e^E can overflow near s -> 0 when
// beta < 0)
void f_interior(const GCoeffs& c, double s, double* f, double* fp) {
    const double L = std::log(s);
    const double E = c.mu / c.beta * L;  // >= 0 on I
    const double em = std::exp(-E);      // s^{-mu/beta}
    const double P = c.n + c.k * (c.beta - 2) + c.k * (c.mu - c.beta) * em;
    double lq = 0;    // log q
    double Dq_s = 0;  // s (tau/sigma2) q'/q
    if (c.tau > 0) {
        if (E > 0) {
            const double ly = log_expm1(E);
            const double yp = c.sigma2 / c.mu * ly;
            lq = softplus(yp);
            const double ce = c.sigma2 / c.mu - 1;
            const double expo = (std::fabs(ce) < 1e-13 ? 0.0 : ce * ly) + E - lq;
            Dq_s = c.tau / c.beta * std::exp(expo);
        } else {
            Dq_s = std::fabs(c.sigma2 - c.mu) < 1e-12 * c.sigma2 ? c.tau / c.beta : 0.0;
        }
    }
    const double X = c.tau > 0 ? c.tau / c.sigma2 * lq : 0.0;
    const double amp = std::exp(c.k * std::log(std::fabs(c.beta)) + X + c.k * (L - E));
    *f = amp * P;
    *fp = amp * std::exp(-L) * (P * Dq_s + c.k * (c.beta - c.mu) / c.beta * (P + c.mu * em));
}

// beta = 0 branch at s >= 0
void f0_interior(const GCoeffs& c, double s, double* f, double* fp) {
    const double E = c.mu * s;
    const double em = std::exp(-E);
    const double P = c.n - 2 * c.k + c.k * c.mu * em;
    double lq = 0, Dq = 0;  // (tau/sigma2) q'/q
    if (c.tau > 0) {
        if (E > 0) {
            const double ly = log_expm1(E);
            const double yp = c.sigma2 / c.mu * ly;
            lq = softplus(yp);
            const double ce = c.sigma2 / c.mu - 1;
            const double expo = (std::fabs(ce) < 1e-13 ? 0.0 : ce * ly) + E - lq;
            Dq = c.tau * std::exp(expo);
        } else {
            Dq = std::fabs(c.sigma2 - c.mu) < 1e-12 * c.sigma2 ? c.tau : 0.0;
        }
    }
    const double X = c.tau > 0 ? c.tau / c.sigma2 * lq : 0.0;
    const double amp = std::exp(X - c.k * E);
    *f = amp * P;
    *fp = amp * (P * Dq - c.k * c.mu * (P + c.mu * em));
}

// one-sided value and slope of f at the inner boundary (s -> 1 for beta != 0,
// s -> 0 for beta = 0), |beta|^k factor included
void f_boundary(const GCoeffs& c, double* value, double* slope) {
    const double F1 = c.n + c.k * (c.mu - 2);
    const bool mu_eq_s2 = c.tau > 0 && std::fabs(c.sigma2 - c.mu) < 1e-12 * c.sigma2;
    if (c.beta != 0) {
        const double ab = pow_int(std::fabs(c.beta), static_cast<int>(c.k));
        const double q_term = mu_eq_s2 ? c.tau / c.beta * F1 : 0.0;
        *value = ab * F1;
        *slope =
            ab * (q_term + c.k * (c.beta - c.mu) * ((c.k + 1) * c.mu + c.n - 2 * c.k) / c.beta);
    } else {
        const double q_term = mu_eq_s2 ? c.tau * F1 : 0.0;
        *value = F1;
        *slope = q_term - c.k * c.mu * ((c.k + 1) * c.mu + c.n - 2 * c.k);
    }
}

}  // namespace

GBetaEval g_beta(const FamilyParams& fp, const ProblemParams& p, double s) {
    const GCoeffs co{static_cast<double>(p.n), static_cast<double>(p.k),
                     fp.mu(p), fp.sigma2, fp.tau, fp.beta};
    const double c = p.cnk();
    double f = 0, fprime = 0;
    if (fp.beta > 0) {
        if (s >= 1) {
            f_interior(co, s, &f, &fprime);
            return {c * f, c * fprime, false};
        }
        double bv, bs;
        f_boundary(co, &bv, &bs);
        return {c * (bv + bs * (s - 1)), c * bs, true};
    }
    if (fp.beta < 0) {
        if (s >= 0) return {0.0, 0.0, true};  // both one-sided limits vanish
        if (s >= -1) {
            f_interior(co, -s, &f, &fprime);
            return {c * f, -c * fprime, false};
        }
        double bv, bs;
        f_boundary(co, &bv, &bs);
        return {c * (bv - bs * (s + 1)), -c * bs, true};
    }
    if (s >= 0) {
        f0_interior(co, s, &f, &fprime);
        return {c * f, c * fprime, false};
    }
    double bv, bs;
    f_boundary(co, &bv, &bs);
    return {c * (bv + bs * s), c * bs, true};
}

Nonlinearity g_beta_nonlinearity(const FamilyParams& fp, const ProblemParams& p) {
    Nonlinearity g;
    g.g = [fp, p](double s) { return g_beta(fp, p, s).value; };
    g.gp = [fp, p](double s) { return g_beta(fp, p, s).derivative; };
    const double mu = fp.mu(p);
    g.claims_nonnegative = p.n + p.k * (fp.beta - 2) > 0 && p.n + p.k * (mu - 2) > 0;
    g.claims_nonincreasing = false;  // reported only, never assumed for the family
    return g;
}

double hardy_weight_V(const FamilyParams& fp, const ProblemParams& p, double r) {
    if (r < 0) throw std::domain_error("hardy_weight_V: r >= 0");
    if (r == 0) return 0.0;  // exponent 2 + (k+1) sigma1/k > 0 under sigma1 > -k
    const double mu = fp.mu(p);
    const double L = std::log(r);
    const double A = softplus(mu * L);
    const double lb = fp.beta == 0 ? 0.0 : std::log(std::fabs(fp.beta));
    return std::exp(2 * L + (p.k + 1) * (lb + (mu - 2) * L +
                                         ((fp.beta == 0 ? 0.0 : fp.beta / mu) - 1) * A));
}

double hardy_weight_rVp_over_V(const FamilyParams& fp, const ProblemParams& p, double r) {
    const double mu = fp.mu(p);
    return 2 + (p.k + 1) * (mu - 2 + (fp.beta - mu) * h_lambda(mu, r).h);
}

// ---------------------------------------------------------------------------
// threshold

FamilyThreshold::FamilyThreshold(FamilyParams fp, ProblemParams p)
    : fp_(fp), p_(p), rate_(fp.weight(), p) {
    fp_.validate(p_);
    v0_ = (p_.k - 1 + fp_.sigma1) / (p_.k + 1);
    const double nu2 = v0_ * v0_ + p_.nk() * v0_ + p_.nk() - 1 +
                       fp_.tau * fp_.sigma2 / (4.0 * (p_.k + 1));
    if (!(nu2 >= 0)) throw std::domain_error("FamilyThreshold: negative nu^2");
    nu_ = std::sqrt(nu2);
    sup_Q_ = (-p_.n + 2 * nu_ + 2 * p_.k + 2) / (p_.k + 1) + 2 * v0_ / (p_.k + 1);
}

double FamilyThreshold::vbar(double r) const {
    if (!(r >= 1)) throw std::domain_error("vbar: defined for r >= 1");
    if (fp_.tau == 0) return v0_;
    const double x = fp_.sigma2 * std::log(r);
    // (log((1+r^s2)/2)) / (s2 log r) = 1/2 + log cosh(x/2)/x
    const double phi = x < 1e-8 ? 0.5 + x / 8 : 0.5 + log_cosh(x / 2) / x;
    return v0_ - fp_.tau / (p_.k + 1) * phi;
}

double FamilyThreshold::Q(double r) const {
    const double base = (-p_.n + 2 * nu_ + 2 * p_.k + 2) / (p_.k + 1);
    const double tail = r >= 1 ? vbar(r) : rate_.v(r);
    return base + 2 * tail / (p_.k + 1);
}

double FamilyThreshold::A(double r) const {
    if (r < 1) return 0.0;
    return 2 * (vbar(r) - rate_.v(r));
}

double FamilyThreshold::B(double r) const {
    const double h = fp_.tau == 0 ? 0.0 : h_lambda(fp_.sigma2, r).h;
    return (p_.k * p_.k + 1) * (v0_ + 1) / p_.k + p_.n - 2 * p_.k +
           2 * fp_.tau / (p_.k + 1) * h;
}

double q_threshold(const FamilyParams& fp, const ProblemParams& p, double r) {
    return FamilyThreshold(fp, p).Q(r);
}

json BetaAdmissibility::to_json() const {
    json j;
    j["admissible"] = admissible;
    j["sup_Q"] = sup_Q;
    j["grid_sup_Q"] = grid_sup_Q;
    j["argmax_r"] = argmax_r;
    j["sup_interior"] = sup_interior;
    return j;
}

BetaAdmissibility admissible_beta_check(const FamilyParams& fp, const ProblemParams& p) {
    const FamilyThreshold th(fp, p);
    BetaAdmissibility rep;
    rep.sup_Q = th.sup_Q();
    rep.grid_sup_Q = -std::numeric_limits<double>::infinity();
    const auto grid = log_grid(1e-3, 1e6, 2001);
    for (double r : grid) {
        const double q = th.Q(r);
        if (q > rep.grid_sup_Q) {
            rep.grid_sup_Q = q;
            rep.argmax_r = r;
        }
    }
    rep.sup_interior = rep.argmax_r > grid.front() * (1 + 1e-9) &&
                       rep.argmax_r < grid.back() * (1 - 1e-9);
    const double sup = std::max(rep.sup_Q, rep.grid_sup_Q);
    rep.admissible = fp.beta >= sup - 1e-12 * (1 + std::fabs(sup));
    return rep;
}

json KConvexityReport::to_json() const {
    json j;
    j["analytic_ok"] = analytic_ok;
    j["grid_ok"] = grid_ok;
    if (!grid_ok) {
        j["fail_j"] = fail_j;
        j["fail_r"] = fail_r;
    }
    j["min_margin"] = min_margin;
    return j;
}

KConvexityReport kconvexity_certificate(const FamilyParams& fp, const ProblemParams& p,
                                        std::span<const double> r_grid) {
    const double mu = fp.mu(p);
    KConvexityReport rep;
    rep.analytic_ok = true;
    for (int j = 1; j <= p.k; ++j) {
        if (!(p.n + j * (mu - 2) > 0) || !(p.n + j * (fp.beta - 2) > 0)) {
            rep.analytic_ok = false;
            rep.fail_j = j;
            break;
        }
    }
    // grid values of S_j = c_{n,j} lambda2^j ((n+j(mu-2))(1-h) + (n+j(beta-2))h)
    double scale = 0;
    std::vector<double> vals(r_grid.size() * p.k);
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        const double r = r_grid[i];
        const double l2 = lambda2_beta(fp, p, r);
        const double h = h_lambda(mu, r).h;
        for (int j = 1; j <= p.k; ++j) {
            const double bracket = (p.n + j * (mu - 2)) * (1 - h) + (p.n + j * (fp.beta - 2)) * h;
            const double s = binomial(p.n, j) / p.n * pow_int(l2, j) * bracket;
            vals[i * p.k + j - 1] = s;
            scale = std::max(scale, std::fabs(s));
        }
    }
    const double tol = 1e-9 * (1 + scale);
    rep.grid_ok = true;
    rep.min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < r_grid.size(); ++i)
        for (int j = 1; j <= p.k; ++j) {
            const double s = vals[i * p.k + j - 1];
            rep.min_margin = std::min(rep.min_margin, s + tol);
            if (s < -tol && rep.grid_ok) {
                rep.grid_ok = false;
                rep.fail_j = j;
                rep.fail_r = r_grid[i];
            }
        }
    return rep;
}

// ---------------------------------------------------------------------------
// certificate

bool SemistabilityCertificate::all_ok() const {
    if (!beta_admissible) return false;
    for (const auto& item : items)
        if (!item.ok) return false;
    return stability.verdict == StabilityReport::Verdict::SemiStable;
}

json SemistabilityCertificate::to_json() const {
    json j;
    j["beta_admissible"] = beta_admissible;
    j["sup_Q"] = sup_Q;
    json arr = json::array();
    for (const auto& item : items) {
        json ji;
        ji["name"] = item.name;
        ji["ok"] = item.ok;
        ji["extremal_value"] = item.extremal_value;
        ji["extremal_r"] = item.extremal_r;
        if (!item.note.empty()) ji["note"] = item.note;
        arr.push_back(std::move(ji));
    }
    j["items"] = std::move(arr);
    j["stability"] = stability.to_json();
    j["ok"] = all_ok();
    return j;
}

SemistabilityCertificate semistability_certificate(const FamilyParams& fp, const ProblemParams& p,
                                                   const CertificateOptions& opt) {
    fp.validate(p);
    const FamilyThreshold th(fp, p);
    const AuxiliaryRate& rate = th.rate();
    SemistabilityCertificate cert;

    const auto beta_check = admissible_beta_check(fp, p);
    cert.beta_admissible = beta_check.admissible;
    cert.sup_Q = std::max(beta_check.sup_Q, beta_check.grid_sup_Q);

    const auto grid = log_grid(opt.r_lo, opt.r_hi, opt.grid_points);

    // (a) origin limit of r^{n-2} V: decay exponent n + (k+1) sigma1 / k
    {
        CertificateItem item;
        item.name = "origin-limit";
        const double expo = p.n + (p.k + 1) * fp.sigma1 / p.k;
        item.extremal_value = expo;
        bool decay = expo > 0;
        double prev = std::numeric_limits<double>::infinity();
        for (double r = 1e-3; r >= 1e-9; r /= 10) {
            const double val = std::pow(r, p.n - 2) * hardy_weight_V(fp, p, r);
            if (!(val <= prev * (1 + 1e-9))) decay = false;
            prev = val;
        }
        item.ok = decay;
        cert.items.push_back(std::move(item));
    }

    // (b) pointwise Hardy hypothesis with rho = v, theta = 2 nu:
    //     n - 2v - 2nu - 2 + r V'/V >= 0
    {
        CertificateItem item;
        item.name = "hardy-hypothesis";
        item.extremal_value = std::numeric_limits<double>::infinity();
        for (double r : grid) {
            const double F = p.n - 2 * rate.v(r) - 2 * th.nu() - 2 +
                             hardy_weight_rVp_over_V(fp, p, r);
            if (F < item.extremal_value) {
                item.extremal_value = F;
                item.extremal_r = r;
            }
        }
        item.ok = item.extremal_value >= -1e-10 * (1 + p.n + 2 * th.nu());
        cert.items.push_back(std::move(item));
    }

    // (c) product chain: I_+ > 0 and I_- I_+ = B^2 - 4 nu^2 >= 0
    {
        CertificateItem ip, im;
        ip.name = "I-plus-positive";
        im.name = "product-nonnegative";
        ip.extremal_value = std::numeric_limits<double>::infinity();
        im.extremal_value = std::numeric_limits<double>::infinity();
        for (double r : grid) {
            const double Ip = th.I_plus(r), Im = th.I_minus(r);
            if (Ip < ip.extremal_value) {
                ip.extremal_value = Ip;
                ip.extremal_r = r;
            }
            const double prod = Im * Ip;
            if (prod < im.extremal_value) {
                im.extremal_value = prod;
                im.extremal_r = r;
            }
        }
        ip.ok = ip.extremal_value > 0;
        im.ok = im.extremal_value >= -1e-10 * (1 + th.B(1.0) * th.B(1.0));
        cert.items.push_back(std::move(ip));
        cert.items.push_back(std::move(im));
    }

    // A(r) = 2 [ (int_1^r v/s ds)/log r - v(r) ] >= 0 on r >= 1
    {
        CertificateItem item;
        item.name = "A-nonnegative";
        item.extremal_value = std::numeric_limits<double>::infinity();
        for (double r : grid) {
            if (r < 1) continue;
            const double a = th.A(r);
            if (a < item.extremal_value) {
                item.extremal_value = a;
                item.extremal_r = r;
            }
        }
        item.ok = item.extremal_value >= -1e-12 * (1 + std::fabs(th.v0()));
        cert.items.push_back(std::move(item));
    }

    // nu dominates the radicand pointwise: nu >= sqrt(radicand) >= |v|
    {
        CertificateItem item;
        item.name = "nu-chain";
        item.extremal_value = std::numeric_limits<double>::infinity();
        item.ok = true;
        for (double r : grid) {
            const double rad = rate.radicand(r);
            const double vr = rate.v(r);
            if (rad < vr * vr - 1e-10 * (1 + vr * vr)) item.ok = false;
            const double margin = th.nu() - std::sqrt(std::max(rad, 0.0));
            if (margin < item.extremal_value) {
                item.extremal_value = margin;
                item.extremal_r = r;
            }
        }
        if (item.extremal_value < -1e-10 * (1 + th.nu())) item.ok = false;
        cert.items.push_back(std::move(item));
    }

    // (d) independent routes: the Hardy inequality on random test functions
    // and the discretized quadratic form spectrum
    const RadialProfile profile =
        family_profile(fp, p, opt.r_lo, opt.r_hi, opt.profile_points, true);
    {
        CertificateItem item;
        item.name = "hardy-inequality";
        item.ok = true;
        item.extremal_value = std::numeric_limits<double>::infinity();
        const HardyWeight V{[&](double r) { return hardy_weight_V(fp, p, r); },
                            [&](double r) {
                                return hardy_weight_V(fp, p, r) *
                                       hardy_weight_rVp_over_V(fp, p, r);
                            }};
        const auto rho = [&](double r) { return rate.v(r); };
        std::mt19937_64 rng(opt.seed);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        const auto nodes = log_grid(opt.r_lo * 10, opt.r_hi / 10, 257);
        for (int trial = 0; trial < opt.random_etas; ++trial) {
            std::vector<double> y(nodes.size(), 0.0);
            for (std::size_t i = 1; i + 1 < y.size(); ++i) y[i] = unif(rng);
            const PiecewiseLinear eta(nodes, y);
            const HardyReport hr = hardy_certificate(p, V, rho, 2 * th.nu(), eta);
            const double rel = hr.inequality_value / std::max(hr.scale, 1e-300);
            if (rel < item.extremal_value) item.extremal_value = rel;
            if (!hr.hypothesis_ok || !hr.origin_limit_ok || rel < -1e-9) item.ok = false;
        }
        cert.items.push_back(std::move(item));
    }

    cert.stability = is_semistable(p, fp.weight(), g_beta_nonlinearity(fp, p), profile,
                                   opt.stability);
    return cert;
}

}  // namespace khess
