#pragma once
// Shared problem data: dimension/order constants, radial weights w(r) with
// growth rate W(r) = r w'(r)/w(r), the rate function v(r) = (k-1+W(r))/(k+1),
// sampled radial profiles and nonlinearity descriptors. All types here are
// immutable after construction and safe to share across threads.

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "khess/numerics.hpp"

namespace khess {

using json = nlohmann::ordered_json;

struct ProblemParams {
    int n = 1;  // spatial dimension
    int k = 1;  // Hessian order, 1 <= k <= n

    ProblemParams(int n_, int k_);

    double cnk() const { return binomial(n, k) / n; }
    // surface measure of the unit (n-1)-sphere, 2 pi^{n/2} / Gamma(n/2)
    double omega_n() const;
    double nk() const { return static_cast<double>(n) / k; }
};

enum class WeightKind { PowerLaw, InterpolatedPower, Tabulated };

struct WeightEval {
    double w;    // w(r)
    double W;    // r w'(r)/w(r)
    double v;    // (k-1+W)/(k+1)
    double rvp;  // r v'(r)
};

// Radial weight w(r). Closed-form kinds:
//   PowerLaw:           w = r^sigma1
//   InterpolatedPower:  w = r^sigma1 (1+r^sigma2)^(-tau/sigma2),
//                       W = sigma1 - tau h_{sigma2}(r)
// Tabulated weights estimate W by centered differences of log w against
// log r (one-sided at the ends).
class WeightSpec {
public:
    static WeightSpec constant() { return power_law(0.0); }
    static WeightSpec power_law(double sigma1);
    static WeightSpec interpolated_power(double sigma1, double sigma2, double tau);
    static WeightSpec tabulated(std::vector<double> r, std::vector<double> w);

    WeightKind kind() const { return kind_; }
    double sigma1() const;
    double sigma2() const;
    double tau() const;

    double w(double r) const;     // r > 0
    double W(double r) const;     // r > 0
    double rWp(double r) const;   // r W'(r), r > 0
    double Gamma() const;         // lim_{r->0} W
    double gamma_inf() const;     // lim_{r->+inf} W

    // r^p * w(r) evaluated stably, with the r -> 0 limit for closed forms
    double rpow_w(double p, double r) const;

    json to_json() const;
    static WeightSpec from_json(const json& j);

private:
    WeightSpec() = default;
    static void check_r(double r);

    WeightKind kind_ = WeightKind::PowerLaw;
    double sigma1_ = 0, sigma2_ = 0, tau_ = 0;
    std::vector<double> tab_logr_, tab_logw_, tab_W_, tab_rWp_;
};

WeightEval weight_eval(const WeightSpec& spec, const ProblemParams& p, double r);

// The rate v(r) = (k-1+W(r))/(k+1) and its scaled derivative r v'(r).
// v extends to r = 0 through the Gamma limit of W.
class AuxiliaryRate {
public:
    AuxiliaryRate(WeightSpec spec, ProblemParams p)
        : spec_(std::move(spec)), p_(p) {}

    double v(double r) const;
    double rvp(double r) const;
    double v0() const { return (p_.k - 1 + spec_.Gamma()) / (p_.k + 1); }
    double v_inf() const { return (p_.k - 1 + spec_.gamma_inf()) / (p_.k + 1); }
    // v^2 + (n/k) v + n/k - 1 - r v'(r)
    double radicand(double r) const;

    const WeightSpec& weight() const { return spec_; }
    const ProblemParams& params() const { return p_; }

private:
    WeightSpec spec_;
    ProblemParams p_;
};

// Discretized radial function on a strictly increasing grid. The second
// derivative is optional; exact solution families supply it analytically,
// numerically integrated profiles do not.
struct RadialProfile {
    std::vector<double> r, u, du;
    std::vector<double> d2u;  // empty when unavailable

    RadialProfile() = default;
    RadialProfile(std::vector<double> r_, std::vector<double> u_, std::vector<double> du_,
                  std::vector<double> d2u_ = {});

    bool has_d2u() const { return !d2u.empty(); }
    std::size_t size() const { return r.size(); }
    double r_min() const { return r.front(); }
    double r_max() const { return r.back(); }

    double u_at(double x) const { return lerp_at(r, u, x); }
    double du_at(double x) const { return lerp_at(r, du, x); }
    double d2u_at(double x) const;

    // Solution invariants of the radial setting (u nondecreasing, u' >= 0,
    // u'(0) = 0). Grid validity itself is enforced at construction; adverse
    // profiles violating the solution invariants stay representable so the
    // checks below can flag them.
    std::optional<std::string> invariant_violation() const;

    void to_csv(std::ostream& os) const;           // header "r,u,du[,d2u]"
    static RadialProfile from_csv(std::istream& is);
};

struct Nonlinearity {
    std::function<double(double)> g;
    std::function<double(double)> gp;  // g'
    bool claims_nonnegative = false;
    bool claims_nonincreasing = false;

    static Nonlinearity constant(double value);
    // first sampled point violating a claimed flag, if any
    std::optional<double> flag_violation(std::span<const double> samples) const;
};

struct HypothesesReport {
    bool W_nonincreasing = false;
    bool limits_finite = false;
    bool dimension_ok = false;        // n > k(k+1)/(2k+gamma)
    double Gamma = 0;
    double gamma = 0;
    double v_inf = 0;
    double dimension_margin = 0;      // (n/k)(v_inf+1) - 1
    double dimension_threshold = 0;   // k(k+1)/(2k+gamma)
    std::vector<std::string> warnings;

    bool all_ok() const { return W_nonincreasing && limits_finite && dimension_ok; }
    json to_json() const;
};

// Sampled check of the standing hypotheses on w: monotone W, finite limits,
// and the dimension condition. Findings are reported, never thrown.
HypothesesReport validate_hypotheses(const WeightSpec& spec, const ProblemParams& p);

// {"n":..., "k":..., "weight":{...}}
json problem_to_json(const ProblemParams& p, const WeightSpec& spec);

}  // namespace khess
