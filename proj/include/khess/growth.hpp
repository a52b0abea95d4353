#pragma once
// Growth exponents and estimate checks. The log-averaged exponent
//   alpha(r) = ( int_1^r Psi(s)/s ds ) / log r,
//   Psi(s)   = v(s) + sqrt(v^2 + (n/k)v + n/k - 1 - s v'(s)),
// drives delta(r) = (-n + 2 alpha(r) + 2k + 2)/(k+1) and its limit
// delta_inf, whose sign is governed by n against 2(k + 2 gamma/k + 4).

#include <iosfwd>

#include "khess/core.hpp"

namespace khess {

double dimension_threshold(const ProblemParams& p, double gamma);  // k(k+1)/(2k+gamma)
double critical_dimension(const ProblemParams& p, double gamma);   // 2(k + 2 gamma/k + 4)
bool is_critical_dimension(const ProblemParams& p, double gamma);  // |n - crit| < 1e-9

// Psi(s); throws std::domain_error on a negative radicand (hypothesis
// violation).
double psi_rate(const AuxiliaryRate& rate, double s);

// alpha(r) for r >= 1; at r = 1 the limiting integrand value Psi(1).
// Adaptive Simpson in t = log s, relative tolerance 1e-10.
double alpha_of_r(const ProblemParams& p, const WeightSpec& spec, double r);

double delta_of_r(const ProblemParams& p, const WeightSpec& spec, double r);

struct DeltaInf {
    double value = 0;        // direct limit chain through v_inf
    double factorized = 0;   // C * (2(k + 2 gamma/k + 4) - n)
    double C = 0;            // the positive prefactor
    double sign_factor = 0;  // 2(k + 2 gamma/k + 4) - n
};

// Both algebraic forms of delta_inf; they must agree (asserted in tests).
// Throws when n <= k(k+1)/(2k+gamma).
DeltaInf delta_inf(const ProblemParams& p, const WeightSpec& spec);

struct ExponentProfile {
    std::vector<double> r, alpha, delta;
    double delta_inf = 0;
    void to_csv(std::ostream& os) const;  // header "r,alpha,delta"
};

// alpha/delta on an ascending grid of radii >= 1, via one cumulative sweep.
ExponentProfile exponent_profile(const ProblemParams& p, const WeightSpec& spec,
                                 std::vector<double> r_grid);

struct EssentialgReport {
    double sup_ratio = 0;
    double argmax_r = 0;
    std::vector<double> r, ratio;
    json to_json() const;
};

// sup over r in r_grid of [ int_r^R s^{k-n} u'(s)^{-(k+1)} ds ] * r^{2 alpha(r)};
// boundedness as R grows is the content of the integral estimate.
EssentialgReport essentialg_ratio(const ProblemParams& p, const WeightSpec& spec,
                                  const RadialProfile& profile, std::span<const double> r_grid,
                                  double R);

struct DoublingReport {
    double min_ratio = 0;
    double argmin_r = 0;
    bool violation = false;  // a vanishing |u(2r) - u(r)| was detected
    std::vector<double> r, ratio;
    json to_json() const;
};

// min over r of |u(2r) - u(r)| / r^{delta(r)}; the profile must cover
// [min r, 2 max r].
DoublingReport doubling_check(const ProblemParams& p, const WeightSpec& spec,
                              const RadialProfile& profile, std::span<const double> r_grid);

enum class GrowthKind { Unbounded, Bounded };

struct GrowthReport {
    GrowthKind kind = GrowthKind::Unbounded;
    bool critical = false;            // n equals the critical dimension
    double min_ratio = 0;             // min over r >= r0 of the growth ratio
    double argmin_r = 0;
    double r0 = 1;                    // smallest stabilized start (unbounded kind)
    double min_ratio_from_1 = 0;      // min over the whole r >= 1 grid
    double u_inf = 0;                 // bounded kind: extrapolated limit
    double u_inf_consistency = 0;     // residual of the third extrapolation point
    bool dimension_condition_ok = false;  // bounded kind: n > 2(k+2gamma/k+4)
    json to_json() const;
};

// Pointwise growth ratios |u|/r^delta (or |u|/log r in the critical
// dimension; |u - u_inf|/r^delta for the bounded kind) over the profile grid.
GrowthReport growth_theorem_check(const ProblemParams& p, const WeightSpec& spec,
                                  const RadialProfile& profile, GrowthKind kind);

}  // namespace khess
