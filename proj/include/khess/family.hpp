#pragma once
// The explicit solution family: weights w = r^{sigma1} (1+r^{sigma2})^{-tau/sigma2},
// profiles u_beta = sgn(beta)(1+r^mu)^{beta/mu} with mu = sigma1/k + 2 (log form
// at beta = 0), the matched nonlinearities g_beta with their C^1 extension, the
// beta-threshold Q(r), k-convexity and the Hardy-based semi-stability
// certificate.

#include "khess/core.hpp"
#include "khess/stability.hpp"

namespace khess {

struct FamilyParams {
    double sigma1 = 0;
    double sigma2 = 2;
    double tau = 0;
    double beta = 0;

    double mu(const ProblemParams& p) const { return sigma1 / p.k + 2; }
    WeightSpec weight() const;

    // Validity conditions: for tau = 0, sigma1 > -k and n > k(k+1)/(2k+sigma1);
    // for tau > 0 additionally k(sigma2-2) >= sigma1, 2k+sigma1 > tau and the
    // max-form dimension bound.
    bool is_valid(const ProblemParams& p, std::string* why = nullptr) const;
    void validate(const ProblemParams& p) const;  // throws std::invalid_argument

    json to_json() const;
    static FamilyParams from_json(const json& j);
};

// h_lambda(r) = r^lambda / (1 + r^lambda) and r h' = lambda (1-h) h
struct HLambda {
    double h;
    double rhp;
};
HLambda h_lambda(double lambda, double r);

struct FamilyPoint {
    double u, du, lambda2, d2u;
};
FamilyPoint family_point(const FamilyParams& fp, const ProblemParams& p, double r);

double u_beta(const FamilyParams& fp, const ProblemParams& p, double r);
double u_beta_prime(const FamilyParams& fp, const ProblemParams& p, double r);
double lambda2_beta(const FamilyParams& fp, const ProblemParams& p, double r);

// Log-spaced sampled profile with analytic derivatives (rmin > 0).
RadialProfile family_profile(const FamilyParams& fp, const ProblemParams& p, double rmin,
                             double rmax, std::size_t points, bool with_d2u = true);

struct GBetaEval {
    double value;
    double derivative;
    bool extended;  // input lay outside I_beta, linear C^1 extension used
};

// g_beta(s) and g_beta'(s); total function via the first-order extension
// matching the one-sided limits at the boundary of
//   I_beta = [1,inf) for beta > 0, [0,inf) for beta = 0, [-1,0) for beta < 0.
GBetaEval g_beta(const FamilyParams& fp, const ProblemParams& p, double s);

Nonlinearity g_beta_nonlinearity(const FamilyParams& fp, const ProblemParams& p);

// Step 2 weight V = r^2 lambda2^{k+1} and its logarithmic derivative
// r V'/V = 2 + (k+1)(mu - 2 + (beta-mu) h_mu(r)).
double hardy_weight_V(const FamilyParams& fp, const ProblemParams& p, double r);
double hardy_weight_rVp_over_V(const FamilyParams& fp, const ProblemParams& p, double r);

// The threshold data of the semi-stability condition beta >= Q(r):
//   Q(r) = (-n + 2 nu + 2k + 2)/(k+1)
//        + (2/(k+1)) * { (int_1^r v/s ds)/log r  for r >= 1;  v(r) for r < 1 }
// with nu = sqrt(v(0)^2 + (n/k)v(0) + n/k - 1 - v'(1)).
class FamilyThreshold {
public:
    FamilyThreshold(FamilyParams fp, ProblemParams p);

    double nu() const { return nu_; }
    double v0() const { return v0_; }
    double Q(double r) const;
    double vbar(double r) const;  // (int_1^r v/s ds)/log r, r >= 1 (closed form)
    double A(double r) const;     // 2(vbar - v) for r >= 1, else 0
    double B(double r) const;
    double I_plus(double r) const { return B(r) + 2 * nu_; }
    double I_minus(double r) const { return B(r) - 2 * nu_; }
    double sup_Q() const { return sup_Q_; }  // attained in the r -> 0 limit
    const AuxiliaryRate& rate() const { return rate_; }

private:
    FamilyParams fp_;
    ProblemParams p_;
    AuxiliaryRate rate_;
    double v0_, nu_, sup_Q_;
};

double q_threshold(const FamilyParams& fp, const ProblemParams& p, double r);

struct BetaAdmissibility {
    bool admissible = false;
    double sup_Q = 0;
    double grid_sup_Q = 0;
    double argmax_r = 0;
    bool sup_interior = false;  // grid sup strictly inside the scan range
    json to_json() const;
};

// beta >= sup_r Q(r), with the sup taken over a log grid in [1e-3, 1e6]
// together with the analytic r -> 0 and r -> inf limits.
BetaAdmissibility admissible_beta_check(const FamilyParams& fp, const ProblemParams& p);

struct KConvexityReport {
    bool analytic_ok = false;  // n + j(mu-2) > 0 and n + j(beta-2) > 0, j = 1..k
    bool grid_ok = false;      // S_j >= -tol on the grid
    int fail_j = 0;
    double fail_r = 0;
    double min_margin = 0;
    json to_json() const;
};

KConvexityReport kconvexity_certificate(const FamilyParams& fp, const ProblemParams& p,
                                        std::span<const double> r_grid);

struct CertificateItem {
    std::string name;
    bool ok = false;
    double extremal_value = 0;
    double extremal_r = 0;
    std::string note;
};

struct SemistabilityCertificate {
    bool beta_admissible = false;
    double sup_Q = 0;
    std::vector<CertificateItem> items;
    StabilityReport stability;

    bool all_ok() const;
    json to_json() const;
};

struct CertificateOptions {
    double r_lo = 1e-3, r_hi = 1e3;  // pointwise-check range
    std::size_t grid_points = 2001;
    std::size_t profile_points = 200001;  // sampling of the exact profile
    int random_etas = 20;
    unsigned long long seed = 20240915ull;
    StabilityOptions stability;
};

// Step 2 verification: origin limit of r^{n-2} V, the pointwise Hardy
// hypothesis via r V'/V, the product I_- I_+ >= 0 chain, and independent
// confirmation through the Hardy inequality on random test functions plus the
// discretized quadratic form spectrum.
SemistabilityCertificate semistability_certificate(const FamilyParams& fp, const ProblemParams& p,
                                                   const CertificateOptions& opt = {});

}  // namespace khess
