#pragma once
// Radial k-Hessian operator: pointwise S_j evaluation from the Hessian
// eigenvalues lambda1 = u'' (simple) and lambda2 = u'/r (multiplicity n-1),
// an elementary-symmetric cross-check, equation residuals and k-convexity
// (admissibility) verdicts on sampled profiles.

#include <iosfwd>

#include "khess/core.hpp"

namespace khess {

// Signals evaluation at a point where the equation degenerates
// (vanishing gradient with k >= 2).
struct degeneracy_error : std::domain_error {
    using std::domain_error::domain_error;
};

// S_j(D^2 u) = c_{n,j} lambda2^{j-1} (n lambda2 + j (lambda1 - lambda2)),
// with lambda2^0 = 1 at lambda2 = 0 so that S_1 is the plain Laplacian.
double sk_radial(const ProblemParams& p, int j, double lambda1, double lambda2);

// e_j of the eigenvalue multiset {lambda1, lambda2 x (n-1)} expanded from the
// principal-minor definition: lambda1 appears in a subset at most once, so
// e_j = C(n-1,j) lambda2^j + lambda1 C(n-1,j-1) lambda2^{j-1}.
// Independent cross-check of sk_radial.
double elementary_symmetric_radial(const ProblemParams& p, int j, double lambda1, double lambda2);

struct OperatorEval {
    double r = 0, lambda1 = 0, lambda2 = 0;
    std::vector<double> sj;  // S_j for j = 1..k
};

OperatorEval operator_eval(const ProblemParams& p, double r, double lambda1, double lambda2);

// u'' recovered from the equation:
//   u'' = (w g(u) / (k c_{n,k})) (u'/r)^{1-k} - ((n-k)/k)(u'/r).
// Throws degeneracy_error when du <= 0 with k >= 2.
double second_derivative_from_equation(const ProblemParams& p, const WeightSpec& spec,
                                       const Nonlinearity& g, double r, double u, double du);

struct ResidualReport {
    std::vector<double> r, sk, rhs, resid;
    double sup_norm = 0;  // max |resid| / max(1, sup |w g(u)|)
    bool used_analytic_d2u = false;

    void to_csv(std::ostream& os) const;  // header "r,Sk,rhs,residual"
};

// S_k(D^2 u) - w g(u) at grid points with r > 0. Uses the stored u'' when
// present, otherwise centered differences of u' (interior points only).
ResidualReport residual(const ProblemParams& p, const WeightSpec& spec, const Nonlinearity& g,
                        const RadialProfile& profile);

struct AdmissibilityReport {
    bool admissible = true;
    int first_violation_j = 0;
    double first_violation_r = 0;
    double min_margin = 0;  // min over grid and j of S_j + tol
    double tol = 0;
    double r_min = 0, r_max = 0;  // the checked grid, part of the verdict
    std::size_t grid_points = 0;

    json to_json() const;
};

// Checks S_j >= -tol for j = 1..k at every grid point,
// tol = 1e-9 (1 + max |S_j|). At r = 0 the limit lambda2 = u''(0) is used.
AdmissibilityReport k_admissibility(const ProblemParams& p, const RadialProfile& profile);

}  // namespace khess
