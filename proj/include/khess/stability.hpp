#pragma once
// Semi-stability of a radial profile through the second-variation form
//   Q_u(xi) = omega_n int [ k c_{n,k} r^{n-k} (u')^{k-1} (xi')^2
//                           + r^{n-1} w g'(u) xi^2 ] dr,
// discretized with piecewise-linear hat functions on truncated windows, the
// transformed form of the u' eta substitution, and the weighted Hardy-type
// certificate used by the explicit family.

#include <functional>
#include <utility>

#include "khess/core.hpp"

namespace khess {

// Symmetric tridiagonal pencil (K, M) over the interior nodes of a geometric
// mesh; K = A + C with A the nonnegative gradient part and C the signed
// w g'(u) part, M the r^{n-1} mass.
struct QuadraticFormAssembly {
    std::vector<double> nodes;  // mesh including both Dirichlet endpoints
    std::vector<double> K_diag, K_off;
    std::vector<double> A_diag, A_off;
    std::vector<double> M_diag, M_off;
    double scale = 0;  // max|K| / max|M|: the eigenvalue scale of the pencil

    std::size_t unknowns() const { return K_diag.size(); }
};

// 2-point Gauss assembly on a geometric mesh of the window; test functions
// vanish at both window endpoints.
QuadraticFormAssembly assemble_Q(const ProblemParams& p, const WeightSpec& spec,
                                 const Nonlinearity& g, const RadialProfile& profile,
                                 std::pair<double, double> window, int mesh_size);

// Smallest eigenvalue of K x = lambda M x by bisection on the Sturm-sequence
// inertia count, relative accuracy 1e-10.
double min_eigenvalue(const QuadraticFormAssembly& a);

// Smallest eigenvalue of a plain symmetric tridiagonal matrix (M = I).
double min_eigenvalue_tridiagonal(std::span<const double> diag, std::span<const double> off);

// omega_n k c_{n,k} int r^{n-1} lambda2^{k+1} [ (r eta' + v eta)^2
//   - (v^2 + (n/k) v + n/k - 1 - r v') eta^2 ] dr  over the support of eta.
double transformed_form_value(const ProblemParams& p, const WeightSpec& spec,
                              const RadialProfile& profile, const PiecewiseLinear& eta);

// Q_u(u' eta) assembled directly from the definition; requires u'' on the
// profile. Identical to transformed_form_value for exact solutions.
double quadratic_form_u_prime_eta(const ProblemParams& p, const WeightSpec& spec,
                                  const Nonlinearity& g, const RadialProfile& profile,
                                  const PiecewiseLinear& eta);

// scale reference for the two-route identity: sum of the absolute values of
// the positive and negative parts of the transformed integrand
double transformed_form_scale(const ProblemParams& p, const WeightSpec& spec,
                              const RadialProfile& profile, const PiecewiseLinear& eta);

struct HardyWeight {
    std::function<double(double)> V;    // V(r) >= 0
    std::function<double(double)> rVp;  // r V'(r)
};

struct HardyReport {
    bool hypothesis_ok = false;    // theta (r V' + (n-2 rho-2) V - theta V) >= 0 pointwise
    double min_hypothesis = 0;
    double argmin_r = 0;
    bool origin_limit_ok = false;  // r^{n-2} V -> 0 numerically
    double inequality_value = 0;   // int r^{n-3} V ((r eta' + rho eta)^2 - theta^2 eta^2/4)
    double scale = 0;
    json to_json() const;
};

HardyReport hardy_certificate(const ProblemParams& p, const HardyWeight& V,
                              const std::function<double(double)>& rho, double theta,
                              const PiecewiseLinear& eta);

struct StabilityOptions {
    std::vector<double> window_lo = {1e-2, 1e-3};
    std::vector<double> window_hi = {10, 100, 1000};
    std::vector<int> meshes = {1024, 2048, 4096};
    double tol_factor = 1e-8;        // verdict tolerance, times the pencil scale
    double mesh_convergence = 1e-6;  // |change| <= this * (1+|lambda|) between refinements
};

struct WindowResult {
    std::pair<double, double> window;
    int mesh = 0;
    double min_eig = 0;
    double scale = 0;
    bool converged = false;
};

struct StabilityReport {
    enum class Verdict { SemiStable, Unstable, Inconclusive };
    double min_eigenvalue = 0;  // over all windows, final mesh
    int mesh_size = 0;
    std::pair<double, double> r_window{0, 0};
    Verdict verdict = Verdict::Inconclusive;
    std::vector<WindowResult> windows;
    std::vector<std::string> warnings;

    json to_json() const;  // {"min_eigenvalue":..., "verdict":..., "window":[..], "mesh":...}
};

// Window/mesh schedule over the profile. A negative eigenvalue on any window
// is conclusive instability (its test functions are genuine); semi-stability
// is always window-qualified.
StabilityReport is_semistable(const ProblemParams& p, const WeightSpec& spec,
                              const Nonlinearity& g, const RadialProfile& profile,
                              const StabilityOptions& opt = {});

}  // namespace khess
