#pragma once
// Radial ODE integration through the divergence-form reduction. The flux
// variable z = (r^{n/k-1} u')^k turns the equation into
//   u' = r^{1-n/k} z^{1/k},   z' = r^{n-1} w(r) g(u) / c_{n,k},
// whose right-hand side is free of the non-Lipschitz fractional power that
// the raw (r^{n/k-1}u')^{k+1} form carries.

#include "khess/core.hpp"

namespace khess {

struct FluxState {
    double r = 0;
    double u = 0;
    double z = 0;  // (r^{n/k-1} u')^k >= 0
};

struct IntegrationResult {
    RadialProfile profile;
    double error_estimate = 0;  // max |u| gap between the step and half-step runs
};

// Classical fixed-step RK4 from r0 to rmax with a step-halving error check;
// the returned profile is sampled on steps+1 nodes from the half-step run.
// Throws if z turns negative or g fails to evaluate.
IntegrationResult integrate_outward_checked(const ProblemParams& p, const WeightSpec& spec,
                                            const Nonlinearity& g, double r0, double u0, double z0,
                                            double rmax, int steps);

RadialProfile integrate_outward(const ProblemParams& p, const WeightSpec& spec,
                                const Nonlinearity& g, double r0, double u0, double z0,
                                double rmax, int steps);

// Start from the origin with u(0) = u0, u'(0) = 0. The nonconstant branch is
// selected by a first-Picard-iterate bootstrap at eps = rmax * 1e-6 with g
// frozen at u0:  z(eps) = g(u0)/c_{n,k} * int_0^eps s^{n-1} w(s) ds.
// When g(u0) = 0 the constant branch u == u0 is returned.
RadialProfile origin_start(const ProblemParams& p, const WeightSpec& spec, const Nonlinearity& g,
                           double u0, double rmax, int steps);

struct GradientPositivity {
    bool positive = false;          // u' > 0 at every grid point with r > 0
    bool constant_profile = false;  // flags u' == 0 everywhere
    double min_du = 0;
    double argmin_r = 0;
    json to_json() const;
};

GradientPositivity gradient_positivity_check(const RadialProfile& profile);

}  // namespace khess
