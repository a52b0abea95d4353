#pragma once
// Small numerical kernels shared across the toolkit: stable scalar
// primitives, adaptive Simpson quadrature, Gauss-Legendre rules and
// piecewise-linear interpolation on strictly increasing grids.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace khess {

// binomial(n,k) in double precision; exact while representable (n <= 56
// covers every dimension used here)
double binomial(int n, int k);

// base^e for integer e >= 0 with the 0^0 = 1 convention
double pow_int(double base, int e);

// log(1 + e^x) without overflow
inline double softplus(double x) {
    return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// 1 / (1 + e^{-x})
inline double logistic(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// log(cosh(x)), stable for large |x|
inline double log_cosh(double x) {
    const double a = std::fabs(x);
    if (a < 1e-4) {
        const double y = a * a;
        return y / 2 - y * y / 12;
    }
    return a - std::numbers::ln2 + std::log1p(std::exp(-2 * a));
}

// log(e^x - 1) for x > 0
inline double log_expm1(double x) {
    if (x <= 0) throw std::domain_error("log_expm1: argument must be positive");
    return x > 1 ? x + std::log1p(-std::exp(-x)) : std::log(std::expm1(x));
}

struct QuadratureOptions {
    double rel_tol = 1e-10;
    double abs_floor = 1e-14;
    int max_depth = 48;
};

namespace detail {

template <class F>
double simpson_step(F& f, double a, double fa, double b, double fb, double m, double fm,
                    double whole, double eps, int depth, const QuadratureOptions& opt) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6 * (fa + 4 * flm + fm);
    const double right = (b - m) / 6 * (fm + 4 * frm + fb);
    const double delta = left + right - whole;
    if (depth >= opt.max_depth || std::fabs(delta) <= 15 * eps)
        return left + right + delta / 15;
    return simpson_step(f, a, fa, m, fm, lm, flm, left, eps / 2, depth + 1, opt) +
           simpson_step(f, m, fm, b, fb, rm, frm, right, eps / 2, depth + 1, opt);
}

}  // namespace detail

// Adaptive Simpson on [a,b]; tolerance is relative to the first whole-interval
// estimate with an absolute floor.
template <class F>
double adaptive_simpson(F&& f, double a, double b, QuadratureOptions opt = {}) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = (b - a) / 6 * (fa + 4 * fm + fb);
    const double eps = std::max(opt.abs_floor, opt.rel_tol * std::fabs(whole));
    return detail::simpson_step(f, a, fa, b, fb, m, fm, whole, eps, 0, opt);
}

// Gauss-Legendre nodes/weights on [-1,1]
inline constexpr double kGauss2Node = 0.57735026918962576451;  // 1/sqrt(3)

inline constexpr double kGauss5Nodes[5] = {
    -0.90617984593866399280, -0.53846931010568309104, 0.0,
    0.53846931010568309104, 0.90617984593866399280};
inline constexpr double kGauss5Weights[5] = {
    0.23692688505618908751, 0.47862867049936646804, 0.56888888888888888889,
    0.47862867049936646804, 0.23692688505618908751};

// Index i with grid[i] <= x <= grid[i+1]; throws outside the grid.
std::size_t locate_cell(std::span<const double> grid, double x);

// Linear interpolation of (x, y) samples at xi.
double lerp_at(std::span<const double> x, std::span<const double> y, double xi);

// n log-spaced points from a to b inclusive (a, b > 0, n >= 2)
std::vector<double> log_grid(double a, double b, std::size_t n);

// Compactly supported piecewise-linear test function: nodes x (strictly
// increasing) with values y, zero outside [x.front(), x.back()].
struct PiecewiseLinear {
    std::vector<double> x, y;
    PiecewiseLinear() = default;
    PiecewiseLinear(std::vector<double> x_, std::vector<double> y_);
    double operator()(double xi) const;
    double slope(std::size_t element) const;  // derivative on [x[e], x[e+1]]
    bool compactly_supported() const { return y.front() == 0.0 && y.back() == 0.0; }
};

}  // namespace khess
