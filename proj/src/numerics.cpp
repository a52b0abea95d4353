#include "khess/numerics.hpp"

#include <algorithm>

namespace khess {

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double out = 1.0;
    for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
    return out;
}

double pow_int(double base, int e) {
    if (e == 0) return 1.0;
    double out = 1.0, b = base;
    for (int p = e; p > 0; p >>= 1) {
        if (p & 1) out *= b;
        b *= b;
    }
    return out;
}

std::size_t locate_cell(std::span<const double> grid, double x) {
    if (grid.size() < 2 || x < grid.front() || x > grid.back())
        throw std::domain_error("locate_cell: point outside grid");
    auto it = std::upper_bound(grid.begin(), grid.end(), x);
    std::size_t i = static_cast<std::size_t>(it - grid.begin());
    if (i > 0) --i;
    if (i + 1 >= grid.size()) i = grid.size() - 2;
    return i;
}

double lerp_at(std::span<const double> x, std::span<const double> y, double xi) {
    const std::size_t i = locate_cell(x, xi);
    const double t = (xi - x[i]) / (x[i + 1] - x[i]);
    return (1 - t) * y[i] + t * y[i + 1];
}

std::vector<double> log_grid(double a, double b, std::size_t n) {
    if (!(a > 0) || !(b > a) || n < 2)
        throw std::invalid_argument("log_grid: require 0 < a < b and n >= 2");
    std::vector<double> out(n);
    const double la = std::log(a), lb = std::log(b);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = std::exp(la + (lb - la) * static_cast<double>(i) / static_cast<double>(n - 1));
    out.front() = a;
    out.back() = b;
    return out;
}

PiecewiseLinear::PiecewiseLinear(std::vector<double> x_, std::vector<double> y_)
    : x(std::move(x_)), y(std::move(y_)) {
    if (x.size() < 2 || x.size() != y.size())
        throw std::invalid_argument("PiecewiseLinear: need matching sizes >= 2");
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
        if (!(x[i] < x[i + 1]))
            throw std::invalid_argument("PiecewiseLinear: nodes must be strictly increasing");
}

double PiecewiseLinear::operator()(double xi) const {
    if (xi <= x.front() || xi >= x.back()) return 0.0;
    return lerp_at(x, y, xi);
}

double PiecewiseLinear::slope(std::size_t e) const {
    return (y[e + 1] - y[e]) / (x[e + 1] - x[e]);
}

}  // namespace khess
