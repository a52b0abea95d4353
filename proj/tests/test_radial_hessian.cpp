#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "khess/family.hpp"
#include "khess/radial_hessian.hpp"
#include "oracles.hpp"

using namespace khess;

TEST_CASE("sk_radial on the quadratic u = r^2/2") {
    // all eigenvalues 1: S_j = e_j(1,...,1) = binomial(n,j)
    const ProblemParams p(4, 2);
    CHECK(sk_radial(p, 2, 1.0, 1.0) == doctest::Approx(6.0));
    for (int j = 1; j <= 4; ++j)
        CHECK(sk_radial(ProblemParams(4, 4), j, 1.0, 1.0) == doctest::Approx(binomial(4, j)));
}

TEST_CASE("sk_radial vanishing lambda2") {
    const ProblemParams p(5, 3);
    CHECK(sk_radial(p, 2, 3.0, 0.0) == 0.0);
    CHECK(sk_radial(p, 3, 3.0, 0.0) == 0.0);
    // j = 1 keeps the Laplacian: 0^0 = 1 convention
    CHECK(sk_radial(p, 1, 3.0, 0.0) == doctest::Approx(3.0 / 5 * binomial(5, 1)));
    CHECK_THROWS_AS(sk_radial(p, 6, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("elementary symmetric oracle hand values") {
    CHECK(elementary_symmetric_radial(ProblemParams(3, 2), 2, 2.0, 1.0) == doctest::Approx(5.0));
    CHECK(elementary_symmetric_radial(ProblemParams(2, 1), 1, 0.7, -0.3) ==
          doctest::Approx(0.4));  // trace
    CHECK(elementary_symmetric_radial(ProblemParams(6, 6), 6, 0.0, 2.5) == 0.0);
}

TEST_CASE("sk_radial == elementary symmetric poly, 1e4 random instances") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> dim(1, 10);
    std::uniform_real_distribution<double> lam(-5.0, 5.0);
    double worst = 0;
    for (int t = 0; t < 10000; ++t) {
        const int n = dim(rng);
        std::uniform_int_distribution<int> ord(1, n);
        const int j = ord(rng);
        const double l1 = lam(rng), l2 = lam(rng);
        const ProblemParams p(n, 1);
        const double a = sk_radial(p, j, l1, l2);
        const double b = elementary_symmetric_radial(p, j, l1, l2);
        // second, fully definition-level route: polynomial-product expansion
        std::vector<double> spectrum(n, l2);
        spectrum[0] = l1;
        const double c = oracles::elementary_symmetric(spectrum, j);
        worst = std::max(worst, std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b)}));
        worst = std::max(worst, std::fabs(a - c) / std::max({1.0, std::fabs(a), std::fabs(c)}));
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("divergence identity c r^{1-n} (r^n lambda2^k)' = S_k") {
    // u = r^2/2 + r^3/6: u' = r + r^2/2, lambda2 = 1 + r/2, lambda1 = 1 + r
    const ProblemParams p(5, 2);
    auto lambda2 = [](double r) { return 1 + r / 2; };
    auto lambda1 = [](double r) { return 1 + r; };
    for (double r : {0.3, 1.0, 2.5}) {
        const double h = 1e-6 * r;
        auto G = [&](double x) { return std::pow(x, p.n) * pow_int(lambda2(x), p.k); };
        const double fd = (G(r + h) - G(r - h)) / (2 * h);
        const double lhs = p.cnk() * std::pow(r, 1.0 - p.n) * fd;
        CHECK(lhs == doctest::Approx(sk_radial(p, p.k, lambda1(r), lambda2(r))).epsilon(1e-7));
    }
}

TEST_CASE("second derivative from the equation") {
    SUBCASE("quadratic solution of S_1 = n") {
        const ProblemParams p(6, 1);
        const double d2 = second_derivative_from_equation(p, WeightSpec::constant(),
                                                          Nonlinearity::constant(6.0), 1.7,
                                                          0.5 * 1.7 * 1.7, 1.7);
        CHECK(d2 == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("family solution at r=1 matches the analytic u''") {
        const ProblemParams p(20, 2);
        const FamilyParams fp{0.0, 4.0, 1.0, -2.5};
        REQUIRE(fp.is_valid(p));
        const FamilyPoint pt = family_point(fp, p, 1.0);
        const double d2 = second_derivative_from_equation(p, fp.weight(),
                                                          g_beta_nonlinearity(fp, p), 1.0, pt.u,
                                                          pt.du);
        CHECK(d2 == doctest::Approx(pt.d2u).epsilon(1e-8));
    }
    SUBCASE("degeneracy at du = 0 with k >= 2") {
        const ProblemParams p(5, 2);
        CHECK_THROWS_AS(second_derivative_from_equation(p, WeightSpec::constant(),
                                                        Nonlinearity::constant(1.0), 1.0, 0.0,
                                                        0.0),
                        degeneracy_error);
    }
}

namespace {

RadialProfile quadratic_profile(double rmin, double rmax, std::size_t pts, bool with_d2u) {
    std::vector<double> r = log_grid(rmin, rmax, pts), u(pts), du(pts), d2u;
    for (std::size_t i = 0; i < pts; ++i) {
        u[i] = 0.5 * r[i] * r[i];
        du[i] = r[i];
    }
    if (with_d2u) d2u.assign(pts, 1.0);
    return RadialProfile(std::move(r), std::move(u), std::move(du), std::move(d2u));
}

}  // namespace

TEST_CASE("residual identities") {
    SUBCASE("quadratic exact for S_k = binomial(n,k)") {
        const ProblemParams p(4, 2);
        const auto rep = residual(p, WeightSpec::constant(),
                                  Nonlinearity::constant(binomial(4, 2)),
                                  quadratic_profile(0.1, 10, 64, true));
        CHECK(rep.sup_norm <= 1e-13);
    }
    SUBCASE("family residual with analytic u'' is tiny") {
        const ProblemParams p(20, 2);
        const FamilyParams fp{0.0, 4.0, 1.0, -2.0};
        const auto rep = residual(p, fp.weight(), g_beta_nonlinearity(fp, p),
                                  family_profile(fp, p, 0.1, 10, 100, true));
        CHECK(rep.sup_norm <= 1e-10);
        CHECK(rep.used_analytic_d2u);
    }
    SUBCASE("finite-difference route converges at second order") {
        const ProblemParams p(11, 1);
        const FamilyParams fp{0.0, 2.0, 0.0, -1.0};
        auto sup_at = [&](std::size_t pts) {
            return residual(p, fp.weight(), g_beta_nonlinearity(fp, p),
                            family_profile(fp, p, 0.5, 4.0, pts, false))
                .sup_norm;
        };
        const double c = sup_at(200), f = sup_at(400);
        CHECK(c / f > 3.0);  // O(h^2): factor ~4 under halving
        CHECK(f < 1e-4);
    }
    SUBCASE("perturbed profile is flagged") {
        const ProblemParams p(11, 1);
        const FamilyParams fp{0.0, 2.0, 0.0, -1.0};
        RadialProfile prof = family_profile(fp, p, 0.5, 4.0, 200, true);
        for (std::size_t i = 0; i < prof.size(); ++i) {
            prof.u[i] += 0.01 * prof.r[i] * prof.r[i];
            prof.du[i] += 0.02 * prof.r[i];
            prof.d2u[i] += 0.02;
        }
        const auto rep = residual(p, fp.weight(), g_beta_nonlinearity(fp, p), prof);
        CHECK(rep.sup_norm > 1e-3);
    }
    SUBCASE("CSV export shape") {
        const ProblemParams p(4, 2);
        const auto rep = residual(p, WeightSpec::constant(),
                                  Nonlinearity::constant(binomial(4, 2)),
                                  quadratic_profile(0.1, 10, 16, true));
        std::ostringstream os;
        rep.to_csv(os);
        CHECK(os.str().rfind("r,Sk,rhs,residual\n", 0) == 0);
    }
}

TEST_CASE("k-admissibility") {
    SUBCASE("quadratic is admissible for all k") {
        for (int k = 1; k <= 4; ++k) {
            const auto rep = k_admissibility(ProblemParams(4, k),
                                             quadratic_profile(0.1, 10, 64, true));
            CHECK(rep.admissible);
        }
    }
    SUBCASE("concave profile violates everywhere for k=1") {
        std::vector<double> r = log_grid(0.5, 2.0, 16), u(16), du(16), d2u(16, -1.0);
        for (std::size_t i = 0; i < 16; ++i) {
            u[i] = -0.5 * r[i] * r[i];
            du[i] = -r[i];
        }
        const auto rep = k_admissibility(
            ProblemParams(3, 1), RadialProfile(std::move(r), std::move(u), std::move(du),
                                               std::move(d2u)));
        CHECK_FALSE(rep.admissible);
        CHECK(rep.first_violation_j == 1);
        CHECK(rep.first_violation_r == doctest::Approx(0.5));
    }
    SUBCASE("family profile admissible under the validity conditions") {
        const ProblemParams p(20, 2);
        const FamilyParams fp{0.0, 4.0, 1.0, -2.0};
        const auto rep = k_admissibility(p, family_profile(fp, p, 1e-2, 1e3, 500, true));
        CHECK(rep.admissible);
    }
    SUBCASE("grid including r = 0 uses the lambda2 limit") {
        std::vector<double> r{0.0, 0.5, 1.0}, u{0.0, 0.125, 0.5}, du{0.0, 0.5, 1.0},
            d2u{1.0, 1.0, 1.0};
        const auto rep = k_admissibility(ProblemParams(3, 2),
                                         RadialProfile(r, u, du, d2u));
        CHECK(rep.admissible);
    }
}
