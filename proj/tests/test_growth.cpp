#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "khess/family.hpp"
#include "khess/growth.hpp"
#include "oracles.hpp"

using namespace khess;

TEST_CASE("alpha for the unweighted Laplacian case is sqrt(n-1)") {
    for (int n : {3, 5, 10, 30}) {
        const ProblemParams p(n, 1);
        for (double r : {1.0, 2.0, 10.0, 100.0})
            CHECK(alpha_of_r(p, WeightSpec::constant(), r) ==
                  doctest::Approx(std::sqrt(n - 1.0)).epsilon(1e-12));
    }
    CHECK(alpha_of_r(ProblemParams(5, 1), WeightSpec::constant(), 7.0) == doctest::Approx(2.0));
}

TEST_CASE("alpha for constant W equals the closed form") {
    const ProblemParams p(9, 2);
    const double s1 = 1.25;
    const WeightSpec w = WeightSpec::power_law(s1);
    const double v = (p.k - 1 + s1) / (p.k + 1);
    const double closed = v + std::sqrt(v * v + p.nk() * v + p.nk() - 1);
    for (double r : {1.0, 3.0, 50.0})
        CHECK(alpha_of_r(p, w, r) == doctest::Approx(closed).epsilon(1e-12));
}

TEST_CASE("alpha against a brute-force trapezoid oracle") {
    const ProblemParams p(20, 2);
    const WeightSpec w = WeightSpec::interpolated_power(2, 2, 1);
    const AuxiliaryRate rate(w, p);
    const double r = 10.0;
    const double oracle = oracles::trapezoid(
                              [&](double t) { return psi_rate(rate, std::exp(t)); }, 0.0,
                              std::log(r), 1000001) /
                          std::log(r);
    CHECK(alpha_of_r(p, w, r) == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("delta closed form for k=1, w=1") {
    for (int n = 3; n <= 30; ++n) {
        const ProblemParams p(n, 1);
        const double closed = -n / 2.0 + std::sqrt(n - 1.0) + 2;
        for (double r : {2.0, 10.0, 100.0})
            CHECK(delta_of_r(p, WeightSpec::constant(), r) ==
                  doctest::Approx(closed).epsilon(1e-10));
    }
    // n = 10 is the zero of delta
    CHECK(std::fabs(delta_of_r(ProblemParams(10, 1), WeightSpec::constant(), 10.0)) < 1e-12);
}

TEST_CASE("delta_inf: two algebraic forms and the sign factorization") {
    SUBCASE("zero exactly at the critical dimension") {
        const DeltaInf d = delta_inf(ProblemParams(10, 1), WeightSpec::constant());
        CHECK(std::fabs(d.value) < 1e-14);
        CHECK(std::fabs(d.sign_factor) < 1e-14);
    }
    SUBCASE("random sample agreement and sign equivalence") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> unif(0, 1);
        int done = 0;
        while (done < 100) {
            const int k = 1 + static_cast<int>(unif(rng) * 5);
            const double gamma = -2 * k + 0.1 + unif(rng) * 7;
            const int n = std::max(k, 2) + static_cast<int>(unif(rng) * 30);
            const ProblemParams p(n, k);
            if (!(n > dimension_threshold(p, gamma))) continue;
            if (k * ((k - 1 + gamma) / (k + 1) - 1) + n < 0) continue;
            const WeightSpec w = WeightSpec::power_law(gamma);
            const DeltaInf d = delta_inf(p, w);
            CHECK(std::fabs(d.value - d.factorized) <= 1e-12 * (1 + std::fabs(d.value)));
            CHECK(d.C > 0);
            if (std::fabs(d.sign_factor) > 1e-12) {
                CHECK(d.value * d.sign_factor > 0);  // same sign
            }
            ++done;
        }
    }
    SUBCASE("threshold violation throws") {
        CHECK_THROWS_AS(delta_inf(ProblemParams(1, 1), WeightSpec::power_law(-1.8)),
                        std::domain_error);
    }
}

TEST_CASE("delta(r) >= delta_inf and converges for the interpolated family") {
    const ProblemParams p(20, 2);

    SUBCASE("monotone approach and the C/log r decay law") {
        const WeightSpec w = WeightSpec::interpolated_power(2, 2, 1);
        const DeltaInf d = delta_inf(p, w);
        double prev = std::numeric_limits<double>::infinity();
        for (double r : {1.0, 10.0, 1e2, 1e4, 1e6}) {
            const double delta = delta_of_r(p, w, r);
            CHECK(delta >= d.value - 1e-12);
            CHECK(delta <= prev + 1e-12);
            prev = delta;
        }
        // the gap decays like C/log r: the product stabilizes
        const double c4 = (delta_of_r(p, w, 1e4) - d.value) * std::log(1e4);
        const double c6 = (delta_of_r(p, w, 1e6) - d.value) * std::log(1e6);
        CHECK(c6 == doctest::Approx(c4).epsilon(0.05));
    }

    SUBCASE("1e-3 convergence at r = 1e6 for a narrow transition") {
        const WeightSpec w = WeightSpec::interpolated_power(2, 4, 0.05);
        const DeltaInf d = delta_inf(p, w);
        CHECK(std::fabs(delta_of_r(p, w, 1e6) - d.value) <= 1e-3);
    }
}

TEST_CASE("Psi is nonincreasing for the family weights") {
    const ProblemParams p(20, 2);
    const AuxiliaryRate rate(WeightSpec::interpolated_power(2, 2, 1), p);
    double prev = psi_rate(rate, 1e-3);
    for (double s : log_grid(1e-3, 1e3, 200)) {
        const double cur = psi_rate(rate, s);
        CHECK(cur <= prev + 1e-10 * (1 + std::fabs(prev)));
        prev = cur;
    }
}

TEST_CASE("negative radicand reported as a domain error") {
    // tau < 0 violates the hypotheses; at n=2, k=1, sigma1=-1.8 the radicand
    // (v+1)^2 - r v' dips below zero near r = 1
    const ProblemParams p(2, 1);
    const AuxiliaryRate rate(WeightSpec::interpolated_power(-1.8, 2, -0.5), p);
    CHECK(rate.radicand(1.0) < 0);
    CHECK_THROWS_AS(psi_rate(rate, 1.0), std::domain_error);
}

TEST_CASE("exponent profile CSV") {
    const ExponentProfile prof =
        exponent_profile(ProblemParams(10, 1), WeightSpec::constant(), {1.0, 2.0, 4.0});
    std::ostringstream os;
    prof.to_csv(os);
    CHECK(os.str().rfind("r,alpha,delta\n", 0) == 0);
    CHECK(prof.delta[0] == doctest::Approx(0.0));
}

TEST_CASE("essentialg ratio") {
    SUBCASE("family case stabilizes under doubling R") {
        const ProblemParams p(20, 2);
        const FamilyParams fp{0.0, 4.0, 0.0, -2.0};
        const RadialProfile prof = family_profile(fp, p, 0.5, 256.0, 20000, false);
        const auto grid = log_grid(1.0, 8.0, 17);
        const auto a = essentialg_ratio(p, fp.weight(), prof, grid, 64.0);
        const auto b = essentialg_ratio(p, fp.weight(), prof, grid, 128.0);
        CHECK(std::isfinite(a.sup_ratio));
        CHECK(b.sup_ratio >= a.sup_ratio);  // integrand is positive
        CHECK((b.sup_ratio - a.sup_ratio) / a.sup_ratio < 0.05);
    }
    SUBCASE("explicit power integral for u = r^2/2, k=1, w=1, n=5") {
        // integrand s^{-4} s^{-2}: int_r^R = (r^{-5} - R^{-5})/5; alpha = 2
        const ProblemParams p(5, 1);
        std::vector<double> r = log_grid(0.5, 300.0, 20000), u(r.size()), du(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) {
            u[i] = 0.5 * r[i] * r[i];
            du[i] = r[i];
        }
        const RadialProfile prof(r, u, du);
        const double rr = 2.0, RR = 256.0;
        const double grid[] = {rr};
        const auto rep = essentialg_ratio(p, WeightSpec::constant(), prof, grid, RR);
        const double exact =
            (std::pow(rr, -5.0) - std::pow(RR, -5.0)) / 5.0 * std::pow(rr, 4.0);
        CHECK(rep.sup_ratio == doctest::Approx(exact).epsilon(1e-5));
    }
    SUBCASE("empty tail r = R gives zero") {
        const ProblemParams p(5, 1);
        std::vector<double> r = log_grid(0.5, 8.0, 200), u(r.size()), du(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) {
            u[i] = 0.5 * r[i] * r[i];
            du[i] = r[i];
        }
        const double grid[] = {8.0};
        const auto rep =
            essentialg_ratio(p, WeightSpec::constant(), RadialProfile(r, u, du), grid, 8.0);
        CHECK(rep.sup_ratio == 0.0);
    }
}

TEST_CASE("doubling estimate") {
    const ProblemParams p(11, 1);
    // beta at/above the threshold delta_inf(0) = -11/2 + sqrt(10) + 2
    const FamilyParams fp{0.0, 2.0, 0.0, -0.3};

    SUBCASE("family lower bound stays positive and stable") {
        const RadialProfile prof = family_profile(fp, p, 0.5, 300.0, 40000, false);
        const auto grid = log_grid(1.0, 100.0, 60);
        const auto rep = doubling_check(p, fp.weight(), prof, grid);
        CHECK_FALSE(rep.violation);
        // for beta >= delta and r >= 1:
        //   |u(2r)-u(r)| r^{-delta} >= 2^{beta/mu} - 2^{beta}
        const double mu = fp.mu(p);
        const double floor_bound = std::exp(fp.beta / mu * std::numbers::ln2) -
                                   std::exp(fp.beta * std::numbers::ln2);
        CHECK(rep.min_ratio >= floor_bound - 1e-9);
    }
    SUBCASE("constant patch flags a violation") {
        std::vector<double> r = log_grid(1.0, 8.0, 100), u(100, 1.0), du(100, 0.0);
        const auto grid = log_grid(1.0, 4.0, 10);
        const auto rep =
            doubling_check(p, WeightSpec::constant(), RadialProfile(r, u, du), grid);
        CHECK(rep.violation);
        CHECK(rep.min_ratio == 0.0);
    }
    SUBCASE("k=1, w=1, n=10: delta = 0 so the ratio is the raw increment") {
        const ProblemParams p10(10, 1);
        const FamilyParams fb{0.0, 2.0, 0.0, -1.0};
        const RadialProfile prof = family_profile(fb, p10, 0.5, 300.0, 40000, false);
        const double grid[] = {2.0};
        const auto rep = doubling_check(p10, WeightSpec::constant(), prof, grid);
        CHECK(rep.min_ratio ==
              doctest::Approx(std::fabs(u_beta(fb, p10, 4.0) - u_beta(fb, p10, 2.0)))
                  .epsilon(1e-6));
    }
}

TEST_CASE("growth theorem checks") {
    SUBCASE("bounded family tuple: ratio >= 2^{beta/mu} with u_inf -> 0") {
        const ProblemParams p(20, 2);
        const FamilyParams fp{0.0, 4.0, 0.0, -2.0};
        // r = 1 is the exact minimizer; keep it as a grid node
        const RadialProfile prof = family_profile(fp, p, 1.0, 1e6, 100000, false);
        const auto rep = growth_theorem_check(p, fp.weight(), prof, GrowthKind::Bounded);
        CHECK(rep.dimension_condition_ok);
        CHECK(std::fabs(rep.u_inf) < 1e-8);
        const double bound = std::exp(fp.beta / fp.mu(p) * std::numbers::ln2);
        CHECK(rep.min_ratio_from_1 >= bound - 1e-9);
        CHECK(rep.min_ratio_from_1 == doctest::Approx(bound).epsilon(1e-6));
    }
    SUBCASE("critical-dimension log bound: min |u|/log r >= 1") {
        const ProblemParams p(10, 1);
        const FamilyParams fp{0.0, 2.0, 0.0, 0.0};  // log-type solution
        const RadialProfile prof = family_profile(fp, p, 0.5, 2000.0, 50000, false);
        const auto rep = growth_theorem_check(p, fp.weight(), prof, GrowthKind::Unbounded);
        CHECK(rep.critical);
        double min_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < prof.size(); ++i)
            if (prof.r[i] >= std::numbers::e && prof.r[i] <= 1000.0)
                min_ratio = std::min(min_ratio, std::fabs(prof.u[i]) / std::log(prof.r[i]));
        CHECK(min_ratio >= 1.0 - 1e-9);
        CHECK(rep.min_ratio > 0);
    }
    SUBCASE("dimension gate fails below the critical dimension") {
        const ProblemParams p(9, 1);  // 9 < 10 = 2(k + 2 gamma/k + 4)
        const FamilyParams fp{0.0, 2.0, 0.0, -0.4};
        const RadialProfile prof = family_profile(fp, p, 0.5, 1e5, 50000, false);
        const auto rep = growth_theorem_check(p, fp.weight(), prof, GrowthKind::Bounded);
        CHECK_FALSE(rep.dimension_condition_ok);
    }
}
