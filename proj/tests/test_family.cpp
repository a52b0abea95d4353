#include <doctest.h>

#include <cmath>
#include <limits>

#include "khess/family.hpp"
#include "khess/growth.hpp"
#include "khess/radial_hessian.hpp"
#include "oracles.hpp"

using namespace khess;

namespace {

// the validated tuple matrix used across the family tests
const ProblemParams P20(20, 2);
const ProblemParams P11(11, 1);

}  // namespace

TEST_CASE("h_lambda") {
    CHECK(h_lambda(3.0, 0.0).h == 0.0);
    CHECK(h_lambda(1.0, 1.0).h == doctest::Approx(0.5));
    CHECK(h_lambda(7.5, 1.0).h == doctest::Approx(0.5));
    CHECK(h_lambda(2.0, 3.0).h == doctest::Approx(0.9));
    // r h' / lambda = (1-h)h peaks at 1/4 at r = 1
    CHECK(h_lambda(2.0, 1.0).rhp / 2.0 == doctest::Approx(0.25));
    for (double r : log_grid(1e-3, 1e3, 50)) {
        const auto [h, rhp] = h_lambda(2.0, r);
        CHECK(rhp / 2.0 >= 0.0);
        CHECK(rhp / 2.0 <= 0.25 + 1e-15);
        CHECK(h >= 0.0);
        CHECK(h < 1.0);
    }
}

TEST_CASE("u_beta boundary values and closed forms") {
    const FamilyParams fneg{0.0, 2.0, 0.0, -2.0};  // mu = 2 at k = 1
    CHECK(u_beta(fneg, P11, 0.0) == -1.0);
    CHECK(u_beta_prime(fneg, P11, 0.0) == 0.0);
    CHECK(u_beta(fneg, P11, 1.0) == doctest::Approx(-0.5));  // -(1+1)^{-2/2}

    const FamilyParams fzero{0.0, 2.0, 0.0, 0.0};
    CHECK(u_beta(fzero, P11, 0.0) == 0.0);
    CHECK(u_beta(fzero, P11, 1.0) == doctest::Approx(0.5 * std::log(2.0)));

    const FamilyParams fpos{0.0, 2.0, 0.0, 1.5};
    CHECK(u_beta(fpos, P11, 0.0) == 1.0);

    // no overflow far out: log-domain evaluation
    CHECK(std::isfinite(u_beta(fpos, P11, 1e200)));
    CHECK(std::isfinite(u_beta_prime(fneg, P11, 1e200)));
}

TEST_CASE("logarithmic derivative of lambda2: mu-2 + (beta-mu) h_mu") {
    const FamilyParams fp{0.0, 4.0, 1.0, -2.0};
    const double mu = fp.mu(P20);
    for (double r : {0.3, 1.0, 5.0}) {
        const double h = 1e-6;
        const double fd = (std::log(lambda2_beta(fp, P20, r * (1 + h))) -
                           std::log(lambda2_beta(fp, P20, r * (1 - h)))) /
                          std::log((1 + h) / (1 - h));
        const double closed = mu - 2 + (fp.beta - mu) * h_lambda(mu, r).h;
        CHECK(fd == doctest::Approx(closed).epsilon(1e-6));
    }
    // at r=1 the closed form is mu-2+(beta-mu)/2
    CHECK(mu - 2 + (fp.beta - mu) * h_lambda(mu, 1.0).h ==
          doctest::Approx(mu - 2 + (fp.beta - mu) / 2));
}

TEST_CASE("family params validity conditions") {
    CHECK(FamilyParams{0.0, 2.0, 0.0, -1.0}.is_valid(P11));
    // tau = 0: n must exceed k(k+1)/(2k+sigma1)
    CHECK_FALSE(FamilyParams{-1.8, 2.0, 0.0, 0.0}.is_valid(ProblemParams(9, 1)));
    CHECK_FALSE(FamilyParams{-1.2, 2.0, 0.0, 0.0}.is_valid(ProblemParams(1, 1)));
    // tau > 0 regime of the appendix
    CHECK(FamilyParams{0.0, 4.0, 1.0, -2.0}.is_valid(P20));
    CHECK_FALSE(FamilyParams{0.0, 1.5, 1.0, 0.0}.is_valid(P20));  // k(sigma2-2) < sigma1
    CHECK_FALSE(FamilyParams{0.0, 4.0, 5.0, 0.0}.is_valid(P20));  // 2k+sigma1 <= tau
    CHECK_FALSE(FamilyParams{0.0, 4.0, 1.0, 0.0}.is_valid(ProblemParams(3, 2)));
    CHECK_THROWS_AS(FamilyParams({0.0, 4.0, -1.0, 0.0}).validate(P20), std::invalid_argument);
}

TEST_CASE("g_beta boundary limits and C1 extension") {
    SUBCASE("limit at the inner boundary is n + k(mu-2) for all tau") {
        for (const double tau : {0.0, 1.0}) {
            const FamilyParams fp{0.0, 4.0, tau, -2.0};
            const double mu = fp.mu(P20);
            const double expect = P20.cnk() * std::pow(std::fabs(fp.beta), P20.k) *
                                  (P20.n + P20.k * (mu - 2));
            // beta < 0: the boundary sits at s = -1
            CHECK(g_beta(fp, P20, -1.0).value == doctest::Approx(expect).epsilon(1e-12));
            CHECK(g_beta(fp, P20, -1.0 + 1e-9).value ==
                  doctest::Approx(expect).epsilon(1e-7));
            CHECK(g_beta(fp, P20, -1.0 - 1e-9).value ==
                  doctest::Approx(expect).epsilon(1e-7));
        }
    }
    SUBCASE("beta < 0: value and slope vanish toward s = 0") {
        const FamilyParams fp{0.0, 4.0, 1.0, -2.0};
        const GBetaEval near0 = g_beta(fp, P20, -1e-6);
        CHECK(std::fabs(near0.value) < 1e-12);
        CHECK(std::fabs(near0.derivative) < 1e-6);
        CHECK(g_beta(fp, P20, 0.0).value == 0.0);
        CHECK(g_beta(fp, P20, 0.5).value == 0.0);  // extension above 0
        CHECK(g_beta(fp, P20, 0.5).extended);
    }
    SUBCASE("C1 match across each boundary (finite-difference probe)") {
        auto probe = [](const FamilyParams& fp, const ProblemParams& p, double b, double side) {
            // interior one-sided slope against the extension slope at b
            const double e1 = 1e-5, e2 = 1e-6;
            const GBetaEval at = g_beta(fp, p, b + side * 1e-12);
            auto slope = [&](double e) {
                return (g_beta(fp, p, b + side * e).value - at.value) / (side * e);
            };
            const double s1 = slope(e1), s2 = slope(e2);
            // Richardson in e: the limit slope
            const double lim = (e1 * s2 - e2 * s1) / (e1 - e2);
            const GBetaEval ext = g_beta(fp, p, b - side * 1e-9);
            CHECK(lim == doctest::Approx(ext.derivative)
                             .epsilon(1e-5 * (1 + std::fabs(ext.derivative))));
            CHECK(at.value == doctest::Approx(ext.value).epsilon(1e-8));
        };
        probe({0.0, 4.0, 1.0, -2.0}, P20, -1.0, -1.0);  // beta<0 at s=-1, interior below
        probe({0.0, 4.0, 1.0, 2.5}, P20, 1.0, 1.0);     // beta>0 at s=1, interior above
        probe({0.0, 2.0, 0.0, 0.0}, P11, 0.0, 1.0);     // beta=0 at s=0, interior above
    }
}

TEST_CASE("equation identity S_k(D^2 u_beta) = w g_beta(u_beta) across the tuple matrix") {
    struct Tuple {
        ProblemParams p;
        FamilyParams fp;
    };
    const Tuple tuples[] = {
        {ProblemParams(11, 1), {0.0, 2.0, 0.0, -0.3}},   {ProblemParams(11, 1), {0.0, 2.0, 0.0, 0.0}},
        {ProblemParams(3, 1), {0.0, 2.0, 0.0, 1.9}},     {ProblemParams(20, 2), {0.0, 4.0, 0.0, -2.0}},
        {ProblemParams(12, 3), {-1.5, 2.0, 0.0, -1.0}},  {ProblemParams(20, 2), {0.0, 4.0, 1.0, -2.0}},
        {ProblemParams(25, 2), {1.0, 3.0, 0.5, -2.0}},   {ProblemParams(14, 1), {0.5, 3.0, 1.0, -3.0}},
        {ProblemParams(30, 3), {-0.5, 2.0, 0.4, -1.5}},  {ProblemParams(18, 2), {2.0, 4.0, 2.0, -1.0}},
    };
    for (const auto& [p, fp] : tuples) {
        CAPTURE(p.n);
        CAPTURE(p.k);
        CAPTURE(fp.sigma1);
        CAPTURE(fp.tau);
        REQUIRE(fp.is_valid(p));
        const auto rep =
            residual(p, fp.weight(), g_beta_nonlinearity(fp, p), family_profile(fp, p, 1e-2, 1e2, 100, true));
        CHECK(rep.sup_norm <= 1e-8);
    }
}

TEST_CASE("q_threshold") {
    SUBCASE("tau = 0: Q(r) = delta(r) = delta_inf(sigma1) for r >= 1") {
        const FamilyParams fp{0.0, 2.0, 0.0, 0.0};
        const DeltaInf d = delta_inf(P11, fp.weight());
        for (double r : {1.0, 2.0, 50.0}) {
            CHECK(q_threshold(fp, P11, r) == doctest::Approx(d.value).epsilon(1e-12));
            CHECK(q_threshold(fp, P11, r) ==
                  doctest::Approx(delta_of_r(P11, fp.weight(), r)).epsilon(1e-12));
        }
    }
    SUBCASE("tau > 0: Q(r) >= delta(r) for r >= 1") {
        const FamilyParams fp{0.0, 4.0, 1.0, 0.0};
        for (double r : {1.0, 3.0, 20.0, 500.0})
            CHECK(q_threshold(fp, P20, r) >= delta_of_r(P20, fp.weight(), r) - 1e-12);
    }
    SUBCASE("vbar matches direct quadrature of the v average") {
        const FamilyParams fp{0.0, 4.0, 1.0, 0.0};
        const FamilyThreshold th(fp, P20);
        const AuxiliaryRate rate(fp.weight(), P20);
        for (double r : {2.0, 8.0, 100.0}) {
            const double quad = oracles::trapezoid(
                                    [&](double t) { return rate.v(std::exp(t)); }, 0.0,
                                    std::log(r), 200001) /
                                std::log(r);
            CHECK(th.vbar(r) == doctest::Approx(quad).epsilon(1e-8));
        }
    }
    SUBCASE("two-sided continuity at r = 1") {
        const FamilyParams fp{0.0, 4.0, 1.0, 0.0};
        const double at = q_threshold(fp, P20, 1.0);
        CHECK(q_threshold(fp, P20, 1.0 - 1e-9) == doctest::Approx(at).epsilon(1e-8));
        CHECK(q_threshold(fp, P20, 1.0 + 1e-9) == doctest::Approx(at).epsilon(1e-8));
    }
}

TEST_CASE("nu chain: nu >= sqrt(radicand(r)) >= |v(r)| pointwise") {
    const FamilyParams fp{0.0, 4.0, 1.0, -2.0};
    const FamilyThreshold th(fp, P20);
    const AuxiliaryRate& rate = th.rate();
    for (double r : log_grid(1e-3, 1e3, 500)) {
        const double rad = rate.radicand(r);
        CHECK(rad >= rate.v(r) * rate.v(r) - 1e-12);
        CHECK(th.nu() >= std::sqrt(rad) - 1e-12);
    }
    CHECK(th.nu() == doctest::Approx(std::sqrt(rate.radicand(0.0) +
                                               fp.tau * fp.sigma2 / (4.0 * (P20.k + 1))))
                         .epsilon(1e-13));
}

TEST_CASE("admissible beta") {
    const FamilyParams base{0.0, 4.0, 1.0, 0.0};
    const FamilyThreshold th(base, P20);
    FamilyParams fp = base;
    fp.beta = th.sup_Q() + 1e-6;
    CHECK(admissible_beta_check(fp, P20).admissible);
    fp.beta = th.sup_Q() - 1e-3;
    CHECK_FALSE(admissible_beta_check(fp, P20).admissible);
    // the sup sits at the r -> 0 end for tau >= 0
    const auto rep = admissible_beta_check(fp, P20);
    CHECK(rep.sup_Q >= rep.grid_sup_Q - 1e-12);
    CHECK_FALSE(rep.sup_interior);
}

TEST_CASE("k-convexity certificate") {
    SUBCASE("analytic inequality n + j sigma1/k > n - j >= 0") {
        const FamilyParams fp{-1.5, 2.0, 0.0, -1.0};
        const ProblemParams p(12, 3);
        for (int j = 1; j <= p.k; ++j) CHECK(p.n + j * fp.sigma1 / p.k > p.n - j);
        const auto grid = log_grid(1e-2, 1e3, 200);
        const auto rep = kconvexity_certificate(fp, p, grid);
        CHECK(rep.analytic_ok);
        CHECK(rep.grid_ok);
    }
    SUBCASE("valid tau > 0 tuple at the beta threshold") {
        FamilyParams fp{0.0, 4.0, 1.0, 0.0};
        fp.beta = FamilyThreshold(fp, P20).sup_Q();
        const auto grid = log_grid(1e-2, 1e3, 300);
        const auto rep = kconvexity_certificate(fp, P20, grid);
        CHECK(rep.analytic_ok);
        CHECK(rep.grid_ok);
    }
    SUBCASE("beta far below 2 - n/k fails the analytic sign condition") {
        const FamilyParams fp{0.0, 4.0, 1.0, -11.0};  // n + k(beta-2) = 20+2(-13) < 0
        const auto grid = log_grid(1e-1, 1e1, 50);
        const auto rep = kconvexity_certificate(fp, P20, grid);
        CHECK_FALSE(rep.analytic_ok);
    }
}

TEST_CASE("sharpness constants of the tau = 0 growth bounds") {
    // min over r >= 1 of |u_beta| / r^{delta} reproduces the M table
    SUBCASE("beta < 0: 2^{beta/mu}") {
        const FamilyParams fp{0.0, 2.0, 0.0, -0.3377};
        const RadialProfile prof = family_profile(fp, P11, 1.0, 1e6, 60000, false);
        const auto rep = growth_theorem_check(P11, fp.weight(), prof, GrowthKind::Bounded);
        CHECK(rep.min_ratio_from_1 ==
              doctest::Approx(std::exp(fp.beta / 2 * std::numbers::ln2)).epsilon(1e-6));
    }
    SUBCASE("beta = 0: log(2)/mu") {
        const FamilyParams fp{0.0, 2.0, 0.0, 0.0};
        const RadialProfile prof = family_profile(fp, P11, 1.0, 1e6, 60000, false);
        const auto rep = growth_theorem_check(P11, fp.weight(), prof, GrowthKind::Unbounded);
        CHECK_FALSE(rep.critical);
        CHECK(rep.min_ratio_from_1 == doctest::Approx(std::numbers::ln2 / 2).epsilon(1e-6));
    }
    SUBCASE("beta > 0 away from the critical dimension: 1") {
        const ProblemParams p(3, 1);
        const DeltaInf d = delta_inf(p, WeightSpec::constant());
        const FamilyParams fp{0.0, 2.0, 0.0, d.value};  // beta = delta_inf > 1/e
        CHECK(fp.beta * std::numbers::e > 1);
        const RadialProfile prof = family_profile(fp, p, 1.0, 1e8, 120000, false);
        const auto rep = growth_theorem_check(p, fp.weight(), prof, GrowthKind::Unbounded);
        CHECK(rep.min_ratio_from_1 == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("beta > 0 in the critical dimension: beta e") {
        const ProblemParams p(10, 1);
        const FamilyParams fp{0.0, 2.0, 0.0, 0.15};
        const RadialProfile prof = family_profile(fp, p, 1.0, 1e4, 120000, false);
        const auto rep = growth_theorem_check(p, fp.weight(), prof, GrowthKind::Unbounded);
        CHECK(rep.critical);
        CHECK(rep.min_ratio_from_1 ==
              doctest::Approx(fp.beta * std::numbers::e).epsilon(1e-6));
    }
}

TEST_CASE("hardy weight helpers against finite differences") {
    const FamilyParams fp{0.0, 4.0, 1.0, -2.0};
    for (double r : {0.2, 1.0, 7.0}) {
        const double h = 1e-6;
        const double fd = (std::log(hardy_weight_V(fp, P20, r * (1 + h))) -
                           std::log(hardy_weight_V(fp, P20, r * (1 - h)))) /
                          std::log((1 + h) / (1 - h));
        CHECK(hardy_weight_rVp_over_V(fp, P20, r) == doctest::Approx(fd).epsilon(1e-6));
    }
    CHECK(hardy_weight_V(fp, P20, 0.0) == 0.0);
}

TEST_CASE("semi-stability certificate at the tau = 0 threshold (light settings)") {
    // k=1, sigma1=0, n=11: beta = delta_inf = -11/2 + sqrt(10) + 2
    const DeltaInf d = delta_inf(P11, WeightSpec::constant());
    const FamilyParams fp{0.0, 2.0, 0.0, d.value};
    CertificateOptions opt;
    opt.profile_points = 60001;
    opt.random_etas = 8;
    opt.stability.meshes = {128, 256, 512};
    const auto cert = semistability_certificate(fp, P11, opt);
    CAPTURE(cert.to_json().dump(2));
    CHECK(cert.beta_admissible);
    for (const auto& item : cert.items) {
        CAPTURE(item.name);
        CHECK(item.ok);
    }
    CHECK(cert.stability.verdict == StabilityReport::Verdict::SemiStable);
    CHECK(cert.all_ok());
}

TEST_CASE("certificate rejects beta below the threshold") {
    const DeltaInf d = delta_inf(P11, WeightSpec::constant());
    const FamilyParams fp{0.0, 2.0, 0.0, d.value - 0.5};
    CertificateOptions opt;
    opt.profile_points = 20001;
    opt.random_etas = 2;
    opt.stability.meshes = {128, 256};
    const auto cert = semistability_certificate(fp, P11, opt);
    CHECK_FALSE(cert.beta_admissible);
    CHECK_FALSE(cert.all_ok());
}
