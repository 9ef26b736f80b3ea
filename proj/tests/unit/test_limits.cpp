#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "iterdist/limits.hpp"

using namespace iterdist;

TEST_CASE("limit tails", "[limits]") {
    CHECK(limit_tail(DistributionSpec::gamma(3.7, 2.0), 2.0) ==
          Catch::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(limit_tail(DistributionSpec::weibull(2.0, 1.0), 1.0) == 0.0);
    CHECK(limit_tail(DistributionSpec::weibull(2.0, 1.0), 0.0) == 1.0);
    CHECK(limit_tail(DistributionSpec::weibull(0.5, 1.0), 5.0) == 1.0);
    CHECK(limit_tail(DistributionSpec::weibull(1.0, 2.0), 1.0) ==
          Catch::Approx(std::exp(-0.5)).epsilon(1e-14));
    CHECK(limit_tail(DistributionSpec::exponential(2.0), 1.0) ==
          Catch::Approx(std::exp(-2.0)).epsilon(1e-14));

    CHECK(limit_kind(DistributionSpec::weibull(2.0, 1.0)) == LimitKind::degenerate_zero);
    CHECK(limit_kind(DistributionSpec::weibull(0.5, 1.0)) == LimitKind::degenerate_one);
    CHECK(limit_kind(DistributionSpec::gamma(0.5, 1.0)) == LimitKind::exponential);
}

TEST_CASE("large-s stop-loss approximation", "[limits]") {
    SECTION("exact at shape one") {
        const auto expo = DistributionSpec::exponential(1.0);
        for (int s : {2, 50, 300}) {
            const double approx = log_stop_loss_approx_gamma(1.0, 1.0, s, 1.0);
            CHECK(approx == Catch::Approx(-1.0 + log_gamma(static_cast<double>(s)))
                                .epsilon(1e-12));
            if (s <= 50)
                CHECK(approx ==
                      Catch::Approx(log_stop_loss(expo, 1.0, s - 1)).epsilon(1e-12));
        }
    }
    SECTION("shape 2, s = 200: relative error is exactly 1/201 and under 2%") {
        const auto g2 = DistributionSpec::gamma_int(2, 1.0);
        const double log_exact = log_stop_loss(g2, 1.0, 199);
        const double log_approx = log_stop_loss_approx_gamma(2.0, 1.0, 200, 1.0);
        const double rel = std::fabs(std::expm1(log_approx - log_exact));
        CHECK(rel < 0.02);
        CHECK(rel == Catch::Approx(1.0 / 201.0).epsilon(1e-9));
    }
    SECTION("scale equivariance of the relative error") {
        const auto scaled = DistributionSpec::gamma_int(2, 3.0);
        const double d_unit = log_stop_loss_approx_gamma(2.0, 1.0, 200, 1.0) -
                              log_stop_loss(DistributionSpec::gamma_int(2, 1.0), 1.0, 199);
        const double d_scaled =
            log_stop_loss_approx_gamma(2.0, 3.0, 200, 3.0) - log_stop_loss(scaled, 3.0, 199);
        CHECK(d_scaled == Catch::Approx(d_unit).margin(1e-12));
    }
}

TEST_CASE("Weibull shape>1 closed-form bound expression", "[limits]") {
    SECTION("pinned value at (2, 2, 1)") {
        const double ref = std::log(std::exp(-1.0) / (std::tgamma(1.5) * 2.0));
        CHECK(log_weibull_tail_upper_bound(2.0, 2, 1.0) ==
              Catch::Approx(ref).epsilon(1e-12));
        CHECK(std::exp(log_weibull_tail_upper_bound(2.0, 2, 1.0)) ==
              Catch::Approx(0.207554).epsilon(1e-5));
    }
    SECTION("dominates the tail at small s") {
        const auto w = DistributionSpec::weibull(2.0, 1.0);
        for (int s : {2, 3})
            CHECK(log_weibull_tail_upper_bound(2.0, s, 1.0) >=
                  iterated_log_tail(w, s, 1.0));
    }
    SECTION("measured crossover: the expression drops below the tail for larger s") {
        const auto w = DistributionSpec::weibull(2.0, 1.0);
        CHECK(log_weibull_tail_upper_bound(2.0, 5, 1.0) < iterated_log_tail(w, 5, 1.0));
    }
    SECTION("decreasing in s and divergent to minus infinity") {
        double prev = 0.0;
        for (int s : {2, 3, 5, 10, 50, 200}) {
            const double b = log_weibull_tail_upper_bound(2.0, s, 1.0);
            CHECK(b < prev);
            prev = b;
        }
        CHECK(prev < -400.0);
    }
    SECTION("asymptotic decay rate") {
        const int s = 200;
        const double b = log_weibull_tail_upper_bound(2.0, s, 1.0);
        const double rate =
            -(s - 1.0) * std::log(2.0 * std::pow((s - 1.0) / (2.0 * M_E), 0.5));
        CHECK(b / rate == Catch::Approx(1.0).margin(0.05));
    }
    SECTION("domain") {
        CHECK_THROWS_AS(log_weibull_tail_upper_bound(0.9, 3, 1.0), std::domain_error);
        CHECK_THROWS_AS(log_weibull_tail_upper_bound(2.0, 3, 0.0), std::domain_error);
    }
}

TEST_CASE("Weibull shape<1 stop-loss bounds", "[limits]") {
    SECTION("zero deductible: both bounds collapse and the moment sits on the upper") {
        const auto b = weibull_stop_loss_bounds(0.5, 10, 0.1, 0.0);
        CHECK(b.log_lower == Catch::Approx(b.log_upper).margin(1e-14));
        CHECK(b.log_upper == Catch::Approx(log_gamma(21.0)).epsilon(1e-13));
        CHECK(b.log_value == Catch::Approx(b.log_upper).margin(1e-10));
    }
    SECTION("bracketing at the measured (beta, s0) and beyond") {
        // measured: beta = 0.1, x = 1 first brackets at s = 3
        for (int s : {3, 8, 20}) {
            const auto b = weibull_stop_loss_bounds(0.5, s, 0.1, 1.0);
            INFO("s = " << s);
            CHECK(b.lower_holds);
            CHECK(b.log_value <= b.log_upper + 1e-12);
        }
        const auto b20 = weibull_stop_loss_bounds(0.5, 20, 0.1, 1.0);
        CHECK(b20.log_upper == Catch::Approx(log_gamma(41.0)).epsilon(1e-13));
    }
    SECTION("the lower bound is flagged when it fails") {
        const auto b = weibull_stop_loss_bounds(0.5, 1, 0.1, 25.0);
        CHECK_FALSE(b.lower_holds);
    }
    SECTION("domain") {
        CHECK_THROWS_AS(weibull_stop_loss_bounds(1.5, 3, 0.1, 1.0), std::domain_error);
    }
}

TEST_CASE("gamma-function ratio diagnostic", "[limits]") {
    SECTION("identically one at shape one") {
        for (int s : {2, 7, 100})
            CHECK(gamma_ratio_diagnostic(1.0, s) == Catch::Approx(1.0).epsilon(1e-13));
    }
    SECTION("shape 0.5 is 1/(2(2s-1)), decreasing to zero") {
        CHECK(gamma_ratio_diagnostic(0.5, 10) == Catch::Approx(1.0 / 38.0).epsilon(1e-12));
        CHECK(gamma_ratio_diagnostic(0.5, 100) == Catch::Approx(1.0 / 398.0).epsilon(1e-12));
        CHECK(gamma_ratio_diagnostic(0.5, 1000) ==
              Catch::Approx(1.0 / 3998.0).epsilon(1e-11));
        CHECK(gamma_ratio_diagnostic(0.5, 10) > gamma_ratio_diagnostic(0.5, 100));
        CHECK(gamma_ratio_diagnostic(0.5, 100) > gamma_ratio_diagnostic(0.5, 1000));
        // asymptote shape^{1/shape} s^{1-1/shape} = 0.25/s
        CHECK(gamma_ratio_diagnostic(0.5, 1000) ==
              Catch::Approx(0.25 / 1000.0).epsilon(0.1));
    }
    SECTION("shape 2 grows like sqrt(2s)") {
        CHECK(gamma_ratio_diagnostic(2.0, 10) == Catch::Approx(4.36189814871).epsilon(1e-10));
        CHECK(gamma_ratio_diagnostic(2.0, 100) ==
              Catch::Approx(14.1068250298).epsilon(1e-10));
        CHECK(gamma_ratio_diagnostic(2.0, 100) / std::sqrt(200.0) ==
              Catch::Approx(1.0).margin(0.01));
    }
}

TEST_CASE("convergence reports", "[limits]") {
    std::vector<double> grid;
    for (int i = 1; i <= 20; ++i) grid.push_back(0.5 * i);
    SECTION("exponential: identically zero distance") {
        const auto rep =
            convergence_report(DistributionSpec::exponential(1.0), grid, {1, 5, 20, 60});
        for (double d : rep.sup_distance) CHECK(d < 1e-10);
        CHECK(rep.kind == LimitKind::exponential);
    }
    SECTION("Gamma(5): monotone decreasing distance") {
        const auto rep = convergence_report(DistributionSpec::gamma_int(5, 1.0), grid,
                                            {2, 10, 50, 200});
        CHECK(rep.monotone_observed);
        CHECK(rep.sup_distance.back() < rep.sup_distance.front());
    }
    SECTION("Weibull(0.5) climbs toward one at x = 1") {
        const auto rep = convergence_report(DistributionSpec::weibull(0.5, 1.0), {1.0},
                                            {2, 4, 7});
        CHECK(rep.monotone_observed);
        CHECK(rep.kind == LimitKind::degenerate_one);
        CHECK(rep.sup_distance.back() < 0.05);  // tail exceeds 0.95 by s = 7
    }
    SECTION("input validation") {
        CHECK_THROWS_AS(
            convergence_report(DistributionSpec::exponential(1.0), {}, {1, 2}),
            std::invalid_argument);
        CHECK_THROWS_AS(
            convergence_report(DistributionSpec::exponential(1.0), {1.0}, {2, 2}),
            std::invalid_argument);
    }
}
