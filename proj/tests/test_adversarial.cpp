#include "doctest.h"

#include "coordparse/adversarial.hpp"

#include <cmath>
#include <limits>

using namespace coordparse::adversarial;

TEST_CASE("lambda schedule closed-form values") {
    CHECK(lambda_schedule(0.0, 2.0) == 0.0);
    // 2/(1+e^{-1}) - 1 = tanh(1/2)
    CHECK(lambda_schedule(0.5, 2.0) == doctest::Approx(std::tanh(0.5)).epsilon(1e-12));
    // 2/(1+e^{-2}) - 1 = tanh(1)
    CHECK(lambda_schedule(1.0, 2.0) == doctest::Approx(0.7615941559557649).epsilon(1e-12));
    CHECK(std::fabs(lambda_schedule(1.0, 2.0) - 0.76159) < 1e-5);
}

TEST_CASE("lambda schedule is monotone and bounded on [0,1]") {
    double prev = -1.0;
    for (int i = 0; i <= 100; ++i) {
        double p = i / 100.0;
        double v = lambda_schedule(p, 2.0);
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("lambda schedule rejects bad arguments") {
    CHECK_THROWS_AS(lambda_schedule(-0.01, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(lambda_schedule(1.01, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(lambda_schedule(0.5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(lambda_schedule(0.5, -1.0), std::invalid_argument);
}

TEST_CASE("gradient reversal scales by minus lambda") {
    std::vector<double> g = {1.0, -2.0, 0.5};
    grad_reversal_backward(g, 0.5);
    CHECK(g[0] == doctest::Approx(-0.5));
    CHECK(g[1] == doctest::Approx(1.0));
    CHECK(g[2] == doctest::Approx(-0.25));
}

TEST_CASE("combined loss arithmetic") {
    LossBreakdown lb = combined_loss(1.25, 0.5, 0.4);
    CHECK(lb.tag_loss == doctest::Approx(1.25));
    CHECK(lb.slot_loss == doctest::Approx(0.5));
    CHECK(lb.total == doctest::Approx(1.25 - 0.4 * 0.5));
}

TEST_CASE("combined loss rejects non-finite inputs") {
    double inf = std::numeric_limits<double>::infinity();
    double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS(combined_loss(inf, 0.5, 0.4));
    CHECK_THROWS(combined_loss(0.5, nan, 0.4));
}
