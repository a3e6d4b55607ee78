#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qrisk/approx.hpp"

using namespace qrisk::approx;

namespace {

constexpr double kPi = std::numbers::pi;

// max_y |sin^2(c p_u(y) + pi/4) - (c (y - 1/2) + 1/2)| on a uniform grid.
double measured_error(double c, int u, int points = 100001) {
    const Polynomial p = taylor_polynomial({c, u, 1});
    double worst = 0.0;
    for (int i = 0; i < points; ++i) {
        const double y = static_cast<double>(i) / (points - 1);
        const double s = std::sin(c * p(y) + kPi / 4);
        worst = std::max(worst, std::abs(s * s - (c * (y - 0.5) + 0.5)));
    }
    return worst;
}

// The exact angle function the Taylor polynomial approximates.
double angle_function(double y, double c) { return (std::asin(std::sqrt(c * (y - 0.5) + 0.5)) - kPi / 4) / c; }

}  // namespace

TEST(Polynomial, ArithmeticAndEvaluation) {
    const Polynomial a({1.0, 2.0}), b({0.0, 0.0, 3.0});
    EXPECT_EQ((a + b).coeffs, (std::vector<double>{1.0, 2.0, 3.0}));
    EXPECT_EQ((a * a).coeffs, (std::vector<double>{1.0, 4.0, 4.0}));
    EXPECT_EQ(Polynomial({1.0, 0.0, 0.0}).degree(), 0);
    EXPECT_EQ(Polynomial().degree(), -1);
    EXPECT_DOUBLE_EQ(b(2.0), 12.0);
}

TEST(Taylor, OrderZeroIsShiftedIdentity) {
    for (double c : {0.1, 0.7, 1.0}) {
        const auto p = taylor_polynomial({c, 0, 1});
        EXPECT_EQ(p.coeffs, (std::vector<double>{-0.5, 1.0}));
    }
}

TEST(Taylor, OddAroundMidpoint) {
    for (int u = 0; u < 5; ++u) {
        const auto p = taylor_polynomial({0.6, u, 1});
        EXPECT_NEAR(p(0.5), 0.0, 1e-16);
        EXPECT_EQ(p.degree(), 2 * u + 1);
        for (double d : {0.1, 0.3, 0.5}) EXPECT_NEAR(p(0.5 + d), -p(0.5 - d), 1e-15);
    }
}

TEST(Taylor, CoefficientsMatchProductFormula) {
    // prod_{i=1}^{v} (2i - 1) * 2^v / ((2v + 1) v!)
    for (int v = 0; v < 8; ++v) {
        double prod = 1.0, fact = 1.0;
        for (int i = 1; i <= v; ++i) {
            prod *= 2 * i - 1;
            fact *= i;
        }
        EXPECT_NEAR(taylor_coefficient(v), prod * std::ldexp(1.0, v) / ((2 * v + 1) * fact), 1e-12);
    }
    EXPECT_DOUBLE_EQ(taylor_coefficient(1), 2.0 / 3.0);
}

TEST(Taylor, MatchesAngleFunctionToDeclaredOrder) {
    // Remainder of an order-(2u+1) odd expansion shrinks like d^{2u+3}.
    for (int u = 0; u < 3; ++u) {
        for (double c : {0.5, 1.0}) {
            const auto p = taylor_polynomial({c, u, 1});
            const double d1 = 0.02, d2 = 0.01;
            const double e1 = std::abs(angle_function(0.5 + d1, c) - p(0.5 + d1));
            const double e2 = std::abs(angle_function(0.5 + d2, c) - p(0.5 + d2));
            EXPECT_NEAR(std::log2(e1 / e2), 2 * u + 3, 0.05) << "u=" << u << " c=" << c;
        }
    }
}

TEST(ErrorBound, ClosedFormValues) {
    EXPECT_NEAR(approx_error_bound({1.0, 0, 1}), 1.0 / 6.0, 1e-15);
    EXPECT_NEAR(approx_error_bound({0.25, 0, 1}), std::pow(0.25, 3) / 6.0, 1e-18);
    EXPECT_NEAR(approx_error_bound({0.5, 1, 1}), std::pow(0.5, 5) / 20.0, 1e-18);
    EXPECT_THROW(approx_error_bound({0.0, 0, 1}), std::invalid_argument);
    EXPECT_THROW(approx_error_bound({1.5, 0, 1}), std::invalid_argument);
    EXPECT_THROW(approx_error_bound({0.5, -1, 1}), std::invalid_argument);
}

TEST(ErrorBound, HoldsWithSlackForOrdersZeroAndOne) {
    for (int u : {0, 1}) {
        for (double c : {0.1, 0.25, 0.5}) {
            EXPECT_LE(measured_error(c, u), 1.1 * approx_error_bound({c, u, 1})) << "u=" << u << " c=" << c;
        }
    }
}

TEST(ErrorBound, OrderTwoLeadingConstantExceedsBound) {
    // The remainder's leading coefficient is binom(2u+2, u+1)/2^{u+2} times the
    // bound: 1.25 at u = 2, so the measured error sits near 1.25x the bound.
    for (double c : {0.1, 0.25}) {
        const double ratio = measured_error(c, 2) / approx_error_bound({c, 2, 1});
        EXPECT_NEAR(ratio, 1.25, 0.03) << "c=" << c;
    }
}

TEST(ErrorBound, HigherOrderNeverWorseForSmallC) {
    for (double c : {0.1, 0.25, 0.5}) {
        double prev = measured_error(c, 0, 20001);
        for (int u = 1; u < 4; ++u) {
            const double e = measured_error(c, u, 20001);
            EXPECT_LE(e, prev) << "c=" << c << " u=" << u;
            prev = e;
        }
    }
}

TEST(OptimalScaling, FormulaAndClamp) {
    EXPECT_NEAR(optimal_scaling(0.01, 0).c, std::sqrt(2.0) * 0.1, 1e-15);
    const auto s = optimal_scaling(0.5, 0);
    EXPECT_DOUBLE_EQ(s.c, 1.0);
    const auto big = optimal_scaling(0.9, 0);
    EXPECT_DOUBLE_EQ(big.c, 1.0);
    EXPECT_TRUE(big.clamped);
    EXPECT_FALSE(optimal_scaling(0.01, 1).clamped);
    EXPECT_THROW(optimal_scaling(0.0, 0), std::invalid_argument);
    EXPECT_THROW(optimal_scaling(-1.0, 0), std::invalid_argument);
}

TEST(OptimalScaling, AgreesWithGridMaximisation) {
    for (int u : {0, 1, 2}) {
        for (double eps : {1e-1, 1e-2, 1e-3}) {
            const double step = 1e-5;
            double best_c = 0.0, best = -1e300;
            for (double c = step; c <= 2.0; c += step) {
                const double v = c * eps - std::pow(c, 2 * u + 3) / ((2 * u + 3) * std::ldexp(1.0, u + 1));
                if (v > best) {
                    best = v;
                    best_c = c;
                }
            }
            const double formula = std::sqrt(2.0) * std::pow(eps, 1.0 / (2 * u + 2));
            EXPECT_NEAR(best_c, formula, 2 * step);
        }
    }
}

TEST(ConvergenceRate, Values) {
    EXPECT_DOUBLE_EQ(convergence_rate(0), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(convergence_rate(1), 4.0 / 5.0);
    double prev = 0.0;
    for (int u = 0; u < 50; ++u) {
        EXPECT_GT(convergence_rate(u), prev);
        EXPECT_LT(convergence_rate(u), 1.0);
        prev = convergence_rate(u);
    }
    EXPECT_GT(convergence_rate(1000), 0.999);
}

TEST(TargetError, BalancesBiasAgainstEvaluations) {
    for (int u : {0, 1}) {
        for (double M : {16.0, 128.0, 1024.0}) {
            const double eps = target_error_for_evaluations(M, u);
            const double c = std::sqrt(2.0) * std::pow(eps, 1.0 / (2 * u + 2));
            const double lhs = c * eps - std::pow(c, 2 * u + 3) / ((2 * u + 3) * std::ldexp(1.0, u + 1));
            EXPECT_NEAR(lhs, kPi / M, 1e-12);
        }
    }
}

TEST(Compose, Examples) {
    const Polynomial id({0.0, 1.0});
    EXPECT_EQ(compose(id, Polynomial({-0.5, 1.0})).coeffs, (std::vector<double>{-0.5, 1.0}));
    EXPECT_TRUE(compose(Polynomial({1.0, 2.0}), Polynomial()).is_zero());
    // (1 + 2x)^3 = 1 + 6x + 12x^2 + 8x^3
    const auto r = compose(Polynomial({1.0, 2.0}), Polynomial({0.0, 0.0, 0.0, 1.0}));
    EXPECT_EQ(r.coeffs, (std::vector<double>{1.0, 6.0, 12.0, 8.0}));
}

TEST(Compose, AssociativeAndEvaluatesPointwise) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    auto random_poly = [&](int deg) {
        std::vector<double> c(deg + 1);
        for (auto& x : c) x = u(rng);
        return Polynomial(c);
    };
    for (int t = 0; t < 50; ++t) {
        const auto f = random_poly(1 + static_cast<int>(rng() % 3));
        const auto g = random_poly(1 + static_cast<int>(rng() % 3));
        const auto p = random_poly(static_cast<int>(rng() % 5));
        const auto lhs = compose(compose(f, g), p);
        const auto rhs = compose(f, compose(g, p));
        for (double x : {-0.9, -0.2, 0.3, 0.8}) {
            EXPECT_NEAR(lhs(x), rhs(x), 1e-11);
            EXPECT_NEAR(lhs(x), p(g(f(x))), 1e-11);
        }
        EXPECT_LE(compose(f, p).degree(), f.degree() * std::max(p.degree(), 0));
    }
}
