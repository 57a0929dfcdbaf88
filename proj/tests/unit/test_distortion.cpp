#include <algorithm>
#include <cmath>
#include <variant>

#include <gtest/gtest.h>

#include "generators.hpp"
#include "oracles.hpp"
#include "quadlab/distortion.hpp"
#include "quadlab/errors.hpp"
#include "quadlab/rates.hpp"

using namespace quadlab;
using quadlab::testing::Draw;
using quadlab::testing::quad;

namespace {

// log of prod_{i=1..j} F^i(eta) / xi_i, in quad precision
double bounded_log_ratio_quad(double a, double eta, int j) {
    const quad qa = a;
    quad x = 0;
    quad y = eta;
    quad ratio = 1;
    for (int i = 1; i <= j; ++i) {
        x = 1 - qa * x * x;
        y = 1 - qa * y * y;
        ratio *= y / x;
    }
    return std::log(std::abs(static_cast<double>(ratio)));
}

}  // namespace

TEST(BoundedDistortion, TrivialCases) {
    EXPECT_EQ(bounded_distortion(Parameter(1.9), 0.1, 0).ratio, 1.0);
    EXPECT_NEAR(bounded_distortion(Parameter(1.9), 1e-12, 10).ratio, 1.0, 1e-12);
    EXPECT_EQ(bounded_distortion(Parameter(1.9), 0.1, 0).budget, 2.0);
    EXPECT_THROW(bounded_distortion(Parameter(1.9), 0.1, -1), DomainError);
    EXPECT_THROW(bounded_distortion(Parameter(1.0), 0.1, 3), DegenerateDerivative);
}

TEST(BoundedDistortion, MatchesQuadProduct) {
    Draw d(41);
    for (int i = 0; i < 500; ++i) {
        const double a = d.uniform(1.5, 2.0);
        const double eta = std::exp(-d.uniform(2.0, 20.0));
        const int j = d.integer(1, 12);
        const double expect = bounded_log_ratio_quad(a, eta, j);
        const DistortionReport rep = bounded_distortion(Parameter(a), eta, j);
        ASSERT_NEAR(rep.logRatio, expect, 1e-9 * std::max(1.0, std::abs(expect))) << a << " " << eta << " " << j;
        ASSERT_EQ(rep.holds, std::abs(rep.logRatio) <= std::log(2.0));
    }
}

TEST(PhaseParamWindow, ConstantAtTwo) {
    const PhaseParamWindow w = phase_param_window(Parameter(2.0), 10, 25);
    ASSERT_EQ(w.ratios.size(), 16u);
    EXPECT_EQ(w.ratios.front().first, 10);
    EXPECT_NEAR(w.T, 1.0 / 3.0, 1e-6);
    EXPECT_LT(w.A, 1e-4);
    EXPECT_NEAR(w.DA, (1.0 + w.A) / (1.0 - w.A), 1e-15);
    EXPECT_THROW(phase_param_window(Parameter(2.0), 0, 5), DomainError);
    EXPECT_THROW(phase_param_window(Parameter(2.0), 6, 5), DomainError);
}

TEST(PhaseParamWindow, DegenerateAtOne) {
    EXPECT_THROW(phase_param_window(Parameter(1.0), 2, 6), DegenerateDerivative);
}

TEST(PhaseParamWindow, SpreadGrowsWithTheWindowAtTwo) {
    double prev = 0.0;
    for (int hi = 12; hi <= 40; hi += 4) {
        const double da = phase_param_window(Parameter(2.0), 10, hi).DA;
        EXPECT_GE(da, prev) << hi;
        prev = da;
    }
}

TEST(MainDistortion, EqualParametersGiveOne) {
    const DistortionReport r = main_distortion(Parameter(1.8), Parameter(1.8), 30, 2.0, 16);
    EXPECT_EQ(r.logRatio, 0.0);
    EXPECT_TRUE(r.holds);
    const double ls = log_star(16.0);
    EXPECT_DOUBLE_EQ(r.budget, std::pow(2.0, ls * ls));
    EXPECT_THROW(main_distortion(Parameter(1.8), Parameter(1.8), 3, 0.5, 16), DomainError);
    EXPECT_THROW(main_distortion(Parameter(1.8), Parameter(1.8), -1, 2.0, 16), DomainError);
}

TEST(MainDistortion, AntisymmetricAndMatchesRawProduct) {
    Draw d(42);
    for (int i = 0; i < 300; ++i) {
        const double a = d.uniform(1.6, 2.0);
        const double b = std::min(2.0, a + d.uniform(0.0, 1e-4));
        const int j = d.integer(1, 15);
        const DistortionReport ab = main_distortion(Parameter(a), Parameter(b), j, 1.5, 100);
        const DistortionReport ba = main_distortion(Parameter(b), Parameter(a), j, 1.5, 100);
        ASSERT_NEAR(ab.logRatio, -ba.logRatio, 1e-12);
        const double raw = std::log(std::abs(quadlab::testing::phase_product(a, j) / quadlab::testing::phase_product(b, j)));
        ASSERT_NEAR(ab.logRatio, raw, 1e-9);
    }
}

TEST(DistortionWindow, ChainsAdditively) {
    Draw d(43);
    for (int i = 0; i < 300; ++i) {
        const double a = d.uniform(1.6, 2.0);
        const double b = d.uniform(1.6, 2.0);
        const int j = d.integer(2, 40);
        const int k = d.integer(0, j);
        const double whole = distortion_window(1.0, a, 1.0, b, 0, j, 2.0).logRatio;
        const double left = distortion_window(1.0, a, 1.0, b, 0, k, 2.0).logRatio;
        const double right = distortion_window(1.0, a, 1.0, b, k, j, 2.0).logRatio;
        ASSERT_NEAR(whole, left + right, 1e-9 * std::max(1.0, std::abs(whole)));
    }
    EXPECT_THROW(log_derivative_window(0.5, 1.9, 3, 2), DomainError);
}

TEST(Restore, KeepsExactlyWhenTheBestSamplePassesTheStrongBound) {
    Draw d(44);
    for (int i = 0; i < 200; ++i) {
        const int n = d.integer(2, 12);
        std::vector<double> samples;
        for (int s = 0; s < 5; ++s) {
            samples.push_back(d.uniform(1.5, 2.0));
        }
        const double gammaB = d.uniform(0.0, 0.8);
        const double gamma = gammaB / 2.0;
        const double CB = 0.1;
        const double C = 0.05;
        double best = -1e300;
        std::vector<double> weakFails;
        for (double a : samples) {
            const double l = std::log(std::abs(quadlab::testing::phase_product(a, n - 1)));
            best = std::max(best, l);
            if (!(l >= std::log(C) + gamma * (n - 1))) {
                weakFails.push_back(a);
            }
        }
        const RestoreDecision dec = restore_derivative_check(samples, n, gammaB, CB, gamma, C);
        const bool keep = best >= std::log(CB) + gammaB * (n - 1);
        ASSERT_EQ(std::holds_alternative<KeepAll>(dec), keep);
        if (keep) {
            const KeepAll& k = std::get<KeepAll>(dec);
            ASSERT_NEAR(k.witnessLog, best, 1e-9);
            ASSERT_EQ(k.violations, weakFails);
        }
    }
}

TEST(Restore, EmptyAndMismatchedInput) {
    EXPECT_TRUE(std::holds_alternative<RemoveAll>(restore_decision({}, {}, 5, 0.1, 1.0, 0.05, 1.0)));
    EXPECT_THROW(restore_decision({1.8}, {}, 5, 0.1, 1.0, 0.05, 1.0), DomainError);
    EXPECT_THROW(restore_derivative_check({1.8}, 0, 0.1, 1.0, 0.05, 1.0), DomainError);
}
