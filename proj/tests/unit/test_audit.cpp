#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "quadlab/audit.hpp"
#include "quadlab/errors.hpp"
#include "quadlab/rates.hpp"

using namespace quadlab;

namespace {

const std::string kFixtures = QUADLAB_FIXTURE_DIR;

std::string read(const std::string& path) {
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const ReturnFixtures& shipped() {
    static const ReturnFixtures f = load_return_fixtures(kFixtures + "/returns.json");
    return f;
}

RunResult synthetic_run(std::vector<long> maxM, std::vector<double> corrected) {
    RunResult r;
    r.decay.push_back(DecayRow{0, 6, 1.0, 1.0, 1.0});
    for (std::size_t k = 0; k < maxM.size(); ++k) {
        r.decay.push_back(DecayRow{static_cast<int>(k + 1), maxM[k], corrected[k], corrected[k], 1.0});
    }
    return r;
}

// prod (1 - m^{-1} tau^{(log* m)^3}) over the first k entries
double naive_bound(const std::vector<long>& ms, std::size_t k, double tau) {
    double b = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
        const int ls = log_star(static_cast<double>(ms[i]));
        b *= 1.0 - std::pow(tau, ls * ls * ls) / static_cast<double>(ms[i]);
    }
    return b;
}

}  // namespace

TEST(ReturnFixtureFile, ShippedSetCoversTheDepthRange) {
    const ReturnFixtures& f = shipped();
    EXPECT_GE(f.returns.size(), 30u);
    for (const FixtureReturn& r : f.returns) {
        EXPECT_GE(std::abs(r.r), 8);
        EXPECT_LE(std::abs(r.r), 25);
        EXPECT_GE(r.a, 1.0);
        EXPECT_LE(r.a, 2.0);
    }
}

TEST(ReturnFixtureFile, RoundTrip) {
    const ReturnFixtures& f = shipped();
    EXPECT_EQ(return_fixtures_to_json(return_fixtures_from_json(return_fixtures_to_json(f))),
              return_fixtures_to_json(f));
}

TEST(ReturnFixtureFile, Errors) {
    EXPECT_THROW(load_return_fixtures(kFixtures + "/absent.json"), FixtureError);
    EXPECT_THROW(return_fixtures_from_json("{"), FixtureError);

    auto doc = nlohmann::json::parse(read(kFixtures + "/returns.json"));
    auto bad = doc;
    bad["schema"] = "quadlab.returns/0";
    EXPECT_THROW(return_fixtures_from_json(bad.dump()), FixtureError);

    bad = doc;
    bad["returns"][0]["a"] = bad["returns"][0]["a"].get<double>() + 1e-6;
    EXPECT_THROW(return_fixtures_from_json(bad.dump()), FixtureError);

    bad = doc;
    bad["returns"][3].erase("eta");
    EXPECT_THROW(return_fixtures_from_json(bad.dump()), FixtureError);

    bad = doc;
    bad["returns"][2]["eta"] = 0.5;
    EXPECT_THROW(return_fixtures_from_json(bad.dump()), FixtureError);
}

TEST(RunFixtureFile, ShippedSplitAndErrors) {
    const RunFixtures f = load_run_fixtures(kFixtures + "/runs.json");
    EXPECT_EQ(f.calibration.size(), 3u);
    EXPECT_EQ(f.heldOut.size(), 3u);
    EXPECT_EQ(run_fixtures_to_json(run_fixtures_from_json(run_fixtures_to_json(f))), run_fixtures_to_json(f));
    EXPECT_THROW(run_fixtures_from_json(R"({"schema": "quadlab.runs/1"})"), FixtureError);
    EXPECT_THROW(run_fixtures_from_json(R"({"schema": "x", "calibration": [], "heldOut": []})"), FixtureError);
}

TEST(FitUpper, HeadroomTimesCalibrationMax) {
    const UpperFit f = fit_upper({1.0, 3.0, 2.0}, {3.7, 3.76, 0.0}, 1.25);
    EXPECT_DOUBLE_EQ(f.constant, 3.75);
    EXPECT_EQ(f.violations, 1);
    std::vector<int> even;
    std::vector<int> odd;
    split_even_odd(std::vector<int>{0, 1, 2, 3, 4}, even, odd);
    EXPECT_EQ(even, (std::vector<int>{0, 2, 4}));
    EXPECT_EQ(odd, (std::vector<int>{1, 3}));
}

TEST(FitTau, LargestTauWithinHeadroom) {
    const std::vector<long> ms{10, 20, 40};
    const std::vector<double> corr{0.97, 0.9, 0.85};
    const std::vector<RunResult> runs{synthetic_run(ms, corr)};
    const double tau = fit_tau(runs, 1.25);
    ASSERT_GT(tau, 0.0);
    ASSERT_LT(tau, 0.99);
    const auto holds = [&](double t) {
        for (std::size_t k = 1; k <= ms.size(); ++k) {
            if (-std::log(naive_bound(ms, k, t)) > -std::log(corr[k - 1]) / 1.25 * (1 + 1e-12)) {
                return false;
            }
        }
        return true;
    };
    EXPECT_TRUE(holds(tau));
    EXPECT_FALSE(holds(tau * (1 + 1e-6)));
    const auto b = decay_bounds_for(runs[0], tau);
    ASSERT_EQ(b.size(), 4u);
    for (std::size_t k = 0; k < b.size(); ++k) {
        EXPECT_NEAR(b[k], naive_bound(ms, k, tau), 1e-14);
    }
}

TEST(FitTau, SaturatesAndFails) {
    EXPECT_EQ(fit_tau({synthetic_run({10}, {0.1})}, 1.25), 0.99);
    EXPECT_EQ(fit_tau({synthetic_run({10}, {1.0})}, 1.25), 0.0);
}

TEST(PointwiseChecks, PassOnShippedFixtures) {
    const AuditOptions opt;
    for (const CheckResult& c :
         {audit_outside_expansion(shipped(), opt), audit_phase_param(shipped(), opt),
          audit_bounded_distortion(shipped(), opt), audit_bound_period(shipped(), opt),
          audit_free_period(shipped(), opt)}) {
        EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
        EXPECT_EQ(c.calibration > 0, !c.constant.empty()) << c.name;
        EXPECT_GT(c.heldOut, 0) << c.name;
        EXPECT_EQ(c.violations, 0) << c.name;
    }
}

TEST(PointwiseChecks, StaleBoundPeriodIsAViolation) {
    ReturnFixtures f = shipped();
    f.returns[1].p += 5;
    const CheckResult c = audit_bound_period(f, AuditOptions{});
    EXPECT_FALSE(c.passed);
    EXPECT_GE(c.violations, 1);
}

TEST(RunAudit, SelectsChecksByName) {
    const auto res = run_audit(kFixtures, {"bound-period", "phase-param"});
    ASSERT_EQ(res.size(), 2u);
    EXPECT_EQ(res[0].name, "phase-param");
    EXPECT_EQ(res[1].name, "bound-period");
    EXPECT_NE(audit_table(res).find("bound-period"), std::string::npos);
    EXPECT_THROW(run_audit(kFixtures, {"no-such-check"}), DomainError);
    EXPECT_THROW(run_audit(kFixtures + "/absent", {"phase-param"}), FixtureError);
}
