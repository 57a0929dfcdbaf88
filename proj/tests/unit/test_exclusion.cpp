#include <algorithm>
#include <cmath>
#include <optional>

#include <gtest/gtest.h>

#include "generators.hpp"
#include "quadlab/errors.hpp"
#include "quadlab/exclusion.hpp"
#include "quadlab/rates.hpp"

using namespace quadlab;
using quadlab::testing::Draw;

namespace {

RunConfig small_config() {
    RunConfig c;
    c.cfg = PartitionConfig(3.0, 0.2);
    c.m0 = 6;
    c.epsilon = 0.01;
    c.maxGenerations = 3;
    return c;
}

// Advances the first pieces of omega0 until one reaches a complete return.
std::optional<std::pair<ParamInterval, AdvanceResult>> first_complete(const RunConfig& conf, double a0) {
    std::vector<ParamInterval> wave{startup(Parameter(a0), conf).omega0};
    for (int guard = 0; guard < 200 && !wave.empty(); ++guard) {
        const ParamInterval iv = wave.back();
        wave.pop_back();
        AdvanceResult adv = advance_to_complete(iv, conf);
        if (adv.completeAt) {
            return std::pair{iv, std::move(adv)};
        }
        wave.insert(wave.end(), adv.pieces.begin(), adv.pieces.end());
    }
    return std::nullopt;
}

}  // namespace

TEST(Validate, NamesTheField) {
    RunConfig c = small_config();
    c.tau = 1.0;
    try {
        validate(c);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("tau"), std::string::npos);
    }
    c = small_config();
    c.sampling.maxSamples = 1;
    EXPECT_THROW(validate(c), ConfigError);
    c = small_config();
    c.m0 = 1;
    EXPECT_THROW(validate(c), ConfigError);
    EXPECT_NO_THROW(validate(small_config()));
}

TEST(Startup, ExpandingImageAtTwo) {
    RunConfig c = small_config();
    c.m0 = 5;
    c.epsilon = 1e-9;
    const StartupResult s = startup(Parameter(2.0), c);
    EXPECT_GE(s.m0, c.m0);
    EXPECT_FALSE(s.degenerate);
    EXPECT_EQ(s.omega0.hi, 2.0);
    EXPECT_DOUBLE_EQ(s.omega0.lo, 2.0 - 1e-9);
    // near a = 2 every orbit sits near -1, so the condition is the spread against S
    const double S = large_scale(c.cfg);
    std::vector<double> as;
    for (int i = 0; i < 9; ++i) {
        as.push_back(s.omega0.lo + (s.omega0.hi - s.omega0.lo) * i / 8.0);
    }
    as.back() = s.omega0.hi;
    int expect = -1;
    std::vector<double> x(9, 0.0);
    for (int j = 1; j < 200 && expect < 0; ++j) {
        for (int i = 0; i < 9; ++i) {
            x[i] = 1.0 - as[i] * x[i] * x[i];
        }
        if (j >= 2 && *std::max_element(x.begin(), x.end()) - *std::min_element(x.begin(), x.end()) > S) {
            expect = j;
        }
    }
    EXPECT_EQ(s.m0, expect);
}

TEST(Startup, DegenerateWhenTheFirstStepBreaks) {
    RunConfig c = small_config();
    c.m0 = 2;
    c.epsilon = 0.5;
    const StartupResult s = startup(Parameter(1.9), c);
    EXPECT_EQ(s.m0, 2);
    EXPECT_TRUE(s.degenerate);
}

TEST(Startup, RejectsParametersFailingTheExpansionScreen) {
    EXPECT_THROW(startup(Parameter(1.0), small_config()), DomainError);
    EXPECT_THROW(startup(Parameter(1.75), small_config()), DomainError);
}

TEST(AdvanceAndExclude, CompleteReturnRemovesTheCorePreimage) {
    const RunConfig conf = small_config();
    const auto found = first_complete(conf, 1.6);
    ASSERT_TRUE(found.has_value());
    const auto& [omega, adv] = *found;
    const int n = *adv.completeAt;
    EXPECT_GT(n, omega.start);
    EXPECT_TRUE(adv.pieces.empty());
    ASSERT_FALSE(adv.events.empty());
    EXPECT_EQ(adv.events.back().cls, ReturnClass::Complete);

    const ExclusionResult ex = exclude_at_complete(omega, n, conf, adv.completeSamples);
    double total = 0.0;
    double removed = 0.0;
    std::vector<Interval> parts;
    for (const auto& e : ex.E) {
        removed += e.length();
        parts.push_back(e);
    }
    for (const auto& s : ex.survivors) {
        parts.push_back({s.lo, s.hi});
        EXPECT_EQ(s.m, n);
        for (double a : s.samples) {
            const double xn = critical_orbit(Parameter(a), n)[static_cast<std::size_t>(n)];
            EXPECT_GE(std::abs(xn), conf.rate(n) / 3.0) << "a=" << a;
        }
    }
    std::sort(parts.begin(), parts.end(), [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
    for (std::size_t i = 0; i < parts.size(); ++i) {
        total += parts[i].length();
        if (i + 1 < parts.size()) {
            EXPECT_LE(parts[i].hi, parts[i + 1].lo);
        }
    }
    EXPECT_NEAR(total, omega.length(), 1e-12 * omega.hi);
    EXPECT_LE(ex.splitError, 1e-12 * omega.hi);

    // brute-force scan of the removed fraction
    constexpr int kScan = 20000;
    int inside = 0;
    for (int i = 0; i <= kScan; ++i) {
        const double a = omega.lo + omega.length() * i / kScan;
        if (std::abs(critical_orbit(Parameter(a), n)[static_cast<std::size_t>(n)]) < conf.rate(n) / 3.0) {
            ++inside;
        }
    }
    EXPECT_NEAR(removed / omega.length(), static_cast<double>(inside) / (kScan + 1), 1e-3);
}

TEST(MSequence, Fixtures) {
    const MSequence s = m_sequence(100, 1.0, 2);
    EXPECT_EQ(s.m, (std::vector<long>{100, 105, 110}));
    ASSERT_EQ(s.ratios.size(), 1u);
    EXPECT_DOUBLE_EQ(s.ratios[0], 1.0);
    EXPECT_THROW(m_sequence(100, 0.0, 2), DomainError);
    EXPECT_THROW(m_sequence(1, 1.0, 2), DomainError);
    EXPECT_EQ(m_sequence(7, 2.0, 0).m, (std::vector<long>{7}));
}

TEST(MSequence, RatiosStayBelowTheBound) {
    Draw d(51);
    for (int i = 0; i < 200; ++i) {
        const long m0 = d.integer(2L, 100000L);
        const double kappa = d.uniform(0.2, 20.0);
        const MSequence s = m_sequence(m0, kappa, 40);
        ASSERT_TRUE(s.ratioBoundHolds) << m0 << " " << kappa;
        for (std::size_t k = 1; k < s.m.size(); ++k) {
            ASSERT_GT(s.m[k], s.m[k - 1]);
        }
    }
}

TEST(DecayBound, Fixtures) {
    const RateSequence rate;  // 1/n
    EXPECT_EQ(decay_bound({}, rate, 0.5), 1.0);
    EXPECT_NEAR(decay_bound({16}, rate, 0.5), 1.0 - std::pow(0.5, 27) / 16.0, 1e-16);
    EXPECT_THROW(decay_bound({16}, rate, 1.0), DomainError);
    EXPECT_THROW(decay_bound({16}, rate, 0.0), DomainError);
}

TEST(DecayBound, MatchesNaiveProductAndIsMonotone) {
    Draw d(52);
    const RateSequence rate;
    for (int i = 0; i < 200; ++i) {
        std::vector<long> ms{d.integer(2L, 50L)};
        for (int k = 0; k < 30; ++k) {
            ms.push_back(ms.back() + d.integer(1L, 40L));
        }
        const double tau = d.uniform(0.05, 0.95);
        double naive = 1.0;
        double prev = 1.0;
        for (std::size_t k = 0; k < ms.size(); ++k) {
            const int ls = log_star(static_cast<double>(ms[k]));
            naive *= 1.0 - rate(ms[k]) * std::pow(tau, ls * ls * ls);
            const std::vector<long> head(ms.begin(), ms.begin() + static_cast<long>(k) + 1);
            const double b = decay_bound(head, rate, tau);
            ASSERT_NEAR(b, naive, 1e-12);
            ASSERT_LE(b, prev);
            prev = b;
        }
        ASSERT_LE(decay_bound(ms, rate, std::min(0.99, tau + 0.01)), decay_bound(ms, rate, tau));
    }
}

TEST(Run, ZeroGenerationsKeepsOmegaZero) {
    RunConfig c = small_config();
    c.maxGenerations = 0;
    const RunResult r = run(c, Parameter(1.6));
    ASSERT_EQ(r.generations.size(), 1u);
    ASSERT_EQ(r.decay.size(), 1u);
    EXPECT_EQ(r.decay[0].measuredRatio, 1.0);
    EXPECT_EQ(r.decay[0].bound, 1.0);
    EXPECT_EQ(r.generations[0].measure, r.start.omega0.length());
}

TEST(Run, InvariantsHoldOnAShortRun) {
    const RunResult r = run(small_config(), Parameter(1.6));
    ASSERT_EQ(r.generations.size(), 4u);
    const InvariantReport inv = check_invariants(r);
    EXPECT_TRUE(inv.nested);
    EXPECT_TRUE(inv.disjoint);
    EXPECT_TRUE(inv.monotone);
    EXPECT_TRUE(inv.baHolds) << inv.baWitness;
    EXPECT_GT(inv.baChecked, 0);
    const double L0 = r.start.omega0.length();
    EXPECT_LE(inv.conservationError, 1e-9 * L0);
    EXPECT_LE(inv.maxSplitError, 1e-12 * 2.0);
    for (std::size_t k = 1; k < r.decay.size(); ++k) {
        EXPECT_LE(r.decay[k].measuredRatio, r.decay[k - 1].measuredRatio);
        EXPECT_LE(r.decay[k].correctedRatio, r.decay[k - 1].correctedRatio);
        EXPECT_LE(r.decay[k].bound, r.decay[k - 1].bound);
    }
}

TEST(Run, Deterministic) {
    const RunConfig c = small_config();
    EXPECT_EQ(generations_csv(run(c, Parameter(1.6))), generations_csv(run(c, Parameter(1.6))));
    RunConfig t = c;
    t.sampling.threads = 4;
    EXPECT_EQ(generations_csv(run(c, Parameter(1.6))), generations_csv(run(t, Parameter(1.6))));
}
