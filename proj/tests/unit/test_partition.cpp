#include <cmath>
#include <variant>

#include <gtest/gtest.h>

#include "generators.hpp"
#include "quadlab/errors.hpp"
#include "quadlab/partition.hpp"

using namespace quadlab;
using quadlab::testing::Draw;

namespace {

const PartitionConfig kCfg(3.0, 0.2);

PartitionIndex index_of(double x, const PartitionConfig& cfg = kCfg) {
    const Location loc = locate(x, cfg);
    const auto* idx = std::get_if<PartitionIndex>(&loc);
    EXPECT_NE(idx, nullptr) << "x=" << x;
    return idx ? *idx : PartitionIndex{};
}

bool contains_half_open(const Interval& I, double x) {
    // open toward 0, closed away from it
    return x > 0.0 ? (x > I.lo && x <= I.hi) : (x >= I.lo && x < I.hi);
}

}  // namespace

TEST(PartitionConfig, RejectsBadConstants) {
    EXPECT_THROW(PartitionConfig(0.0, 0.5), ConfigError);
    EXPECT_THROW(PartitionConfig(-1.0, 0.5), ConfigError);
    EXPECT_THROW(PartitionConfig(3.0, 1.0 / 9.0), ConfigError);  // epsilon1 = 1/Delta^2 exactly
    EXPECT_THROW(PartitionConfig(3.0, 0.1), ConfigError);
    EXPECT_NO_THROW(PartitionConfig(3.0, 0.12));
    try {
        PartitionConfig(3.0, 0.1);
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "epsilon1");
    }
}

TEST(IntervalOf, Fixtures) {
    const Interval p = interval_of(4, kCfg);
    EXPECT_EQ(p.lo, std::exp(-5.0));
    EXPECT_EQ(p.hi, std::exp(-4.0));
    const Interval m = interval_of(-4, kCfg);
    EXPECT_EQ(m.lo, -std::exp(-4.0));
    EXPECT_EQ(m.hi, -std::exp(-5.0));
    EXPECT_THROW(interval_of(2, kCfg), RNotInPartition);
    EXPECT_THROW(interval_of(0, kCfg), RNotInPartition);
    EXPECT_THROW(interval_of(701, kCfg), RNotInPartition);
}

TEST(SubintervalOf, Fixtures) {
    const double len = (std::exp(-4.0) - std::exp(-5.0)) / 16.0;
    const Interval first = subinterval_of({4, 0}, kCfg);
    EXPECT_EQ(first.lo, std::exp(-5.0));
    EXPECT_NEAR(first.length(), len, 1e-18);
    const Interval last = subinterval_of({4, 15}, kCfg);
    EXPECT_EQ(last.hi, std::exp(-4.0));
    EXPECT_THROW(subinterval_of({4, 16}, kCfg), RNotInPartition);
    EXPECT_THROW(subinterval_of({4, -1}, kCfg), RNotInPartition);

    double sum = 0.0;
    for (int l = 0; l < 16; ++l) {
        sum += subinterval_of({4, l}, kCfg).length();
    }
    EXPECT_NEAR(sum, interval_of(4, kCfg).length(), 1e-17);
}

TEST(SubintervalOf, DisjointCoverForEveryDepthUpTo50) {
    for (int r = 3; r <= 50; ++r) {
        const Interval I = interval_of(r, kCfg);
        double prevHi = I.lo;
        for (int l = 0; l < r * r; ++l) {
            const Interval s = subinterval_of({r, l}, kCfg);
            ASSERT_EQ(s.lo, prevHi) << "gap or overlap at r=" << r << " l=" << l;
            ASSERT_LT(s.lo, s.hi);
            prevHi = s.hi;
        }
        ASSERT_EQ(prevHi, I.hi) << "r=" << r;
        if (r > 3) {
            ASSERT_EQ(interval_of(r, kCfg).hi, interval_of(r - 1, kCfg).lo) << "depth chain broken at r=" << r;
        }
    }
}

TEST(SliceLength, MatchesDefinition) {
    for (int r : {3, 4, 10, 50, 700}) {
        const Interval I = interval_of(r, kCfg);
        EXPECT_NEAR(slice_length(r, kCfg), I.length() / (r * r), 1e-15 * I.length()) << r;
        EXPECT_EQ(slice_length(-r, kCfg), slice_length(r, kCfg));
    }
}

TEST(Locate, Fixtures) {
    // brute scan of the slice bounds for x = 0.01
    int expectL = -1;
    for (int l = 0; l < 16; ++l) {
        if (contains_half_open(subinterval_of({4, l}, kCfg), 0.01)) {
            expectL = l;
        }
    }
    const PartitionIndex p = index_of(0.01);
    EXPECT_EQ(p.r, 4);
    EXPECT_EQ(p.l, expectL);

    EXPECT_EQ(index_of(std::exp(-5.0)).r, 5);
    EXPECT_EQ(index_of(std::exp(-5.0)).l, 24);
    const PartitionIndex n = index_of(-0.01);
    EXPECT_EQ(n.r, -4);
    EXPECT_EQ(n.l, expectL);

    EXPECT_TRUE(std::holds_alternative<CriticalPoint>(locate(0.0, kCfg)));
    EXPECT_TRUE(std::holds_alternative<Outside>(locate(0.5, kCfg)));
    EXPECT_TRUE(std::holds_alternative<Outside>(locate(-0.06, kCfg)));
    EXPECT_EQ(index_of(kCfg.delta()).r, 3);  // delta itself closes I_3
    EXPECT_TRUE(std::holds_alternative<CriticalPoint>(locate(1e-310, kCfg)));
}

TEST(Locate, MidpointRoundTripUpTo50) {
    for (int r = 3; r <= 50; ++r) {
        for (int sign : {1, -1}) {
            for (int l = 0; l < r * r; ++l) {
                const Interval s = subinterval_of({sign * r, l}, kCfg);
                const PartitionIndex back = index_of(0.5 * (s.lo + s.hi));
                ASSERT_EQ(back.r, sign * r);
                ASSERT_EQ(back.l, l);
            }
        }
    }
}

TEST(Locate, RandomPointsLandInTheirSlice) {
    Draw d(21);
    const double delta = kCfg.delta();
    for (int i = 0; i < 100000; ++i) {
        // log-uniform magnitude so deep slices are hit too
        const double x = std::exp(-d.uniform(3.0, 51.0)) * (d.coin() ? 1.0 : -1.0);
        ASSERT_LE(std::abs(x), delta);
        const PartitionIndex idx = index_of(x);
        ASSERT_TRUE(contains_half_open(subinterval_of(idx, kCfg), x)) << "x=" << x;
        const Location mirrored = locate(-x, kCfg);
        ASSERT_EQ(std::get<PartitionIndex>(mirrored), mirror(idx)) << "x=" << x;
    }
}

TEST(Locate, BoundaryPointsBelongToTheSliceAwayFromZero) {
    for (int r = 3; r <= 20; ++r) {
        for (int l = 0; l < r * r; ++l) {
            const Interval s = subinterval_of({r, l}, kCfg);
            const PartitionIndex atHi = index_of(s.hi);
            ASSERT_EQ(atHi.r, r);
            ASSERT_EQ(atHi.l, l);
        }
    }
}

TEST(Locate, InflationExtendsToShallowerDepths) {
    // inflation 4 allows |r| >= ceil(3 - ln 4) = 2
    EXPECT_EQ(kCfg.rMin(4.0), 2);
    const Location loc = locate(0.1, kCfg, 4.0);
    ASSERT_TRUE(std::holds_alternative<PartitionIndex>(loc));
    EXPECT_EQ(std::get<PartitionIndex>(loc).r, 2);
    EXPECT_TRUE(std::holds_alternative<Outside>(locate(0.1, kCfg)));
}

TEST(LargeScale, Fixtures) {
    EXPECT_DOUBLE_EQ(large_scale(kCfg), 0.2 * std::exp(-3.0));
}

TEST(LargeScale, ExceedsEverySliceWhenConfigIsValid) {
    Draw d(22);
    for (int i = 0; i < 200; ++i) {
        const double Delta = d.uniform(1.5, 8.0);
        const double eps1 = 1.0 / (Delta * Delta) * d.uniform(1.0001, 5.0);
        const PartitionConfig cfg(Delta, eps1);
        const double S = large_scale(cfg);
        for (int r = cfg.rMin(); r <= cfg.rMax(); ++r) {
            ASSERT_GT(S, slice_length(r, cfg)) << "Delta=" << Delta << " eps1=" << eps1 << " r=" << r;
        }
    }
}

TEST(NextOutward, WalksTowardDelta) {
    EXPECT_EQ(std::get<PartitionIndex>(next_outward({4, 3}, kCfg)), (PartitionIndex{4, 4}));
    EXPECT_EQ(std::get<PartitionIndex>(next_outward({4, 15}, kCfg)), (PartitionIndex{3, 0}));
    EXPECT_EQ(std::get<PartitionIndex>(next_outward({-4, 15}, kCfg)), (PartitionIndex{-3, 0}));
    EXPECT_TRUE(std::holds_alternative<Outside>(next_outward({3, 8}, kCfg)));
}
