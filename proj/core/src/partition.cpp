#include "quadlab/partition.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "quadlab/errors.hpp"
#include "quadlab/numeric.hpp"

namespace quadlab {

PartitionConfig::PartitionConfig(double Delta, double epsilon1, int rMax)
    : Delta_(Delta), epsilon1_(epsilon1), delta_(std::exp(-Delta)), rMax_(rMax) {
    if (!(Delta > 0.0) || !std::isfinite(Delta)) {
        throw ConfigError("Delta", "must be a positive finite number");
    }
    if (!(1.0 / (Delta * Delta) < epsilon1) || !std::isfinite(epsilon1)) {
        throw ConfigError("epsilon1", "must exceed 1/Delta^2 = " + format_double(1.0 / (Delta * Delta)));
    }
    if (rMax < rMin() || rMax > 740) {
        throw ConfigError("rMax", "must lie in [ceil(Delta), 740]");
    }
}

int PartitionConfig::rMin(double inflation) const {
    const int r = static_cast<int>(std::ceil(Delta_ - std::log(inflation)));
    return r < 1 ? 1 : r;
}

namespace {

struct Geometry {
    double lo;   // e^{-r-1}
    double hi;   // e^{-r}
    double len;  // slice length
    int count;   // r^2
};

Geometry geometry(int r) {
    const double lo = std::exp(-static_cast<double>(r) - 1.0);
    const double hi = std::exp(-static_cast<double>(r));
    const int count = r * r;
    return {lo, hi, (hi - lo) / count, count};
}

// Boundary b_l of the positive-side slices, b_0 = lo and b_count = hi.
double boundary(const Geometry& g, int l) {
    if (l <= 0) {
        return g.lo;
    }
    if (l >= g.count) {
        return g.hi;
    }
    return g.lo + l * g.len;
}

void check_r(int r, const PartitionConfig& cfg, double inflation) {
    const int ar = std::abs(r);
    if (r == 0 || ar < cfg.rMin(inflation) || ar > cfg.rMax()) {
        throw RNotInPartition("r = " + std::to_string(r) + " is not a partition depth (need " +
                              std::to_string(cfg.rMin(inflation)) + " <= |r| <= " +
                              std::to_string(cfg.rMax()) + ")");
    }
}

}  // namespace

Interval interval_of(int r, const PartitionConfig& cfg, double inflation) {
    check_r(r, cfg, inflation);
    const Geometry g = geometry(std::abs(r));
    if (r > 0) {
        return {g.lo, g.hi};
    }
    return {-g.hi, -g.lo};
}

Interval subinterval_of(PartitionIndex idx, const PartitionConfig& cfg, double inflation) {
    check_r(idx.r, cfg, inflation);
    const Geometry g = geometry(std::abs(idx.r));
    if (idx.l < 0 || idx.l >= g.count) {
        throw RNotInPartition("slice index l = " + std::to_string(idx.l) + " outside [0, " +
                              std::to_string(g.count - 1) + "]");
    }
    const double a = boundary(g, idx.l);
    const double b = boundary(g, idx.l + 1);
    if (idx.r > 0) {
        return {a, b};
    }
    return {-b, -a};
}

double slice_length(int r, const PartitionConfig& cfg) {
    if (r == 0 || std::abs(r) > cfg.rMax()) {
        throw RNotInPartition("r = " + std::to_string(r) + " is not a partition depth");
    }
    return geometry(std::abs(r)).len;
}

Location locate(double x, const PartitionConfig& cfg, double inflation) {
    if (x == 0.0) {
        return CriticalPoint{};
    }
    const double ax = std::abs(x);
    const int rMin = cfg.rMin(inflation);
    if (ax > std::exp(-static_cast<double>(rMin))) {
        return Outside{};
    }
    if (ax <= std::exp(-static_cast<double>(cfg.rMax()) - 1.0)) {
        return CriticalPoint{};
    }
    int r = static_cast<int>(std::floor(-std::log(ax)));
    if (r < rMin) {
        r = rMin;
    }
    while (r > rMin && ax > std::exp(-static_cast<double>(r))) {
        --r;
    }
    while (ax <= std::exp(-static_cast<double>(r) - 1.0)) {
        ++r;
    }
    const Geometry g = geometry(r);
    int l = static_cast<int>(std::floor((ax - g.lo) / g.len));
    if (l < 0) {
        l = 0;
    }
    if (l > g.count - 1) {
        l = g.count - 1;
    }
    while (l > 0 && ax <= boundary(g, l)) {
        --l;
    }
    while (l < g.count - 1 && ax > boundary(g, l + 1)) {
        ++l;
    }
    return PartitionIndex{x > 0.0 ? r : -r, l};
}

double large_scale(const PartitionConfig& cfg) noexcept { return cfg.epsilon1() * cfg.delta(); }

Location next_outward(PartitionIndex idx, const PartitionConfig& cfg, double inflation) {
    const int ar = std::abs(idx.r);
    const int side = idx.r > 0 ? 1 : -1;
    if (idx.l + 1 < ar * ar) {
        return PartitionIndex{idx.r, idx.l + 1};
    }
    if (ar - 1 < cfg.rMin(inflation)) {
        return Outside{};
    }
    return PartitionIndex{side * (ar - 1), 0};
}

PartitionIndex mirror(PartitionIndex idx) noexcept { return {-idx.r, idx.l}; }

}  // namespace quadlab
