#pragma once

#include <variant>

namespace quadlab {

inline constexpr int kDefaultRMax = 700;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const noexcept { return hi - lo; }
    bool operator==(const Interval&) const = default;
};

/// delta = exp(-Delta); large scale S = epsilon1 * delta.
class PartitionConfig {
public:
    /// Throws ConfigError unless Delta > 0 and 1/Delta^2 < epsilon1.
    PartitionConfig(double Delta, double epsilon1, int rMax = kDefaultRMax);

    double Delta() const noexcept { return Delta_; }
    double epsilon1() const noexcept { return epsilon1_; }
    double delta() const noexcept { return delta_; }
    int rMax() const noexcept { return rMax_; }
    /// Smallest admissible |r|, ceil(Delta - log(inflation)).
    int rMin(double inflation = 1.0) const;

private:
    double Delta_;
    double epsilon1_;
    double delta_;
    int rMax_;
};

/// Slice l of I_r. r carries the side; l = 0 is the slice nearest 0.
struct PartitionIndex {
    int r = 0;
    int l = 0;

    bool operator==(const PartitionIndex&) const = default;
};

struct Outside {
    bool operator==(const Outside&) const = default;
};
struct CriticalPoint {
    bool operator==(const CriticalPoint&) const = default;
};

using Location = std::variant<PartitionIndex, Outside, CriticalPoint>;

/// I_r = (e^{-r-1}, e^{-r}] for r > 0 and its mirror [-e^{r}, -e^{r-1}) for r < 0.
/// The returned pair is (lo, hi) regardless of which end is closed.
/// Throws RNotInPartition when |r| < rMin(inflation) or |r| > rMax.
Interval interval_of(int r, const PartitionConfig& cfg, double inflation = 1.0);

/// Slice I_{rl}; every slice is open on the side facing 0.
Interval subinterval_of(PartitionIndex idx, const PartitionConfig& cfg, double inflation = 1.0);

/// Length |I_r| / r^2 of any slice of I_r.
double slice_length(int r, const PartitionConfig& cfg);

/// Where x sits in the partition. Points closer to 0 than e^{-rMax-1}
/// are reported as CriticalPoint.
Location locate(double x, const PartitionConfig& cfg, double inflation = 1.0);

/// S = epsilon1 * delta.
double large_scale(const PartitionConfig& cfg) noexcept;

/// The partition element one step further from 0, on the same side.
/// Returns Outside past the outermost admissible slice.
Location next_outward(PartitionIndex idx, const PartitionConfig& cfg, double inflation = 1.0);

PartitionIndex mirror(PartitionIndex idx) noexcept;

}  // namespace quadlab
