#pragma once

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "quadlab/dynamics.hpp"
#include "quadlab/partition.hpp"

namespace quadlab {

enum class ReturnClass { Inessential, Essential, Escape, Complete, Bound };

std::string_view to_string(ReturnClass c) noexcept;

struct ReturnEvent {
    int n = 0;
    ReturnClass cls = ReturnClass::Inessential;
    Interval image;
    std::optional<std::pair<PartitionIndex, PartitionIndex>> host;  // inessential
    std::optional<int> essentialInterval;                           // essential: r of I_r
    std::optional<Interval> escapeInterval;                         // escape
};

/// Complete > Escape > Essential > Inessential.
/// Throws NotAReturn if the image misses (-delta, delta).
ReturnClass classify(Interval image, int n, double deltaN, const PartitionConfig& cfg);

/// classify() plus the host / essential / escape interval of the class.
ReturnEvent make_return_event(Interval image, int n, double deltaN, const PartitionConfig& cfg);

/// The eta grid of the binding condition: eta_i = etaMax * 2^{-(i+1)/perOctave}.
/// Doubling both counts yields a superset of the coarser grid.
struct EtaGrid {
    int samples = 33;
    int perOctave = 4;

    std::vector<double> points(double etaMax) const;
};

struct BoundedPeriodResult {
    int p = 0;
    int r = 0;
    int witnessNu = 0;       // first failing nu, 0 when truncated
    bool truncated = false;  // (BC) still held at maxNu; p is a lower bound
};

/// Largest p <= maxNu such that |xi_nu(a) - F^nu(eta; a)| <= |xi_nu(a)| / (10 nu^2)
/// for nu = 1..p, every a in aSamples and every grid eta in (0, e^{-|r-1|}).
/// A sampled stand-in for the supremum over a continuum.
BoundedPeriodResult bounded_period(const std::vector<double>& aSamples, int n, int r,
                                   const PartitionConfig& cfg, int maxNu,
                                   const EtaGrid& grid = {});

/// Smallest L in [1, maxSteps] with |F^L(x; a)| < delta.
/// Throws PreconditionViolated if |x| < delta, NoReturnWithinBudget otherwise.
int free_period(Parameter a, double x, const PartitionConfig& cfg, int maxSteps);

struct OutsideExpansion {
    double lhsLog = 0.0;       // log|d/dx F^n(x; a)|
    double rhsLog = 0.0;       // log(delta C_M) + gamma_M n
    bool holds = false;
    bool sharpApplies = false;  // F^n(x) in (-2 delta, 2 delta)
    double sharpRhsLog = 0.0;   // log C_M + gamma_M n
    bool sharpHolds = false;
};

/// Checks |d/dx F^n(x;a)| >= delta C_M e^{gamma_M n} for an orbit segment that
/// stays outside (-delta, delta). Throws PreconditionViolated otherwise.
OutsideExpansion outside_expansion_check(Parameter a, double x, int n, const PartitionConfig& cfg,
                                         double CM, double gammaM);

}  // namespace quadlab
