#pragma once

#include <optional>
#include <string>
#include <vector>

#include "quadlab/dynamics.hpp"
#include "quadlab/partition.hpp"
#include "quadlab/rates.hpp"
#include "quadlab/returns.hpp"

namespace quadlab {

/// N: last mapped onto a slice I_{rl}. T: last mapped outside (-delta, delta).
enum class IntervalTag { N, T };

struct ParamInterval {
    double lo = 0.0;
    double hi = 0.0;
    int m = 0;  // last complete return
    IntervalTag tag = IntervalTag::T;
    std::vector<ReturnEvent> history;  // events since the last complete return

    int start = 0;       // time at which the interval's image is known
    int boundUntil = 0;  // returns up to this time are bound returns
    int depth = 0;       // |r| of the slice it was mapped onto, 0 for T
    int firstInessential = -1;
    int parent = -1;              // index in the previous generation
    std::vector<double> samples;  // parameters sampled when the interval was formed

    double length() const noexcept { return hi - lo; }
};

/// Intervals narrower than this (relative to a) are beyond double resolution
/// and are retired instead of advanced.
inline constexpr double kMinRelativeWidth = 1e-14;

struct SamplingSpec {
    int initialSamples = 3;   // evenly spaced, endpoints included
    int maxSamples = 2048;    // refinement cap per interval
    int paramSamples = 9;     // a-grid of the binding condition
    EtaGrid eta;              // eta-grid of the binding condition
    int maxNu = 200;          // bounded-period budget
    int bisectIterations = 52;
    int maxIntervals = 64;    // survivors kept per generation
    int maxPieces = 512;      // pieces advanced per generation
    int threads = 1;
};

struct RunConfig {
    PartitionConfig cfg{3.0, 0.2};
    RateSequence rate;
    double tau = 0.5;
    double gammaB = 0.2;
    double CB = 0.01;
    double gamma = 0.05;
    double C = 0.001;
    int m0 = 10;  // minimum start time; after startup, the (BA) activation time
    double kappa = 5.0;
    SamplingSpec sampling;
    int maxGenerations = 10;
    int maxSteps = 400;  // steps allowed after the last complete return

    double epsilon = 1e-4;  // initial half-width tried by startup
    double D1 = 2.0;        // main-distortion budget base
    unsigned long seed = 0;
};

/// Throws ConfigError naming the first invalid field.
void validate(const RunConfig& conf);

struct StartupResult {
    ParamInterval omega0;
    int m0 = 0;
    double epsilon = 0.0;
    bool degenerate = false;  // condition broke at the first nontrivial step
    bool monotone = true;     // xi_{m0} monotone on the sample grid
};

/// Shrinks the half-width until the distance condition survives up to
/// conf.m0, then reports the first time it breaks.
StartupResult startup(Parameter a0, const RunConfig& conf);

struct AdvanceResult {
    std::vector<ReturnEvent> events;
    std::vector<ParamInterval> pieces;  // split off, still to be advanced
    std::vector<Interval> excluded;     // removed by the derivative rule
    std::optional<int> completeAt;
    std::vector<double> completeSamples;  // grid at the complete return
    bool budgetWarning = false;           // n - m > kappa log m + 1
    std::vector<std::pair<int, int>> inessentialTimes;  // (depth r, o), o = 0 without inessential returns
    std::vector<std::pair<int, int>> freePeriods;       // (depth r, L)
    int restoreViolations = 0;
    double splitError = 0.0;  // |parent| - sum of parts, largest seen
};

/// Iterates from omega.start until the first complete return or a split.
/// Throws BudgetExhausted past conf.maxSteps.
AdvanceResult advance_to_complete(const ParamInterval& omega, const RunConfig& conf);

struct ExclusionResult {
    std::vector<Interval> E;
    std::vector<ParamInterval> survivors;
    double splitError = 0.0;
};

/// Removes the parameters whose image lies in (-delta_n/3, delta_n/3) and
/// partitions the rest by slice. Boundary brackets go to E. When `grid` is
/// empty the interval is sampled afresh.
ExclusionResult exclude_at_complete(const ParamInterval& omega, int n, const RunConfig& conf,
                                    const std::vector<double>& grid = {});

struct MSequence {
    std::vector<long> m;
    std::vector<double> ratios;  // (m_{k+1} - m_k) / (m_k - m_{k-1})
    double bound = 0.0;          // 1 + c / log m0
    bool ratioBoundHolds = true;
};

/// m_{k+1} = ceil(m_k + kappa ln m_k), k < K. Throws DomainError unless kappa > 0, m0 >= 2.
MSequence m_sequence(long m0, double kappa, int K);

/// Prod (1 - delta_m tau^{(log* m)^3}) as exp of a compensated log1p sum.
double decay_bound(const std::vector<long>& ms, const RateSequence& rate, double tau);

struct ClassCounts {
    long inessential = 0;
    long essential = 0;
    long escape = 0;
    long complete = 0;
    long bound = 0;

    void add(ReturnClass c) noexcept;
};

struct GenerationState {
    int k = 0;
    std::vector<ParamInterval> intervals;
    double excluded = 0.0;  // cumulative
    double measure = 0.0;
    double retired = 0.0;   // cumulative, budget or interval cap
    long maxM = 0;
    ClassCounts counts;
    double generationExcluded = 0.0;
    double generationSurvived = 0.0;
};

struct CompletionRecord {
    int m = 0;
    int n = 0;
    double fraction = 0.0;  // |E| / |omega|
    double deltaN = 0.0;
    bool budgetWarning = false;
};

struct DecayRow {
    int k = 0;
    long maxM = 0;
    double measuredRatio = 1.0;   // measure(Delta_k) / measure(Delta_0)
    double correctedRatio = 1.0;  // retirements factored out
    double bound = 1.0;
};

struct RunResult {
    RunConfig config;  // m0 replaced by the startup value
    StartupResult start;
    std::vector<GenerationState> generations;
    std::vector<DecayRow> decay;
    std::vector<CompletionRecord> completions;
    std::vector<std::pair<int, int>> inessentialTimes;
    std::vector<std::pair<int, int>> freePeriods;
    double maxSplitError = 0.0;
    long budgetRetirements = 0;
    long capRetirements = 0;
    long resolutionRetirements = 0;  // narrower than kMinRelativeWidth
    long restoreRemovals = 0;
    long restoreViolations = 0;
    long budgetWarnings = 0;
};

RunResult run(const RunConfig& conf, Parameter a0);

struct InvariantReport {
    bool nested = true;
    bool disjoint = true;
    double maxSplitError = 0.0;
    double conservationError = 0.0;  // |omega0| - measure - excluded - retired
    bool baHolds = true;
    long baChecked = 0;
    std::string baWitness;
    bool monotone = true;
    bool boundHolds = true;
};

/// Replays the invariants of a finished run: nestedness, disjointness,
/// length bookkeeping, (BA) on every kept sample, decay against the bound.
InvariantReport check_invariants(const RunResult& res);

/// Per-generation CSV, shortest round-trip numbers, versioned header.
std::string generations_csv(const RunResult& res);

/// Summary JSON mirroring the config plus startup and run statistics.
std::string summary_json(const RunResult& res);

}  // namespace quadlab
