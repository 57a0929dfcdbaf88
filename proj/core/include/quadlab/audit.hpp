#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "quadlab/config.hpp"
#include "quadlab/exclusion.hpp"
#include "quadlab/returns.hpp"

namespace quadlab {

/// A return position at a screened parameter.
struct FixtureReturn {
    double a = 0.0;
    int r = 0;           // depth of eta, eta in I_r
    double eta = 0.0;
    int p = 0;           // bounded period recorded when the fixture was written
    double checksum = 0.0;  // xi_60(a); catches edited or truncated entries
};

struct ReturnFixtures {
    double Delta = 3.0;
    double epsilon1 = 0.2;
    int maxNu = 200;
    int horizon = 120;  // orbit length used by the outside-expansion check
    EtaGrid eta;
    std::vector<FixtureReturn> returns;

    PartitionConfig partition() const { return PartitionConfig(Delta, epsilon1); }
};

inline constexpr int kChecksumSteps = 60;

/// Throws FixtureError on a missing file, bad JSON, a missing field or a
/// checksum mismatch.
ReturnFixtures load_return_fixtures(const std::string& path);
ReturnFixtures return_fixtures_from_json(const std::string& text);
std::string return_fixtures_to_json(const ReturnFixtures& f);

/// Calibration experiments fit constants; held-out experiments test them.
struct RunFixtures {
    std::vector<Experiment> calibration;
    std::vector<Experiment> heldOut;
};

RunFixtures load_run_fixtures(const std::string& path);
RunFixtures run_fixtures_from_json(const std::string& text);
std::string run_fixtures_to_json(const RunFixtures& f);

struct AuditOptions {
    double headroom = 1.25;
    double gammaM = 0.1;  // expansion rate outside (-delta, delta); C_M is fitted
    int phaseLo = 10;
    int phaseHi = 60;
    double violationBudget = 0.05;  // allowed held-out fraction for return-time
    int freeSteps = 2000;           // free-period search budget
};

struct CheckResult {
    std::string name;
    std::string constant;  // what was fitted, empty when nothing is
    double fitted = 0.0;
    long calibration = 0;  // data points used for the fit
    long heldOut = 0;      // data points tested
    long violations = 0;
    bool passed = false;
    std::string detail;
};

/// Names accepted by run_audit, in report order.
const std::vector<std::string>& audit_checks();

/// An upper constant fitted on calibration values and tested on held-out ones.
struct UpperFit {
    double constant = 0.0;
    long violations = 0;
};

/// constant = headroom * max(calibration); violations counts held-out values above it.
UpperFit fit_upper(const std::vector<double>& calibration, const std::vector<double>& heldOut,
                   double headroom);

/// Even-indexed entries calibrate, odd-indexed entries are held out.
template <typename T>
void split_even_odd(const std::vector<T>& all, std::vector<T>& even, std::vector<T>& odd) {
    for (std::size_t i = 0; i < all.size(); ++i) {
        (i % 2 == 0 ? even : odd).push_back(all[i]);
    }
}

CheckResult audit_outside_expansion(const ReturnFixtures& f, const AuditOptions& opt);
CheckResult audit_phase_param(const ReturnFixtures& f, const AuditOptions& opt);
CheckResult audit_bounded_distortion(const ReturnFixtures& f, const AuditOptions& opt);
CheckResult audit_bound_period(const ReturnFixtures& f, const AuditOptions& opt);
/// L of the orbit of eta after its bounded period, against kappa3 |r|.
CheckResult audit_free_period(const ReturnFixtures& f, const AuditOptions& opt);

struct SimulationSet {
    std::vector<RunResult> calibration;
    std::vector<RunResult> heldOut;
};

/// Runs every experiment of the fixture set.
SimulationSet simulate(const RunFixtures& f);

CheckResult audit_inessential_time(const SimulationSet& s, const AuditOptions& opt);
CheckResult audit_main_distortion(const SimulationSet& s, const AuditOptions& opt);
CheckResult audit_return_time(const SimulationSet& s, const AuditOptions& opt);
CheckResult audit_decay(const SimulationSet& s, const AuditOptions& opt);

/// Largest tau in (0, 0.99] with -log bound_k(tau) <= -log(corrected_k) / headroom
/// for every generation of every run. Returns 0 when no tau qualifies.
double fit_tau(const std::vector<RunResult>& runs, double headroom);

/// Recomputes the decay bound of a run for a different tau.
std::vector<double> decay_bounds_for(const RunResult& res, double tau);

/// Runs the named checks (all when `checks` is empty) against returns.json and
/// runs.json in `fixtureDir`. Throws FixtureError and DomainError for unknown names.
std::vector<CheckResult> run_audit(const std::string& fixtureDir, const std::vector<std::string>& checks,
                                   const AuditOptions& opt = {});

/// Fixed-width table, one row per check.
std::string audit_table(const std::vector<CheckResult>& results);

}  // namespace quadlab
