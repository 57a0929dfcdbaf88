#include "quadlab/audit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "internal/json_io.hpp"
#include "quadlab/distortion.hpp"
#include "quadlab/errors.hpp"
#include "quadlab/numeric.hpp"

namespace quadlab {

using internal::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw FixtureError("missing fixture file " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json parse_fixture(const std::string& text, const std::string& schema) {
    json root = json::parse(text, nullptr, false);
    if (root.is_discarded() || !root.is_object()) {
        throw FixtureError("malformed fixture JSON");
    }
    if (!root.contains("schema") || root["schema"] != schema) {
        throw FixtureError("fixture schema is not " + schema);
    }
    return root;
}

template <typename F>
auto fixture_field(F&& read) {
    try {
        return read();
    } catch (const ConfigError& e) {
        throw FixtureError(std::string("fixture field ") + e.what());
    }
}

double checksum_of(double a) { return critical_orbit(Parameter(a), kChecksumSteps).back(); }

std::string num(double v) { return format_double(v); }

double max_of(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) {
        m = std::max(m, x);
    }
    return m;
}

CheckResult upper_check(std::string name, std::string constant, const std::vector<double>& cal,
                        const std::vector<double>& held, double headroom) {
    CheckResult c;
    c.name = std::move(name);
    c.constant = std::move(constant);
    const UpperFit f = fit_upper(cal, held, headroom);
    c.fitted = f.constant;
    c.calibration = static_cast<long>(cal.size());
    c.heldOut = static_cast<long>(held.size());
    c.violations = f.violations;
    c.passed = !cal.empty() && !held.empty() && f.violations == 0;
    c.detail = "calibration max " + num(max_of(cal)) + ", held-out max " + num(max_of(held));
    return c;
}

}  // namespace

const std::vector<std::string>& audit_checks() {
    static const std::vector<std::string> names = {
        "outside-expansion", "phase-param",     "bounded-distortion", "bound-period", "free-period",
        "inessential-time",  "main-distortion", "return-time",        "decay"};
    return names;
}

UpperFit fit_upper(const std::vector<double>& calibration, const std::vector<double>& heldOut, double headroom) {
    detail::check<DomainError>(headroom >= 1.0, "fit_upper: headroom must be >= 1");
    UpperFit f;
    f.constant = headroom * max_of(calibration);
    for (double v : heldOut) {
        if (!(v <= f.constant)) {
            ++f.violations;
        }
    }
    return f;
}

// ---- fixtures -------------------------------------------------------------

ReturnFixtures return_fixtures_from_json(const std::string& text) {
    const json root = parse_fixture(text, "quadlab.returns/1");
    ReturnFixtures f;
    fixture_field([&] {
        const json& p = internal::require(root, "partition", "");
        f.Delta = internal::get_number(internal::require(p, "Delta", "partition"), "partition.Delta");
        f.epsilon1 = internal::get_number(internal::require(p, "epsilon1", "partition"), "partition.epsilon1");
        f.maxNu = static_cast<int>(internal::get_integer(internal::require(root, "maxNu", ""), "maxNu"));
        f.horizon = static_cast<int>(internal::get_integer(internal::require(root, "horizon", ""), "horizon"));
        const json& e = internal::require(root, "eta", "");
        f.eta.samples = static_cast<int>(internal::get_integer(internal::require(e, "samples", "eta"), "eta.samples"));
        f.eta.perOctave =
            static_cast<int>(internal::get_integer(internal::require(e, "perOctave", "eta"), "eta.perOctave"));
        const json& list = internal::require(root, "returns", "");
        if (!list.is_array() || list.empty()) {
            throw ConfigError("returns", "expected a non-empty array");
        }
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string path = "returns[" + std::to_string(i) + "]";
            const json& item = list[i];
            FixtureReturn r;
            r.a = internal::get_number(internal::require(item, "a", path), path + ".a");
            r.r = static_cast<int>(internal::get_integer(internal::require(item, "r", path), path + ".r"));
            r.eta = internal::get_number(internal::require(item, "eta", path), path + ".eta");
            r.p = static_cast<int>(internal::get_integer(internal::require(item, "p", path), path + ".p"));
            r.checksum = internal::get_number(internal::require(item, "checksum", path), path + ".checksum");
            f.returns.push_back(r);
        }
        return 0;
    });
    PartitionConfig cfg = [&] {
        try {
            return f.partition();
        } catch (const ConfigError& e) {
            throw FixtureError(std::string("fixture partition: ") + e.what());
        }
    }();
    if (f.maxNu < 1 || f.horizon < 2 || f.eta.samples < 1 || f.eta.perOctave < 1) {
        throw FixtureError("fixture budgets must be positive");
    }
    for (std::size_t i = 0; i < f.returns.size(); ++i) {
        const FixtureReturn& r = f.returns[i];
        const std::string at = "returns[" + std::to_string(i) + "]";
        if (!(r.a >= kParamMin && r.a <= kParamMax)) {
            throw FixtureError(at + ": parameter outside [1, 2]");
        }
        Interval I;
        try {
            I = interval_of(r.r, cfg);
        } catch (const Error& e) {
            throw FixtureError(at + ": " + e.what());
        }
        if (!(r.eta >= I.lo && r.eta <= I.hi)) {
            throw FixtureError(at + ": eta is not in I_r");
        }
        if (r.p < 0) {
            throw FixtureError(at + ": negative period");
        }
        const double expect = checksum_of(r.a);
        if (!(std::abs(expect - r.checksum) <= 1e-9)) {
            throw FixtureError(at + ": checksum mismatch (corrupted fixture)");
        }
    }
    return f;
}

ReturnFixtures load_return_fixtures(const std::string& path) { return return_fixtures_from_json(read_file(path)); }

std::string return_fixtures_to_json(const ReturnFixtures& f) {
    const auto n = [](double v) { return json::parse(format_double(v)); };
    json list = json::array();
    for (const FixtureReturn& r : f.returns) {
        list.push_back({{"a", n(r.a)}, {"r", r.r}, {"eta", n(r.eta)}, {"p", r.p}, {"checksum", n(r.checksum)}});
    }
    json root = {{"schema", "quadlab.returns/1"},
                 {"partition", {{"Delta", n(f.Delta)}, {"epsilon1", n(f.epsilon1)}}},
                 {"maxNu", f.maxNu},
                 {"horizon", f.horizon},
                 {"eta", {{"samples", f.eta.samples}, {"perOctave", f.eta.perOctave}}},
                 {"returns", list}};
    return root.dump(2) + "\n";
}

RunFixtures run_fixtures_from_json(const std::string& text) {
    const json root = parse_fixture(text, "quadlab.runs/1");
    RunFixtures f;
    const auto read_list = [&](const char* key, std::vector<Experiment>& out) {
        if (!root.contains(key) || !root[key].is_array() || root[key].empty()) {
            throw FixtureError(std::string("fixture field ") + key + ": expected a non-empty array");
        }
        for (std::size_t i = 0; i < root[key].size(); ++i) {
            try {
                out.push_back(experiment_from_json(root[key][i].dump()));
            } catch (const ConfigError& e) {
                throw FixtureError(std::string(key) + "[" + std::to_string(i) + "]: " + e.what());
            }
        }
    };
    read_list("calibration", f.calibration);
    read_list("heldOut", f.heldOut);
    return f;
}

RunFixtures load_run_fixtures(const std::string& path) { return run_fixtures_from_json(read_file(path)); }

std::string run_fixtures_to_json(const RunFixtures& f) {
    json root = {{"schema", "quadlab.runs/1"}, {"calibration", json::array()}, {"heldOut", json::array()}};
    for (const Experiment& e : f.calibration) {
        root["calibration"].push_back(json::parse(experiment_to_json(e)));
    }
    for (const Experiment& e : f.heldOut) {
        root["heldOut"].push_back(json::parse(experiment_to_json(e)));
    }
    return root.dump(2) + "\n";
}

// ---- pointwise checks -----------------------------------------------------

CheckResult audit_outside_expansion(const ReturnFixtures& f, const AuditOptions& opt) {
    const PartitionConfig cfg = f.partition();
    const double delta = cfg.delta();
    // log C_M needed per segment; `sharp` holds segments ending within 2 delta
    struct Needed {
        std::vector<double> all;
        std::vector<double> sharp;
    };
    Needed cal;
    Needed held;
    for (std::size_t i = 0; i < f.returns.size(); ++i) {
        Needed& into = i % 2 == 0 ? cal : held;
        const Parameter a(f.returns[i].a);
        const auto xi = critical_orbit(a, f.horizon);
        for (int s = 1; s < f.horizon; ++s) {
            for (int len = 1; s + len - 1 < f.horizon && std::abs(xi[s + len - 1]) >= delta; ++len) {
                const OutsideExpansion e = outside_expansion_check(a, xi[s], len, cfg, 1.0, opt.gammaM);
                into.all.push_back(e.lhsLog - std::log(delta) - opt.gammaM * len);
                if (e.sharpApplies) {
                    into.sharp.push_back(e.lhsLog - opt.gammaM * len);
                }
            }
        }
    }
    const auto lower = [&](const std::vector<double>& c, const std::vector<double>& h, long& bad) {
        double lo = std::numeric_limits<double>::infinity();
        for (double v : c) {
            lo = std::min(lo, v);
        }
        lo -= std::log(opt.headroom);
        for (double v : h) {
            if (!(v >= lo)) {
                ++bad;
            }
        }
        return lo;
    };
    CheckResult r;
    r.name = "outside-expansion";
    r.constant = "C_M";
    long bad = 0;
    const double logC = lower(cal.all, held.all, bad);
    long badSharp = 0;
    const double logCSharp = lower(cal.sharp, held.sharp, badSharp);
    r.fitted = std::exp(std::min(logC, logCSharp));
    r.calibration = static_cast<long>(cal.all.size() + cal.sharp.size());
    r.heldOut = static_cast<long>(held.all.size() + held.sharp.size());
    r.violations = bad + badSharp;
    r.passed = !cal.sharp.empty() && !held.sharp.empty() && r.violations == 0;
    r.detail = "gamma_M " + num(opt.gammaM) + ", C_M " + num(std::exp(logC)) + " (" + std::to_string(bad) +
               " over), sharp C_M " + num(std::exp(logCSharp)) + " (" + std::to_string(badSharp) + " over)";
    return r;
}

CheckResult audit_phase_param(const ReturnFixtures& f, const AuditOptions& opt) {
    std::vector<double> all;
    for (const FixtureReturn& r : f.returns) {
        all.push_back(phase_param_window(Parameter(r.a), opt.phaseLo, opt.phaseHi).A);
    }
    std::vector<double> cal;
    std::vector<double> held;
    split_even_odd(all, cal, held);
    CheckResult c = upper_check("phase-param", "A", cal, held, opt.headroom);
    if (!(c.fitted < 1.0)) {
        c.passed = false;
        c.detail += ", fitted A >= 1 leaves D_A unbounded";
    } else {
        c.detail += ", D_A " + num((1.0 + c.fitted) / (1.0 - c.fitted));
    }
    return c;
}

CheckResult audit_bounded_distortion(const ReturnFixtures& f, const AuditOptions&) {
    CheckResult c;
    c.name = "bounded-distortion";
    double worst = 1.0;
    std::string witness;
    for (const FixtureReturn& r : f.returns) {
        auto etas = f.eta.points(std::exp(-static_cast<double>(std::abs(r.r) - 1)));
        etas.push_back(std::abs(r.eta));
        for (double eta : etas) {
            for (int j = 1; j <= r.p; ++j) {
                const DistortionReport rep = bounded_distortion(Parameter(r.a), eta, j);
                ++c.heldOut;
                worst = std::max({worst, rep.ratio, 1.0 / rep.ratio});
                if (!rep.holds) {
                    if (c.violations == 0) {
                        witness = ", first counterexample a=" + num(r.a) + " eta=" + num(eta) + " j=" + std::to_string(j);
                    }
                    ++c.violations;
                }
            }
        }
    }
    c.fitted = worst;
    c.passed = c.heldOut > 0 && c.violations == 0;
    c.detail = "worst ratio " + num(worst) + " against 2" + witness;
    return c;
}

CheckResult audit_bound_period(const ReturnFixtures& f, const AuditOptions& opt) {
    const PartitionConfig cfg = f.partition();
    std::vector<double> cal;
    std::vector<double> held;
    long stale = 0;
    long truncated = 0;
    for (std::size_t i = 0; i < f.returns.size(); ++i) {
        const FixtureReturn& r = f.returns[i];
        const BoundedPeriodResult bp = bounded_period({r.a}, 0, r.r, cfg, f.maxNu, f.eta);
        if (bp.p != r.p) {
            ++stale;
        }
        if (bp.truncated) {
            ++truncated;
        }
        const double ar = std::abs(r.r);
        const double v = bp.p > 0 && !bp.truncated ? std::max(bp.p / ar, ar / bp.p)
                                                    : std::numeric_limits<double>::infinity();
        (i % 2 == 0 ? cal : held).push_back(v);
    }
    CheckResult c = upper_check("bound-period", "kappa1", cal, held, opt.headroom);
    c.violations += stale;
    c.passed = c.passed && stale == 0 && std::isfinite(c.fitted);
    c.detail += ", " + std::to_string(stale) + " stale, " + std::to_string(truncated) + " truncated";
    return c;
}

CheckResult audit_free_period(const ReturnFixtures& f, const AuditOptions& opt) {
    const PartitionConfig cfg = f.partition();
    std::vector<double> cal;
    std::vector<double> held;
    long inside = 0;
    for (std::size_t i = 0; i < f.returns.size(); ++i) {
        const FixtureReturn& r = f.returns[i];
        const Parameter a(r.a);
        double x = r.eta;
        for (int k = 0; k <= r.p; ++k) {
            x = step(x, a);
        }
        if (std::abs(x) < cfg.delta()) {
            ++inside;
            continue;
        }
        double v = std::numeric_limits<double>::infinity();
        try {
            v = free_period(a, x, cfg, opt.freeSteps) / static_cast<double>(std::abs(r.r));
        } catch (const NoReturnWithinBudget&) {
        }
        (i % 2 == 0 ? cal : held).push_back(v);
    }
    CheckResult c = upper_check("free-period", "kappa3", cal, held, opt.headroom);
    c.passed = c.passed && std::isfinite(c.fitted);
    c.detail = "L <= kappa3 r; " + c.detail + ", " + std::to_string(inside) + " still inside after p";
    return c;
}

// ---- simulator checks -----------------------------------------------------

SimulationSet simulate(const RunFixtures& f) {
    SimulationSet s;
    for (const Experiment& e : f.calibration) {
        s.calibration.push_back(run(e.run, Parameter(e.a0)));
    }
    for (const Experiment& e : f.heldOut) {
        s.heldOut.push_back(run(e.run, Parameter(e.a0)));
    }
    return s;
}

namespace {

std::vector<double> ratios(const std::vector<RunResult>& runs,
                           std::vector<std::pair<int, int>> RunResult::*field) {
    std::vector<double> out;
    for (const RunResult& res : runs) {
        for (const auto& [r, t] : res.*field) {
            out.push_back(static_cast<double>(t) / r);
        }
    }
    return out;
}

std::vector<double> return_times(const std::vector<RunResult>& runs) {
    std::vector<double> out;
    for (const RunResult& res : runs) {
        for (const CompletionRecord& c : res.completions) {
            out.push_back((c.n - c.m - 1) / std::log(static_cast<double>(c.m)));
        }
    }
    return out;
}

// log D1 needed so that the survivor endpoints meet D1^{(log* m)^2} at j = m - 1.
std::vector<double> distortion_needs(const std::vector<RunResult>& runs) {
    std::vector<double> out;
    for (const RunResult& res : runs) {
        for (std::size_t k = 1; k < res.generations.size(); ++k) {
            const auto& prev = res.generations[k - 1].intervals;
            for (const ParamInterval& iv : res.generations[k].intervals) {
                if (iv.parent < 0 || static_cast<std::size_t>(iv.parent) >= prev.size() || !(iv.hi > iv.lo)) {
                    continue;
                }
                const long pm = prev[static_cast<std::size_t>(iv.parent)].m;
                try {
                    const DistortionReport rep = main_distortion(Parameter(iv.lo), Parameter(iv.hi), iv.m - 1, 1.0, pm);
                    const double ls = log_star(static_cast<double>(pm));
                    out.push_back(std::abs(rep.logRatio) / (ls * ls));
                } catch (const DegenerateDerivative&) {
                    out.push_back(std::numeric_limits<double>::infinity());
                }
            }
        }
    }
    return out;
}

}  // namespace

CheckResult audit_inessential_time(const SimulationSet& s, const AuditOptions& opt) {
    const auto cal = ratios(s.calibration, &RunResult::inessentialTimes);
    const auto held = ratios(s.heldOut, &RunResult::inessentialTimes);
    CheckResult c = upper_check("inessential-time", "kappa4", cal, held, opt.headroom);
    const auto positive = [](const std::vector<double>& v) {
        return std::count_if(v.begin(), v.end(), [](double x) { return x > 0.0; });
    };
    c.detail = "o <= kappa4 r; " + c.detail + ", nonzero o: " + std::to_string(positive(cal)) + " calibration, " +
               std::to_string(positive(held)) + " held-out";
    return c;
}

CheckResult audit_main_distortion(const SimulationSet& s, const AuditOptions& opt) {
    const auto cal = distortion_needs(s.calibration);
    const auto held = distortion_needs(s.heldOut);
    // fit on D1 itself, the headroom multiplies D1
    std::vector<double> calD;
    std::vector<double> heldD;
    for (double v : cal) {
        calD.push_back(std::exp(v));
    }
    for (double v : held) {
        heldD.push_back(std::exp(v));
    }
    CheckResult c = upper_check("main-distortion", "D1", calD, heldD, opt.headroom);
    c.fitted = std::max(c.fitted, 1.0);
    c.detail = "survivor endpoints at j = m - 1; " + c.detail;
    return c;
}

CheckResult audit_return_time(const SimulationSet& s, const AuditOptions& opt) {
    const auto cal = return_times(s.calibration);
    const auto held = return_times(s.heldOut);
    CheckResult c = upper_check("return-time", "kappa", cal, held, opt.headroom);
    const double frac = held.empty() ? 1.0 : static_cast<double>(c.violations) / held.size();
    c.passed = !cal.empty() && !held.empty() && frac < opt.violationBudget;
    c.detail = "n - m <= kappa ln m + 1; " + c.detail + ", held-out violation fraction " + num(frac);
    return c;
}

std::vector<double> decay_bounds_for(const RunResult& res, double tau) {
    std::vector<double> out{1.0};
    std::vector<long> ms;
    for (std::size_t k = 1; k < res.decay.size(); ++k) {
        ms.push_back(res.decay[k].maxM);
        out.push_back(decay_bound(ms, res.config.rate, tau));
    }
    return out;
}

double fit_tau(const std::vector<RunResult>& runs, double headroom) {
    // -log bound_k summed directly; exp would round small factors to 1
    const auto ok = [&](double tau) {
        for (const RunResult& res : runs) {
            CompensatedSum logBound;
            for (std::size_t k = 1; k < res.decay.size(); ++k) {
                const long m = res.decay[k].maxM;
                double d = 0.0;
                try {
                    d = res.config.rate(m);
                } catch (const RateNotDefined&) {
                    return false;
                }
                const double ls = log_star(static_cast<double>(m));
                const double x = d * std::pow(tau, ls * ls * ls);
                if (!(x >= 0.0 && x < 1.0)) {
                    return false;
                }
                logBound.add(std::log1p(-x));
                const double c = res.decay[k].correctedRatio;
                if (!(c > 0.0) || !(-logBound.value() <= -std::log(c) / headroom)) {
                    return false;
                }
            }
        }
        return true;
    };
    constexpr double kMax = 0.99;
    if (ok(kMax)) {
        return kMax;
    }
    // the bound shrinks as tau grows, so the admissible set is an interval (0, tau*]
    double lo = 0.0;
    double hi = kMax;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= 0.0) {
            break;
        }
        (ok(mid) ? lo : hi) = mid;
    }
    return lo;
}

CheckResult audit_decay(const SimulationSet& s, const AuditOptions& opt) {
    CheckResult c;
    c.name = "decay";
    c.constant = "tau";
    c.fitted = fit_tau(s.calibration, opt.headroom);
    for (const RunResult& res : s.calibration) {
        c.calibration += static_cast<long>(res.decay.size()) - 1;
    }
    long nonMonotone = 0;
    for (const RunResult& res : s.heldOut) {
        const auto b = c.fitted > 0.0 ? decay_bounds_for(res, c.fitted) : std::vector<double>{};
        for (std::size_t k = 1; k < res.decay.size(); ++k) {
            ++c.heldOut;
            const DecayRow& row = res.decay[k];
            if (b.empty() || !(row.correctedRatio <= b[k]) || !(row.measuredRatio <= b[k])) {
                ++c.violations;
            }
            if (row.measuredRatio > res.decay[k - 1].measuredRatio) {
                ++nonMonotone;
            }
        }
    }
    c.passed = c.fitted > 0.0 && c.heldOut > 0 && c.violations == 0 && nonMonotone == 0;
    c.detail = "measure ratio <= prod(1 - delta_m tau^{(log* m)^3}); " + std::to_string(nonMonotone) +
               " non-monotone steps";
    return c;
}

// ---- driver ---------------------------------------------------------------

std::vector<CheckResult> run_audit(const std::string& fixtureDir, const std::vector<std::string>& checks,
                                   const AuditOptions& opt) {
    const auto& known = audit_checks();
    std::vector<std::string> wanted = checks.empty() ? known : checks;
    for (const std::string& w : wanted) {
        if (std::find(known.begin(), known.end(), w) == known.end()) {
            throw DomainError("unknown audit check '" + w + "'");
        }
    }
    const auto want = [&](std::string_view n) { return std::find(wanted.begin(), wanted.end(), n) != wanted.end(); };
    const std::filesystem::path dir(fixtureDir);

    std::vector<CheckResult> out;
    const bool pointwise = want("outside-expansion") || want("phase-param") || want("bounded-distortion") ||
                           want("bound-period") || want("free-period");
    const bool simulated = want("inessential-time") || want("main-distortion") ||
                           want("return-time") || want("decay");
    ReturnFixtures rf;
    if (pointwise) {
        rf = load_return_fixtures((dir / "returns.json").string());
    }
    SimulationSet sims;
    if (simulated) {
        sims = simulate(load_run_fixtures((dir / "runs.json").string()));
    }
    for (const std::string& name : known) {
        if (!want(name)) {
            continue;
        }
        if (name == "outside-expansion") {
            out.push_back(audit_outside_expansion(rf, opt));
        } else if (name == "phase-param") {
            out.push_back(audit_phase_param(rf, opt));
        } else if (name == "bounded-distortion") {
            out.push_back(audit_bounded_distortion(rf, opt));
        } else if (name == "bound-period") {
            out.push_back(audit_bound_period(rf, opt));
        } else if (name == "free-period") {
            out.push_back(audit_free_period(rf, opt));
        } else if (name == "inessential-time") {
            out.push_back(audit_inessential_time(sims, opt));
        } else if (name == "main-distortion") {
            out.push_back(audit_main_distortion(sims, opt));
        } else if (name == "return-time") {
            out.push_back(audit_return_time(sims, opt));
        } else if (name == "decay") {
            out.push_back(audit_decay(sims, opt));
        }
    }
    return out;
}

std::string audit_table(const std::vector<CheckResult>& results) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-20s %-8s %-12s %8s %8s %6s  %s\n", "check", "const", "fitted", "calib",
                  "held", "viol", "result");
    out << line;
    for (const CheckResult& r : results) {
        std::snprintf(line, sizeof line, "%-20s %-8s %-12.6g %8ld %8ld %6ld  %s\n", r.name.c_str(),
                      r.constant.empty() ? "-" : r.constant.c_str(), r.fitted, r.calibration, r.heldOut,
                      r.violations, r.passed ? "PASS" : "FAIL");
        out << line;
        out << "    " << r.detail << '\n';
    }
    return out.str();
}

}  // namespace quadlab
