#include "quadlab/exclusion.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <thread>

#include "internal/sampler.hpp"
#include "quadlab/distortion.hpp"
#include "quadlab/errors.hpp"
#include "quadlab/numeric.hpp"

namespace quadlab {

using internal::Cell;
using internal::Context;
using internal::Group;
using internal::Sample;

void validate(const RunConfig& c) {
    const auto need = [](bool ok, const char* field, const char* what) {
        if (!ok) {
            throw ConfigError(field, what);
        }
    };
    need(c.tau > 0.0 && c.tau < 1.0, "tau", "must lie in (0, 1)");
    need(c.gammaB > 0.0, "gammaB", "must be positive");
    need(c.CB > 0.0, "CB", "must be positive");
    need(c.gamma > 0.0, "gamma", "must be positive");
    need(c.C > 0.0, "C", "must be positive");
    need(c.m0 >= 2, "m0", "must be >= 2");
    need(c.kappa > 0.0, "kappa", "must be positive");
    need(c.maxGenerations >= 0, "maxGenerations", "must be >= 0");
    need(c.maxSteps >= 1, "maxSteps", "must be >= 1");
    need(c.epsilon > 0.0 && c.epsilon <= 0.5, "epsilon", "must lie in (0, 0.5]");
    need(c.D1 > 1.0, "D1", "must exceed 1");
    const SamplingSpec& s = c.sampling;
    need(s.initialSamples >= 2, "sampling.initialSamples", "must be >= 2");
    need(s.maxSamples >= s.initialSamples, "sampling.maxSamples", "must be >= initialSamples");
    need(s.paramSamples >= 1, "sampling.paramSamples", "must be >= 1");
    need(s.eta.samples >= 1, "sampling.etaSamples", "must be >= 1");
    need(s.eta.perOctave >= 1, "sampling.etaPerOctave", "must be >= 1");
    need(s.maxNu >= 1, "sampling.maxNu", "must be >= 1");
    need(s.bisectIterations >= 1 && s.bisectIterations <= 200, "sampling.bisectIterations",
         "must lie in [1, 200]");
    need(s.maxIntervals >= 1, "sampling.maxIntervals", "must be >= 1");
    need(s.maxPieces >= 1, "sampling.maxPieces", "must be >= 1");
    need(s.threads >= 1, "sampling.threads", "must be >= 1");
    const Admissibility adm = is_admissible(c.rate, std::max<long>(c.m0 + c.maxSteps, 2));
    if (const auto* no = std::get_if<AdmissibleNo>(&adm)) {
        throw ConfigError("rate", "not admissible at n = " + std::to_string(no->witness) + ": " + no->reason);
    }
}

namespace {

constexpr int kStartupSamples = 9;

std::array<double, kStartupSamples> startup_grid(double lo, double hi) {
    std::array<double, kStartupSamples> a{};
    for (int i = 0; i < kStartupSamples; ++i) {
        a[i] = lo + (hi - lo) * i / (kStartupSamples - 1);
    }
    a[kStartupSamples - 1] = hi;
    return a;
}

// First j in [2, limit] where the sampled image of xi_j violates the
// distance condition; limit + 1 when it never does.
int first_break(double lo, double hi, int limit, const PartitionConfig& cfg) {
    const auto a = startup_grid(lo, hi);
    std::array<double, kStartupSamples> x{};
    const double delta = cfg.delta();
    const double S = large_scale(cfg);
    for (int j = 1; j <= limit; ++j) {
        for (int i = 0; i < kStartupSamples; ++i) {
            x[i] = step(x[i], a[i]);
        }
        if (j < 2) {
            continue;
        }
        const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
        if (*mn <= 0.0 && *mx >= 0.0) {
            return j;
        }
        const double inner = *mn > 0.0 ? *mn : -*mx;
        double bound = S;
        if (inner < delta) {
            const Location loc = locate(inner, cfg);
            const auto* idx = std::get_if<PartitionIndex>(&loc);
            if (idx == nullptr) {
                return j;
            }
            const double r = std::abs(idx->r);
            bound = std::exp(-r) / (r * r);
        }
        if (*mx - *mn > bound) {
            return j;
        }
    }
    return limit + 1;
}

}  // namespace

StartupResult startup(Parameter a0, const RunConfig& conf) {
    validate(conf);
    const CEEstimate ce = ce_estimate(a0, conf.m0);
    if (!(ce.gammaHat > 0.0)) {
        throw DomainError("startup: a0 = " + format_double(a0) + " fails the CE screen over " +
                          std::to_string(conf.m0) + " steps");
    }
    const int limit = conf.m0 + conf.maxSteps;
    const auto window = [&](double eps) {
        return std::pair{std::max(kParamMin, a0 - eps), std::min(kParamMax, a0 + eps)};
    };
    const auto m_of = [&](double eps) {
        const auto [lo, hi] = window(eps);
        return first_break(lo, hi, limit, conf.cfg);
    };

    double eps = conf.epsilon;
    int m = m_of(eps);
    if (m > limit) {
        throw NoExpansionWithinBudget("startup: the image never outgrows the distance condition");
    }
    if (m < conf.m0) {
        double bad = eps;
        while (m < conf.m0) {
            bad = eps;
            eps *= 0.5;
            if (eps < 1e-15) {
                throw NoExpansionWithinBudget("startup: no half-width keeps the distance condition to m0");
            }
            m = m_of(eps);
            if (m > limit) {
                throw NoExpansionWithinBudget("startup: the image never outgrows the distance condition");
            }
        }
        double good = eps;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (good + bad);
            if (!(mid > good && mid < bad)) {
                break;
            }
            const int mm = m_of(mid);
            if (mm >= conf.m0 && mm <= limit) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        eps = good;
        m = m_of(eps);
    }

    StartupResult res;
    res.epsilon = eps;
    res.m0 = m;
    res.degenerate = m <= 2;
    const auto [lo, hi] = window(eps);
    RunConfig local = conf;
    local.m0 = m;
    const Context ctx(local, m + 1);
    std::vector<double> xs;
    ParamInterval& w = res.omega0;
    w.lo = lo;
    w.hi = hi;
    w.m = m;
    w.start = m;
    w.boundUntil = m;
    for (double a : startup_grid(lo, hi)) {
        xs.push_back(ctx.evaluate(a, m).x);
        w.samples.push_back(a);
    }
    const bool up = std::is_sorted(xs.begin(), xs.end());
    const bool down = std::is_sorted(xs.rbegin(), xs.rend());
    res.monotone = up || down;
    const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
    w.depth = internal::shallow_depth(*mn, *mx, ctx);
    w.tag = w.depth == 0 ? IntervalTag::T : IntervalTag::N;
    return res;
}

namespace {

ParamInterval make_piece(const ParamInterval& omega, const Group& g, int n,
                         const std::vector<ReturnEvent>& history, const Context& ctx) {
    ParamInterval p;
    p.lo = g.lo;
    p.hi = g.hi;
    p.m = omega.m;
    p.history = history;
    p.start = n;
    p.parent = omega.parent;
    p.depth = internal::shallow_depth(g.xmin, g.xmax, ctx);
    p.tag = p.depth == 0 ? IntervalTag::T : IntervalTag::N;
    p.boundUntil = n + internal::bound_period_for(g.lo, g.hi, g.xmin, g.xmax, n, ctx);
    p.samples = g.params;
    return p;
}

// Joins consecutive groups into one.
Group merge(const std::vector<Group>& gs, std::size_t first, std::size_t last) {
    Group out = gs[first];
    for (std::size_t i = first + 1; i <= last; ++i) {
        out.hi = gs[i].hi;
        out.xmin = std::min(out.xmin, gs[i].xmin);
        out.xmax = std::max(out.xmax, gs[i].xmax);
        out.params.insert(out.params.end(), gs[i].params.begin() + 1, gs[i].params.end());
    }
    return out;
}

bool covers_slice(const Group& g, const PartitionConfig& cfg) {
    if (g.cell.kind != Cell::Slice) {
        return false;
    }
    const Interval s = subinterval_of(PartitionIndex{g.cell.r, g.cell.l}, cfg);
    const double tol = 1e-9 * s.length();
    return g.xmin <= s.lo + tol && g.xmax >= s.hi - tol;
}

bool outside(const Group& g) { return g.cell.kind == Cell::Left || g.cell.kind == Cell::Right; }

// Pieces of an essential (fullSlices) or escape split. Groups selected by
// `alone` become single pieces; maximal runs of the rest are merged.
std::vector<ParamInterval> split(const ParamInterval& omega, const std::vector<Group>& gs, int n,
                                 const std::vector<ReturnEvent>& history, const Context& ctx,
                                 const std::function<bool(const Group&)>& alone) {
    std::vector<ParamInterval> out;
    std::size_t i = 0;
    while (i < gs.size()) {
        if (alone(gs[i])) {
            out.push_back(make_piece(omega, gs[i], n, history, ctx));
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < gs.size() && !alone(gs[j + 1])) {
            ++j;
        }
        out.push_back(make_piece(omega, merge(gs, i, j), n, history, ctx));
        i = j + 1;
    }
    return out;
}

double parts_error(double whole, const std::vector<ParamInterval>& parts, const std::vector<Interval>& E) {
    CompensatedSum s;
    for (const auto& p : parts) {
        s.add(p.length());
    }
    for (const auto& e : E) {
        s.add(e.length());
    }
    return std::abs(whole - s.value());
}

}  // namespace

AdvanceResult advance_to_complete(const ParamInterval& omega, const RunConfig& conf) {
    const Context ctx(conf, std::max(omega.m + conf.maxSteps, omega.start) + 2);
    const double delta = ctx.delta();
    AdvanceResult res;
    std::vector<Sample> samples = internal::initial_grid(omega.lo, omega.hi, conf.sampling.initialSamples,
                                                         omega.start, ctx);
    internal::refine(samples, omega.start, ctx);

    int n = omega.start;
    int boundUntil = omega.boundUntil;
    int firstIness = omega.firstInessential;
    bool checkNow = omega.start == conf.m0 && omega.history.empty();
    bool freeRecorded = false;
    const auto record_o = [&] {
        if (omega.depth > 0) {
            res.inessentialTimes.emplace_back(omega.depth, firstIness >= 0 ? n - firstIness : 0);
        }
    };
    const auto history_now = [&] {
        std::vector<ReturnEvent> h = omega.history;
        h.insert(h.end(), res.events.begin(), res.events.end());
        return h;
    };

    for (;;) {
        if (!checkNow) {
            if (n - omega.m >= conf.maxSteps) {
                throw BudgetExhausted("no complete return within " + std::to_string(conf.maxSteps) +
                                      " steps of m = " + std::to_string(omega.m));
            }
            internal::step_samples(samples, n);
            ++n;
            internal::refine(samples, n, ctx);
        }
        checkNow = false;

        double lo = samples.front().x;
        double hi = lo;
        for (const Sample& s : samples) {
            lo = std::min(lo, s.x);
            hi = std::max(hi, s.x);
        }
        if (hi <= -delta || lo >= delta) {
            continue;
        }
        if (!freeRecorded && omega.depth > 0 && n > omega.boundUntil) {
            res.freePeriods.emplace_back(omega.depth, n - omega.boundUntil);
            freeRecorded = true;
        }
        ReturnEvent ev = make_return_event(Interval{lo, hi}, n, 3.0 * ctx.core(n), conf.cfg);
        if (ev.cls == ReturnClass::Complete) {
            res.events.push_back(ev);
            res.completeAt = n;
            for (const Sample& s : samples) {
                res.completeSamples.push_back(s.a);
            }
            res.budgetWarning =
                static_cast<double>(n - omega.m) > conf.kappa * std::log(static_cast<double>(omega.m)) + 1.0;
            record_o();
            return res;
        }
        if (n <= boundUntil) {
            ev.cls = ReturnClass::Bound;
            res.events.push_back(ev);
            continue;
        }
        res.events.push_back(ev);

        std::vector<double> as;
        std::vector<double> logs;
        as.reserve(samples.size());
        logs.reserve(samples.size());
        for (const Sample& s : samples) {
            as.push_back(s.a);
            logs.push_back(s.logD);
        }
        const RestoreDecision d = restore_decision(as, logs, n, conf.gammaB, conf.CB, conf.gamma, conf.C);
        if (std::holds_alternative<RemoveAll>(d)) {
            res.excluded.push_back(Interval{omega.lo, omega.hi});
            return res;
        }
        res.restoreViolations += static_cast<int>(std::get<KeepAll>(d).violations.size());

        if (ev.cls == ReturnClass::Inessential) {
            if (firstIness < 0) {
                firstIness = n;
            }
            const int r = std::max(std::abs(ev.host->first.r), std::abs(ev.host->second.r));
            const auto& sp = conf.sampling;
            const int k = sp.paramSamples;
            std::vector<double> grid;
            for (int i = 0; i < k; ++i) {
                grid.push_back(k == 1 ? 0.5 * (omega.lo + omega.hi)
                                      : (i == k - 1 ? omega.hi : omega.lo + (omega.hi - omega.lo) * i / (k - 1)));
            }
            boundUntil = n + bounded_period(grid, n, r, conf.cfg, sp.maxNu, sp.eta).p;
            continue;
        }

        // Essential or escape: split and hand the pieces back.
        record_o();
        std::vector<Group> gs = internal::group_by_cell(samples, n, ctx, false);
        const auto history = history_now();
        if (ev.cls == ReturnClass::Essential) {
            res.pieces = split(omega, gs, n, history, ctx,
                               [&](const Group& g) { return covers_slice(g, conf.cfg); });
        } else {
            res.pieces = split(omega, gs, n, history, ctx, [](const Group& g) { return !outside(g); });
        }
        res.splitError = std::max(res.splitError, parts_error(omega.length(), res.pieces, {}));
        return res;
    }
}

ExclusionResult exclude_at_complete(const ParamInterval& omega, int n, const RunConfig& conf,
                                    const std::vector<double>& grid) {
    const Context ctx(conf, n + 1);
    std::vector<Sample> samples;
    if (grid.empty()) {
        samples = internal::initial_grid(omega.lo, omega.hi, conf.sampling.initialSamples, n, ctx);
        internal::refine(samples, n, ctx);
    } else {
        std::vector<double> as = grid;
        as.push_back(omega.lo);
        as.push_back(omega.hi);
        std::sort(as.begin(), as.end());
        as.erase(std::unique(as.begin(), as.end()), as.end());
        for (double a : as) {
            if (a >= omega.lo && a <= omega.hi) {
                samples.push_back(ctx.evaluate(a, n));
            }
        }
    }
    ExclusionResult res;
    const std::vector<Group> gs = internal::group_by_cell(samples, n, ctx, true);
    for (const Group& g : gs) {
        if (g.cell.kind == Cell::Core) {
            if (!res.E.empty() && res.E.back().hi == g.lo) {
                res.E.back().hi = g.hi;
            } else {
                res.E.push_back(Interval{g.lo, g.hi});
            }
            continue;
        }
        ParamInterval s;
        s.lo = g.lo;
        s.hi = g.hi;
        s.m = n;
        s.start = n;
        s.parent = omega.parent;
        s.samples = g.params;
        if (g.cell.kind == Cell::Slice) {
            s.tag = IntervalTag::N;
            s.depth = std::abs(g.cell.r);
            s.boundUntil = n + internal::bound_period_for(g.lo, g.hi, g.xmin, g.xmax, n, ctx);
        } else {
            s.tag = IntervalTag::T;
            s.depth = 0;
            s.boundUntil = n;
        }
        res.survivors.push_back(std::move(s));
    }
    res.splitError = parts_error(omega.length(), res.survivors, res.E);
    return res;
}

MSequence m_sequence(long m0, double kappa, int K) {
    detail::check<DomainError>(kappa > 0.0, "m_sequence: kappa must be positive");
    detail::check<DomainError>(m0 >= 2, "m_sequence: m0 must be >= 2");
    detail::check<DomainError>(K >= 0, "m_sequence: K must be >= 0");
    MSequence out;
    out.m.push_back(m0);
    for (int k = 0; k < K; ++k) {
        const double mk = static_cast<double>(out.m.back());
        out.m.push_back(static_cast<long>(std::ceil(mk + kappa * std::log(mk))));
    }
    for (std::size_t k = 1; k + 1 < out.m.size(); ++k) {
        out.ratios.push_back(static_cast<double>(out.m[k + 1] - out.m[k]) /
                             static_cast<double>(out.m[k] - out.m[k - 1]));
    }
    // sup_{m >= m0} (kappa ln m + 1) / m, attained at max(m0, e^{1 - 1/kappa}).
    const double mStar = std::exp(1.0 - 1.0 / kappa);
    const double x0 = static_cast<double>(m0);
    const double head = x0 >= mStar ? (kappa * std::log(x0) + 1.0) / x0 : kappa / mStar;
    const double c = head + 1.0 / kappa;
    out.bound = 1.0 + c / std::log(x0);
    out.ratioBoundHolds =
        std::all_of(out.ratios.begin(), out.ratios.end(), [&](double r) { return r <= out.bound; });
    return out;
}

double decay_bound(const std::vector<long>& ms, const RateSequence& rate, double tau) {
    detail::check<DomainError>(tau > 0.0 && tau < 1.0, "decay_bound: tau must lie in (0, 1)");
    CompensatedSum s;
    for (long m : ms) {
        const double d = rate(m);
        const int ls = log_star(static_cast<double>(m));
        const double x = d * std::pow(tau, static_cast<double>(ls) * ls * ls);
        if (!(x < 1.0) || !(x >= 0.0)) {
            throw RateNotDefined("decay_bound: factor 1 - delta_m tau^{(log* m)^3} is not positive at m = " +
                                 std::to_string(m));
        }
        s.add(std::log1p(-x));
    }
    return std::exp(s.value());
}

void ClassCounts::add(ReturnClass c) noexcept {
    switch (c) {
        case ReturnClass::Inessential: ++inessential; break;
        case ReturnClass::Essential: ++essential; break;
        case ReturnClass::Escape: ++escape; break;
        case ReturnClass::Complete: ++complete; break;
        case ReturnClass::Bound: ++bound; break;
    }
}

namespace {

struct Outcome {
    AdvanceResult adv;
    ExclusionResult excl;
    bool exhausted = false;
};

Outcome process(const ParamInterval& iv, const RunConfig& conf) {
    Outcome o;
    try {
        o.adv = advance_to_complete(iv, conf);
    } catch (const BudgetExhausted&) {
        o.exhausted = true;
        return o;
    }
    if (o.adv.completeAt) {
        o.excl = exclude_at_complete(iv, *o.adv.completeAt, conf, o.adv.completeSamples);
    }
    return o;
}

// Deterministic: results land at the index of their input.
std::vector<Outcome> process_all(const std::vector<ParamInterval>& wave, const RunConfig& conf) {
    std::vector<Outcome> out(wave.size());
    const std::size_t nThreads =
        std::min<std::size_t>(static_cast<std::size_t>(conf.sampling.threads), wave.size());
    if (nThreads <= 1) {
        for (std::size_t i = 0; i < wave.size(); ++i) {
            out[i] = process(wave[i], conf);
        }
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(nThreads);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nThreads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = next++; i < wave.size(); i = next++) {
                    out[i] = process(wave[i], conf);
                }
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return out;
}

// Keeps the `keep` longest intervals (ties by position) and returns the retired length.
double retire_extras(std::vector<ParamInterval>& ivs, std::size_t keep, long& count) {
    if (ivs.size() <= keep) {
        return 0.0;
    }
    std::stable_sort(ivs.begin(), ivs.end(),
                     [](const ParamInterval& a, const ParamInterval& b) { return a.length() > b.length(); });
    double retired = 0.0;
    for (std::size_t i = keep; i < ivs.size(); ++i) {
        retired += ivs[i].length();
        ++count;
    }
    ivs.resize(keep);
    std::stable_sort(ivs.begin(), ivs.end(),
                     [](const ParamInterval& a, const ParamInterval& b) { return a.lo < b.lo; });
    return retired;
}

}  // namespace

RunResult run(const RunConfig& conf0, Parameter a0) {
    validate(conf0);
    RunResult res;
    res.start = startup(a0, conf0);
    RunConfig conf = conf0;
    conf.m0 = res.start.m0;
    res.config = conf;

    const double L0 = res.start.omega0.length();
    GenerationState g0;
    g0.intervals.push_back(res.start.omega0);
    g0.measure = L0;
    g0.maxM = res.start.m0;
    res.generations.push_back(g0);
    res.decay.push_back(DecayRow{0, g0.maxM, 1.0, 1.0, 1.0});

    std::vector<long> ms;
    double corrected = 1.0;
    for (int k = 1; k <= conf.maxGenerations; ++k) {
        const GenerationState& prev = res.generations.back();
        if (prev.intervals.empty()) {
            break;
        }
        GenerationState next;
        next.k = k;
        std::vector<ParamInterval> wave = prev.intervals;
        for (std::size_t i = 0; i < wave.size(); ++i) {
            wave[i].parent = static_cast<int>(i);
        }
        std::vector<ParamInterval> survivors;
        CompensatedSum excluded;
        CompensatedSum retired;
        std::size_t processed = 0;
        const auto maxPieces = static_cast<std::size_t>(conf.sampling.maxPieces);
        while (!wave.empty()) {
            std::vector<ParamInterval> resolvable;
            for (ParamInterval& iv : wave) {
                if (iv.length() < kMinRelativeWidth * iv.hi) {
                    retired.add(iv.length());
                    ++res.resolutionRetirements;
                } else {
                    resolvable.push_back(std::move(iv));
                }
            }
            wave = std::move(resolvable);
            const std::size_t room = processed >= maxPieces ? 0 : maxPieces - processed;
            retired.add(retire_extras(wave, room, res.capRetirements));
            processed += wave.size();
            const std::vector<Outcome> outs = process_all(wave, conf);
            std::vector<ParamInterval> nextWave;
            for (std::size_t i = 0; i < wave.size(); ++i) {
                const ParamInterval& iv = wave[i];
                const Outcome& o = outs[i];
                if (o.exhausted) {
                    retired.add(iv.length());
                    ++res.budgetRetirements;
                    continue;
                }
                for (const ReturnEvent& e : o.adv.events) {
                    next.counts.add(e.cls);
                }
                res.inessentialTimes.insert(res.inessentialTimes.end(), o.adv.inessentialTimes.begin(),
                                            o.adv.inessentialTimes.end());
                res.freePeriods.insert(res.freePeriods.end(), o.adv.freePeriods.begin(), o.adv.freePeriods.end());
                res.restoreViolations += o.adv.restoreViolations;
                res.maxSplitError = std::max(res.maxSplitError, o.adv.splitError);
                for (const Interval& e : o.adv.excluded) {
                    excluded.add(e.length());
                    ++res.restoreRemovals;
                }
                nextWave.insert(nextWave.end(), o.adv.pieces.begin(), o.adv.pieces.end());
                if (o.adv.completeAt) {
                    double removed = 0.0;
                    for (const Interval& e : o.excl.E) {
                        removed += e.length();
                        excluded.add(e.length());
                    }
                    res.maxSplitError = std::max(res.maxSplitError, o.excl.splitError);
                    survivors.insert(survivors.end(), o.excl.survivors.begin(), o.excl.survivors.end());
                    const int n = *o.adv.completeAt;
                    res.completions.push_back(
                        CompletionRecord{iv.m, n, removed / iv.length(), conf.rate(n), o.adv.budgetWarning});
                    if (o.adv.budgetWarning) {
                        ++res.budgetWarnings;
                    }
                }
            }
            wave = std::move(nextWave);
        }
        std::stable_sort(survivors.begin(), survivors.end(),
                         [](const ParamInterval& a, const ParamInterval& b) { return a.lo < b.lo; });
        CompensatedSum kept;
        for (const auto& s : survivors) {
            kept.add(s.length());
        }
        next.generationSurvived = kept.value();
        next.generationExcluded = excluded.value();
        retired.add(retire_extras(survivors, static_cast<std::size_t>(conf.sampling.maxIntervals),
                                  res.capRetirements));

        next.intervals = std::move(survivors);
        CompensatedSum measure;
        long maxM = 0;
        for (const auto& s : next.intervals) {
            measure.add(s.length());
            maxM = std::max<long>(maxM, s.m);
        }
        next.measure = measure.value();
        next.excluded = prev.excluded + excluded.value();
        next.retired = prev.retired + retired.value();
        next.maxM = next.intervals.empty() ? prev.maxM : maxM;

        const double denom = next.generationSurvived + next.generationExcluded;
        if (denom > 0.0) {
            corrected *= next.generationSurvived / denom;
        }
        ms.push_back(next.maxM);
        res.decay.push_back(DecayRow{k, next.maxM, next.measure / L0, corrected, decay_bound(ms, conf.rate, conf.tau)});
        res.generations.push_back(std::move(next));
    }
    return res;
}

InvariantReport check_invariants(const RunResult& res) {
    InvariantReport rep;
    rep.maxSplitError = res.maxSplitError;
    if (res.generations.empty()) {
        return rep;
    }
    const double L0 = res.generations.front().measure;
    const RunConfig& conf = res.config;
    for (std::size_t k = 0; k < res.generations.size(); ++k) {
        const GenerationState& g = res.generations[k];
        rep.conservationError = std::max(rep.conservationError, std::abs(L0 - g.measure - g.excluded - g.retired));
        for (std::size_t i = 0; i < g.intervals.size(); ++i) {
            const ParamInterval& iv = g.intervals[i];
            if (!(iv.lo < iv.hi)) {
                rep.disjoint = false;
            }
            if (i + 1 < g.intervals.size() && iv.hi > g.intervals[i + 1].lo) {
                rep.disjoint = false;
            }
            if (k == 0) {
                continue;
            }
            const auto& parents = res.generations[k - 1].intervals;
            if (iv.parent < 0 || static_cast<std::size_t>(iv.parent) >= parents.size()) {
                rep.nested = false;
                continue;
            }
            const ParamInterval& p = parents[static_cast<std::size_t>(iv.parent)];
            if (iv.lo < p.lo || iv.hi > p.hi) {
                rep.nested = false;
            }
            for (double a : iv.samples) {
                ++rep.baChecked;
                const std::vector<double> xi = critical_orbit(Parameter(a), iv.m);
                for (int j = conf.m0; j <= iv.m; ++j) {
                    if (j < conf.rate.first_index()) {
                        continue;
                    }
                    const double bound = conf.rate(j) / 3.0;
                    if (std::abs(xi[static_cast<std::size_t>(j)]) < bound && rep.baHolds) {
                        rep.baHolds = false;
                        rep.baWitness = "a = " + format_double(a) + ", j = " + std::to_string(j) +
                                        ", |xi_j| = " + format_double(std::abs(xi[static_cast<std::size_t>(j)]));
                    }
                }
            }
        }
        if (k > 0 && g.measure > res.generations[k - 1].measure) {
            rep.monotone = false;
        }
    }
    for (const DecayRow& row : res.decay) {
        if (row.measuredRatio > row.bound || row.correctedRatio > row.bound) {
            rep.boundHolds = false;
        }
    }
    return rep;
}

}  // namespace quadlab
