#include "internal/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "quadlab/errors.hpp"

namespace quadlab::internal {

Context::Context(const RunConfig& conf, int limit)
    : conf_(conf), delta_(conf.cfg.delta()), large_(large_scale(conf.cfg)) {
    core_.assign(static_cast<std::size_t>(std::max(limit, 0)) + 1, 0.0);
    const long first = conf.rate.first_index();
    for (int j = 0; j <= limit; ++j) {
        if (j >= first) {
            try {
                core_[j] = conf.rate(j) / 3.0;
            } catch (const RateNotDefined&) {
                core_[j] = 0.0;
            }
        }
    }
}

double Context::core(int j) const {
    if (j < 0 || static_cast<std::size_t>(j) >= core_.size()) {
        throw BudgetExhausted("time index beyond the tabulated rate horizon");
    }
    return core_[j];
}

Sample Context::evaluate(double a, int n) const {
    Sample s{a, 0.0, 0.0, false};
    double x = 0.0;
    const int ba = conf_.m0;
    for (int j = 0; j < n; ++j) {
        if (j >= 1) {
            if (j >= ba && std::abs(x) < core(j)) {
                s.poisoned = true;
            }
            s.logD += std::log(std::abs(2.0 * a * x));
        }
        x = step(x, a);
    }
    s.x = x;
    return s;
}

Cell Context::cell_of(double x, int n) const {
    if (std::abs(x) < core(n)) {
        return {Cell::Core, 0, 0};
    }
    const Location loc = locate(x, conf_.cfg);
    if (const auto* idx = std::get_if<PartitionIndex>(&loc)) {
        return {Cell::Slice, idx->r, idx->l};
    }
    if (std::holds_alternative<Outside>(loc)) {
        const int l = static_cast<int>((std::abs(x) - delta_) / large_);
        return {x < 0.0 ? Cell::Left : Cell::Right, 0, l};
    }
    return {Cell::Core, 0, 0};
}

double Context::tolerance(double x1, double x2, int n) const {
    const auto slice_at = [&](double ax) {
        const Location loc = locate(ax, conf_.cfg);
        if (const auto* idx = std::get_if<PartitionIndex>(&loc)) {
            return slice_length(idx->r, conf_.cfg);
        }
        return slice_length(conf_.cfg.rMax(), conf_.cfg);
    };
    const double floor = std::max(core(n), std::exp(-static_cast<double>(conf_.cfg.rMax())));
    if ((x1 < 0.0) != (x2 < 0.0)) {
        return slice_at(std::min(floor, delta_));
    }
    const double m = std::min(std::abs(x1), std::abs(x2));
    if (m >= delta_) {
        return large_;
    }
    return slice_at(std::max(m, floor));
}

std::vector<Sample> initial_grid(double lo, double hi, int count, int n, const Context& ctx) {
    count = std::max(count, 2);
    std::vector<Sample> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        double a = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
        if (i == count - 1) {
            a = hi;
        }
        out.push_back(ctx.evaluate(a, n));
    }
    return out;
}

void refine(std::vector<Sample>& s, int n, const Context& ctx) {
    const int cap = ctx.conf().sampling.maxSamples;
    for (int pass = 0; pass < 64; ++pass) {
        bool changed = false;
        std::vector<Sample> out;
        out.reserve(s.size() * 2);
        for (std::size_t i = 0; i + 1 < s.size(); ++i) {
            out.push_back(s[i]);
            const Sample& p = s[i];
            const Sample& q = s[i + 1];
            const std::size_t projected = out.size() + (s.size() - i);
            if (projected >= static_cast<std::size_t>(cap)) {
                continue;
            }
            const double mid = 0.5 * (p.a + q.a);
            if (!(mid > p.a && mid < q.a) || q.a - p.a <= 1e-14 * q.a) {
                continue;
            }
            if (std::abs(p.x - q.x) > ctx.tolerance(p.x, q.x, n)) {
                out.push_back(ctx.evaluate(mid, n));
                changed = true;
            }
        }
        out.push_back(s.back());
        s.swap(out);
        if (!changed) {
            return;
        }
    }
}

void step_samples(std::vector<Sample>& s, int n) {
    for (Sample& p : s) {
        if (n >= 1) {
            p.logD += std::log(std::abs(2.0 * p.a * p.x));
        }
        p.x = step(p.x, p.a);
    }
}

std::vector<Group> group_by_cell(std::vector<Sample>& s, int n, const Context& ctx, bool usePoison) {
    const int iters = ctx.conf().sampling.bisectIterations;
    // Insert brackets around every cell change.
    std::vector<Sample> dense;
    dense.reserve(s.size() * 2);
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        dense.push_back(s[i]);
        Sample left = s[i];
        const Sample& right = s[i + 1];
        const Cell target = ctx.cell_of(right.x, n);
        for (int guard = 0; guard < 64; ++guard) {
            const Cell from = ctx.cell_of(left.x, n);
            if (from == target) {
                break;
            }
            double lo = left.a;
            double hi = right.a;
            Sample loS = left;
            Sample hiS = right;
            for (int it = 0; it < iters; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (!(mid > lo && mid < hi)) {
                    break;
                }
                const Sample m = ctx.evaluate(mid, n);
                if (ctx.cell_of(m.x, n) == from) {
                    lo = mid;
                    loS = m;
                } else {
                    hi = mid;
                    hiS = m;
                }
            }
            if (loS.a != left.a) {
                dense.push_back(loS);
            }
            if (hiS.a == right.a) {
                break;
            }
            dense.push_back(hiS);
            left = hiS;
        }
    }
    dense.push_back(s.back());
    s.swap(dense);

    // Cell of each segment.
    const auto segment_cell = [&](const Sample& p, const Sample& q) -> Cell {
        const Cell cp = ctx.cell_of(p.x, n);
        const Cell cq = ctx.cell_of(q.x, n);
        if (usePoison && (p.poisoned || q.poisoned)) {
            return {Cell::Core, 0, 0};
        }
        if (cp == cq) {
            return cp;
        }
        if (cp.kind == Cell::Core || cq.kind == Cell::Core || (p.x < 0.0) != (q.x < 0.0)) {
            return {Cell::Core, 0, 0};
        }
        return cp;
    };

    std::vector<Group> groups;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const Cell c = segment_cell(s[i], s[i + 1]);
        if (groups.empty() || !(groups.back().cell == c)) {
            Group g;
            g.lo = s[i].a;
            g.hi = s[i + 1].a;
            g.cell = c;
            g.xmin = std::min(s[i].x, s[i + 1].x);
            g.xmax = std::max(s[i].x, s[i + 1].x);
            g.params = {s[i].a, s[i + 1].a};
            groups.push_back(std::move(g));
        } else {
            Group& g = groups.back();
            g.hi = s[i + 1].a;
            g.xmin = std::min(g.xmin, s[i + 1].x);
            g.xmax = std::max(g.xmax, s[i + 1].x);
            g.params.push_back(s[i + 1].a);
        }
    }
    return groups;
}

int shallow_depth(double xmin, double xmax, const Context& ctx) {
    const double delta = ctx.delta();
    if (xmax <= -delta || xmin >= delta) {
        return 0;
    }
    const double far = std::min(std::max(std::abs(xmin), std::abs(xmax)), delta);
    const Location loc = locate(far, ctx.conf().cfg);
    if (const auto* idx = std::get_if<PartitionIndex>(&loc)) {
        return std::abs(idx->r);
    }
    return ctx.conf().cfg.rMin();
}

int bound_period_for(double lo, double hi, double xmin, double xmax, int n, const Context& ctx) {
    const int r = shallow_depth(xmin, xmax, ctx);
    if (r == 0) {
        return 0;
    }
    const SamplingSpec& sp = ctx.conf().sampling;
    const int k = std::max(sp.paramSamples, 1);
    std::vector<double> as;
    as.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        as.push_back(k == 1 ? 0.5 * (lo + hi) : (i == k - 1 ? hi : lo + (hi - lo) * i / (k - 1)));
    }
    return bounded_period(as, n, r, ctx.conf().cfg, sp.maxNu, sp.eta).p;
}

}  // namespace quadlab::internal
