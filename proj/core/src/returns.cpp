#include "quadlab/returns.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "quadlab/errors.hpp"

namespace quadlab {

std::string_view to_string(ReturnClass c) noexcept {
    switch (c) {
        case ReturnClass::Inessential:
            return "inessential";
        case ReturnClass::Essential:
            return "essential";
        case ReturnClass::Escape:
            return "escape";
        case ReturnClass::Complete:
            return "complete";
        case ReturnClass::Bound:
            return "bound";
    }
    return "unknown";
}

namespace {

struct Shape {
    ReturnClass cls;
    bool negative;  // image lies left of 0
    double u;       // distance of the near end from 0
    double v;       // distance of the far end from 0
    std::optional<std::pair<PartitionIndex, PartitionIndex>> host;
};

Shape analyse(Interval image, double deltaN, const PartitionConfig& cfg) {
    const double lo = std::min(image.lo, image.hi);
    const double hi = std::max(image.lo, image.hi);
    const double delta = cfg.delta();
    if (hi <= -delta || lo >= delta) {
        throw NotAReturn("image [" + format_double(lo) + ", " + format_double(hi) +
                         "] misses (-delta, delta)");
    }
    const double core = deltaN / 3.0;
    if (lo < core && hi > -core) {
        return {ReturnClass::Complete, false, 0.0, 0.0, std::nullopt};
    }
    const bool negative = hi <= 0.0;
    const double u = negative ? -hi : lo;
    const double v = negative ? -lo : hi;

    if (v - delta >= 3.0 * delta) {
        return {ReturnClass::Escape, negative, u, v, std::nullopt};
    }
    const Location locU = locate(u, cfg);
    const auto* idxU = std::get_if<PartitionIndex>(&locU);
    if (idxU == nullptr || v > delta) {
        return {ReturnClass::Essential, negative, u, v, std::nullopt};
    }
    const Location next = next_outward(*idxU, cfg);
    if (const auto* n = std::get_if<PartitionIndex>(&next)) {
        if (subinterval_of(*n, cfg).hi <= v) {
            return {ReturnClass::Essential, negative, u, v, std::nullopt};
        }
    }
    const Location locV = locate(v, cfg);
    const auto* idxV = std::get_if<PartitionIndex>(&locV);
    const double deeperLength = slice_length(idxU->r, cfg);
    if (idxV == nullptr || v - u >= deeperLength) {
        return {ReturnClass::Essential, negative, u, v, std::nullopt};
    }
    PartitionIndex a = *idxU;
    PartitionIndex b = *idxV;
    if (negative) {
        a = mirror(a);
        b = mirror(b);
    }
    return {ReturnClass::Inessential, negative, u, v, std::make_pair(a, b)};
}

}  // namespace

ReturnClass classify(Interval image, int /*n*/, double deltaN, const PartitionConfig& cfg) {
    return analyse(image, deltaN, cfg).cls;
}

ReturnEvent make_return_event(Interval image, int n, double deltaN, const PartitionConfig& cfg) {
    const Shape s = analyse(image, deltaN, cfg);
    ReturnEvent ev;
    ev.n = n;
    ev.cls = s.cls;
    ev.image = {std::min(image.lo, image.hi), std::max(image.lo, image.hi)};
    const double delta = cfg.delta();
    const int sign = s.negative ? -1 : 1;
    switch (s.cls) {
        case ReturnClass::Inessential:
            ev.host = s.host;
            break;
        case ReturnClass::Essential: {
            int chosen = 0;
            for (int r = cfg.rMin(); r <= cfg.rMax(); ++r) {
                const Interval ir = interval_of(r, cfg);
                if (ir.hi < s.u) {
                    break;
                }
                if (s.u <= ir.lo && ir.hi <= s.v) {
                    chosen = r;
                    break;
                }
            }
            if (chosen == 0) {
                const Location loc = locate(std::min(s.v, delta), cfg);
                if (const auto* idx = std::get_if<PartitionIndex>(&loc)) {
                    chosen = std::abs(idx->r);
                } else {
                    chosen = cfg.rMin();
                }
            }
            ev.essentialInterval = sign * chosen;
            break;
        }
        case ReturnClass::Escape: {
            const double a = std::max(s.u, delta);
            ev.escapeInterval = s.negative ? Interval{-s.v, -a} : Interval{a, s.v};
            break;
        }
        case ReturnClass::Complete:
        case ReturnClass::Bound:
            break;
    }
    return ev;
}

std::vector<double> EtaGrid::points(double etaMax) const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(std::max(samples, 0)));
    for (int i = 0; i < samples; ++i) {
        out.push_back(etaMax * std::exp2(-static_cast<double>(i + 1) / perOctave));
    }
    return out;
}

BoundedPeriodResult bounded_period(const std::vector<double>& aSamples, int /*n*/, int r,
                                   const PartitionConfig& cfg, int maxNu, const EtaGrid& grid) {
    detail::check<DomainError>(!aSamples.empty(), "bounded_period: aSamples is empty");
    detail::check<DomainError>(maxNu >= 0, "bounded_period: maxNu must be >= 0");
    detail::check<DomainError>(grid.samples >= 1 && grid.perOctave >= 1,
                               "bounded_period: eta grid must be nonempty");
    (void)cfg;
    const int depth = std::abs(r);
    const double etaMax = std::exp(-std::abs(static_cast<double>(depth) - 1.0));
    const auto etas = grid.points(etaMax);

    int p = maxNu;
    std::vector<double> xi(static_cast<std::size_t>(maxNu) + 1);
    for (double a0 : aSamples) {
        const Parameter a(a0);
        xi[0] = 0.0;
        for (int nu = 0; nu < maxNu; ++nu) {
            xi[nu + 1] = step(xi[nu], a);
        }
        for (double eta : etas) {
            // d = F^nu(eta) - xi_nu by its own recurrence; subtracting two
            // orbits would lose eta^2 below the rounding of 1 - a eta^2.
            double d = 0.0;
            for (int nu = 1; nu <= p; ++nu) {
                d = nu == 1 ? -a * eta * eta : -a * d * (2.0 * xi[nu - 1] + d);
                const double tol = std::abs(xi[nu]) / (10.0 * nu * static_cast<double>(nu));
                if (!(std::abs(d) <= tol)) {
                    p = nu - 1;
                    break;
                }
            }
        }
    }
    BoundedPeriodResult res;
    res.p = p;
    res.r = r;
    res.truncated = p == maxNu;
    res.witnessNu = res.truncated ? 0 : p + 1;
    return res;
}

int free_period(Parameter a, double x, const PartitionConfig& cfg, int maxSteps) {
    const double delta = cfg.delta();
    if (std::abs(x) < delta) {
        throw PreconditionViolated("free_period: start point lies inside (-delta, delta)");
    }
    double y = x;
    for (int L = 1; L <= maxSteps; ++L) {
        y = step(y, a);
        if (std::abs(y) < delta) {
            return L;
        }
    }
    throw NoReturnWithinBudget("free_period: no return to (-delta, delta) within " +
                               std::to_string(maxSteps) + " steps");
}

OutsideExpansion outside_expansion_check(Parameter a, double x, int n, const PartitionConfig& cfg,
                                         double CM, double gammaM) {
    detail::check<DomainError>(n >= 0, "outside_expansion_check: n must be >= 0");
    const double delta = cfg.delta();
    LogSigned d{0.0, 1};
    double y = x;
    for (int k = 0; k < n; ++k) {
        if (std::abs(y) < delta) {
            throw PreconditionViolated("outside_expansion_check: orbit enters (-delta, delta) at step " +
                                       std::to_string(k));
        }
        d.mul(-2.0 * a * y);
        y = step(y, a);
    }
    OutsideExpansion out;
    out.lhsLog = d.logMag;
    out.rhsLog = std::log(delta * CM) + gammaM * n;
    out.holds = out.lhsLog >= out.rhsLog;
    out.sharpApplies = std::abs(y) < 2.0 * delta;
    out.sharpRhsLog = std::log(CM) + gammaM * n;
    out.sharpHolds = out.sharpApplies && out.lhsLog >= out.sharpRhsLog;
    return out;
}

}  // namespace quadlab
