#include "quadlab/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "internal/json_io.hpp"
#include "quadlab/errors.hpp"
#include "quadlab/numeric.hpp"

namespace quadlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

double RateSequence::operator()(long n) const {
    return std::visit(
        overloaded{
            [n](const PowerLaw& p) -> double {
                if (n < 1) {
                    throw RateNotDefined("power law rate needs n >= 1");
                }
                if (p.theta == 1.0) {
                    return 1.0 / static_cast<double>(n);
                }
                return std::pow(static_cast<double>(n), -p.theta);
            },
            [n](const LogLog&) -> double {
                if (n < 3) {
                    throw RateNotDefined("1/(n ln ln n) needs n >= 3");
                }
                const double x = static_cast<double>(n);
                return 1.0 / (x * std::log(std::log(x)));
            },
            [n](const NLogN&) -> double {
                if (n < 2) {
                    throw RateNotDefined("1/(n ln n) needs n >= 2");
                }
                const double x = static_cast<double>(n);
                return 1.0 / (x * std::log(x));
            },
            [n](const Table& t) -> double {
                if (n < 1) {
                    throw RateNotDefined("table rate needs n >= 1");
                }
                const auto size = static_cast<long>(t.values.size());
                if (n <= size) {
                    return t.values[static_cast<std::size_t>(n - 1)];
                }
                if (t.tail == TailRule::Error || size < 2) {
                    throw RateNotDefined("table rate has no value at n = " + std::to_string(n));
                }
                const double last = t.values[static_cast<std::size_t>(size - 1)];
                const double prev = t.values[static_cast<std::size_t>(size - 2)];
                const double logRatio = std::log(last / prev);
                return last * std::exp(logRatio * static_cast<double>(n - size));
            },
        },
        kind);
}

long RateSequence::first_index() const noexcept {
    return std::visit(overloaded{[](const PowerLaw&) { return 1L; }, [](const LogLog&) { return 3L; },
                                 [](const NLogN&) { return 2L; }, [](const Table&) { return 1L; }},
                      kind);
}

std::string RateSequence::describe() const {
    return std::visit(overloaded{[](const PowerLaw& p) { return "power:" + format_double(p.theta); },
                                 [](const LogLog&) { return std::string("loglog"); },
                                 [](const NLogN&) { return std::string("nlogn"); },
                                 [](const Table& t) {
                                     return "table[" + std::to_string(t.values.size()) + "]";
                                 }},
                      kind);
}

int log_star(double x) noexcept {
    int k = 0;
    while (x > 1.0) {
        x = std::log(x);
        ++k;
    }
    return k;
}

namespace {

// Largest integer n with log_star(n) <= k, capped at `cap`.
long log_star_upper(int k, long cap) {
    if (log_star(static_cast<double>(cap)) <= k) {
        return cap;
    }
    long lo = 1;  // log_star(1) = 0 <= k
    long hi = cap;
    while (hi - lo > 1) {
        const long mid = lo + (hi - lo) / 2;
        if (log_star(static_cast<double>(mid)) <= k) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

}  // namespace

Admissibility is_admissible(const RateSequence& rate, long horizon) {
    detail::check<DomainError>(horizon >= 2, "is_admissible: horizon must be >= 2");
    const long N = std::max(rate.Nadm.value_or(rate.first_index()), rate.first_index());
    if (N > horizon) {
        return AdmissibleNo{N, "N exceeds the horizon"};
    }
    double required = 0.0;
    double prev = std::numeric_limits<double>::infinity();
    for (long n = N; n <= horizon; ++n) {
        const double d = rate(n);
        if (!(d > 0.0) || !std::isfinite(d)) {
            return AdmissibleNo{n, "not positive"};
        }
        if (d > prev) {
            return AdmissibleNo{n, "not nonincreasing"};
        }
        prev = d;
        const double ln = std::log(static_cast<double>(n));
        const double ld = std::log(d);
        if (rate.eBar) {
            if (ld < -*rate.eBar * ln - 1e-12 * std::max(1.0, *rate.eBar * ln)) {
                return AdmissibleNo{n, "delta_n < n^{-eBar}"};
            }
            continue;
        }
        if (n == 1) {
            if (ld < -1e-12) {
                return AdmissibleNo{n, "delta_1 < 1 admits no exponent"};
            }
            continue;
        }
        const double need = -ld / ln;
        required = std::max(required, need);
        if (required - 1e-9 > kMaxFittedExponent) {
            return AdmissibleNo{n, "no integer exponent <= 64 bounds the sequence"};
        }
    }
    if (rate.eBar) {
        return AdmissibleYes{*rate.eBar, N, false};
    }
    const double fitted = std::max(0.0, std::ceil(required - 1e-9));
    return AdmissibleYes{fitted, N, true};
}

double summability_increment(const RateSequence& rate, double tau, long N1, long N2) {
    detail::check<DomainError>(tau > 0.0 && tau < 1.0, "summability: tau must lie in (0, 1)");
    const long start = std::max({N1 + 1, 2L, rate.first_index()});
    CompensatedSum sum;
    long n = start;
    while (n <= N2) {
        const int ls = log_star(static_cast<double>(n));
        const long blockEnd = std::min(N2, log_star_upper(ls, N2));
        const double weight = std::pow(tau, static_cast<double>(ls) * ls * ls);
        const auto* power = std::get_if<PowerLaw>(&rate.kind);
        const bool harmonic = power != nullptr && power->theta == 1.0;
        for (; n <= blockEnd; ++n) {
            const double x = static_cast<double>(n);
            const double d = harmonic ? 1.0 / x : rate(n);
            sum.add(d * weight / std::log(x));
        }
    }
    return sum.value();
}

double summability_partial(const RateSequence& rate, double tau, long N) {
    detail::check<DomainError>(N >= 2, "summability_partial: N must be >= 2");
    return summability_increment(rate, tau, 1, N);
}

CondensationResult condensation(const std::function<double(long)>& a, const std::vector<long>& q,
                                int K) {
    detail::check<DomainError>(K >= 1, "condensation: K must be >= 1");
    if (q.size() < static_cast<std::size_t>(K) + 1) {
        throw NotIncreasing("condensation: need q_0 .. q_K");
    }
    if (q[0] < 1) {
        throw NotIncreasing("condensation: q must be positive integers");
    }
    for (int k = 0; k < K; ++k) {
        if (q[k + 1] <= q[k]) {
            throw NotIncreasing("condensation: q is not strictly increasing at k = " + std::to_string(k));
        }
    }
    CondensationResult res;
    double alpha = K >= 2 ? 0.0 : 1.0;
    for (int k = 1; k < K; ++k) {
        alpha = std::max(alpha, static_cast<double>(q[k + 1] - q[k]) / static_cast<double>(q[k] - q[k - 1]));
    }
    res.alpha = alpha;
    CompensatedSum direct;
    for (long n = q[0]; n < q[K]; ++n) {
        direct.add(a(n));
    }
    res.direct = direct.value();
    CompensatedSum condensed;
    for (int k = 0; k < K; ++k) {
        condensed.add(static_cast<double>(q[k + 1] - q[k]) * a(q[k]));
    }
    res.condensed = condensed.value();
    CompensatedSum lower;
    for (int k = 0; k + 2 <= K; ++k) {
        lower.add(static_cast<double>(q[k + 2] - q[k + 1]) * a(q[k + 1]));
    }
    res.lower = lower.value() / alpha;
    constexpr double kSlack = 1e-12;
    res.sandwichHolds = res.lower <= res.direct * (1.0 + kSlack) && res.direct <= res.condensed * (1.0 + kSlack);
    return res;
}

RateSequence parse_rate(const std::string& spec) {
    RateSequence r;
    if (spec == "loglog") {
        r.kind = LogLog{};
    } else if (spec == "nlogn") {
        r.kind = NLogN{};
    } else if (spec.rfind("power:", 0) == 0) {
        const std::string tail = spec.substr(6);
        std::size_t used = 0;
        double theta = 0.0;
        try {
            theta = std::stod(tail, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tail.size() || tail.empty() || !(theta > 0.0)) {
            throw ConfigError("rate", "bad power-law exponent in '" + spec + "'");
        }
        r.kind = PowerLaw{theta};
    } else {
        throw ConfigError("rate", "unknown rate '" + spec + "' (use power:<theta>, loglog, nlogn)");
    }
    return r;
}

namespace internal {

RateSequence rate_from_json_value(const json& v, const std::string& path) {
    if (v.is_string()) {
        try {
            return parse_rate(v.get<std::string>());
        } catch (const ConfigError& e) {
            throw ConfigError(path, e.what());
        }
    }
    RateSequence r;
    const std::string kind = get_string(require(v, "kind", path), join_path(path, "kind"));
    if (kind == "power") {
        const double theta = get_number(require(v, "theta", path), join_path(path, "theta"));
        if (!(theta > 0.0)) {
            throw ConfigError(join_path(path, "theta"), "must be positive");
        }
        r.kind = PowerLaw{theta};
    } else if (kind == "loglog") {
        r.kind = LogLog{};
    } else if (kind == "nlogn") {
        r.kind = NLogN{};
    } else if (kind == "table") {
        const json& vals = require(v, "values", path);
        if (!vals.is_array() || vals.empty()) {
            throw ConfigError(join_path(path, "values"), "expected a nonempty array");
        }
        Table t;
        for (std::size_t i = 0; i < vals.size(); ++i) {
            t.values.push_back(get_number(vals[i], join_path(path, "values[" + std::to_string(i) + "]")));
        }
        const std::string tail = v.contains("tail") ? get_string(v["tail"], join_path(path, "tail")) : "error";
        if (tail == "extend") {
            t.tail = TailRule::ExtendByLastRatio;
        } else if (tail == "error") {
            t.tail = TailRule::Error;
        } else {
            throw ConfigError(join_path(path, "tail"), "must be 'extend' or 'error'");
        }
        r.kind = std::move(t);
    } else {
        throw ConfigError(join_path(path, "kind"), "unknown rate kind '" + kind + "'");
    }
    if (v.contains("eBar")) {
        const double e = get_number(v["eBar"], join_path(path, "eBar"));
        if (!(e >= 0.0)) {
            throw ConfigError(join_path(path, "eBar"), "must be >= 0");
        }
        r.eBar = e;
    }
    if (v.contains("N")) {
        const long n = get_integer(v["N"], join_path(path, "N"));
        if (n < 1) {
            throw ConfigError(join_path(path, "N"), "must be >= 1");
        }
        r.Nadm = n;
    }
    return r;
}

json rate_to_json_value(const RateSequence& rate) {
    json j = std::visit(overloaded{[](const PowerLaw& p) { return json{{"kind", "power"}, {"theta", p.theta}}; },
                                   [](const LogLog&) { return json{{"kind", "loglog"}}; },
                                   [](const NLogN&) { return json{{"kind", "nlogn"}}; },
                                   [](const Table& t) {
                                       return json{{"kind", "table"},
                                                   {"values", t.values},
                                                   {"tail", t.tail == TailRule::ExtendByLastRatio ? "extend" : "error"}};
                                   }},
                        rate.kind);
    if (rate.eBar) {
        j["eBar"] = *rate.eBar;
    }
    if (rate.Nadm) {
        j["N"] = *rate.Nadm;
    }
    return j;
}

}  // namespace internal

std::string rate_to_json(const RateSequence& rate) { return internal::rate_to_json_value(rate).dump(); }

RateSequence rate_from_json(const std::string& text) {
    internal::json v;
    try {
        v = internal::json::parse(text);
    } catch (const internal::json::parse_error& e) {
        throw ConfigError("rate", std::string("malformed JSON: ") + e.what());
    }
    return internal::rate_from_json_value(v, "rate");
}

}  // namespace quadlab
