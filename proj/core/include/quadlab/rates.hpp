#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace quadlab {

/// delta_n = n^{-theta}
struct PowerLaw {
    double theta = 1.0;
};
/// delta_n = 1 / (n ln ln n), n >= 3
struct LogLog {};
/// delta_n = 1 / (n ln n), n >= 2
struct NLogN {};

enum class TailRule { ExtendByLastRatio, Error };

/// values[0] is delta_1.
struct Table {
    std::vector<double> values;
    TailRule tail = TailRule::Error;
};

struct RateSequence {
    std::variant<PowerLaw, LogLog, NLogN, Table> kind = PowerLaw{};
    std::optional<double> eBar;
    std::optional<long> Nadm;

    /// delta_n. Throws RateNotDefined outside the domain of the family.
    double operator()(long n) const;
    /// First index where the family is defined.
    long first_index() const noexcept;
    std::string describe() const;
};

/// Number of natural-log applications needed to bring x to <= 1.
int log_star(double x) noexcept;

struct AdmissibleYes {
    double eBar = 0.0;
    long N = 1;
    bool provisional = false;  // eBar was fitted, not declared
};
struct AdmissibleNo {
    long witness = 0;
    std::string reason;
};
using Admissibility = std::variant<AdmissibleYes, AdmissibleNo>;

inline constexpr int kMaxFittedExponent = 64;

/// Positivity, monotonicity and delta_n >= n^{-eBar} on [N, horizon].
/// Without a declared eBar the smallest integer in [0, 64] that works is fitted.
Admissibility is_admissible(const RateSequence& rate, long horizon);

/// Sum_{n=2}^{N} delta_n tau^{(log* n)^3} / ln n, compensated.
double summability_partial(const RateSequence& rate, double tau, long N);

/// Sum over n in (N1, N2] of the same terms.
double summability_increment(const RateSequence& rate, double tau, long N1, long N2);

struct CondensationResult {
    double direct = 0.0;     // sum_{n=q_0}^{q_K - 1} a_n
    double condensed = 0.0;  // sum_{k<K} (q_{k+1} - q_k) a_{q_k}
    double alpha = 0.0;      // max_k (q_{k+1} - q_k) / (q_k - q_{k-1})
    double lower = 0.0;      // alpha^{-1} sum_{k<K-1} (q_{k+2} - q_{k+1}) a_{q_{k+1}}
    bool sandwichHolds = false;
};

/// Schloemilch condensation on partial sums over q_0..q_K.
/// Throws NotIncreasing unless q is strictly increasing and positive.
CondensationResult condensation(const std::function<double(long)>& a, const std::vector<long>& q,
                                int K);

/// Parse "power:<theta>", "loglog", "nlogn".
RateSequence parse_rate(const std::string& spec);

/// JSON text round trip, {"kind": "power", "theta": 1, "eBar": 1, "N": 1}.
std::string rate_to_json(const RateSequence& rate);
RateSequence rate_from_json(const std::string& text);

}  // namespace quadlab
