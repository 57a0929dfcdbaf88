#include "quadlab/dynamics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "quadlab/errors.hpp"

namespace quadlab {

Parameter::Parameter(double a) : a_(a) {
    if (!(a >= kParamMin && a <= kParamMax)) {
        throw DomainError("parameter a must lie in [1, 2], got " + format_double(a));
    }
}

std::vector<double> critical_orbit(Parameter a, int n) {
    detail::check<DomainError>(n >= 0, "critical_orbit: n must be >= 0");
    std::vector<double> xi(static_cast<std::size_t>(n) + 1);
    xi[0] = 0.0;
    for (int j = 0; j < n; ++j) {
        xi[j + 1] = step(xi[j], a);
    }
    return xi;
}

std::vector<OrbitState> orbit_states(Parameter a, int n) {
    const auto xi = critical_orbit(a, n + 1);
    std::vector<OrbitState> out;
    out.reserve(static_cast<std::size_t>(n) + 1);
    LogSigned d{0.0, 1};
    for (int k = 0; k <= n; ++k) {
        out.push_back({k, xi[k], d.logMag, d.sign});
        d.mul(-2.0 * a * xi[k + 1]);
    }
    return out;
}

LogSigned log_derivative(double x0, double a, int n) {
    LogSigned d{0.0, 1};
    double x = x0;
    for (int k = 0; k < n; ++k) {
        d.mul(-2.0 * a * x);
        if (d.is_zero()) {
            break;
        }
        x = step(x, a);
    }
    return d;
}

LogSigned phase_derivative(Parameter a, int n) {
    detail::check<DomainError>(n >= 0, "phase_derivative: n must be >= 0");
    return log_derivative(1.0, a, n);
}

namespace {

// Orbit positions feeding the parameter derivative are stepped in extended
// precision: in binary64 their rounding error grows like the derivative itself
// and costs about five digits by n = 40.
using wide = long double;

// Shared by tsujii_ratio and param_derivative. Returns false when a phase
// derivative vanishes before index n-1.
bool ratio_sum(double a, int n, double& ratio, LogSigned& phaseLast) {
    CompensatedSum sum;
    const wide aw = a;
    wide xi = 0.0L;         // xi_k
    LogSigned d{0.0, 1};    // d/dx F^k(1; a)
    for (int k = 0; k < n; ++k) {
        if (d.is_zero()) {
            return false;
        }
        if (xi != 0.0L) {
            const double logTerm = static_cast<double>(2.0L * std::log(std::abs(xi))) - d.logMag;
            sum.add(-static_cast<double>(d.sign) * std::exp(logTerm));
        }
        phaseLast = d;
        xi = 1.0L - aw * xi * xi;
        d.mul(static_cast<double>(-2.0L * aw * xi));
    }
    ratio = sum.value();
    return true;
}

}  // namespace

double tsujii_ratio(Parameter a, int n) {
    detail::check<DomainError>(n >= 1, "tsujii_ratio: n must be >= 1");
    double ratio = 0.0;
    LogSigned phase;
    if (!ratio_sum(a, n, ratio, phase)) {
        throw DegenerateDerivative("tsujii_ratio: phase derivative vanishes at a = " +
                                   format_double(a));
    }
    return ratio;
}

double param_derivative_forward(Parameter a, int n) {
    detail::check<DomainError>(n >= 0, "param_derivative_forward: n must be >= 0");
    return param_derivative_at(0.0, a, n);
}

double param_derivative_at(double x0, double a, int j) {
    const wide aw = a;
    wide x = x0;
    wide d = 0.0L;
    for (int k = 0; k < j; ++k) {
        d = -x * x - 2.0L * aw * x * d;
        x = 1.0L - aw * x * x;
    }
    return static_cast<double>(d);
}

DerivativePair derivative_pair(Parameter a, int n) {
    detail::check<DomainError>(n >= 1, "derivative_pair: n must be >= 1");
    double ratio = 0.0;
    LogSigned phase;
    if (ratio_sum(a, n, ratio, phase)) {
        const double raw = phase.value() * ratio;
        return {phase, raw, ratio};
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {phase_derivative(a, n - 1), param_derivative_forward(a, n), nan};
}

double param_derivative(Parameter a, int n) { return derivative_pair(a, n).paramDeriv; }

CEEstimate ce_estimate(Parameter a, int N) {
    detail::check<DomainError>(N >= 1, "ce_estimate: N must be >= 1");
    double best = std::numeric_limits<double>::infinity();
    int argmin = 1;
    LogSigned d{0.0, 1};
    double x = 1.0;
    for (int n = 1; n <= N; ++n) {
        d.mul(-2.0 * a * x);
        x = step(x, a);
        if (d.is_zero()) {
            return {-std::numeric_limits<double>::infinity(), 1.0, N, n};
        }
        const double slope = d.logMag / n;
        if (slope < best) {
            best = slope;
            argmin = n;
        }
    }
    return {best, 1.0, N, argmin};
}

RecurrenceStatistic recurrence_statistic(Parameter a, int N, bool keepTable) {
    detail::check<DomainError>(N >= 2, "recurrence_statistic: N must be >= 2");
    RecurrenceStatistic out{-std::numeric_limits<double>::infinity(), 0, {}};
    if (keepTable) {
        out.table.reserve(static_cast<std::size_t>(N) - 1);
    }
    double x = step(0.0, a);  // xi_1
    for (int n = 2; n <= N; ++n) {
        x = step(x, a);
        if (x == 0.0) {
            if (keepTable) {
                out.table.push_back({n, std::numeric_limits<double>::quiet_NaN(), true});
            }
            continue;
        }
        const double e = -std::log(std::abs(x)) / std::log(static_cast<double>(n));
        if (keepTable) {
            out.table.push_back({n, e, false});
        }
        if (e > out.maxExponent) {
            out.maxExponent = e;
            out.argmax = n;
        }
    }
    return out;
}

}  // namespace quadlab
