#pragma once

#include <cstdint>
#include <vector>

#include "quadlab/numeric.hpp"

namespace quadlab {

inline constexpr double kParamMin = 1.0;
inline constexpr double kParamMax = 2.0;

/// A parameter of the family x -> 1 - a x^2, restricted to [1, 2].
class Parameter {
public:
    /// Throws DomainError outside [1, 2] (NaN included).
    explicit Parameter(double a);

    double value() const noexcept { return a_; }
    operator double() const noexcept { return a_; }

private:
    double a_;
};

/// Position and accumulated phase derivative after n steps of the
/// critical orbit: x = xi_n, deriv = d/dx F^n at the critical value 1.
struct OrbitState {
    int n = 0;
    double x = 0.0;
    double logDerivMag = 0.0;
    int derivSign = 1;
};

struct DerivativePair {
    LogSigned phaseLog;   // d/dx F^{n-1}(1; a)
    double paramDeriv;    // d/da F^n(0; a)
    double ratio;         // paramDeriv / phase
};

struct CEEstimate {
    double gammaHat;
    double cHat;
    int horizon;
    int argmin;  // n realising the minimum slope
};

struct RecurrenceEntry {
    int n;
    double exponent;  // -log|xi_n| / log n, NaN when exactHit
    bool exactHit;
};

struct RecurrenceStatistic {
    double maxExponent;
    int argmax;
    std::vector<RecurrenceEntry> table;
};

/// 1 - a x^2. Accepts any a; the library elsewhere restricts to [1, 2].
constexpr double step(double x, double a) noexcept { return 1.0 - a * x * x; }

/// xi_0 .. xi_n with xi_0 = 0.
std::vector<double> critical_orbit(Parameter a, int n);

/// The critical orbit paired with d/dx F^n(1; a) in log form, states 0..n.
std::vector<OrbitState> orbit_states(Parameter a, int n);

/// d/dx F^n(x0; a) accumulated in log space.
LogSigned log_derivative(double x0, double a, int n);

/// d/dx F^n(1; a).
LogSigned phase_derivative(Parameter a, int n);

/// Sum_{k<n} -xi_k^2 / d/dx F^k(1; a), compensated.
/// Throws DegenerateDerivative if d/dx F^{n-1}(1; a) = 0.
double tsujii_ratio(Parameter a, int n);

/// d/da F^n(0; a), n >= 1. Uses the ratio identity, or the forward
/// recurrence when the phase derivative vanishes inside the window.
double param_derivative(Parameter a, int n);

DerivativePair derivative_pair(Parameter a, int n);

/// d/da F^n(0; a) by D_{j+1} = -xi_j^2 - 2 a xi_j D_j.
double param_derivative_forward(Parameter a, int n);

/// d/da F^j(x0; a) by the same forward recurrence started at x0.
double param_derivative_at(double x0, double a, int j);

/// gammaHat = min_{1<=n<=N} log|d/dx F^n(1;a)| / n. cHat makes the bound
/// tight at the minimiser, which forces cHat = 1.
CEEstimate ce_estimate(Parameter a, int N);

/// max_{2<=n<=N} -log|xi_n| / log n, exact zeros flagged and skipped.
RecurrenceStatistic recurrence_statistic(Parameter a, int N, bool keepTable = true);

}  // namespace quadlab
