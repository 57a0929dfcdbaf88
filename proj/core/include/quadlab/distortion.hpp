#pragma once

#include <utility>
#include <variant>
#include <vector>

#include "quadlab/dynamics.hpp"

namespace quadlab {

struct DistortionReport {
    double ratio = 1.0;
    double logRatio = 0.0;
    std::pair<int, int> window{0, 0};  // [start, end) in steps
    double budget = 2.0;
    bool holds = true;  // ratio <= budget and 1/ratio <= budget
};

/// log|d/dx F^{end-start}| along the orbit of x0 starting at step `start`,
/// i.e. log|d/dx F^{end}(x0)| - log|d/dx F^{start}(x0)|.
LogSigned log_derivative_window(double x0, double a, int start, int end);

/// Ratio of phase derivatives of two orbits over [start, end).
/// Throws DegenerateDerivative if either vanishes.
DistortionReport distortion_window(double x0, double a, double y0, double b, int start, int end,
                                   double budget);

/// |d/dx F^j(1 - a eta^2; a) / d/dx F^j(1; a)| against the budget 2.
DistortionReport bounded_distortion(Parameter a, double eta, int j);

struct PhaseParamWindow {
    std::vector<std::pair<int, double>> ratios;  // (n, |tsujii_ratio(a, n)|)
    double T = 0.0;   // mean of the last quartile
    double A = 0.0;   // max_n | ratio_n / T - 1 |
    double DA = 1.0;  // (1 + A) / (1 - A), +inf when A >= 1
};

/// Ratios for n in [nLo, nHi]. Throws DegenerateDerivative.
PhaseParamWindow phase_param_window(Parameter a, int nLo, int nHi);

/// |d/dx F^j(1; a) / d/dx F^j(1; b)| against D1^{(log* m)^2}.
DistortionReport main_distortion(Parameter a, Parameter b, int j, double D1, long m);

struct RemoveAll {};
struct KeepAll {
    double witness = 0.0;
    double witnessLog = 0.0;
    std::vector<double> violations;  // samples failing the (gamma, C) bound
};
using RestoreDecision = std::variant<RemoveAll, KeepAll>;

/// Keep the interval when some sample satisfies
/// log|d/dx F^{n-1}(1; a')| >= log C_B + gamma_B (n - 1).
RestoreDecision restore_derivative_check(const std::vector<double>& samples, int n, double gammaB,
                                         double CB, double gamma, double C);

/// Same rule on precomputed log|d/dx F^{n-1}(1; a_i)| values.
RestoreDecision restore_decision(const std::vector<double>& samples,
                                 const std::vector<double>& logDerivs, int n, double gammaB,
                                 double CB, double gamma, double C);

}  // namespace quadlab
