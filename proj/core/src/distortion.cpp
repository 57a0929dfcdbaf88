#include "quadlab/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "quadlab/errors.hpp"
#include "quadlab/numeric.hpp"
#include "quadlab/rates.hpp"

namespace quadlab {

LogSigned log_derivative_window(double x0, double a, int start, int end) {
    detail::check<DomainError>(0 <= start && start <= end, "derivative window must satisfy 0 <= start <= end");
    double x = x0;
    for (int k = 0; k < start; ++k) {
        x = step(x, a);
    }
    return log_derivative(x, a, end - start);
}

namespace {

DistortionReport finish(double logRatio, int start, int end, double budget) {
    DistortionReport rep;
    rep.logRatio = logRatio;
    rep.ratio = std::exp(logRatio);
    rep.window = {start, end};
    rep.budget = budget;
    const double logBudget = std::log(budget);
    rep.holds = std::abs(logRatio) <= logBudget;
    return rep;
}

}  // namespace

DistortionReport distortion_window(double x0, double a, double y0, double b, int start, int end,
                                   double budget) {
    const LogSigned num = log_derivative_window(x0, a, start, end);
    const LogSigned den = log_derivative_window(y0, b, start, end);
    if (num.is_zero() || den.is_zero()) {
        throw DegenerateDerivative("distortion ratio: a phase derivative vanishes");
    }
    return finish(num.logMag - den.logMag, start, end, budget);
}

DistortionReport bounded_distortion(Parameter a, double eta, int j) {
    detail::check<DomainError>(j >= 0, "bounded_distortion: j must be >= 0");
    // Ratio of factors is y_i / xi_i = 1 + d_i / xi_i with d_i = F^i(eta) - xi_i
    // carried by its own recurrence, so tiny eta does not round away.
    CompensatedSum logRatio;
    double x = 0.0;
    double d = 0.0;
    for (int i = 1; i <= j; ++i) {
        d = i == 1 ? -a * eta * eta : -a * d * (2.0 * x + d);
        x = step(x, a);
        const double y = x + d;
        if (x == 0.0 || y == 0.0) {
            throw DegenerateDerivative("bounded distortion: a phase derivative vanishes");
        }
        const double q = d / x;
        // orbits on opposite sides of 0 give q < -1
        logRatio.add(q > -1.0 ? std::log1p(q) : std::log(std::abs(y / x)));
    }
    return finish(logRatio.value(), 0, j, 2.0);
}

PhaseParamWindow phase_param_window(Parameter a, int nLo, int nHi) {
    detail::check<DomainError>(1 <= nLo && nLo <= nHi, "phase_param_window: need 1 <= nLo <= nHi");
    PhaseParamWindow w;
    for (int n = nLo; n <= nHi; ++n) {
        w.ratios.emplace_back(n, std::abs(tsujii_ratio(a, n)));
    }
    const std::size_t count = w.ratios.size();
    const std::size_t tail = std::max<std::size_t>(1, count / 4);
    CompensatedSum s;
    for (std::size_t i = count - tail; i < count; ++i) {
        s.add(w.ratios[i].second);
    }
    w.T = s.value() / static_cast<double>(tail);
    double A = 0.0;
    for (const auto& [n, r] : w.ratios) {
        A = std::max(A, std::abs(r / w.T - 1.0));
    }
    w.A = A;
    w.DA = A < 1.0 ? (1.0 + A) / (1.0 - A) : std::numeric_limits<double>::infinity();
    return w;
}

DistortionReport main_distortion(Parameter a, Parameter b, int j, double D1, long m) {
    detail::check<DomainError>(j >= 0, "main_distortion: j must be >= 0");
    detail::check<DomainError>(D1 >= 1.0, "main_distortion: D1 must be >= 1");
    const double ls = static_cast<double>(log_star(static_cast<double>(m)));
    const double budget = std::pow(D1, ls * ls);
    return distortion_window(1.0, a, 1.0, b, 0, j, budget);
}

RestoreDecision restore_decision(const std::vector<double>& samples,
                                 const std::vector<double>& logDerivs, int n, double gammaB,
                                 double CB, double gamma, double C) {
    detail::check<DomainError>(samples.size() == logDerivs.size(),
                               "restore_decision: sample and derivative counts differ");
    const double strong = std::log(CB) + gammaB * (n - 1);
    std::size_t best = samples.size();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (best == samples.size() || logDerivs[i] > logDerivs[best]) {
            best = i;
        }
    }
    if (best == samples.size() || !(logDerivs[best] >= strong)) {
        return RemoveAll{};
    }
    KeepAll keep;
    keep.witness = samples[best];
    keep.witnessLog = logDerivs[best];
    const double weak = std::log(C) + gamma * (n - 1);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!(logDerivs[i] >= weak)) {
            keep.violations.push_back(samples[i]);
        }
    }
    return keep;
}

RestoreDecision restore_derivative_check(const std::vector<double>& samples, int n, double gammaB,
                                         double CB, double gamma, double C) {
    detail::check<DomainError>(n >= 1, "restore_derivative_check: n must be >= 1");
    std::vector<double> logs;
    logs.reserve(samples.size());
    for (double a : samples) {
        logs.push_back(phase_derivative(Parameter(a), n - 1).logMag);
    }
    return restore_decision(samples, logs, n, gammaB, CB, gamma, C);
}

}  // namespace quadlab
