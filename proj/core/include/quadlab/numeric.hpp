#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>

namespace quadlab {

/// Neumaier's variant of Kahan summation.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    CompensatedSum& operator+=(double x) noexcept {
        add(x);
        return *this;
    }

    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) noexcept {
    CompensatedSum s;
    for (double x : xs) {
        s.add(x);
    }
    return s.value();
}

/// A real number stored as natural-log magnitude and sign.
/// Zero is (-inf, 0).
struct LogSigned {
    double logMag = 0.0;
    int sign = 1;

    static LogSigned zero() noexcept { return {-std::numeric_limits<double>::infinity(), 0}; }

    static LogSigned from(double v) noexcept {
        if (v == 0.0) {
            return zero();
        }
        return {std::log(std::abs(v)), v < 0.0 ? -1 : 1};
    }

    bool is_zero() const noexcept { return sign == 0; }

    /// Multiply in place by a raw factor.
    void mul(double factor) noexcept {
        if (sign == 0) {
            return;
        }
        if (factor == 0.0) {
            *this = zero();
            return;
        }
        logMag += std::log(std::abs(factor));
        if (factor < 0.0) {
            sign = -sign;
        }
    }

    /// Raw value; may overflow to +-inf.
    double value() const noexcept { return sign == 0 ? 0.0 : sign * std::exp(logMag); }
};

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

}  // namespace quadlab
