#pragma once

#include <cmath>
#include <span>

namespace zbias {

/// Absolute tolerance for algebraic identities and weak inequalities.
inline constexpr double kIdentityTol = 1e-12;
/// Absolute tolerance for input validation (pmf sums, consistency constraints).
inline constexpr double kValidationTol = 1e-9;
/// Residual below which a fitted treatment model counts as exact.
inline constexpr double kModelFitTol = 1e-9;
/// Default merge tolerance for equal propensity scores.
inline constexpr double kPropensityMergeTol = 1e-9;

/// Neumaier-compensated accumulator.
class CompensatedSum {
public:
    CompensatedSum& operator+=(double x) noexcept {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
        return *this;
    }

    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_total(std::span<const double> xs) noexcept {
    CompensatedSum s;
    for (double x : xs) s += x;
    return s.value();
}

}  // namespace zbias
