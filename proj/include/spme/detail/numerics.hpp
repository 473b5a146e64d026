#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace spme::detail {

/// Neumaier-compensated accumulator; reductions stay reproducible and
/// accurate independent of magnitude ordering.
class KahanSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// std::pow with fast paths for the exponents that dominate the m = 2, 3
/// solver loops.
inline double pow_real(double base, double expo) noexcept {
    if (expo == 1.0) return base;
    if (expo == 2.0) return base * base;
    if (expo == 0.5) return std::sqrt(base);
    if (expo == 3.0) return base * base * base;
    return std::pow(base, expo);
}

/// (x)_+^expo, the positive-part power used by every closed-form profile.
inline double ppow(double x, double expo) noexcept {
    return x > 0.0 ? pow_real(x, expo) : 0.0;
}

inline double sq(double x) noexcept { return x * x; }

/// Least-squares slope of y against x.
inline double fit_slope(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    KahanSum sx, sy, sxx, sxy;
    for (std::size_t i = 0; i < n; ++i) {
        sx.add(x[i]);
        sy.add(y[i]);
        sxx.add(x[i] * x[i]);
        sxy.add(x[i] * y[i]);
    }
    const double mx = sx.value() / double(n);
    const double my = sy.value() / double(n);
    const double denom = sxx.value() - double(n) * mx * mx;
    return (sxy.value() - double(n) * mx * my) / denom;
}

}  // namespace spme::detail
