#pragma once

#include <cmath>

namespace stochlog::detail {

// Neumaier-compensated running sum.
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        const double s = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            carry += (sum - s) + x;
        } else {
            carry += (x - s) + sum;
        }
        sum = s;
    }
    double value() const { return sum + carry; }
};

}  // namespace stochlog::detail
