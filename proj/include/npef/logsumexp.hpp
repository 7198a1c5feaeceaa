#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace npef {

// log(sum_i exp(v[i])) without overflow. Empty input yields -inf.
inline double log_sum_exp(std::span<const double> v) {
    double max_arg = -std::numeric_limits<double>::infinity();
    for (double x : v) {
        if (x > max_arg) max_arg = x;
    }
    if (!std::isfinite(max_arg)) return max_arg;
    double sum = 0.0;
    for (double x : v) sum += std::exp(x - max_arg);
    return max_arg + std::log(sum);
}

inline double log_add(double a, double b) {
    if (a < b) std::swap(a, b);
    if (!std::isfinite(a)) return a;
    return a + std::log1p(std::exp(b - a));
}

}  // namespace npef
