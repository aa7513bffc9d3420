#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "nlsp/errors.hpp"

namespace nlsp {

// Quantile with the lower-interpolation convention: sorted[floor((n-1) q)].
// Every aggregate in emitted CSVs uses this rule.
inline double quantile_lower(std::vector<double> values, double q) {
    if (values.empty()) throw ValidationError("quantile: empty sample");
    std::sort(values.begin(), values.end());
    const double h = q * static_cast<double>(values.size() - 1);
    const std::size_t idx = static_cast<std::size_t>(std::floor(h));
    return values[std::min(idx, values.size() - 1)];
}

inline double median_lower(const std::vector<double>& v) { return quantile_lower(v, 0.5); }

inline double mean(const std::vector<double>& v) {
    if (v.empty()) throw ValidationError("mean: empty sample");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double stdev(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

struct QuartileSummary {
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
};

inline QuartileSummary quartiles(const std::vector<double>& v) {
    return {quantile_lower(v, 0.5), quantile_lower(v, 0.25), quantile_lower(v, 0.75)};
}

} // namespace nlsp
