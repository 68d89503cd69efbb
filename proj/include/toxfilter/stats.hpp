#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "errors.hpp"

namespace toxfilter {

inline double mean(const std::vector<double>& xs) {
    if (xs.empty()) throw input_error("mean of empty sample");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

/// Sample standard deviation (n - 1 in the denominator); 0 for n < 2.
inline double sample_stddev(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

inline double median(std::vector<double> xs) {
    if (xs.empty()) throw input_error("median of empty sample");
    std::sort(xs.begin(), xs.end());
    std::size_t mid = xs.size() / 2;
    if (xs.size() % 2 == 1) return xs[mid];
    return 0.5 * (xs[mid - 1] + xs[mid]);
}

/// One-sided Welch two-sample t-test: p-value for the alternative
/// mean(a) > mean(b).  When both sample variances are zero the test is
/// degenerate; the convention here is p = 0.5 for equal means, otherwise 0
/// or 1 depending on the direction of the difference.
inline double welch_one_sided_p(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2)
        throw input_error("welch test needs at least two observations per sample");
    const double ma = mean(a), mb = mean(b);
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    double va = 0.0, vb = 0.0;
    for (double x : a) va += (x - ma) * (x - ma);
    for (double x : b) vb += (x - mb) * (x - mb);
    va /= na - 1.0;
    vb /= nb - 1.0;

    const double se2 = va / na + vb / nb;
    if (se2 <= 0.0) {
        if (ma == mb) return 0.5;
        return ma > mb ? 0.0 : 1.0;
    }
    const double t = (ma - mb) / std::sqrt(se2);
    const double df = se2 * se2 /
                      (va * va / (na * na * (na - 1.0)) + vb * vb / (nb * nb * (nb - 1.0)));
    boost::math::students_t dist(df);
    return boost::math::cdf(boost::math::complement(dist, t));
}

} // namespace toxfilter
