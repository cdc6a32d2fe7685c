#pragma once

// Small estimators shared by the sampler diagnostics and the experiments.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "geonum/error.hpp"

namespace geonum {

/// Neumaier compensated sum; the result depends only on the order of additions.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0;
    double comp_ = 0;
};

inline double mean(std::span<const double> xs) {
    if (xs.empty()) throw Error(ErrorCode::InsufficientData, "mean of an empty series");
    CompensatedSum s;
    for (double x : xs) s.add(x);
    return s.value() / static_cast<double>(xs.size());
}

/// Unbiased sample variance.
inline double variance(std::span<const double> xs) {
    if (xs.size() < 2) throw Error(ErrorCode::InsufficientData, "variance needs two values");
    const double m = mean(xs);
    CompensatedSum s;
    for (double x : xs) s.add((x - m) * (x - m));
    return s.value() / static_cast<double>(xs.size() - 1);
}

/// Sample autocorrelation at the given lag (0 for a constant series).
inline double autocorrelation(std::span<const double> xs, std::size_t lag) {
    if (xs.size() <= lag + 1) throw Error(ErrorCode::InsufficientData, "series shorter than lag");
    const double m = mean(xs);
    CompensatedSum c0, cl;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        c0.add((xs[i] - m) * (xs[i] - m));
        if (i + lag < xs.size()) cl.add((xs[i] - m) * (xs[i + lag] - m));
    }
    if (c0.value() <= 0) return 0;
    return cl.value() / c0.value();
}

/// Means of `batches` equal consecutive blocks; a leading remainder is dropped.
inline std::vector<double> batch_means(std::span<const double> xs, std::size_t batches) {
    if (batches < 1 || xs.size() < batches) throw Error(ErrorCode::InsufficientData, "too few values for batches");
    const std::size_t size = xs.size() / batches;
    const std::size_t skip = xs.size() - size * batches;
    std::vector<double> out;
    out.reserve(batches);
    for (std::size_t b = 0; b < batches; ++b) out.push_back(mean(xs.subspan(skip + b * size, size)));
    return out;
}

/// Standard error of the overall mean from batch means pooled over several
/// chains, `batches` blocks per chain.
inline double pooled_batch_se(const std::vector<std::vector<double>>& chains, std::size_t batches) {
    std::vector<double> all;
    for (const auto& c : chains) {
        const auto bm = batch_means(c, batches);
        all.insert(all.end(), bm.begin(), bm.end());
    }
    if (all.size() < 2) throw Error(ErrorCode::InsufficientData, "need at least two batches");
    return std::sqrt(variance(all) / static_cast<double>(all.size()));
}

struct Interval {
    double low = 0;
    double high = 0;
};

/// Wilson score interval for a proportion observed with (effective) size n.
inline Interval wilson_interval(double p, double n, double z) {
    if (!(n > 0)) return {0.0, 1.0};
    const double z2 = z * z;
    const double denom = 1 + z2 / n;
    const double centre = (p + z2 / (2 * n)) / denom;
    const double half = z * std::sqrt(std::max(0.0, p * (1 - p) / n + z2 / (4 * n * n))) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

struct LineFit {
    double intercept = 0;
    double slope = 0;
    double slope_se = 0;
};

/// Weighted least squares y = a + b x with weights w taken as exact inverse variances.
inline LineFit weighted_line_fit(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
    if (x.size() != y.size() || x.size() != w.size()) throw Error(ErrorCode::DimensionMismatch, "fit input lengths");
    if (x.size() < 2) throw Error(ErrorCode::InsufficientData, "a line fit needs two points");
    CompensatedSum sw, swx, swy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw.add(w[i]);
        swx.add(w[i] * x[i]);
        swy.add(w[i] * y[i]);
    }
    const double xbar = swx.value() / sw.value(), ybar = swy.value() / sw.value();
    CompensatedSum sxx, sxy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx.add(w[i] * (x[i] - xbar) * (x[i] - xbar));
        sxy.add(w[i] * (x[i] - xbar) * (y[i] - ybar));
    }
    if (!(sxx.value() > 0)) throw Error(ErrorCode::InsufficientData, "fit abscissae are all equal");
    LineFit f;
    f.slope = sxy.value() / sxx.value();
    f.intercept = ybar - f.slope * xbar;
    f.slope_se = std::sqrt(1.0 / sxx.value());
    return f;
}

/// Ordinary least squares with the usual residual-based slope error (0 for two points).
inline LineFit line_fit(std::span<const double> x, std::span<const double> y) {
    const std::vector<double> w(x.size(), 1.0);
    LineFit f = weighted_line_fit(x, y, w);
    if (x.size() > 2) {
        CompensatedSum rss, sxx;
        const double xbar = mean(x);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - f.intercept - f.slope * x[i];
            rss.add(r * r);
            sxx.add((x[i] - xbar) * (x[i] - xbar));
        }
        f.slope_se = std::sqrt(rss.value() / static_cast<double>(x.size() - 2) / sxx.value());
    } else {
        f.slope_se = 0;
    }
    return f;
}

}  // namespace geonum
