#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace tasep::stats {

struct Bounds {
    double lo = 0.0;
    double hi = 0.0;
};

// Wilson score interval for k successes in n trials.
Bounds wilson_interval(std::size_t k, std::size_t n, double z = 1.96);

struct Moments {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    Bounds mean_ci;         // normal approximation, 95%
    Bounds variance_ci;     // normal approximation using the sample fourth moment, 95%
};
Moments moments(std::span<const double> xs);

double median(std::vector<double> xs);
double quantile(std::vector<double> xs, double p);
double correlation(std::span<const double> x, std::span<const double> y);

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double slope_se = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

class Ecdf {
public:
    explicit Ecdf(std::vector<double> samples);
    // Fraction of samples <= x.
    double operator()(double x) const;
    // Fraction of samples < x.
    double left_limit(double x) const;
    std::size_t size() const noexcept { return sorted_.size(); }
    const std::vector<double>& sorted() const noexcept { return sorted_; }

private:
    std::vector<double> sorted_;
};

// sup_x |F_n(x) - F(x)| against a continuous reference. For data living on a
// lattice of spacing `lattice_step` (> 0), the reference is read half a step
// to the right of each atom so a discretized continuous law scores ~0.
double ks_distance(const Ecdf& data, const std::function<double(double)>& cdf, double lattice_step = 0.0);

}  // namespace tasep::stats
