#include "tasep/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/statistics/bivariate_statistics.hpp>
#include <boost/math/statistics/linear_regression.hpp>
#include <boost/math/statistics/univariate_statistics.hpp>

#include "tasep/types.hpp"

namespace tasep::stats {

Bounds wilson_interval(std::size_t k, std::size_t n, double z) {
    if (k > n) throw InvalidArgument("more successes than trials");
    if (n == 0) return {0.0, 1.0};
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double centre = (p + z2 / (2 * nn)) / (1 + z2 / nn);
    const double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / (1 + z2 / nn);
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

Moments moments(std::span<const double> xs) {
    Moments m;
    m.n = xs.size();
    if (m.n == 0) return m;
    if (m.n == 1) {
        m.mean = xs[0];
        m.mean_ci = {xs[0], xs[0]};
        return m;
    }
    const auto [mean, var] = boost::math::statistics::mean_and_sample_variance(xs);
    m.mean = mean;
    m.variance = var;
    const double nn = static_cast<double>(m.n);
    const double se = std::sqrt(var / nn);
    m.mean_ci = {mean - 1.96 * se, mean + 1.96 * se};
    double m4 = 0.0;
    for (double x : xs) m4 += std::pow(x - mean, 4);
    m4 /= nn;
    const double var_se = std::sqrt(std::max(0.0, (m4 - var * var * (nn - 3) / (nn - 1)) / nn));
    m.variance_ci = {var - 1.96 * var_se, var + 1.96 * var_se};
    return m;
}

double quantile(std::vector<double> xs, double p) {
    if (xs.empty()) throw InvalidArgument("quantile of empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("quantile level outside [0,1]");
    std::sort(xs.begin(), xs.end());
    const double pos = p * static_cast<double>(xs.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    if (i + 1 >= xs.size()) return xs.back();
    return xs[i] + (pos - static_cast<double>(i)) * (xs[i + 1] - xs[i]);
}

double median(std::vector<double> xs) {
    if (xs.empty()) throw InvalidArgument("median of empty sample");
    return boost::math::statistics::median(xs);
}

double correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("correlation needs two equal samples of size >= 2");
    return boost::math::statistics::correlation_coefficient(x, y);
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("line fit needs at least two points");
    std::vector<double> xv(x.begin(), x.end()), yv(y.begin(), y.end());
    const auto [c0, c1] = boost::math::statistics::simple_ordinary_least_squares(xv, yv);
    LineFit f{c0, c1, 0.0};
    if (x.size() > 2) {
        const double n = static_cast<double>(x.size());
        const auto [mx, vx] = boost::math::statistics::mean_and_sample_variance(xv);
        (void)mx;
        double rss = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) rss += std::pow(y[i] - c0 - c1 * x[i], 2);
        f.slope_se = std::sqrt(rss / (n - 2) / (vx * (n - 1)));
    }
    return f;
}

Ecdf::Ecdf(std::vector<double> samples) : sorted_(std::move(samples)) {
    if (sorted_.empty()) throw InvalidArgument("empirical CDF of empty sample");
    std::sort(sorted_.begin(), sorted_.end());
}

double Ecdf::operator()(double x) const {
    return static_cast<double>(std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin()) /
           static_cast<double>(sorted_.size());
}

double Ecdf::left_limit(double x) const {
    return static_cast<double>(std::lower_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin()) /
           static_cast<double>(sorted_.size());
}

double ks_distance(const Ecdf& data, const std::function<double(double)>& cdf, double lattice_step) {
    if (lattice_step < 0.0) throw InvalidArgument("negative lattice step");
    const auto& xs = data.sorted();
    const double half = lattice_step / 2;
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i > 0 && xs[i] == xs[i - 1]) continue;
        const double above = data(xs[i]);
        const double below = data.left_limit(xs[i]);
        d = std::max(d, std::abs(above - cdf(xs[i] + half)));
        d = std::max(d, std::abs(below - cdf(xs[i] - half)));
    }
    return d;
}

}  // namespace tasep::stats
