#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <Eigen/Dense>
#include <boost/math/special_functions/airy.hpp>

#include "tasep/limits.hpp"
#include "tasep/types.hpp"

namespace tasep::limits {

double airy_ai(double x) {
    if (x < -50.0) throw InvalidArgument("airy_ai: argument below -50");
    if (x > 100.0) return 0.0;
    return boost::math::airy_ai(x);
}

double airy_ai_prime(double x) {
    if (x < -50.0) throw InvalidArgument("airy_ai_prime: argument below -50");
    if (x > 100.0) return 0.0;
    return boost::math::airy_ai_prime(x);
}

QuadratureRule QuadratureRule::gauss_legendre(int order) {
    if (order < 1) throw InvalidArgument("quadrature order must be positive");
    QuadratureRule r;
    r.nodes_.resize(order);
    r.weights_.resize(order);
    const int n = order;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        r.nodes_[i] = -z;
        r.nodes_[n - 1 - i] = z;
        r.weights_[i] = r.weights_[n - 1 - i] = w;
    }
    return r;
}

void QuadratureRule::map(double a, double b, std::vector<double>& x, std::vector<double>& w) const {
    const double h = 0.5 * (b - a), c = 0.5 * (a + b);
    x.resize(nodes_.size());
    w.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        x[i] = c + h * nodes_[i];
        w[i] = h * weights_[i];
    }
}

double QuadratureRule::integrate(const std::function<double(double)>& f, double a, double b) const {
    const double h = 0.5 * (b - a), c = 0.5 * (a + b);
    double s = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) s += weights_[i] * f(c + h * nodes_[i]);
    return h * s;
}

double integrate_panels(const std::function<double(double)>& f, double a, double b, int panels, const QuadratureRule& rule) {
    if (panels < 1) throw InvalidArgument("integrate_panels: need at least one panel");
    const double h = (b - a) / panels;
    double s = 0.0;
    for (int p = 0; p < panels; ++p) s += rule.integrate(f, a + p * h, a + (p + 1) * h);
    return s;
}

Domain semi_infinite(double s, double length) { return {s, s + std::max(length, length - s)}; }

namespace {

double det_of(const Eigen::MatrixXd& a) { return Eigen::PartialPivLU<Eigen::MatrixXd>(a).determinant(); }

Eigen::MatrixXd nystrom(const Kernel& k, Domain d, const QuadratureRule& rule, std::vector<double>& x, std::vector<double>& w) {
    rule.map(d.lo, d.hi, x, w);
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = std::sqrt(w[i] * w[j]) * k(x[i], x[j]);
    return m;
}

}  // namespace

double fredholm_det(const Kernel& k, Domain d, const QuadratureRule& rule) {
    if (!(d.hi > d.lo)) throw InvalidArgument("fredholm_det: empty domain");
    std::vector<double> x, w;
    const auto m = nystrom(k, d, rule, x, w);
    return det_of(Eigen::MatrixXd::Identity(m.rows(), m.cols()) - m);
}

FredholmEstimate fredholm_det_checked(const Kernel& k, Domain d, int order) {
    const double a = fredholm_det(k, d, QuadratureRule::gauss_legendre(order));
    const double b = fredholm_det(k, d, QuadratureRule::gauss_legendre(2 * order));
    FredholmEstimate e{b, std::abs(b - a)};
    if (e.change > 1e-6) throw std::runtime_error("fredholm determinant did not converge under order doubling");
    return e;
}

namespace {

const QuadratureRule& cached_rule(int order) {
    static std::mutex mu;
    static std::vector<std::pair<int, QuadratureRule>> rules;
    std::lock_guard lock(mu);
    for (const auto& [n, r] : rules)
        if (n == order) return r;
    rules.emplace_back(order, QuadratureRule::gauss_legendre(order));
    return rules.back().second;
}

struct DetAndDensity {
    double det;
    double density;
};

// Both laws: det(I - K_s) and -d/ds det(I - K_s) with K_s(x, y) = k(x, y) on
// (s, s + L), using d/ds log det(I - K_s) = -tr((I - K_s)^{-1} dK_s/ds).
DetAndDensity tracy_widom(Law law, double s, int order, bool want_density) {
    const auto& rule = cached_rule(order);
    std::vector<double> x, w;
    const auto d = semi_infinite(s);
    rule.map(d.lo, d.hi, x, w);
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd a(n, n), da(n, n);
    if (law == Law::kGue) {
        Eigen::VectorXd ai(n), aip(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            ai(i) = airy_ai(x[i]);
            aip(i) = airy_ai_prime(x[i]);
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                const double sw = std::sqrt(w[i] * w[j]);
                double k;
                if (i == j) k = aip(i) * aip(i) - x[i] * ai(i) * ai(i);
                else k = (ai(i) * aip(j) - aip(i) * ai(j)) / (x[i] - x[j]);
                a(i, j) = -sw * k;
                da(i, j) = -sw * ai(i) * ai(j);
            }
            a(i, i) += 1.0;
        }
    } else {
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j <= i; ++j) {
                const double sw = std::sqrt(w[i] * w[j]);
                const double z = 0.5 * (x[i] + x[j]);
                a(i, j) = a(j, i) = -0.5 * sw * airy_ai(z);
                if (want_density) da(i, j) = da(j, i) = 0.5 * sw * airy_ai_prime(z);
            }
            a(i, i) += 1.0;
        }
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    const double det = lu.determinant();
    if (!want_density) return {det, 0.0};
    return {det, -det * lu.solve(da).trace()};
}

}  // namespace

double f_gue(double s, int order) { return tracy_widom(Law::kGue, s, order, false).det; }
double f_goe(double s, int order) { return tracy_widom(Law::kGoe, s, order, false).det; }
double gue_density(double s, int order) { return tracy_widom(Law::kGue, s, order, true).density; }
double goe_density(double s, int order) { return tracy_widom(Law::kGoe, s, order, true).density; }
double airy1_onepoint(double m, int order) { return f_goe(2.0 * m, order); }

std::string to_string(Law law) { return law == Law::kGue ? "gue" : "goe"; }

double DistributionTable::operator()(double v) const {
    if (s.empty()) throw std::logic_error("empty distribution table");
    if (v <= s.front()) return 0.0;
    if (v >= s.back()) return 1.0;
    const auto it = std::upper_bound(s.begin(), s.end(), v);
    const auto i = static_cast<std::size_t>(it - s.begin()) - 1;
    const double h = s[i + 1] - s[i], q = (v - s[i]) / h;
    const double h00 = (1 + 2 * q) * (1 - q) * (1 - q), h10 = q * (1 - q) * (1 - q);
    const double h01 = q * q * (3 - 2 * q), h11 = q * q * (q - 1);
    return std::clamp(h00 * cdf[i] + h10 * h * density[i] + h01 * cdf[i + 1] + h11 * h * density[i + 1], 0.0, 1.0);
}

double DistributionTable::density_at(double v) const {
    if (s.empty()) throw std::logic_error("empty distribution table");
    if (v <= s.front() || v >= s.back()) return 0.0;
    const auto it = std::upper_bound(s.begin(), s.end(), v);
    const auto i = static_cast<std::size_t>(it - s.begin()) - 1;
    const double h = s[i + 1] - s[i], q = (v - s[i]) / h;
    // Derivative of the Hermite interpolant.
    const double d00 = 6 * q * q - 6 * q, d10 = 3 * q * q - 4 * q + 1, d01 = -d00, d11 = 3 * q * q - 2 * q;
    return d00 * cdf[i] / h + d10 * density[i] + d01 * cdf[i + 1] / h + d11 * density[i + 1];
}

namespace {

// Simpson-type integral of g(s_i) * density_i over the grid.
double grid_moment(const DistributionTable& t, const std::function<double(double)>& g) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < t.s.size(); ++i) {
        const double a = t.s[i], b = t.s[i + 1], m = 0.5 * (a + b);
        acc += (b - a) / 6.0 * (g(a) * t.density[i] + 4.0 * g(m) * t.density_at(m) + g(b) * t.density[i + 1]);
    }
    return acc;
}

}  // namespace

double DistributionTable::mean() const {
    return grid_moment(*this, [](double v) { return v; });
}

double DistributionTable::variance() const {
    const double mu = mean();
    return grid_moment(*this, [mu](double v) { return (v - mu) * (v - mu); });
}

void DistributionTable::write_csv(std::ostream& out) const {
    out << "# law=" << to_string(law) << " order=" << order << " points=" << s.size() << "\n";
    out << "s,F\n";
    char buf[64];
    for (std::size_t i = 0; i < s.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", s[i], cdf[i]);
        out << buf;
    }
}

DistributionTable tabulate(Law law, double lo, double hi, double step, int order) {
    if (!(step > 0.0) || !(hi > lo)) throw InvalidArgument("tabulate: need lo < hi and step > 0");
    DistributionTable t;
    t.law = law;
    t.order = order;
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = lo + static_cast<double>(i) * step;
        const auto r = tracy_widom(law, s, order, true);
        t.s.push_back(s);
        t.cdf.push_back(r.det);
        t.density.push_back(r.density);
    }
    return t;
}

const DistributionTable& gue_table() {
    static const DistributionTable t = tabulate(Law::kGue, -12.0, 10.0, 0.02);
    return t;
}

const DistributionTable& goe_table() {
    static const DistributionTable t = tabulate(Law::kGoe, -12.0, 10.0, 0.02);
    return t;
}

}  // namespace tasep::limits
