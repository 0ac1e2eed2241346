#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <mpfr.h>

#include "tasep/limits.hpp"
#include "tasep/types.hpp"

namespace tasep::limits {

namespace {

class Real {
public:
    explicit Real(mpfr_prec_t bits) {
        mpfr_init2(v_, bits);
        mpfr_set_ui(v_, 0, MPFR_RNDN);
    }
    Real(const Real&) = delete;
    Real& operator=(const Real&) = delete;
    ~Real() { mpfr_clear(v_); }
    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }

private:
    mpfr_t v_;
};

// out = C(a, j) for integer a of any sign.
void binomial(Real& out, long a, long j) {
    mpfr_set_ui(out.get(), 1, MPFR_RNDN);
    for (long i = 0; i < j; ++i) {
        mpfr_mul_si(out.get(), out.get(), a - i, MPFR_RNDN);
        mpfr_div_si(out.get(), out.get(), i + 1, MPFR_RNDN);
    }
}

// exp(-c t) (1 - lambda)^p1 lambda^p2 sum_{j=0}^{jmax} C(a, j) (-1)^j t^{q-j} / (q-j)!
double series(mpfr_prec_t bits, double t, double lambda, double c, long p1, long p2, long a, long jmax, long q) {
    Real tt(bits), acc(bits), term(bits), tmp(bits), b(bits);
    mpfr_set_d(tt.get(), t, MPFR_RNDN);
    for (long j = 0; j <= jmax; ++j) {
        mpfr_pow_si(term.get(), tt.get(), q - j, MPFR_RNDN);
        mpfr_fac_ui(tmp.get(), static_cast<unsigned long>(q - j), MPFR_RNDN);
        mpfr_div(term.get(), term.get(), tmp.get(), MPFR_RNDN);
        binomial(b, a, j);
        mpfr_mul(term.get(), term.get(), b.get(), MPFR_RNDN);
        if (j % 2) mpfr_sub(acc.get(), acc.get(), term.get(), MPFR_RNDN);
        else mpfr_add(acc.get(), acc.get(), term.get(), MPFR_RNDN);
    }
    mpfr_set_d(tmp.get(), -c, MPFR_RNDN);
    mpfr_mul(tmp.get(), tmp.get(), tt.get(), MPFR_RNDN);
    mpfr_exp(tmp.get(), tmp.get(), MPFR_RNDN);
    mpfr_mul(acc.get(), acc.get(), tmp.get(), MPFR_RNDN);
    mpfr_set_d(tmp.get(), 1.0, MPFR_RNDN);
    mpfr_sub_d(tmp.get(), tmp.get(), lambda, MPFR_RNDN);
    mpfr_pow_si(tmp.get(), tmp.get(), p1, MPFR_RNDN);
    mpfr_mul(acc.get(), acc.get(), tmp.get(), MPFR_RNDN);
    mpfr_set_d(tmp.get(), lambda, MPFR_RNDN);
    mpfr_pow_si(tmp.get(), tmp.get(), p2, MPFR_RNDN);
    mpfr_mul(acc.get(), acc.get(), tmp.get(), MPFR_RNDN);
    return mpfr_get_d(acc.get(), MPFR_RNDN);
}

double checked_series(double t, double lambda, double c, long p1, long p2, long a, long jmax, long q) {
    const double lo = series(512, t, lambda, c, p1, p2, a, jmax, q);
    const double hi = series(1024, t, lambda, c, p1, p2, a, jmax, q);
    if (std::abs(lo - hi) > 1e-8 * std::abs(hi) && std::abs(lo - hi) > 1e-300)
        throw std::runtime_error("kernel series lost precision at 512 bits");
    return hi;
}

void check_args(double t, double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidArgument("kernel: lambda must lie in (0, 1)");
    if (!(t >= 0.0 && t <= 500.0)) throw InvalidArgument("kernel: t must lie in [0, 500]");
}

}  // namespace

double kernel_Q(std::int64_t n, std::int64_t dx, double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidArgument("kernel_Q: lambda must lie in (0, 1)");
    if (n < 1 || dx < n) return 0.0;
    const double nn = static_cast<double>(n), d = static_cast<double>(dx);
    const double log_binom = std::lgamma(d) - std::lgamma(nn) - std::lgamma(d - nn + 1.0);
    return std::exp(log_binom + (d - nn) * std::log1p(-lambda) + nn * std::log(lambda));
}

double kernel_S(double t, std::int64_t n, std::int64_t y, std::int64_t x, double lambda) {
    check_args(t, lambda);
    if (n < 0) throw InvalidArgument("kernel_S: n must be non-negative");
    const long k = static_cast<long>(n + x - y);
    if (k < 0) return 0.0;
    const long nn = static_cast<long>(n);
    return checked_series(t, lambda, 1.0 - lambda, k, -nn, nn, std::min(nn, k), k);
}

double kernel_Sbar(double t, std::int64_t n, std::int64_t y, std::int64_t x, double lambda) {
    check_args(t, lambda);
    if (n < 1) return 0.0;
    const long nn = static_cast<long>(n);
    const long m = static_cast<long>(x - y + n - 1);
    return checked_series(t, lambda, lambda, -nn + static_cast<long>(y - x), nn, m, nn - 1, nn - 1);
}

InitialPositions flat_positions(double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidArgument("flat_positions: lambda must lie in (0, 1)");
    return [lambda](std::int64_t m) { return -static_cast<std::int64_t>(std::floor(static_cast<double>(m) / lambda)); };
}

double kernel_Sbar_epi(double t, std::int64_t n, std::int64_t y, std::int64_t x, double lambda, const InitialPositions& x0) {
    check_args(t, lambda);
    if (n < 1) return 0.0;
    // Hitting at m = 0 needs y > X_0(1).
    if (y > x0(1)) return kernel_Sbar(t, n, y, x, lambda);

    // p[b - lo] = P(B_m = b, tau > m) for b in [lo, X_0(m + 1)].
    const double q = 1.0 - lambda;
    double result = 0.0, dropped = 0.0, max_abs = 0.0;
    std::int64_t hi = x0(1);
    std::int64_t width = static_cast<std::int64_t>(std::ceil((40.0 * std::sqrt(static_cast<double>(n)) + 40.0) / lambda));
    std::int64_t lo = y - width;
    std::vector<double> p(static_cast<std::size_t>(hi - lo + 1), 0.0);
    p[static_cast<std::size_t>(y - lo)] = 1.0;
    for (std::int64_t m = 1; m < n; ++m) {
        const std::int64_t new_hi_bound = x0(m + 1);
        // Convolve with the geometric step: next(b) = sum_{c > b} p(c) lambda q^{c - b - 1},
        // through the recurrence r(b) = lambda p(b + 1) + q r(b + 1).
        const std::int64_t new_lo = lo - static_cast<std::int64_t>(std::ceil(1.0 / lambda));
        std::vector<double> next(static_cast<std::size_t>(hi - new_lo + 1), 0.0);
        double r = 0.0;
        for (std::int64_t b = hi - 1; b >= new_lo; --b) {
            const double pb1 = (b + 1 >= lo && b + 1 <= hi) ? p[static_cast<std::size_t>(b + 1 - lo)] : 0.0;
            r = lambda * pb1 + q * r;
            next[static_cast<std::size_t>(b - new_lo)] = r;
        }
        // Hits: b > X_0(m + 1). Those contribute Sbar_{n - m}(b, x).
        for (std::int64_t b = new_hi_bound + 1; b <= hi; ++b) {
            const double w = next[static_cast<std::size_t>(b - new_lo)];
            if (w < 1e-300) continue;
            const double s = kernel_Sbar(t, n - m, b, x, lambda);
            max_abs = std::max(max_abs, std::abs(s));
            result += w * s;
        }
        // Keep survivors in [lo, X_0(m + 1)], dropping mass below the cut.
        const std::int64_t keep_lo = std::max(new_lo, new_hi_bound - width);
        for (std::int64_t b = new_lo; b < keep_lo; ++b) dropped += next[static_cast<std::size_t>(b - new_lo)];
        std::vector<double> kept(static_cast<std::size_t>(std::max<std::int64_t>(new_hi_bound - keep_lo + 1, 0)), 0.0);
        for (std::int64_t b = keep_lo; b <= std::min(new_hi_bound, hi); ++b)
            kept[static_cast<std::size_t>(b - keep_lo)] = next[static_cast<std::size_t>(b - new_lo)];
        p.swap(kept);
        lo = keep_lo;
        hi = new_hi_bound;
        if (p.empty()) break;
    }
    if (dropped * std::max(max_abs, 1.0) > 1e-8) throw std::runtime_error("kernel_Sbar_epi: walk truncation too coarse");
    return result;
}

double KernelScaling::factor() const {
    return std::cbrt(2.0) * std::pow(chi(), 2.0 / 3.0) * std::cbrt(t) / lambda;
}

KernelScaling::Point KernelScaling::point(double xi, double u) const {
    const double c = std::pow(2.0, 5.0 / 3.0) * std::cbrt(chi());
    const double t23 = std::pow(t, 2.0 / 3.0);
    const double nn = lambda * lambda * t + lambda * c * xi * t23;
    Point p{};
    p.n = static_cast<std::int64_t>(std::llround(nn));
    p.xi = (static_cast<double>(p.n) - lambda * lambda * t) / (lambda * c * t23);
    const double xx = (1.0 - 2.0 * lambda) * t - c * p.xi * t23 - factor() * u;
    p.x = static_cast<std::int64_t>(std::llround(xx));
    p.u = u_of(p.x, p.xi);
    return p;
}

double KernelScaling::u_of(std::int64_t x, double xi) const {
    const double c = std::pow(2.0, 5.0 / 3.0) * std::cbrt(chi());
    const double t23 = std::pow(t, 2.0 / 3.0);
    return ((1.0 - 2.0 * lambda) * t - c * xi * t23 - static_cast<double>(x)) / factor();
}

std::int64_t KernelScaling::y(double v) const { return static_cast<std::int64_t>(std::llround(factor() * v)); }
double KernelScaling::v_of(std::int64_t yy) const { return static_cast<double>(yy) / factor(); }

double limit_Q(double dxi, double du) {
    if (!(dxi > 0.0)) throw InvalidArgument("limit_Q: needs xi_j > xi_i");
    return std::exp(-du * du / (4.0 * dxi)) / std::sqrt(4.0 * std::numbers::pi * dxi);
}

namespace {

double airy_limit(double xi, double w, double sign) {
    const double c = std::cbrt(2.0);
    return c * airy_ai(std::pow(2.0, 4.0 / 3.0) * xi * xi + c * w) * std::exp(sign * (8.0 / 3.0 * xi * xi * xi + 2.0 * xi * w));
}

}  // namespace

double limit_S(double xi, double u, double v) { return airy_limit(xi, u + v, -1.0); }
double limit_Sbar(double xi, double u, double v) { return airy_limit(xi, u + v, 1.0); }
double limit_Sbar_epi(double xi, double u, double v) { return airy_limit(xi, v >= 0.0 ? u + v : u - v, 1.0); }

}  // namespace tasep::limits
