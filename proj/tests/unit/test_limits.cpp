#include <doctest.h>

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "tasep/limits.hpp"
#include "tasep/stats.hpp"
#include "tasep/types.hpp"

using namespace tasep;
using namespace tasep::limits;

namespace {

// Maclaurin series of Ai in long double.
long double airy_series(long double x) {
    const long double c1 = 0.355028053887817239260L, c2 = 0.258819403792806798405L;
    long double f = 1, g = x, tf = 1, tg = x;
    for (int k = 1; k < 200; ++k) {
        tf *= x * x * x / ((3.0L * k - 1) * (3.0L * k));
        tg *= x * x * x / ((3.0L * k) * (3.0L * k + 1));
        f += tf;
        g += tg;
    }
    return c1 * f - c2 * g;
}

// Cauchy coefficient [w^p] of f by the trapezoid rule on |w| = r.
template <class F>
long double contour_coefficient(F f, int p, long double r = 1.0L, int m = 512) {
    long double acc = 0;
    for (int k = 0; k < m; ++k) {
        const long double th = 2 * std::numbers::pi_v<long double> * k / m;
        const std::complex<long double> w = std::polar(r, th);
        acc += (f(w) * std::pow(w, -p)).real();
    }
    return acc / m;
}

// Largest eigenvalue of the scaled tridiagonal beta-Hermite model, whose
// fluctuations around 2 sqrt(N) on the N^{-1/6} scale follow TW_beta.
double tridiagonal_edge(int n, double beta, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Eigen::VectorXd d(n), e(n - 1);
    const double s = std::sqrt(2.0 / beta);
    for (int i = 0; i < n; ++i) d(i) = s * normal(rng);
    for (int i = 0; i < n - 1; ++i) {
        std::chi_squared_distribution<double> chi(beta * (n - 1 - i));
        e(i) = s * std::sqrt(chi(rng) / 2.0);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
    return (es.eigenvalues().maxCoeff() - 2.0 * std::sqrt(n)) * std::pow(n, 1.0 / 6.0);
}

}  // namespace

TEST_CASE("airy function against its Maclaurin series") {
    for (double x = -2.0; x <= 2.0; x += 0.125) CHECK(airy_ai(x) == doctest::Approx(static_cast<double>(airy_series(x))).epsilon(1e-12));
    const double h = 1e-5;
    for (double x : {-3.0, -0.5, 0.0, 1.5, 4.0})
        CHECK(airy_ai_prime(x) == doctest::Approx((airy_ai(x + h) - airy_ai(x - h)) / (2 * h)).epsilon(1e-7));
    CHECK_THROWS_AS(airy_ai(-51.0), InvalidArgument);
}

TEST_CASE("gauss-legendre rule") {
    for (int n : {1, 5, 16, 60}) {
        const auto r = QuadratureRule::gauss_legendre(n);
        double sum = 0.0;
        for (double w : r.weights()) sum += w;
        CHECK(sum == doctest::Approx(2.0).epsilon(1e-14));
        for (int d = 0; d <= 2 * n - 1; d += 3) {
            const double exact = d % 2 ? 0.0 : 2.0 / (d + 1);
            CHECK(r.integrate([d](double x) { return std::pow(x, d); }, -1.0, 1.0) == doctest::Approx(exact).epsilon(1e-13));
        }
    }
    const auto r = QuadratureRule::gauss_legendre(20);
    CHECK(integrate_panels([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 4, r) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK_THROWS_AS(QuadratureRule::gauss_legendre(0), InvalidArgument);
}

TEST_CASE("fredholm determinant of rank-one and diagonal kernels") {
    const auto rule = QuadratureRule::gauss_legendre(40);
    // det(I - a b^T) = 1 - <b, a>.
    const double L = 5.0;
    const double d = fredholm_det([](double x, double y) { return std::exp(-x - y); }, {0.0, L}, rule);
    CHECK(d == doctest::Approx(1.0 - (1.0 - std::exp(-2 * L)) / 2.0).epsilon(1e-13));
    // Rank two: K = c1 (x y) + c2; det = det(I - G) with G the 2x2 Gram-type matrix.
    const auto k2 = [](double x, double y) { return 0.3 * x * y + 0.2; };
    const double m00 = 0.3 / 3.0, m01 = 0.3 / 2.0, m10 = 0.2 / 2.0, m11 = 0.2;
    CHECK(fredholm_det(k2, {0.0, 1.0}, rule) == doctest::Approx((1 - m00) * (1 - m11) - m01 * m10).epsilon(1e-13));
    const auto e = fredholm_det_checked([](double x, double y) { return 0.5 * airy_ai(0.5 * (x + y)); }, semi_infinite(-1.0));
    CHECK(e.change < 1e-10);
    CHECK(e.value == doctest::Approx(f_goe(-1.0)).epsilon(1e-10));
    CHECK_THROWS_AS(fredholm_det(k2, {1.0, 1.0}, rule), InvalidArgument);
}

TEST_CASE("tracy-widom laws self-converge and are monotone") {
    double prev_gue = 0.0, prev_goe = 0.0;
    for (double s = -8.0; s <= 6.0; s += 0.5) {
        const double a = f_gue(s), b = f_goe(s);
        CHECK(std::abs(a - f_gue(s, 120)) < 1e-8);
        CHECK(std::abs(b - f_goe(s, 120)) < 1e-8);
        CHECK(a >= prev_gue);
        CHECK(b >= prev_goe);
        prev_gue = a;
        prev_goe = b;
    }
    CHECK(f_gue(6.0) > 1.0 - 1e-9);
    CHECK(f_goe(-10.0) < 1e-10);
    // Densities against centred differences of the distribution functions.
    const double h = 1e-4;
    for (double s : {-4.0, -1.7, 0.0, 1.5}) {
        CHECK(gue_density(s) == doctest::Approx((f_gue(s + h) - f_gue(s - h)) / (2 * h)).epsilon(1e-6));
        CHECK(goe_density(s) == doctest::Approx((f_goe(s + h) - f_goe(s - h)) / (2 * h)).epsilon(1e-6));
    }
    CHECK(airy1_onepoint(0.3) == doctest::Approx(f_goe(0.6)));
}

TEST_CASE("tracy-widom moments") {
    // Reference values from the literature, checked independently below.
    CHECK(std::abs(gue_table().mean() + 1.7711) < 1e-3);
    CHECK(std::abs(gue_table().variance() - 0.8132) < 1e-3);
    CHECK(std::abs(goe_table().mean() + 1.2065) < 1e-3);
    CHECK(std::abs(goe_table().variance() - 1.6078) < 1e-3);
}

TEST_CASE("tracy-widom tables agree with random-matrix edges") {
    std::mt19937_64 rng(20240501);
    for (double beta : {1.0, 2.0}) {
        std::vector<double> xs;
        for (int i = 0; i < 2000; ++i) xs.push_back(tridiagonal_edge(200, beta, rng));
        const auto m = stats::moments(xs);
        const auto& table = beta == 2.0 ? gue_table() : goe_table();
        // Finite-N edge corrections are O(N^{-2/3}); the tolerance covers them
        // and five standard errors.
        CHECK(std::abs(m.mean - table.mean()) < 0.1);
        CHECK(std::abs(m.variance - table.variance()) < 0.15 * table.variance());
        CHECK(stats::ks_distance(stats::Ecdf(xs), [&](double x) { return table(x); }) < 0.06);
    }
}

TEST_CASE("distribution tables") {
    const auto t = tabulate(Law::kGue, -6.0, 4.0, 0.05);
    CHECK(t.s.size() == 201);
    for (std::size_t i = 1; i < t.s.size(); ++i) CHECK(t.cdf[i] >= t.cdf[i - 1]);
    for (double d : t.density) CHECK(d >= -1e-12);
    // Interpolation between grid points.
    for (double s : {-3.013, -1.777, 0.4041}) {
        CHECK(std::abs(t(s) - f_gue(s)) < 1e-6);
        CHECK(std::abs(t.density_at(s) - gue_density(s)) < 1e-4);
    }
    CHECK(t(-7.0) == 0.0);
    CHECK(t(5.0) == 1.0);
    std::ostringstream out;
    tabulate(Law::kGoe, 0.0, 0.1, 0.05).write_csv(out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "# law=goe order=60 points=3");
    std::getline(in, line);
    CHECK(line == "s,F");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 3);
    CHECK_THROWS_AS(tabulate(Law::kGue, 1.0, 0.0, 0.1), InvalidArgument);
}

TEST_CASE("kernel Q") {
    CHECK(kernel_Q(1, 1, 0.5) == doctest::Approx(0.5));
    CHECK(kernel_Q(3, 2, 0.3) == 0.0);
    CHECK(kernel_Q(0, 5, 0.3) == 0.0);
    // A negative binomial law in dx.
    for (double lambda : {0.25, 0.5, 0.8}) {
        for (std::int64_t n : {1, 4, 17}) {
            double sum = 0.0;
            for (std::int64_t dx = n; dx < n + 4000; ++dx) sum += kernel_Q(n, dx, lambda);
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
    // Direct product formula.
    const double lambda = 0.3;
    double binom = 1.0;
    for (int i = 0; i < 4; ++i) binom = binom * (11 - i) / (i + 1);  // C(11, 4)
    CHECK(kernel_Q(5, 12, lambda) == doctest::Approx(binom * std::pow(0.7, 7) * std::pow(0.3, 5)).epsilon(1e-12));
}

TEST_CASE("kernel S and Sbar against contour integrals") {
    using C = std::complex<long double>;
    for (double lambda : {0.25, 0.5}) {
        for (double t : {0.0, 1.5, 8.0}) {
            for (auto [n, y, x] : std::vector<std::array<std::int64_t, 3>>{{3, 0, 1}, {5, 2, -1}, {4, -3, 2}, {6, 1, 1}}) {
                const long double l = lambda;
                // S: (1 - l)^{n + x - y} / l^n [w^{n + x - y}] (1 - w)^n e^{t (w - 1 + l)}
                const int k = static_cast<int>(n + x - y);
                const long double s = std::pow(1 - l, k) / std::pow(l, n) *
                                      contour_coefficient([&](C w) { return std::pow(C(1) - w, static_cast<int>(n)) * std::exp(C(t) * (w - C(1) + C(l))); }, k);
                CHECK(std::abs(kernel_S(t, n, y, x, lambda) - static_cast<double>(s)) <= 1e-10 * (std::abs(static_cast<double>(s)) + 1e-6));
                // Sbar: (1 - l)^{-n + y - x} l^n [w^{n - 1}] (1 - w)^{x - y + n - 1} e^{t (w - l)}
                const int m = static_cast<int>(x - y + n - 1);
                const long double sb = std::pow(1 - l, static_cast<int>(-n + y - x)) * std::pow(l, n) *
                                       contour_coefficient([&](C w) { return std::pow(C(1) - w, m) * std::exp(C(t) * (w - C(l))); },
                                                           static_cast<int>(n - 1), 0.5L);
                CHECK(std::abs(kernel_Sbar(t, n, y, x, lambda) - static_cast<double>(sb)) <= 1e-10 * (std::abs(static_cast<double>(sb)) + 1e-6));
            }
        }
    }
    // At t = 0, S is a signed binomial coefficient times the conjugation.
    CHECK(kernel_S(0.0, 4, 0, -2, 0.5) == doctest::Approx(6.0 * std::pow(0.5, 2) / std::pow(0.5, 4)));
    CHECK(kernel_S(0.0, 3, 0, 1, 0.5) == 0.0);
    CHECK(kernel_S(2.0, 2, 5, 0, 0.5) == 0.0);
    CHECK(kernel_Sbar(2.0, 0, 0, 0, 0.5) == 0.0);
    CHECK_THROWS_AS(kernel_S(501.0, 3, 0, 0, 0.5), InvalidArgument);
    CHECK_THROWS_AS(kernel_Sbar(1.0, 3, 0, 0, 1.0), InvalidArgument);
}

TEST_CASE("epigraph kernel against memoised path enumeration") {
    const double lambda = 0.5, t = 6.0;
    const auto x0 = flat_positions(lambda);
    CHECK(x0(1) == -2);
    CHECK(x0(3) == -6);
    for (std::int64_t n : {1, 2, 4}) {
        for (std::int64_t y : {-7, -3, -2, 0}) {
            const std::int64_t x = 1;
            std::map<std::pair<std::int64_t, std::int64_t>, double> memo;
            std::function<double(std::int64_t, std::int64_t)> e = [&](std::int64_t m, std::int64_t b) -> double {
                if (b > x0(m + 1)) return kernel_Sbar(t, n - m, b, x, lambda);
                if (m + 1 >= n) return 0.0;
                const auto key = std::make_pair(m, b);
                if (auto it = memo.find(key); it != memo.end()) return it->second;
                double acc = 0.0;
                for (int k = 1; k <= 80; ++k) acc += lambda * std::pow(1 - lambda, k - 1) * e(m + 1, b - k);
                return memo[key] = acc;
            };
            CHECK(kernel_Sbar_epi(t, n, y, x, lambda, x0) == doctest::Approx(e(0, y)).epsilon(1e-9).scale(1e-12));
        }
    }
    // Immediate hit and the n = 1 indicator.
    CHECK(kernel_Sbar_epi(t, 3, 0, 1, lambda, x0) == kernel_Sbar(t, 3, 0, 1, lambda));
    CHECK(kernel_Sbar_epi(t, 1, -5, 1, lambda, x0) == 0.0);
}

TEST_CASE("kernel scaling rounds and propagates the offsets") {
    const KernelScaling k{0.25, 200.0};
    const auto p = k.point(0.37, -0.6);
    const double c = std::pow(2.0, 5.0 / 3.0) * std::cbrt(k.chi());
    CHECK(static_cast<double>(p.n) == doctest::Approx(k.lambda * k.lambda * k.t + k.lambda * c * p.xi * std::pow(k.t, 2.0 / 3.0)));
    CHECK(static_cast<double>(p.x) ==
          doctest::Approx((1 - 2 * k.lambda) * k.t - c * p.xi * std::pow(k.t, 2.0 / 3.0) - k.factor() * p.u));
    CHECK(std::abs(p.xi - 0.37) < 1.0 / (k.lambda * c * std::pow(k.t, 2.0 / 3.0)));
    CHECK(std::abs(p.u + 0.6) < 2.0 / k.factor());
    CHECK(k.v_of(k.y(0.8)) == doctest::Approx(0.8).epsilon(0.05));
}

TEST_CASE("airy-scaled limits") {
    const auto rule = QuadratureRule::gauss_legendre(60);
    CHECK(integrate_panels([](double u) { return limit_Q(0.7, u); }, -20.0, 20.0, 8, rule) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(limit_S(0.0, 0.3, 0.2) == doctest::Approx(std::cbrt(2.0) * airy_ai(std::cbrt(2.0) * 0.5)));
    CHECK(limit_S(0.4, 0.3, 0.2) * limit_Sbar(0.4, 0.3, 0.2) == doctest::Approx(std::pow(limit_S(0.0, 0.3 + 2 * 0.4 * 0.4, 0.2), 2)));
    CHECK(limit_Sbar_epi(0.3, 0.1, 0.4) == limit_Sbar(0.3, 0.1, 0.4));
    CHECK(limit_Sbar_epi(0.3, 0.1, -0.4) == limit_Sbar(0.3, 0.1, 0.4));
    CHECK_THROWS_AS(limit_Q(0.0, 1.0), InvalidArgument);
}

TEST_CASE("scaled finite-time entries move toward their limits") {
    struct Tuple {
        double lambda, xi, u, v;
    };
    for (const auto& tp : {Tuple{0.5, 0.0, 0.0, 0.0}, Tuple{0.5, 0.3, 0.5, -0.2}, Tuple{0.25, 0.2, -0.3, 0.4}}) {
        double prev_s = 1e9, prev_sb = 1e9;
        for (double t : {50.0, 200.0, 500.0}) {
            const KernelScaling k{tp.lambda, t};
            const auto p = k.point(tp.xi, tp.u);
            const auto y = k.y(tp.v);
            const double v = k.v_of(y);
            const double ds = std::abs(k.factor() * kernel_S(t, p.n, y, p.x, tp.lambda) / limit_S(p.xi, p.u, v) - 1.0);
            const double dsb = std::abs(k.factor() * kernel_Sbar(t, p.n, y, p.x, tp.lambda) / limit_Sbar(p.xi, p.u, v) - 1.0);
            CHECK(ds < prev_s);
            CHECK(dsb < prev_sb);
            prev_s = ds;
            prev_sb = dsb;
        }
    }
}

TEST_CASE("limit kernel") {
    // The two forms of the second term.
    for (double xi_i : {-0.3, 0.0, 0.5})
        for (double xi_j : {0.0, 0.4})
            for (double u_i : {-1.0, 0.7})
                for (double u_j : {-0.5, 1.2}) {
                    const double a = airy21_second_term(xi_i, u_i, xi_j, u_j, SecondForm::kDirect);
                    const double b = airy21_second_term(xi_i, u_i, xi_j, u_j, SecondForm::kRewritten);
                    CHECK(std::abs(a - b) < 1e-8);
                }
    // Far from the interface the kernel is Ai(u + u').
    for (double u : {-1.0, 0.0, 0.8})
        for (double up : {-0.5, 0.4}) CHECK(std::abs(airy21_kernel(5.0, u, 5.0, up) - airy_ai(u + up)) < 1e-3);
    // The Gaussian part enters only forwards in xi.
    const double fwd = airy21_kernel(0.2, 0.1, 0.5, 0.3), z = airy21_kernel(0.2, 0.1, 0.5, 0.3, SecondForm::kDirect);
    CHECK(fwd == doctest::Approx(z).epsilon(1e-8));
}

TEST_CASE("one-point law of the limit kernel") {
    double prev = 0.0;
    for (double s = -3.0; s <= 2.0; s += 0.5) {
        const double p = airy21_onepoint(0.0, s);
        CHECK(p >= prev);
        CHECK(p <= 1.0);
        prev = p;
        CHECK(std::abs(airy21_onepoint(5.0, s) - f_goe(2.0 * s)) < 1e-3);
        CHECK(std::abs(airy21_onepoint(0.0, s) - airy21_onepoint(0.0, s, 120)) < 1e-8);
    }
    // The factored evaluation against a direct Nystrom discretisation of the kernel.
    const auto rule = QuadratureRule::gauss_legendre(40);
    for (double xi : {-0.2, 0.0, 0.6}) {
        const double direct = fredholm_det([xi](double u, double up) { return airy21_kernel(xi, u, xi, up); }, semi_infinite(-1.0), rule);
        CHECK(airy21_onepoint(xi, -1.0) == doctest::Approx(direct).epsilon(1e-7));
    }
}

TEST_CASE("shock limit law") {
    CHECK(shock_limit_cdf(0.0, 0.25, 0.75) == doctest::Approx(0.5).epsilon(1e-9));
    double prev = 1.0;
    for (double s = -6.0; s <= 6.0; s += 0.5) {
        const double p = shock_limit_cdf(s, 0.2, 0.6);
        CHECK(p <= prev + 1e-12);
        prev = p;
    }
    CHECK(shock_limit_cdf(-6.0, 0.25, 0.75) > 0.999);
    CHECK(shock_limit_cdf(6.0, 0.25, 0.75) < 0.001);
    CHECK(shock_limit_distribution(0.7, 0.2, 0.6) == doctest::Approx(1.0 - shock_limit_cdf(0.7, 0.2, 0.6)));
    CHECK_THROWS_AS(shock_limit_cdf(13.0, 0.25, 0.75), InvalidArgument);
    CHECK_THROWS_AS(shock_limit_cdf(0.0, 0.75, 0.25), InvalidArgument);

    // 2-D oracle: rotate to p = a g1 - b g2 - c >= 0 and q = b g1 + a g2, then
    // a tensor Gauss-Legendre rule over the rectangle.
    const auto& goe = goe_table();
    const auto rule = QuadratureRule::gauss_legendre(48);
    for (double lambda : {0.25, 0.1}) {
        const double rho = 0.75;
        const double a = std::cbrt(2.0) * std::pow(lambda * (1 - lambda), 2.0 / 3.0);
        const double b = std::cbrt(2.0) * std::pow(rho * (1 - rho), 2.0 / 3.0);
        const double r2 = a * a + b * b;
        for (double s : {-1.5, -0.4, 0.0, 0.9, 2.0}) {
            const double c = 2.0 * (rho - lambda) * s;
            const auto inner = [&](double p) {
                return integrate_panels(
                    [&](double q) {
                        const double g1 = (a * (p + c) + b * q) / r2, g2 = (a * q - b * (p + c)) / r2;
                        return goe.density_at(g1) * goe.density_at(g2) / r2;
                    },
                    -40.0, 40.0, 80, rule);
            };
            const double oracle = integrate_panels(inner, 0.0, 40.0, 40, rule);
            CHECK(std::abs(shock_limit_cdf(s, lambda, rho) - oracle) < 1e-5);
        }
    }
}
