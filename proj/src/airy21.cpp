#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "tasep/limits.hpp"
#include "tasep/types.hpp"

namespace tasep::limits {

namespace {

const double kCbrt2 = std::cbrt(2.0);
const double kTwoTwoThirds = std::pow(2.0, 2.0 / 3.0);

// Panels of width 1/2 with a 16-point rule; Airy oscillations at arguments
// down to -50 have wavelength above 0.88.
const QuadratureRule& panel_rule() {
    static const QuadratureRule r = QuadratureRule::gauss_legendre(16);
    return r;
}

double panel_integral(const std::function<double(double)>& f, double upper) {
    if (upper <= 0.0) return 0.0;
    const int panels = std::max(1, static_cast<int>(std::ceil(upper * 2.0)));
    return integrate_panels(f, 0.0, panels * 0.5, panels, panel_rule());
}

// log of an upper bound for |Ai(z)|.
double log_ai_bound(double z) { return z > 0.0 ? -2.0 / 3.0 * z * std::sqrt(z) : 0.0; }

// Smallest v (on a grid of 1/2) with bound(v) below e^-40, capped so that
// Airy arguments stay above -50.
template <class Bound>
double cutoff(Bound bound, double cap) {
    for (double v = 0.5;; v += 0.5) {
        if (v > cap) throw std::runtime_error("airy21: integrand does not decay inside the admissible range");
        if (bound(v) < -40.0) return v;
    }
}

struct Tilde {
    double xi_i, u_i, xi_j, u_j;
    Tilde(double a, double b, double c, double d) : xi_i(kTwoTwoThirds * a), u_i(kCbrt2 * b), xi_j(kTwoTwoThirds * c), u_j(kCbrt2 * d) {}
    double log_prefactor() const {
        return 2.0 / 3.0 * (xi_j * xi_j * xi_j - xi_i * xi_i * xi_i) + xi_j * u_j - xi_i * u_i;
    }
};

double first_integral(const Tilde& z) {
    const double a = z.xi_i * z.xi_i + z.u_i, b = z.xi_j * z.xi_j + z.u_j, d = z.xi_j - z.xi_i;
    const double v_max = cutoff([&](double v) { return log_ai_bound(a + v) + log_ai_bound(b + v) + v * d; },
                                50.0 + std::min(a, b) + 200.0);
    return panel_integral([&](double v) { return std::exp(v * d) * airy_ai(a + v) * airy_ai(b + v); }, v_max);
}

// int_{-inf}^0 e^{-v S} Ai(a + v) Ai(b - v) dv, as int_0^inf e^{w S} Ai(a - w) Ai(b + w) dw.
double direct_integral(const Tilde& z) {
    const double a = z.xi_i * z.xi_i + z.u_i, b = z.xi_j * z.xi_j + z.u_j, s = z.xi_i + z.xi_j;
    const double w_max = cutoff([&](double w) { return log_ai_bound(b + w) + w * s; }, a + 50.0);
    return panel_integral([&](double w) { return std::exp(w * s) * airy_ai(a - w) * airy_ai(b + w); }, w_max);
}

// int_0^inf e^{-v S} Ai(a + v) Ai(b - v) dv.
double rewritten_integral(const Tilde& z) {
    const double a = z.xi_i * z.xi_i + z.u_i, b = z.xi_j * z.xi_j + z.u_j, s = z.xi_i + z.xi_j;
    const double v_max = cutoff([&](double v) { return log_ai_bound(a + v) - v * s; }, b + 50.0);
    return panel_integral([&](double v) { return std::exp(-v * s) * airy_ai(a + v) * airy_ai(b - v); }, v_max);
}

SecondForm resolve(SecondForm f, double xi_i, double xi_j) {
    if (f != SecondForm::kAuto) return f;
    return xi_i + xi_j > 0.0 ? SecondForm::kRewritten : SecondForm::kDirect;
}

}  // namespace

double airy21_second_term(double xi_i, double u_i, double xi_j, double u_j, SecondForm form) {
    const Tilde z(xi_i, u_i, xi_j, u_j);
    if (resolve(form, xi_i, xi_j) == SecondForm::kDirect) return kCbrt2 * std::exp(z.log_prefactor()) * direct_integral(z);
    const double d = xi_j - xi_i;
    return -kCbrt2 * std::exp(z.log_prefactor()) * rewritten_integral(z) +
           airy_ai(u_i + u_j + d * d) * std::exp(2.0 / 3.0 * d * d * d + d * (u_i + u_j));
}

double airy21_kernel(double xi_i, double u_i, double xi_j, double u_j, SecondForm form) {
    const Tilde z(xi_i, u_i, xi_j, u_j);
    double k = kCbrt2 * std::exp(z.log_prefactor()) * first_integral(z) + airy21_second_term(xi_i, u_i, xi_j, u_j, form);
    if (xi_j > xi_i) k -= limit_Q(xi_j - xi_i, u_j - u_i);
    return k;
}

double airy21_onepoint(double xi, double s, int order) {
    // One time: K(u, u') = 2^{1/3} e^{xt (ut' - ut)} [int_0^inf Ai(a + v) Ai(a' + v) dv + second term],
    // with a = xt^2 + ut. Factored through a shared v grid.
    const auto& rule = QuadratureRule::gauss_legendre(order);
    std::vector<double> u, w;
    const auto dom = semi_infinite(s);
    rule.map(dom.lo, dom.hi, u, w);
    const double xt = kTwoTwoThirds * xi;
    const double a_min = xt * xt + kCbrt2 * s;
    const bool rewritten = resolve(SecondForm::kAuto, xi, xi) == SecondForm::kRewritten;
    const double v_max = std::max(0.0, -a_min) + 24.0;
    if (a_min - v_max < -50.0) throw InvalidArgument("airy21_onepoint: s too negative");

    std::vector<double> v, vw;
    {
        const int panels = static_cast<int>(std::ceil(v_max * 2.0));
        const auto& pr = panel_rule();
        std::vector<double> x, ww;
        for (int p = 0; p < panels; ++p) {
            pr.map(p * 0.5, (p + 1) * 0.5, x, ww);
            v.insert(v.end(), x.begin(), x.end());
            vw.insert(vw.end(), ww.begin(), ww.end());
        }
    }
    const auto n = static_cast<Eigen::Index>(u.size()), m = static_cast<Eigen::Index>(v.size());
    Eigen::MatrixXd plus(n, m), minus(n, m);
    Eigen::VectorXd weight(m), second_weight(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        weight(k) = vw[k];
        // Direct form: substitute v -> -v, so Ai(a - v) Ai(a' + v) e^{2 xt v}.
        second_weight(k) = vw[k] * std::exp((rewritten ? -2.0 : 2.0) * xt * v[k]);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const double a = xt * xt + kCbrt2 * u[i];
        for (Eigen::Index k = 0; k < m; ++k) {
            plus(i, k) = airy_ai(a + v[k]);
            minus(i, k) = a - v[k] < -50.0 ? 0.0 : airy_ai(a - v[k]);
        }
    }
    const Eigen::MatrixXd first = plus * weight.asDiagonal() * plus.transpose();
    Eigen::MatrixXd second = rewritten ? Eigen::MatrixXd(plus * second_weight.asDiagonal() * minus.transpose())
                                       : Eigen::MatrixXd(minus * second_weight.asDiagonal() * plus.transpose());
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double pref = kCbrt2 * std::exp(xt * kCbrt2 * (u[j] - u[i]));
            double k = pref * (first(i, j) + (rewritten ? -second(i, j) : second(i, j)));
            if (rewritten) k += airy_ai(u[i] + u[j]);
            a(i, j) = (i == j ? 1.0 : 0.0) - std::sqrt(w[i] * w[j]) * k;
        }
    }
    return Eigen::PartialPivLU<Eigen::MatrixXd>(a).determinant();
}

namespace {

struct ShockScales {
    double a, b, c;
};

ShockScales shock_scales(double s, double lambda, double rho) {
    if (!(0.0 < lambda && lambda < rho && rho < 1.0)) throw InvalidArgument("shock law: need 0 < lambda < rho < 1");
    if (std::abs(s) > 12.0) throw InvalidArgument("shock law: |s| > 12 underflows the GOE grid");
    const double cm = lambda * (1.0 - lambda), cp = rho * (1.0 - rho);
    return {kCbrt2 * std::pow(cm, 2.0 / 3.0), kCbrt2 * std::pow(cp, 2.0 / 3.0), 2.0 * (rho - lambda) * s};
}

}  // namespace

double shock_limit_cdf(double s, double lambda, double rho, double /*tau*/) {
    // H- - H+ = a G1 - b G2 with G1, G2 independent GOE Tracy-Widom; one-point
    // marginals of the Airy1 processes do not depend on the time argument.
    const auto [a, b, c] = shock_scales(s, lambda, rho);
    const auto& goe = goe_table();
    const auto f = [&](double g) { return goe.density_at(g) * (1.0 - goe((c + b * g) / a)); };
    return std::clamp(integrate_panels(f, goe.s.front(), goe.s.back(), 440, panel_rule()), 0.0, 1.0);
}

double shock_limit_distribution(double s, double lambda, double rho) { return 1.0 - shock_limit_cdf(s, lambda, rho); }

}  // namespace tasep::limits
