#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace tasep::limits {

// Ai and Ai' (Boost.Math). Throws InvalidArgument below -50.
double airy_ai(double x);
double airy_ai_prime(double x);

// Gauss-Legendre rule on [-1, 1].
class QuadratureRule {
public:
    static QuadratureRule gauss_legendre(int order);

    int order() const noexcept { return static_cast<int>(nodes_.size()); }
    const std::vector<double>& nodes() const noexcept { return nodes_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    // Nodes and weights moved to [a, b].
    void map(double a, double b, std::vector<double>& x, std::vector<double>& w) const;
    double integrate(const std::function<double(double)>& f, double a, double b) const;

private:
    std::vector<double> nodes_, weights_;
};

// Composite rule: `panels` equal panels of the given rule on [a, b].
double integrate_panels(const std::function<double(double)>& f, double a, double b, int panels, const QuadratureRule& rule);

struct Domain {
    double lo;
    double hi;
};
// (s, infinity) cut at s + max(length, length - s); every kernel used here is
// below 1e-18 past the cut.
Domain semi_infinite(double s, double length = 16.0);

using Kernel = std::function<double(double, double)>;

// det(I - K) on L^2(domain), Nystrom discretization with the given rule.
double fredholm_det(const Kernel& k, Domain d, const QuadratureRule& rule);

struct FredholmEstimate {
    double value = 0.0;
    double change = 0.0;  // |det at 2 * order - det at order|
};
// Evaluates at `order` and `2 * order`; throws std::runtime_error when the
// two differ by more than 1e-6.
FredholmEstimate fredholm_det_checked(const Kernel& k, Domain d, int order = 60);

// Tracy-Widom laws as Fredholm determinants (Airy kernel for GUE, Ai((x+y)/2)/2
// for GOE) and their densities by differentiating log det in s.
double f_gue(double s, int order = 60);
double f_goe(double s, int order = 60);
double gue_density(double s, int order = 60);
double goe_density(double s, int order = 60);
// P(A1(u) <= m) = F_GOE(2 m).
double airy1_onepoint(double m, int order = 60);

enum class Law { kGue, kGoe };
std::string to_string(Law law);

struct DistributionTable {
    Law law = Law::kGue;
    int order = 60;
    std::vector<double> s, cdf, density;

    // Cubic Hermite interpolation from (cdf, density); 0 / 1 outside the grid.
    double operator()(double x) const;
    double density_at(double x) const;
    double mean() const;
    double variance() const;
    // "# law=<gue|goe> order=<n> points=<m>" then "s,F" rows (%.17g).
    void write_csv(std::ostream& out) const;
};

// Grid lo, lo + step, ..., hi (inclusive up to rounding).
DistributionTable tabulate(Law law, double lo, double hi, double step, int order = 60);
// Tables on [-12, 10] with step 0.02, built on first use.
const DistributionTable& gue_table();
const DistributionTable& goe_table();

// ---- finite-time kernel entries (conjugated form) ----

// (1 - lambda)^(dx - n) lambda^n binom(dx - 1, n - 1) for dx >= n >= 1, else 0.
double kernel_Q(std::int64_t n, std::int64_t dx, double lambda);

// Contour integrals around 0 evaluated as exact Taylor coefficients in MPFR at
// 512 bits and again at 1024 bits; throws std::runtime_error when the two
// disagree beyond a relative 1e-8. Requires 0 <= t <= 500.
double kernel_S(double t, std::int64_t n, std::int64_t y, std::int64_t x, double lambda);
double kernel_Sbar(double t, std::int64_t n, std::int64_t y, std::int64_t x, double lambda);

// Particle positions X_0(m), m >= 1, decreasing in m.
using InitialPositions = std::function<std::int64_t(std::int64_t)>;
// X_0(m) = -floor(m / lambda).
InitialPositions flat_positions(double lambda);

// E_{B_0 = y}[Sbar_{n - tau}(B_tau, x) 1(tau < n)], B a walk with steps
// -k of probability lambda (1 - lambda)^(k - 1), tau the first m >= 0 with
// B_m > X_0(m + 1). Dynamic programming over (m, B_m); throws when the mass
// dropped at the lower cut could move the result by more than 1e-8.
double kernel_Sbar_epi(double t, std::int64_t n, std::int64_t y, std::int64_t x, double lambda, const InitialPositions& x0);

// Scaling of (n, x, y) with (xi, u, v) at density lambda and time t. Lattice
// values are rounded to the nearest integer and (xi, u, v) are recomputed
// from the rounded values.
struct KernelScaling {
    double lambda;
    double t;

    struct Point {
        std::int64_t n;
        std::int64_t x;
        double xi;  // effective, after rounding
        double u;
    };

    double chi() const { return lambda * (1.0 - lambda); }
    // Jacobian 2^{1/3} chi^{2/3} t^{1/3} / lambda multiplying every entry.
    double factor() const;
    Point point(double xi, double u) const;
    double u_of(std::int64_t x, double xi) const;
    std::int64_t y(double v) const;
    double v_of(std::int64_t y) const;
};

// Airy-scaled limits of the entries.
double limit_Q(double dxi, double du);  // xi_j - xi_i > 0
double limit_S(double xi, double u, double v);
double limit_Sbar(double xi, double u, double v);
double limit_Sbar_epi(double xi, double u, double v);

// ---- limit kernel and one-point laws ----

// Which algebraic form of the second Airy-product integral to use.
enum class SecondForm { kDirect, kRewritten, kAuto };

// Limit of the scaled kernel in the unscaled variables (xi, u):
// minus the Gaussian term for xi_j > xi_i plus the two Airy-product integrals.
double airy21_kernel(double xi_i, double u_i, double xi_j, double u_j, SecondForm form = SecondForm::kAuto);
// The second integral alone, in either form (for comparing them).
double airy21_second_term(double xi_i, double u_i, double xi_j, double u_j, SecondForm form);

// lim P(h_resc(xi) <= s) = det(I - K)_{L^2(s, inf)} with K the one-time limit kernel at xi.
double airy21_onepoint(double xi, double s, int order = 60);

// P(H- - H+ >= 2 (rho - lambda) s) for independent H+- = chi_+-^{2/3} 2^{4/3} A1,
// computed by integrating the GOE density against the GOE distribution.
// Throws for |s| > 12.
double shock_limit_cdf(double s, double lambda, double rho, double tau = 0.0);
// P(Z <= s) for Z = (H- - H+) / (2 (rho - lambda)), the limit of the rescaled
// second-class particle.
double shock_limit_distribution(double s, double lambda, double rho);

}  // namespace tasep::limits
