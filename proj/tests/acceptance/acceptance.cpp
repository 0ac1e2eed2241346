// Acceptance gates. Prints one PASS/FAIL line per gate; tolerances are
// pinned here and passed to the harness explicitly.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>

#include "tasep/engine.hpp"
#include "tasep/harness.hpp"
#include "tasep/limits.hpp"

using namespace tasep;
using namespace tasep::harness;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [failed]");
    }
};

std::string num(double v, const char* f = "%.4g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

void show(const StatReport& r) {
    for (const auto& [name, ok] : r.checks) std::printf("    %s: %s\n", name.c_str(), ok ? "pass" : "fail");
    for (const auto& [name, d] : r.ks) std::printf("    ks[%s] = %.4f\n", name.c_str(), d);
    for (const auto& e : r.estimates) std::printf("    %s = %.6g [%.6g, %.6g] n=%zu\n", e.name.c_str(), e.value, e.ci.lo, e.ci.hi, e.n);
    std::printf("    %zu samples, %zu contaminated, %.1f s\n", r.total, r.contaminated, r.runtime_seconds);
}

ExperimentConfig config(const std::string& name, std::map<std::string, double> thresholds) {
    auto c = default_config(name);
    c.threads = 0;
    for (const auto& [k, v] : thresholds) c.thresholds[k] = v;
    return c;
}

Outcome pathwise_identity() {
    auto c = config("identity", {{"contamination_rate", 1e-3}});
    c.samples = 10000;
    c.times = {10.0, 50.0, 100.0};
    c.sites = {-5, 0, 5};
    const auto r = run_identity_suite(c);
    show(r);
    Outcome o;
    o.require(r.checks.at("identity"), "identity on " + std::to_string(r.total - r.contaminated) + " samples");
    const double rate = static_cast<double>(r.contaminated) / static_cast<double>(r.total);
    o.require(rate < 1e-3, "contamination rate " + num(rate));
    return o;
}

Outcome coupling_identities() {
    auto c = config("identity", {{"contamination_rate", 1e-3}});
    c.samples = 1000;
    c.seed_base = 500000;
    c.times = {10.0, 50.0, 100.0};
    const auto r = run_identity_suite(c);
    show(r);
    Outcome o;
    for (const char* k : {"y_equals_x", "height_matching", "shift_relation", "min_property"}) o.require(r.checks.at(k), k);
    o.require(r.contaminated == 0, std::to_string(r.contaminated) + " contaminated");
    return o;
}

Outcome ctmc_oracle() {
    constexpr std::size_t kRuns = 100000;
    constexpr double kT = 0.7, kSigmas = 3.0;
    const Interval w{0, 3};
    const auto start = build_initial(ic::Explicit{{0, 1}}, w);
    const auto p = exact_ctmc_distribution(start, kT);
    std::vector<std::size_t> counts(p.size(), 0);
    for (std::size_t i = 0; i < kRuns; ++i) {
        CoupledSystem sys(std::make_unique<LiveFeed>(i, w, kT), {start}, {0});
        sys.evolve(kT);
        ++counts[ctmc_state(sys.configuration(0))];
    }
    Outcome o;
    double worst = 0.0;
    std::size_t impossible = 0;
    for (std::uint32_t s = 0; s < p.size(); ++s) {
        const double freq = static_cast<double>(counts[s]) / kRuns;
        if (p[s] < 1e-15) {
            impossible += counts[s];
            continue;
        }
        const double se = std::sqrt(p[s] * (1.0 - p[s]) / kRuns);
        worst = std::max(worst, std::abs(freq - p[s]) / se);
        std::printf("    state %2u: exact %.5f  observed %.5f  (%+.2f se)\n", s, p[s], freq, (freq - p[s]) / se);
    }
    o.require(impossible == 0, std::to_string(impossible) + " runs in unreachable states");
    o.require(worst <= kSigmas, "largest deviation " + num(worst, "%.2f") + " se");
    return o;
}

Outcome step_law() {
    auto c = config("step-law", {{"mean_tol", 0.1}, {"ks", 0.06}});
    c.samples = 2000;
    c.times = {1000.0};
    c.alpha = 0.0;
    const auto r = run_step_law(c);
    show(r);
    Outcome o;
    const double m = r.estimate("mean").value;
    o.require(std::abs(m - limits::gue_table().mean()) <= 0.1, "mean " + num(m) + " vs " + num(limits::gue_table().mean()));
    o.require(r.ks.at("gue") <= 0.06, "ks " + num(r.ks.at("gue")));
    o.require(r.status == "pass", "status " + r.status);
    return o;
}

Outcome geodesics() {
    auto c = config("geodesics", {{"localization_u", 3.0}, {"localization_tail", 0.05}});
    c.samples = 1000;
    c.probe_samples = 200;
    c.secondary_samples = 1000;
    c.times = {100.0, 500.0};
    const auto r = run_geodesic_suite(c);
    show(r);
    Outcome o;
    for (const char* k : {"geodesic_property", "ordering", "domination", "localization_tail"}) o.require(r.checks.at(k), k);
    o.require(r.status == "pass", "status " + r.status);
    return o;
}

Outcome fluctuation_exponent() {
    auto c = config("scaling", {{"slope_target", 2.0 / 3.0}, {"slope_tol", 0.1}});
    c.samples = 2000;
    c.times = {250.0, 500.0, 1000.0, 2000.0};
    const auto r = run_scaling_experiment(c);
    show(r);
    Outcome o;
    const double slope = r.estimate("slope").value;
    o.require(std::abs(slope - 2.0 / 3.0) <= 0.1, "slope " + num(slope));
    o.require(r.contaminated * 1000 < r.total, std::to_string(r.contaminated) + " contaminated");
    return o;
}

Outcome limit_law() {
    auto c = config("limit-law", {{"ks", 0.05}, {"median", 0.05}});
    c.samples = 2000;
    c.times = {1000.0};
    c.lambda = 0.25;
    c.rho = 0.75;
    const auto r = run_limit_comparison(c);
    show(r);
    Outcome o;
    o.require(r.ks.at("limit") <= 0.05, "ks " + num(r.ks.at("limit")));
    o.require(std::abs(r.estimate("median_z").value) <= 0.05, "median " + num(r.estimate("median_z").value));
    o.require(r.status == "pass", "status " + r.status);
    return o;
}

Outcome independence_and_decorrelation() {
    auto ci = config("independence", {{"corr_sigmas", 3.0}});
    ci.samples = 2000;
    ci.times = {250.0, 1000.0};
    const auto ri = run_independence_check(ci);
    show(ri);
    auto cs = config("slow-decorrelation", {{"monotone_slack", 0.0}});
    cs.epsilons = {0.5, 1.0, 2.0};
    const auto rs = run_slow_decorrelation(cs);
    show(rs);
    Outcome o;
    const auto& corr = ri.estimate("correlation_t1000");
    o.require(ri.checks.at("independence"), "corr " + num(corr.value) + " vs band " + num(3.0 / std::sqrt(static_cast<double>(corr.n))));
    bool decreasing = rs.contaminated == 0;
    for (const auto& [name, ok] : rs.checks) decreasing = decreasing && ok;
    o.require(decreasing, "exceedance decreasing in t");
    return o;
}

Outcome numerics() {
    using namespace limits;
    Outcome o;
    // Self-convergence under doubling of the quadrature order.
    double self = 0.0;
    for (double s = -8.0; s <= 6.0; s += 0.25) {
        self = std::max(self, std::abs(f_gue(s) - f_gue(s, 120)));
        self = std::max(self, std::abs(f_goe(s) - f_goe(s, 120)));
    }
    o.require(self <= 1e-8, "table self-convergence " + num(self));
    const double m2 = gue_table().mean(), v2 = gue_table().variance(), m1 = goe_table().mean(), v1 = goe_table().variance();
    const double moment_err = std::max({std::abs(m2 + 1.7711), std::abs(v2 - 0.8132), std::abs(m1 + 1.2065), std::abs(v1 - 1.6078)});
    o.require(moment_err <= 1e-3, "moments " + num(m2, "%.5f") + "/" + num(v2, "%.5f") + " and " + num(m1, "%.5f") + "/" + num(v1, "%.5f"));
    // The two forms of the second term.
    double forms = 0.0;
    for (double xi_i : {-0.5, -0.2, 0.0, 0.3})
        for (double xi_j : {-0.3, 0.0, 0.4})
            for (double u_i : {-1.5, 0.0, 1.0})
                for (double u_j : {-1.0, 0.5}) {
                    const double a = airy21_second_term(xi_i, u_i, xi_j, u_j, SecondForm::kDirect);
                    const double b = airy21_second_term(xi_i, u_i, xi_j, u_j, SecondForm::kRewritten);
                    forms = std::max(forms, std::abs(a - b));
                }
    o.require(forms <= 1e-8, "second-term forms differ by " + num(forms));
    // Scaled finite-time entries against their limits.
    bool monotone = true;
    double worst_final = 0.0;
    struct Tuple {
        double lambda, xi, u, v;
    };
    for (const auto& tp : {Tuple{0.5, 0.0, 0.0, 0.0}, Tuple{0.5, 0.3, 0.5, -0.2}, Tuple{0.25, 0.2, -0.3, 0.4}}) {
        double prev[3] = {1e9, 1e9, 1e9};
        for (double t : {50.0, 200.0, 500.0}) {
            const KernelScaling k{tp.lambda, t};
            const auto p = k.point(tp.xi, tp.u);
            const auto y = k.y(tp.v);
            const double v = k.v_of(y);
            const double rel[3] = {
                std::abs(k.factor() * kernel_S(t, p.n, y, p.x, tp.lambda) / limit_S(p.xi, p.u, v) - 1.0),
                std::abs(k.factor() * kernel_Sbar(t, p.n, y, p.x, tp.lambda) / limit_Sbar(p.xi, p.u, v) - 1.0),
                std::abs(k.factor() * kernel_Sbar_epi(t, p.n, y, p.x, tp.lambda, flat_positions(tp.lambda)) /
                             limit_Sbar_epi(p.xi, p.u, v) - 1.0),
            };
            std::printf("    lambda=%.2f xi=%.1f u=%.1f v=%.1f t=%3.0f: rel. error S %.4f  Sbar %.4f  Sbar_epi %.4f\n", tp.lambda, tp.xi,
                        tp.u, tp.v, t, rel[0], rel[1], rel[2]);
            for (int e = 0; e < 3; ++e) {
                monotone = monotone && rel[e] < prev[e];
                prev[e] = rel[e];
                if (t == 500.0) worst_final = std::max(worst_final, rel[e]);
            }
        }
    }
    o.require(monotone, "kernel entries approach their limits monotonically");
    o.require(worst_final <= 0.05, "largest relative error at t=500 " + num(worst_final));
    double flat = 0.0;
    for (double u : {-1.0, -0.5, 0.0, 0.5, 1.0})
        for (double up : {-1.0, 0.0, 1.0}) flat = std::max(flat, std::abs(airy21_kernel(5.0, u, 5.0, up) - airy_ai(u + up)));
    o.require(flat <= 1e-3, "kernel at xi=5 vs Ai(u+u') " + num(flat));
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance gates"};
    const std::vector<std::pair<std::string, std::function<Outcome()>>> gates{
        {"identity", pathwise_identity},
        {"coupling", coupling_identities},
        {"ctmc", ctmc_oracle},
        {"step-law", step_law},
        {"geodesics", geodesics},
        {"exponent", fluctuation_exponent},
        {"limit-law", limit_law},
        {"independence", independence_and_decorrelation},
        {"numerics", numerics},
    };
    std::vector<std::string> names;
    for (const auto& g : gates) names.push_back(g.first);
    std::string only;
    app.add_option("--gate", only, "run a single gate")->check(CLI::IsMember(names));
    CLI11_PARSE(app, argc, argv);

    bool all = true;
    for (const auto& [name, run] : gates) {
        if (!only.empty() && name != only) continue;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("error: ") + e.what();
        }
        std::printf("%s: %s: %s\n", name.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
