#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "tasep/geodesics.hpp"
#include "tasep/harness.hpp"
#include "tasep/limits.hpp"
#include "tasep/philox.hpp"
#include "tasep/tracker.hpp"

namespace tasep::harness {

namespace {

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

StatReport start_report(const std::string& id, const ExperimentConfig& c) {
    c.validate();
    StatReport r;
    r.id = id;
    r.thresholds = c.thresholds;
    return r;
}

void finish(StatReport& r, const ExperimentConfig& c, const Stopwatch& sw) {
    r.vacuous = r.total == 0;
    if (r.total > 0 && c.thresholds.count("contamination_rate") &&
        static_cast<double>(r.contaminated) > c.threshold("contamination_rate") * static_cast<double>(r.total))
        r.status = "contaminated";
    r.settle();
    r.runtime_seconds = sw.seconds();
}

Estimate proportion(const std::string& name, std::size_t k, std::size_t n) {
    return {name, n ? static_cast<double>(k) / static_cast<double>(n) : 0.0, n, stats::wilson_interval(k, n)};
}

Estimate mean_estimate(const std::string& name, const stats::Moments& m) { return {name, m.mean, m.n, m.mean_ci}; }
Estimate variance_estimate(const std::string& name, const stats::Moments& m) { return {name, m.variance, m.n, m.variance_ci}; }

// Fisher z interval for a correlation coefficient.
Estimate correlation_estimate(const std::string& name, double r, std::size_t n) {
    Estimate e{name, r, n, {-1.0, 1.0}};
    if (n > 3 && std::abs(r) < 1.0) {
        const double z = std::atanh(r), h = 1.96 / std::sqrt(static_cast<double>(n) - 3.0);
        e.ci = {std::tanh(z - h), std::tanh(z + h)};
    }
    return e;
}

// Order-statistic interval for the median.
Estimate median_estimate(const std::string& name, std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const auto n = xs.size();
    Estimate e{name, stats::median(xs), n, {0.0, 0.0}};
    const double half = 0.5 * static_cast<double>(n), spread = 0.98 * std::sqrt(static_cast<double>(n));
    const auto lo = static_cast<std::size_t>(std::max(0.0, std::floor(half - spread)));
    const auto hi = static_cast<std::size_t>(std::min(static_cast<double>(n - 1), std::ceil(half + spread)));
    e.ci = {xs[lo], xs[hi]};
    return e;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::ofstream open_csv(const ExperimentConfig& c, const std::string& name) {
    const auto dir = output_directory(c);
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / name);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    out.precision(10);
    return out;
}

std::int64_t margin_for(const ExperimentConfig& c, double t) { return c.cone_margin >= 0 ? c.cone_margin : default_cone_margin(t); }

Site round_site(double x) { return static_cast<Site>(std::lround(x)); }

}  // namespace

// ---------------------------------------------------------------------------

namespace {

enum IdentityCheck { kIdentity, kYEqualsX, kHeightMatching, kMinProperty, kShiftRelation, kIdentityChecks };
constexpr std::array<const char*, kIdentityChecks> kIdentityNames{"identity", "y_equals_x", "height_matching", "min_property",
                                                                  "shift_relation"};

struct IdentityOutcome {
    std::array<bool, kIdentityChecks> failed{};
    bool contaminated = false;
};

IdentityOutcome identity_seed(const ExperimentConfig& c, std::uint64_t seed) {
    CouplingSetup setup;
    setup.lambda = c.lambda;
    setup.rho = c.rho;
    setup.cone_margin = margin_for(c, c.times.back());
    std::vector<ConePoint> pts;
    for (double t : c.times)
        for (Site x : c.sites) pts.push_back({x, t});
    auto cp = make_shock_coupling(setup, seed, pts);
    std::optional<ShockCoupling> other;
    // Negative control: the second-class particle of an independent clock set.
    if (c.negative_control) other.emplace(make_shock_coupling(setup, seed ^ 0x9E3779B97F4A7C15ull, pts));
    IdentityOutcome out;
    using S = ShockCoupling;
    for (double t : c.times) {
        cp.evolve(t);
        if (other) other->evolve(t);
        const Site x2 = other ? other->second_class() : cp.second_class();
        const bool x2_exact = cp.second_class_exact() && (!other || other->second_class_exact());
        for (Site x : c.sites) {
            if (!x2_exact || !cp.height_exact(x)) {
                out.contaminated = true;
                continue;
            }
            const bool identity = (x2 >= x) == (cp.height(S::kMinus, x) <= cp.height(S::kTildePlus, x));
            out.failed[kIdentity] = out.failed[kIdentity] || !identity;
            out.failed[kMinProperty] = out.failed[kMinProperty] || !check_min_property_at(cp, x);
        }
        const Site y = cp.tracked_y();
        if (cp.tracked_y_exact() && cp.height_exact(y) && cp.height_exact(y + 1))
            out.failed[kHeightMatching] = out.failed[kHeightMatching] || !(check_height_matching(cp) && check_ordering_below_equality(cp));
        else
            out.contaminated = true;
        const auto range = cp.exact_heights();
        if (!range.empty() && cp.second_class_exact()) {
            const bool shift = verify_shift_relation(cp.system().heights(S::kEta), cp.system().heights(S::kEtaTilde), cp.second_class(), range);
            out.failed[kShiftRelation] = out.failed[kShiftRelation] || !shift;
        } else {
            out.contaminated = true;
        }
    }
    if (cp.exact_until() <= c.times.back()) out.contaminated = true;
    out.failed[kYEqualsX] = !cp.y_always_equal();
    return out;
}

}  // namespace

StatReport run_identity_suite(const ExperimentConfig& c) {
    Stopwatch sw;
    auto r = start_report(c.negative_control ? "identity-negative-control" : "identity", c);
    const auto outcomes = parallel_map(c.samples, c.threads, [&](std::size_t i) { return identity_seed(c, c.seed_base + i); });
    std::array<std::size_t, kIdentityChecks> failures{};
    for (const auto& o : outcomes) {
        ++r.total;
        if (o.contaminated) ++r.contaminated;
        for (int k = 0; k < kIdentityChecks; ++k) failures[k] += o.failed[k];
    }
    for (int k = 0; k < kIdentityChecks; ++k) {
        r.estimates.push_back(proportion(std::string(kIdentityNames[k]) + "_failure_rate", failures[k], r.total));
        if (c.negative_control) continue;
        r.checks[kIdentityNames[k]] = failures[k] == 0;
    }
    if (c.negative_control) r.checks["negative_control_detected"] = failures[kIdentity] > 0;
    r.estimates.push_back(proportion("contamination_rate", r.contaminated, r.total));
    finish(r, c, sw);
    return r;
}

// ---------------------------------------------------------------------------

namespace {

// Rescaled second-class positions (X - v_s t) / t^{1/3} over the seeds
// seed_offset .. seed_offset + n - 1; contaminated samples are counted.
std::vector<double> second_class_samples(const ExperimentConfig& c, double t, std::size_t n, std::uint64_t seed_offset,
                                         std::size_t& contaminated) {
    const double vs = ShockParameters{c.lambda, c.rho}.shock_speed();
    const auto raw = parallel_map(n, c.threads, [&](std::size_t i) {
        return sample_second_class(c.lambda, c.rho, t, c.seed_base + seed_offset + i, margin_for(c, t));
    });
    std::vector<double> z;
    for (const auto& x : raw) {
        if (!x) {
            ++contaminated;
            continue;
        }
        z.push_back((static_cast<double>(*x) - vs * t) / std::cbrt(t));
    }
    return z;
}

}  // namespace

StatReport run_scaling_experiment(const ExperimentConfig& c) {
    Stopwatch sw;
    auto r = start_report("scaling", c);
    const auto [limit_mean, limit_var] = second_class_limit_moments(c.lambda, c.rho);
    std::vector<double> log_t, log_var;
    double prev_gap = std::numeric_limits<double>::infinity();
    bool means_ok = true, means_shrink = true, enough = c.samples >= static_cast<std::size_t>(c.threshold("min_samples"));
    auto csv = open_csv(c, "scaling.csv");
    csv << "t,n,mean_z,var_x,var_lo,var_hi\n";
    for (std::size_t k = 0; k < c.times.size(); ++k) {
        const double t = c.times[k];
        std::size_t bad = 0;
        const auto z = second_class_samples(c, t, c.samples, k * c.samples, bad);
        r.total += c.samples;
        r.contaminated += bad;
        if (z.size() < 2) {
            enough = false;
            continue;
        }
        std::vector<double> x;
        for (double v : z) x.push_back(v * std::cbrt(t));
        const auto mz = stats::moments(z);
        const auto mx = stats::moments(x);
        r.estimates.push_back(mean_estimate("mean_z_t" + fmt(t), mz));
        r.estimates.push_back(variance_estimate("var_x_t" + fmt(t), mx));
        means_ok = means_ok && std::abs(mz.mean - limit_mean) <= c.threshold("mean_tol");
        const double gap = std::abs(mz.mean - limit_mean);
        means_shrink = means_shrink && gap <= prev_gap;
        prev_gap = gap;
        log_t.push_back(std::log(t));
        log_var.push_back(std::log(mx.variance));
        csv << t << ',' << mx.n << ',' << mz.mean << ',' << mx.variance << ',' << mx.variance_ci.lo << ',' << mx.variance_ci.hi << '\n';
    }
    r.estimates.push_back({"limit_mean_z", limit_mean, 0, {limit_mean, limit_mean}});
    r.estimates.push_back({"limit_var_z", limit_var, 0, {limit_var, limit_var}});
    if (log_t.size() >= 2) {
        const auto fit = stats::fit_line(log_t, log_var);
        r.estimates.push_back({"slope", fit.slope, log_t.size(), {fit.slope - 1.96 * fit.slope_se, fit.slope + 1.96 * fit.slope_se}});
        r.checks["slope"] = std::abs(fit.slope - c.threshold("slope_target")) <= c.threshold("slope_tol");
    } else {
        r.checks["slope"] = false;
    }
    r.checks["recentered_mean"] = means_ok;
    r.checks["recentered_mean_shrinks"] = means_shrink;
    if (!enough) r.status = "insufficient";
    finish(r, c, sw);
    return r;
}

// ---------------------------------------------------------------------------

StatReport run_limit_comparison(const ExperimentConfig& c) {
    Stopwatch sw;
    auto r = start_report("limit-law", c);
    const double t = c.times.back();
    std::size_t bad = 0;
    const auto z = second_class_samples(c, t, c.samples, 0, bad);
    r.total = c.samples;
    r.contaminated = bad;
    if (z.empty()) {
        finish(r, c, sw);
        return r;
    }
    const auto cdf = second_class_limit_cdf(c.lambda, c.rho);
    const auto [m, v] = second_class_limit_moments(c.lambda, c.rho);
    const auto gauss = [m = m, sd = std::sqrt(v)](double x) { return 0.5 * std::erfc(-(x - m) / (sd * std::numbers::sqrt2)); };
    const stats::Ecdf ecdf(z);
    const double step = 1.0 / std::cbrt(t);
    r.ks["limit"] = stats::ks_distance(ecdf, cdf, step);
    r.ks["gaussian"] = stats::ks_distance(ecdf, gauss, step);
    // Diagnostic only: the shape of the law once the sample mean is moved onto the limit mean.
    std::vector<double> shifted(z);
    const double offset = stats::moments(z).mean - m;
    for (double& x : shifted) x -= offset;
    r.ks["limit_recentred"] = stats::ks_distance(stats::Ecdf(shifted), cdf, step);
    r.checks["ks"] = r.ks["limit"] <= c.threshold("ks");
    r.checks["discriminates_gaussian"] = r.ks["gaussian"] > r.ks["limit"];
    const auto med = median_estimate("median_z", z);
    r.estimates.push_back(med);
    r.estimates.push_back(mean_estimate("mean_z", stats::moments(z)));
    r.estimates.push_back(variance_estimate("var_z", stats::moments(z)));
    r.estimates.push_back({"limit_mean_z", m, 0, {m, m}});
    r.estimates.push_back({"limit_var_z", v, 0, {v, v}});
    const ShockParameters p{c.lambda, c.rho};
    if (std::abs(p.chi_minus() - p.chi_plus()) < 1e-12) r.checks["median"] = std::abs(med.value) <= c.threshold("median");
    auto csv = open_csv(c, "limit_law_ecdf.csv");
    csv << "z,empirical,limit\n";
    for (double x : ecdf.sorted()) csv << x << ',' << ecdf(x) << ',' << cdf(x) << '\n';
    finish(r, c, sw);
    return r;
}

// ---------------------------------------------------------------------------

namespace {

// x(l) < v l (below = true) or x(l) > v l for every l in [0, path time].
bool confined(const BackwardsPath& path, double v, bool below) {
    const auto& tr = path.trajectory;
    for (std::size_t k = 0; k + 1 < tr.size(); ++k) {
        const double y = static_cast<double>(tr[k].site);
        const double a = v * tr[k + 1].time, b = v * tr[k].time;
        if (below ? !(y < std::min(a, b)) : !(y > std::max(a, b))) return false;
    }
    return true;
}

struct ShockMembers {
    Configuration minus, tilde_plus;
};

ShockMembers shock_members(double lambda, double rho, Interval w) {
    const auto [eta, eta_t] = discrepancy_pair(build_initial(ic::ShockDeterministic{lambda, rho}, w));
    auto split = split_minus_plus(eta, eta_t);
    return {std::move(split.minus), std::move(split.tilde_plus)};
}

struct IndependenceSample {
    bool contaminated = true;
    double hm = 0, hp = 0, hn = 0;
    bool confined_minus = false, confined_plus = false;
};

IndependenceSample independence_seed(const ExperimentConfig& c, double t, std::uint64_t seed) {
    const auto sp = shock_points(c.lambda, c.rho, t, c.tau, c.s, c.nu);
    const Site bm = round_site(sp.xbm), bp = round_site(sp.xbp);
    const auto off = static_cast<Site>(c.threshold("neighbour_offset"));
    EngineOptions opt;
    opt.record_log = true;
    opt.cone = {{bm, sp.tb}, {bp, sp.tb}, {bm + off, sp.tb}};
    opt.cone_margin = margin_for(c, sp.tb);
    const auto w = cone_window(opt.cone, opt.cone_margin);
    auto m = shock_members(c.lambda, c.rho, w);
    CoupledSystem sys(std::make_unique<LiveFeed>(seed, w, sp.tb), {m.minus, m.tilde_plus}, {0, 0}, std::move(opt));
    sys.evolve(sp.tb);
    IndependenceSample out;
    if (!sys.height_exact(bm) || !sys.height_exact(bp) || !sys.height_exact(bm + off)) return out;
    const auto pm = build_backwards_path(sys, 0, bm, sp.tb, PathVariant::kRightmost);
    const auto pp = build_backwards_path(sys, 1, bp, sp.tb, PathVariant::kLeftmost);
    if (pm.contaminated || pp.contaminated) return out;
    const double vs = ShockParameters{c.lambda, c.rho}.shock_speed();
    out.contaminated = false;
    out.hm = static_cast<double>(sys.height(0, bm));
    out.hp = static_cast<double>(sys.height(1, bp));
    out.hn = static_cast<double>(sys.height(0, bm + off));
    out.confined_minus = confined(pm, vs, true);
    out.confined_plus = confined(pp, vs, false);
    return out;
}

}  // namespace

StatReport run_independence_check(const ExperimentConfig& c) {
    Stopwatch sw;
    auto r = start_report("independence", c);
    double prev_fraction = -1.0;
    bool trend = true;
    auto csv = open_csv(c, "independence.csv");
    csv << "t,n,correlation,neighbour_correlation,confined_minus,confined_plus,confined_both\n";
    for (std::size_t k = 0; k < c.times.size(); ++k) {
        const double t = c.times[k];
        const bool last = k + 1 == c.times.size();
        const std::size_t n = last || c.secondary_samples == 0 ? c.samples : c.secondary_samples;
        const auto samples = parallel_map(n, c.threads, [&](std::size_t i) {
            return independence_seed(c, t, c.seed_base + k * 1000003ull + i);
        });
        std::vector<double> hm, hp, hn;
        std::size_t cm = 0, cp = 0, both = 0;
        for (const auto& s : samples) {
            ++r.total;
            if (s.contaminated) {
                ++r.contaminated;
                continue;
            }
            hm.push_back(s.hm);
            hp.push_back(s.hp);
            hn.push_back(s.hn);
            cm += s.confined_minus;
            cp += s.confined_plus;
            both += s.confined_minus && s.confined_plus;
        }
        if (hm.size() < 3) {
            r.status = "insufficient";
            continue;
        }
        const double corr = stats::correlation(hm, hp), corr_n = stats::correlation(hm, hn);
        const auto tag = "_t" + fmt(t);
        r.estimates.push_back(correlation_estimate("correlation" + tag, corr, hm.size()));
        r.estimates.push_back(correlation_estimate("neighbour_correlation" + tag, corr_n, hm.size()));
        r.estimates.push_back(proportion("confined_minus" + tag, cm, hm.size()));
        r.estimates.push_back(proportion("confined_plus" + tag, cp, hm.size()));
        r.estimates.push_back(proportion("confined_both" + tag, both, hm.size()));
        const double frac = static_cast<double>(both) / static_cast<double>(hm.size());
        trend = trend && frac >= prev_fraction;
        prev_fraction = frac;
        csv << t << ',' << hm.size() << ',' << corr << ',' << corr_n << ',' << static_cast<double>(cm) / hm.size() << ','
            << static_cast<double>(cp) / hm.size() << ',' << frac << '\n';
        if (last) {
            const double band = c.threshold("corr_sigmas") / std::sqrt(static_cast<double>(hm.size()));
            r.checks["independence"] = std::abs(corr) <= band;
            r.checks["negative_control"] = std::abs(corr_n) > band;
        }
    }
    r.checks["confinement_trend"] = trend;
    finish(r, c, sw);
    return r;
}

// ---------------------------------------------------------------------------

namespace {

struct DecorrelationSample {
    bool contaminated = true;
    double dm = 0, dp = 0;  // centred differences h(A) - h(B) - prediction
};

DecorrelationSample decorrelation_seed(const ExperimentConfig& c, double t, std::uint64_t seed) {
    const auto sp = shock_points(c.lambda, c.rho, t, c.tau, c.s, c.nu);
    const Site a = round_site(sp.xa), bm = round_site(sp.xbm), bp = round_site(sp.xbp);
    EngineOptions opt;
    opt.cone = {{a, sp.ta}, {bm, sp.tb}, {bp, sp.tb}};
    opt.cone_margin = margin_for(c, sp.ta);
    const auto w = cone_window(opt.cone, opt.cone_margin);
    auto m = shock_members(c.lambda, c.rho, w);
    CoupledSystem sys(std::make_unique<LiveFeed>(seed, w, sp.ta), {m.minus, m.tilde_plus}, {0, 0}, std::move(opt));
    DecorrelationSample out;
    sys.evolve(sp.tb);
    if (!sys.height_exact(bm) || !sys.height_exact(bp)) return out;
    const double hbm = static_cast<double>(sys.height(0, bm)), hbp = static_cast<double>(sys.height(1, bp));
    sys.evolve(sp.ta);
    if (!sys.height_exact(a)) return out;
    const double dt = sp.ta - sp.tb;
    // Growth along (dx, dt) in a flat region of density d: 2 d (1 - d) dt + (1 - 2 d) dx.
    const auto predicted = [&](double d, Site b) { return 2.0 * d * (1.0 - d) * dt + (1.0 - 2.0 * d) * static_cast<double>(a - b); };
    out.contaminated = false;
    out.dm = static_cast<double>(sys.height(0, a)) - hbm - predicted(c.lambda, bm);
    out.dp = static_cast<double>(sys.height(1, a)) - hbp - predicted(c.rho, bp);
    return out;
}

}  // namespace

StatReport run_slow_decorrelation(const ExperimentConfig& c) {
    Stopwatch sw;
    auto r = start_report("slow-decorrelation", c);
    // exceed[side][eps] per time
    std::vector<std::array<std::vector<double>, 2>> p(c.epsilons.size());
    auto csv = open_csv(c, "slow_decorrelation.csv");
    csv << "t,n,side,epsilon,exceedance\n";
    for (std::size_t k = 0; k < c.times.size(); ++k) {
        const double t = c.times[k];
        const auto samples = parallel_map(c.samples, c.threads, [&](std::size_t i) {
            return decorrelation_seed(c, t, c.seed_base + k * 1000003ull + i);
        });
        std::array<std::vector<double>, 2> d;
        for (const auto& s : samples) {
            ++r.total;
            if (s.contaminated) {
                ++r.contaminated;
                continue;
            }
            d[0].push_back(s.dm);
            d[1].push_back(s.dp);
        }
        const auto tag = "_t" + fmt(t);
        for (int side = 0; side < 2; ++side) {
            const std::string name = side ? "plus" : "minus";
            if (d[side].size() < 2) {
                r.status = "insufficient";
                continue;
            }
            std::vector<double> spread;
            for (double v : d[side]) spread.push_back(v / std::pow(t, c.nu / 3.0));
            r.estimates.push_back(variance_estimate("spread_" + name + tag, stats::moments(spread)));
            for (std::size_t e = 0; e < c.epsilons.size(); ++e) {
                const double cut = c.epsilons[e] * std::cbrt(t);
                const auto hits = static_cast<std::size_t>(std::count_if(d[side].begin(), d[side].end(), [&](double v) { return std::abs(v) >= cut; }));
                const auto est = proportion("exceed_" + name + "_eps" + fmt(c.epsilons[e]) + tag, hits, d[side].size());
                r.estimates.push_back(est);
                p[e][side].push_back(est.value);
                csv << t << ',' << d[side].size() << ',' << name << ',' << c.epsilons[e] << ',' << est.value << '\n';
            }
        }
    }
    const double slack = c.threshold("monotone_slack");
    for (std::size_t e = 0; e < c.epsilons.size(); ++e) {
        for (int side = 0; side < 2; ++side) {
            bool ok = p[e][side].size() == c.times.size();
            for (std::size_t k = 1; ok && k < p[e][side].size(); ++k) ok = p[e][side][k] <= p[e][side][k - 1] + slack;
            const auto tag = std::string(side ? "plus" : "minus") + "_eps" + fmt(c.epsilons[e]);
            r.checks["decreasing_" + tag] = ok;
            // Last grid time against the second one, with no slack.
            const auto& q = p[e][side];
            r.checks["endpoint_" + tag] = q.size() == c.times.size() && q.size() >= 2 && q.back() <= q[q.size() > 2 ? 1 : 0];
        }
    }
    finish(r, c, sw);
    return r;
}

// ---------------------------------------------------------------------------

StatReport run_step_law(const ExperimentConfig& c) {
    Stopwatch sw;
    auto r = start_report("step-law", c);
    const double t = c.times.back();
    const Site x = round_site(c.alpha * t);
    const double a = static_cast<double>(x) / t;
    const double center = 0.5 * (1.0 + a * a) * t;
    const double scale = std::pow(1.0 - a * a, 2.0 / 3.0) * std::pow(2.0, -1.0 / 3.0) * std::cbrt(t);
    const auto raw = parallel_map(c.samples, c.threads, [&](std::size_t i) { return sample_step_height(t, x, c.seed_base + i, margin_for(c, t)); });
    std::vector<double> s;
    for (const auto& h : raw) {
        ++r.total;
        if (!h) {
            ++r.contaminated;
            continue;
        }
        // P(h >= center - s scale) -> F_GUE(s).
        s.push_back((center - static_cast<double>(*h)) / scale);
    }
    if (s.size() >= 2) {
        const auto& gue = limits::gue_table();
        const auto m = stats::moments(s);
        r.estimates.push_back(mean_estimate("mean", m));
        r.estimates.push_back(variance_estimate("variance", m));
        r.estimates.push_back({"gue_mean", gue.mean(), 0, {gue.mean(), gue.mean()}});
        r.ks["gue"] = stats::ks_distance(stats::Ecdf(s), [&](double v) { return gue(v); }, 2.0 / scale);
        r.checks["mean"] = std::abs(m.mean - gue.mean()) <= c.threshold("mean_tol");
        r.checks["ks"] = r.ks["gue"] <= c.threshold("ks");
        auto csv = open_csv(c, "step_law_samples.csv");
        csv << "s\n";
        for (double v : s) csv << v << '\n';
    } else {
        r.status = "insufficient";
    }
    finish(r, c, sw);
    return r;
}

// ---------------------------------------------------------------------------

namespace {

struct GeodesicOutcome {
    bool probed = false, probe_holds = true, probe_contaminated = false;
    bool ordered = true, dominated = true;
};

GeodesicOutcome geodesic_seed(const ExperimentConfig& c, std::size_t index) {
    const std::uint64_t seed = c.seed_base + index;
    const double t = c.times.front();
    EngineOptions opt;
    opt.record_log = true;
    const auto w = cone_window({{0, t}}, margin_for(c, t));
    auto stream = std::make_shared<const EventStream>(generate_events(seed, w, t));
    const auto base = build_initial(ic::ShockDeterministic{c.lambda, c.rho}, w);
    const auto [eta, eta_t] = discrepancy_pair(base);
    const auto split = split_minus_plus(eta, eta_t);
    const ic::Step step{0};
    auto sys = make_system(stream, {base, split.minus, build_initial(step, w)}, {0, 0, initial_anchor(step)}, opt);
    sys.evolve(t);
    const KeyedUniforms u(seed, 0x67656f64ull);
    GeodesicOutcome out;
    if (index < c.probe_samples) {
        out.probed = true;
        const auto path = build_backwards_path(sys, 0, 0, t);
        const auto res = verify_geodesic_property(path, sys, 0, stream, {u(0) * t});
        out.probe_holds = res.holds;
        out.probe_contaminated = res.contaminated || path.contaminated;
    }
    Site a = -20 + static_cast<Site>(u(1) * 41.0), b = -20 + static_cast<Site>(u(2) * 41.0);
    if (a == b) ++b;
    if (a > b) std::swap(a, b);
    out.ordered = check_path_ordering(sys, 0, a, b, t) &&
                  paths_coalesce(build_backwards_path(sys, 0, a, t), build_backwards_path(sys, 0, b, t));
    for (Site x : c.sites) out.dominated = out.dominated && check_step_domination(sys, 1, 2, x, t);
    return out;
}

}  // namespace

StatReport run_geodesic_suite(const ExperimentConfig& c) {
    Stopwatch sw;
    auto r = start_report("geodesics", c);
    if (c.times.size() < 2) throw InvalidArgument("geodesics: times needs the path time and the localization time");
    const auto outcomes = parallel_map(c.samples, c.threads, [&](std::size_t i) { return geodesic_seed(c, i); });
    std::size_t probes = 0, probe_fail = 0, order_fail = 0, dom_fail = 0;
    for (const auto& o : outcomes) {
        ++r.total;
        if (o.probed) {
            ++probes;
            if (o.probe_contaminated) ++r.contaminated;
            else probe_fail += !o.probe_holds;
        }
        order_fail += !o.ordered;
        dom_fail += !o.dominated;
    }
    r.estimates.push_back(proportion("geodesic_property_failure_rate", probe_fail, probes));
    r.estimates.push_back(proportion("ordering_failure_rate", order_fail, r.total));
    r.estimates.push_back(proportion("domination_failure_rate", dom_fail, r.total));
    r.checks["geodesic_property"] = probe_fail == 0 && probes == std::min(c.probe_samples, c.samples);
    r.checks["ordering"] = order_fail == 0;
    r.checks["domination"] = dom_fail == 0;

    const double u_star = c.threshold("localization_u");
    auto grid = c.u_grid;
    if (std::find(grid.begin(), grid.end(), u_star) == grid.end()) grid.push_back(u_star);
    std::sort(grid.begin(), grid.end());
    const std::size_t n_loc = c.secondary_samples ? c.secondary_samples : c.samples;
    const auto loc = localization_statistics(c.alpha, c.times[1], n_loc, c.seed_base + 7000000ull, grid);
    r.total += n_loc;
    r.contaminated += loc.contaminated;
    auto csv = open_csv(c, "localization_tail.csv");
    csv << "u,exceed,n,fraction,ci_lo,ci_hi\n";
    for (const auto& tp : loc.tail) {
        r.estimates.push_back({"localization_tail_u" + fmt(tp.u), tp.fraction, loc.samples, tp.ci});
        csv << tp.u << ',' << tp.exceed << ',' << loc.samples << ',' << tp.fraction << ',' << tp.ci.lo << ',' << tp.ci.hi << '\n';
        if (tp.u == u_star) r.checks["localization_tail"] = loc.samples > 0 && tp.fraction < c.threshold("localization_tail");
    }
    finish(r, c, sw);
    return r;
}

}  // namespace tasep::harness
