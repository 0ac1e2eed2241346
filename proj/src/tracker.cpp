#include "tasep/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

namespace tasep {

Site discrepancy_site(const CoupledSystem& system, std::size_t a, std::size_t b) {
    const auto w = system.window();
    Site found = 0;
    int n = 0;
    for (Site x = w.lo; x <= w.hi; ++x) {
        if (system.occupied(a, x) != system.occupied(b, x)) {
            found = x;
            ++n;
        }
    }
    if (n != 1) throw std::logic_error("expected one discrepancy, found " + std::to_string(n));
    return found;
}

namespace {

// Follows the discrepancy of members (a, b); it can only move at an event
// at its own site or the site to its left.
struct DiscrepancyFollower {
    std::size_t a, b;
    Site pos;

    void update(const CoupledSystem& sys, const EventOutcome& o) {
        const Site s = o.event.site;
        if (pos != s && pos != s + 1) return;
        if (s + 1 > sys.window().hi) return;
        pos = sys.occupied(a, s) != sys.occupied(b, s) ? s : s + 1;
    }
};

}  // namespace

DiscrepancyTrace track_second_class(CoupledSystem& pair, const std::vector<double>& times, std::size_t a, std::size_t b) {
    if (!std::is_sorted(times.begin(), times.end())) throw InvalidArgument("sample times must be sorted");
    DiscrepancyFollower f{a, b, discrepancy_site(pair, a, b)};
    DiscrepancyTrace trace;
    trace.source = "members " + std::to_string(a) + "/" + std::to_string(b);
    for (double t : times) {
        pair.evolve(t, [&](const CoupledSystem& sys, const EventOutcome& o) {
            f.update(sys, o);
            const Site s = o.event.site;
            // Every event touching the discrepancy's neighbourhood must leave exactly one.
            if (s + 1 <= sys.window().hi && (s == f.pos || s + 1 == f.pos)) {
                const int here = (sys.occupied(a, s) != sys.occupied(b, s)) + (sys.occupied(a, s + 1) != sys.occupied(b, s + 1));
                if (here != 1) throw std::logic_error("second-class particle lost at an event at site " + std::to_string(s));
            }
        });
        trace.times.push_back(t);
        trace.positions.push_back(f.pos);
    }
    if (f.pos != discrepancy_site(pair, a, b)) throw std::logic_error("discrepancy tracking diverged");
    return trace;
}

bool verify_shift_relation(const HeightFunction& h, const HeightFunction& h_tilde, Site x2nd, Interval range, std::int64_t tol) {
    for (Site x = range.lo; x <= range.hi; ++x) {
        const auto expect = x <= x2nd ? h(x) : h(x) - 2;
        if (std::abs(h_tilde(x) - expect) > tol) return false;
    }
    return true;
}

bool verify_shift_relation(const HeightFunction& h, const HeightFunction& h_tilde, Site x2nd, std::int64_t tol) {
    const Interval common{std::max(h.window().lo, h_tilde.window().lo), std::min(h.window().hi, h_tilde.window().hi) + 1};
    return verify_shift_relation(h, h_tilde, x2nd, common, tol);
}

namespace {

std::vector<Configuration> coupling_members(const Configuration& base) {
    auto [eta, eta_t] = discrepancy_pair(base);
    auto split = split_minus_plus(eta, eta_t);
    Configuration multi(base.window());
    for (Site x = base.window().lo; x <= base.window().hi; ++x) {
        if (split.minus.occupied(x)) multi.set(x, Particle::kFirst);
        else if (split.tilde_plus.occupied(x)) multi.set(x, Particle::kSecond);
    }
    return {eta, eta_t, split.minus, split.plus, split.tilde_plus, multi};
}

EngineOptions coupling_options(EngineOptions o) {
    using S = ShockCoupling;
    o.ordered_pairs = {{S::kEta, S::kEtaTilde}, {S::kMinus, S::kEta}, {S::kEta, S::kPlus}, {S::kPlus, S::kTildePlus},
                       {S::kMinus, S::kTildePlus}};
    o.single_discrepancy_pairs = {{S::kEta, S::kEtaTilde}, {S::kPlus, S::kTildePlus}};
    return o;
}

}  // namespace

struct ShockCoupling::Observer {
    ShockCoupling& c;
    DiscrepancyFollower follow;

    void operator()(const CoupledSystem& sys, const EventOutcome& o) {
        follow.update(sys, o);
        c.x2nd_ = follow.pos;
        if (o.swapped >> kMulticlass & 1u) {
            const Site s = o.event.site;
            if (c.y_ == s) c.y_ = s + 1;
            else if (c.y_ == s + 1) c.y_ = s;
        }
        if (c.exact_until_ == std::numeric_limits<double>::infinity()) {
            if (!c.second_class_exact() || !c.tracked_y_exact()) c.exact_until_ = o.event.time;
            else if (c.y_ != c.x2nd_) c.y_equal_ = false;
        }
    }
};

ShockCoupling::ShockCoupling(const Configuration& base, std::unique_ptr<EventFeed> feed, EngineOptions options)
    : system_(std::move(feed), coupling_members(base), std::vector<std::int64_t>(kMembers, 0), coupling_options(std::move(options))),
      exact_until_(std::numeric_limits<double>::infinity()) {
    if (!second_class_exact()) exact_until_ = system_.time();
}

void ShockCoupling::evolve(double until) {
    Observer obs{*this, {kEta, kEtaTilde, x2nd_}};
    system_.evolve(until, obs);
}

bool ShockCoupling::second_class_exact() const noexcept { return system_.exact({x2nd_, x2nd_}); }
bool ShockCoupling::tracked_y_exact() const noexcept { return system_.exact({y_, y_}); }

Interval ShockCoupling::exact_heights() const noexcept {
    const Site lf = system_.left_front(), rf = system_.right_front();
    if (!(lf < -1 && rf > 0)) return {};
    return {lf + 1, rf};
}

ShockCoupling make_shock_coupling(const CouplingSetup& setup, std::uint64_t seed, const std::vector<ConePoint>& observe) {
    if (observe.empty()) throw InvalidArgument("coupling needs at least one observation point");
    double horizon = 0.0;
    for (const auto& p : observe) horizon = std::max(horizon, p.t);
    if (!(horizon > 0.0)) throw InvalidArgument("observation times must include a positive time");
    EngineOptions opt;
    opt.cone = observe;
    opt.cone_margin = setup.cone_margin >= 0 ? setup.cone_margin : default_cone_margin(horizon);
    const auto w = cone_window(observe, opt.cone_margin);
    const InitialCondition ic = setup.bernoulli ? InitialCondition{ic::BernoulliShock{setup.lambda, setup.rho, setup.ic_seed}}
                                                : InitialCondition{ic::ShockDeterministic{setup.lambda, setup.rho}};
    return ShockCoupling(build_initial(ic, w), std::make_unique<LiveFeed>(seed, w, horizon), std::move(opt));
}

bool check_identity_at(const ShockCoupling& c, Site x) {
    using S = ShockCoupling;
    return (c.second_class() >= x) == (c.height(S::kMinus, x) <= c.height(S::kTildePlus, x));
}

bool check_height_matching(const ShockCoupling& c) {
    using S = ShockCoupling;
    const Site y = c.tracked_y();
    return c.height(S::kMinus, y) == c.height(S::kTildePlus, y) && c.height(S::kMinus, y + 1) == c.height(S::kTildePlus, y + 1) + 2;
}

bool check_min_property_at(const ShockCoupling& c, Site x) {
    using S = ShockCoupling;
    const auto hm = c.height(S::kMinus, x);
    return c.height(S::kEta, x) == std::min(hm, c.height(S::kPlus, x)) &&
           c.height(S::kEtaTilde, x) == std::min(hm, c.height(S::kTildePlus, x));
}

bool check_ordering_below_equality(const ShockCoupling& c) {
    using S = ShockCoupling;
    const auto range = c.exact_heights();
    if (range.empty()) return true;
    const auto hm = c.system().heights(S::kMinus);
    const auto hp = c.system().heights(S::kTildePlus);
    bool below = true;
    for (Site x = range.lo; x <= range.hi; ++x) {
        below = below && hm(x) <= hp(x);
        if (hm(x) == hp(x) && !below) return false;
    }
    return true;
}

namespace {

std::vector<ConePoint> sorted_by_time(std::vector<ConePoint> pts) {
    std::stable_sort(pts.begin(), pts.end(), [](const ConePoint& a, const ConePoint& b) { return a.t < b.t; });
    return pts;
}

}  // namespace

CheckResult verify_distribution_identity(std::uint64_t seed, const std::vector<ConePoint>& pairs, const CouplingSetup& setup) {
    const auto pts = sorted_by_time(pairs);
    auto c = make_shock_coupling(setup, seed, pts);
    CheckResult r;
    for (const auto& p : pts) {
        c.evolve(p.t);
        if (!c.second_class_exact() || !c.height_exact(p.x)) {
            r.contaminated = true;
            continue;
        }
        r.holds = r.holds && check_identity_at(c, p.x);
    }
    return r;
}

CheckResult verify_y_equals_x(std::uint64_t seed, double horizon, const CouplingSetup& setup) {
    auto c = make_shock_coupling(setup, seed, {{0, horizon}});
    c.evolve(horizon);
    return {c.y_always_equal(), c.exact_until() <= horizon};
}

CheckResult verify_height_matching(std::uint64_t seed, const std::vector<double>& times, const CouplingSetup& setup) {
    if (times.empty()) return {};
    std::vector<ConePoint> pts;
    for (double t : times) pts.push_back({0, t});
    pts = sorted_by_time(pts);
    auto c = make_shock_coupling(setup, seed, pts);
    CheckResult r;
    for (const auto& p : pts) {
        c.evolve(p.t);
        const Site y = c.tracked_y();
        if (!c.tracked_y_exact() || !c.height_exact(y) || !c.height_exact(y + 1)) {
            r.contaminated = true;
            continue;
        }
        r.holds = r.holds && check_height_matching(c) && check_ordering_below_equality(c);
    }
    return r;
}

CheckResult verify_min_property(std::uint64_t seed, Site x, double t, const CouplingSetup& setup) {
    auto c = make_shock_coupling(setup, seed, {{x, t}});
    c.evolve(t);
    if (!c.height_exact(x)) return {true, true};
    return {check_min_property_at(c, x), false};
}

bool Verdict::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& kv) { return kv.second; });
}

std::string to_jsonl(const Verdict& v) {
    nlohmann::ordered_json j;
    j["seed"] = v.seed;
    j["checks"] = nlohmann::ordered_json::object();
    for (const auto& [name, ok] : v.checks) j["checks"][name] = ok;
    j["contaminated"] = v.contaminated;
    return j.dump();
}

Verdict verdict_from_jsonl(const std::string& line) {
    const auto j = nlohmann::json::parse(line);
    Verdict v;
    v.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [name, ok] : j.at("checks").items()) v.checks[name] = ok.get<bool>();
    v.contaminated = j.at("contaminated").get<bool>();
    return v;
}

}  // namespace tasep
