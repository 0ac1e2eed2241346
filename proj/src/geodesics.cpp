#include "tasep/geodesics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

namespace tasep {

Site BackwardsPath::at(double tau) const {
    const auto it = std::partition_point(trajectory.begin(), trajectory.end(), [&](const PathPoint& p) { return p.time > tau; });
    if (it == trajectory.begin()) return anchor.x;
    return std::prev(it)->site;
}

double BackwardsPath::max_deviation(double alpha) const {
    double d = 0.0;
    for (std::size_t k = 0; k + 1 < trajectory.size(); ++k) {
        const double y = static_cast<double>(trajectory[k].site);
        d = std::max({d, std::abs(y - alpha * trajectory[k].time), std::abs(y - alpha * trajectory[k + 1].time)});
    }
    return d;
}

BackwardsPath build_backwards_path(const CoupledSystem& system, std::size_t member, Site x, double t, PathVariant variant) {
    if (!system.has_log()) throw std::logic_error("backwards paths need an event log");
    if (system.start_time() != 0.0 || t < 0.0 || t > system.time())
        throw std::logic_error("event log does not cover [0, t]");
    if (member >= system.size()) throw std::out_of_range("no such member");
    const auto w = system.window();
    if (x < w.lo || x > w.hi + 1) throw std::out_of_range("path anchor outside window");

    BackwardsPath path;
    path.anchor = {x, t};
    path.variant = variant;
    path.trajectory.push_back({t, x});
    Site y = x;
    double u = t;
    bool first = true;
    for (;;) {
        if (!system.exact_at({y - 1, y}, u)) path.contaminated = true;
        const auto e = system.last_event(y - 1, u, !first);
        first = false;
        if (!e) break;
        const double s = e->event.time;
        u = s;
        if (e->jumped >> member & 1u) continue;
        const auto hy = system.height_at(member, y, s);
        const bool left = y - 1 >= w.lo && system.height_at(member, y - 1, s) == hy - 1;
        const bool right = y + 1 <= w.hi + 1 && system.height_at(member, y + 1, s) == hy - 1;
        if (!left && !right) throw std::logic_error("no lower neighbour at a blocked event");
        if (!system.exact_at({y - 1, y + 1}, s)) path.contaminated = true;
        if (left && right) y = variant == PathVariant::kRightmost ? y + 1 : y - 1;
        else y = left ? y - 1 : y + 1;
        path.trajectory.push_back({s, y});
    }
    path.trajectory.push_back({0.0, y});
    return path;
}

CheckResult verify_geodesic_property(const BackwardsPath& path, const CoupledSystem& system, std::size_t member,
                                     std::shared_ptr<const EventStream> stream, const std::vector<double>& sample_times) {
    if (!stream) throw InvalidArgument("null event stream");
    const auto [x, t] = path.anchor;
    CheckResult r;
    r.contaminated = path.contaminated || !system.exact_at(CoupledSystem::height_support(x), t);
    const auto hxt = system.height_at(member, x, t);
    for (double tau : sample_times) {
        if (!(tau >= 0.0 && tau <= t)) throw InvalidArgument("sample time outside [0, t]");
        const Site y = path.at(tau);
        if (!system.exact_at(CoupledSystem::height_support(y), tau)) r.contaminated = true;
        const ic::Step step{y};
        EngineOptions opt;
        opt.cone = {{x, t}};
        opt.cone_margin = default_cone_margin(t - tau);
        auto fresh = make_system(stream, {build_initial(step, stream->window())}, {initial_anchor(step)}, opt, tau);
        fresh.evolve(t);
        if (!fresh.height_exact(x)) r.contaminated = true;
        r.holds = r.holds && hxt == system.height_at(member, y, tau) + fresh.height(0, x);
    }
    return r;
}

namespace {

// Times at which two piecewise constant paths may need comparing: every
// breakpoint and the midpoint of every gap between them.
std::vector<double> probe_times(const BackwardsPath& a, const BackwardsPath& b) {
    std::set<double> ts;
    for (const auto& p : a.trajectory) ts.insert(p.time);
    for (const auto& p : b.trajectory) ts.insert(p.time);
    std::vector<double> out(ts.begin(), ts.end());
    const auto n = out.size();
    for (std::size_t i = 0; i + 1 < n; ++i) out.push_back(0.5 * (out[i] + out[i + 1]));
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

}  // namespace

bool paths_ordered(const BackwardsPath& left, const BackwardsPath& right) {
    for (double tau : probe_times(left, right))
        if (right.at(tau) < left.at(tau)) return false;
    return true;
}

bool paths_coalesce(const BackwardsPath& a, const BackwardsPath& b) {
    bool met = false;
    for (double tau : probe_times(a, b)) {
        const bool same = a.at(tau) == b.at(tau);
        if (met && !same) return false;
        met = met || same;
    }
    return true;
}

bool check_path_ordering(const CoupledSystem& system, std::size_t member, Site x1, Site x2, double t, PathVariant variant) {
    if (x1 > x2) std::swap(x1, x2);
    return paths_ordered(build_backwards_path(system, member, x1, t, variant),
                         build_backwards_path(system, member, x2, t, variant));
}

bool check_step_domination(const CoupledSystem& system, std::size_t member, std::size_t step_member, Site x, double t) {
    const auto w = system.window();
    const double t0 = system.start_time();
    for (Site y = w.lo; y <= w.hi + 1; ++y) {
        if (system.height_at(step_member, y, t0) != std::abs(y)) throw InvalidArgument("step member is not step data at 0");
        if (y >= 0 && system.height_at(member, y, t0) != y) throw InvalidArgument("member is not empty with h(0) = 0 on y >= 0");
    }
    return paths_ordered(build_backwards_path(system, member, x, t), build_backwards_path(system, step_member, x, t));
}

CoupledSystem make_step_system(std::uint64_t seed, Site x, double t) {
    EngineOptions opt;
    opt.record_log = true;
    opt.cone = {{x, t}};
    opt.cone_margin = default_cone_margin(t);
    const auto w = cone_window(opt.cone, opt.cone_margin);
    const ic::Step step{0};
    return CoupledSystem(std::make_unique<LiveFeed>(seed, w, t), {build_initial(step, w)}, {initial_anchor(step)}, std::move(opt));
}

LocalizationStats localization_statistics(double alpha, double t, std::size_t n, std::uint64_t seed_base,
                                          const std::vector<double>& u_grid) {
    if (!(alpha > -1.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (-1, 1)");
    if (!(t > 0.0)) throw InvalidArgument("t must be positive");
    LocalizationStats st;
    st.alpha = alpha;
    st.t = t;
    const auto x = static_cast<Site>(std::lround(alpha * t));
    const double scale = std::pow(t, 2.0 / 3.0);
    std::vector<std::size_t> exceed(u_grid.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        auto sys = make_step_system(seed_base + i, x, t);
        sys.evolve(t);
        const auto path = build_backwards_path(sys, 0, x, t);
        if (path.contaminated) {
            ++st.contaminated;
            continue;
        }
        ++st.samples;
        const double dev = path.max_deviation(alpha) / scale;
        for (std::size_t k = 0; k < u_grid.size(); ++k) exceed[k] += dev > u_grid[k];
    }
    for (std::size_t k = 0; k < u_grid.size(); ++k) {
        TailPoint p{u_grid[k], exceed[k], 0.0, stats::wilson_interval(exceed[k], st.samples)};
        if (st.samples) p.fraction = static_cast<double>(exceed[k]) / static_cast<double>(st.samples);
        st.tail.push_back(p);
    }
    return st;
}

EndpointControl endpoint_control_statistics(double lambda, double rho, double t, std::size_t n, std::uint64_t seed_base) {
    const ShockParameters params{lambda, rho};
    if (!(t > 0.0)) throw InvalidArgument("t must be positive");
    EndpointControl ec;
    ec.lambda = lambda;
    ec.rho = rho;
    ec.t = t;
    ec.delta = (rho - lambda) / 2;
    const auto x = static_cast<Site>(std::lround(params.shock_speed() * t));
    for (std::size_t i = 0; i < n; ++i) {
        EngineOptions opt;
        opt.record_log = true;
        opt.cone = {{x, t}};
        opt.cone_margin = default_cone_margin(t);
        const auto w = cone_window(opt.cone, opt.cone_margin);
        const auto [eta, eta_t] = discrepancy_pair(build_initial(ic::ShockDeterministic{params.lambda, params.rho}, w));
        const auto split = split_minus_plus(eta, eta_t);
        CoupledSystem sys(std::make_unique<LiveFeed>(seed_base + i, w, t), {split.minus, split.tilde_plus}, {0, 0}, std::move(opt));
        sys.evolve(t);
        const auto minus = build_backwards_path(sys, 0, x, t, PathVariant::kRightmost);
        const auto plus = build_backwards_path(sys, 1, x, t, PathVariant::kLeftmost);
        if (minus.contaminated || plus.contaminated) {
            ++ec.contaminated;
            continue;
        }
        ++ec.samples;
        ec.hits += static_cast<double>(minus.endpoint()) <= -ec.delta * t && static_cast<double>(plus.endpoint()) >= ec.delta * t;
    }
    if (ec.samples) ec.fraction = static_cast<double>(ec.hits) / static_cast<double>(ec.samples);
    ec.ci = stats::wilson_interval(ec.hits, ec.samples);
    return ec;
}

void write_path_csv(std::ostream& out, const BackwardsPath& path) {
    out << "tau,x\n";
    for (std::size_t k = 0; k + 1 < path.trajectory.size(); ++k) {
        out << path.trajectory[k].time << ',' << path.trajectory[k].site << '\n';
        out << path.trajectory[k + 1].time << ',' << path.trajectory[k].site << '\n';
    }
}

}  // namespace tasep
