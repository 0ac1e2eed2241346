#include "tasep/engine.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace tasep {

Interval light_cone_window(double center, double t, double kappa, std::int64_t margin) {
    if (!(t >= 0.0) || !(kappa >= 0.0) || margin < 0) throw InvalidArgument("light cone: negative extent");
    const double half = kappa * t + static_cast<double>(margin);
    return {static_cast<Site>(std::floor(center - half)), static_cast<Site>(std::ceil(center + half))};
}

Interval cone_window(const std::vector<ConePoint>& points, std::int64_t margin) {
    if (points.empty()) throw InvalidArgument("cone needs at least one point");
    Interval w{std::numeric_limits<Site>::max(), std::numeric_limits<Site>::min()};
    for (const auto& p : points) {
        if (!(p.t >= 0.0)) throw InvalidArgument("cone point at negative time");
        const auto reach = static_cast<Site>(std::ceil(p.t)) + margin;
        w.lo = std::min(w.lo, p.x - reach);
        w.hi = std::max(w.hi, p.x + reach);
    }
    return w;
}

std::int64_t default_cone_margin(double t) { return 50 + static_cast<std::int64_t>(std::ceil(6.0 * std::sqrt(std::max(t, 0.0)))); }

CoupledSystem::CoupledSystem(std::unique_ptr<EventFeed> feed, std::vector<Configuration> members,
                             std::vector<std::int64_t> anchors, EngineOptions options)
    : feed_(std::move(feed)), options_(std::move(options)) {
    if (!feed_) throw InvalidArgument("null event feed");
    if (members.empty()) throw InvalidArgument("coupled system needs at least one member");
    if (members.size() > 32) throw InvalidArgument("at most 32 members");
    if (anchors.size() != members.size()) throw InvalidArgument("one anchor per member required");
    window_ = feed_->window();
    active_ = window_;
    members_ = members.size();
    for (const auto& c : members)
        if (c.window() != window_) throw InvalidArgument("member window differs from feed window " + to_string(window_));

    const auto w = static_cast<std::size_t>(window_.size());
    cells_.resize(w * members_);
    for (std::size_t m = 0; m < members_; ++m) {
        const auto& cls = members[m].classes();
        for (std::size_t i = 0; i < w; ++i) cells_[i * members_ + m] = static_cast<std::uint8_t>(cls[i]);
    }
    anchors_ = std::move(anchors);
    if (window_.lo <= 0 && 0 <= window_.hi + 1)
        for (std::size_t m = 0; m < members_; ++m) initial_heights_.push_back(height_of(members[m], anchors_[m]).values());

    start_time_ = time_ = feed_->position();
    slice_ = std::max(1e-3, 8192.0 / static_cast<double>(w));
    left_front_ = window_.lo;
    right_front_ = window_.hi + 1;

    auto check_index = [&](int k) {
        if (k < 0 || static_cast<std::size_t>(k) >= members_) throw InvalidArgument("check pair refers to a missing member");
    };
    for (auto [a, b] : options_.ordered_pairs) {
        check_index(a);
        check_index(b);
        if (!members[static_cast<std::size_t>(a)].dominated_by(members[static_cast<std::size_t>(b)])) order_violated_ = true;
    }
    for (auto [a, b] : options_.single_discrepancy_pairs) {
        check_index(a);
        check_index(b);
        std::int64_t n = 0;
        for (Site x = window_.lo; x <= window_.hi; ++x)
            n += members[static_cast<std::size_t>(a)].occupied(x) != members[static_cast<std::size_t>(b)].occupied(x);
        if (n != 1) throw InvalidArgument("single-discrepancy pair starts with " + std::to_string(n) + " discrepancies");
        discrepancy_counts_.push_back(n);
    }
    local_discrepancies_.resize(discrepancy_counts_.size());
    checking_ = !options_.ordered_pairs.empty() || !options_.single_discrepancy_pairs.empty();
    if (options_.cone_margin < 0) throw InvalidArgument("negative cone margin");
    if (!options_.cone.empty()) {
        update_active();
        slice_ = std::clamp(8192.0 / static_cast<double>(active_.size()), 1e-3, 1.0);
    }
}

void CoupledSystem::update_active() {
    Interval next{std::numeric_limits<Site>::max(), std::numeric_limits<Site>::min()};
    for (const auto& p : options_.cone) {
        if (p.t < time_) continue;
        const auto reach = static_cast<Site>(std::ceil(p.t - time_)) + options_.cone_margin;
        next.lo = std::min(next.lo, p.x - reach);
        next.hi = std::max(next.hi, p.x + reach);
    }
    if (next.empty()) return;  // past every point; nothing left to protect
    next.lo = std::max(next.lo, active_.lo);
    next.hi = std::min(next.hi, active_.hi);
    if (next.empty()) throw std::logic_error("cone left the simulation window");
    if (next == active_) return;
    active_ = next;
    feed_->restrict(active_);
    // Site lo misses arrivals from lo - 1; site hi + 1 is frozen.
    if (active_.lo > left_front_) {
        left_front_ = active_.lo;
        left_history_.emplace_back(time_, left_front_);
    }
    if (active_.hi + 1 < right_front_) {
        right_front_ = active_.hi + 1;
        right_history_.emplace_back(time_, right_front_);
    }
    slice_ = std::clamp(8192.0 / static_cast<double>(active_.size()), 1e-3, 1.0);
}

void CoupledSystem::before_swap_checks(std::size_t i) {
    const auto* c = cells_.data();
    for (std::size_t k = 0; k < options_.single_discrepancy_pairs.size(); ++k) {
        const auto [a, b] = options_.single_discrepancy_pairs[k];
        std::int64_t n = 0;
        for (std::size_t j = i; j <= i + 1; ++j)
            n += (c[j * members_ + static_cast<std::size_t>(a)] != 0) != (c[j * members_ + static_cast<std::size_t>(b)] != 0);
        local_discrepancies_[k] = n;
    }
}

void CoupledSystem::after_swap_checks(std::size_t i) {
    const auto* c = cells_.data();
    for (std::size_t j = i; j <= i + 1; ++j)
        for (auto [a, b] : options_.ordered_pairs)
            if (c[j * members_ + static_cast<std::size_t>(a)] != 0 && c[j * members_ + static_cast<std::size_t>(b)] == 0)
                order_violated_ = true;
    for (std::size_t k = 0; k < options_.single_discrepancy_pairs.size(); ++k) {
        const auto [a, b] = options_.single_discrepancy_pairs[k];
        std::int64_t n = 0;
        for (std::size_t j = i; j <= i + 1; ++j)
            n += (c[j * members_ + static_cast<std::size_t>(a)] != 0) != (c[j * members_ + static_cast<std::size_t>(b)] != 0);
        discrepancy_counts_[k] += n - local_discrepancies_[k];
        if (discrepancy_counts_[k] != 1)
            throw std::logic_error("coupled pair lost its single discrepancy at an event at site " +
                                   std::to_string(window_.lo + static_cast<Site>(i)));
    }
}

Configuration CoupledSystem::configuration(std::size_t member) const {
    if (member >= members_) throw std::out_of_range("no such member");
    std::vector<Particle> cls(static_cast<std::size_t>(window_.size()));
    for (std::size_t i = 0; i < cls.size(); ++i) cls[i] = static_cast<Particle>(cells_[i * members_ + member]);
    return Configuration(window_, std::move(cls));
}

Snapshot CoupledSystem::snapshot(std::size_t member) const { return {time_, anchor(member), configuration(member)}; }

std::int64_t CoupledSystem::height(std::size_t member, Site x) const {
    if (member >= members_) throw std::out_of_range("no such member");
    if (x < window_.lo || x > window_.hi + 1) throw std::out_of_range("height queried outside window");
    std::int64_t h = anchors_[member];
    for (Site y = 0; y < x; ++y) h += 1 - 2 * occupied(member, y);
    for (Site y = -1; y >= x; --y) h -= 1 - 2 * occupied(member, y);
    return h;
}

HeightFunction CoupledSystem::heights(std::size_t member) const { return height_of(configuration(member), anchor(member)); }

Interval CoupledSystem::height_support(Site x) noexcept { return {std::min<Site>(x, -1), std::max<Site>(x - 1, 0)}; }

Site CoupledSystem::left_front_at(double s) const {
    auto it = std::upper_bound(left_history_.begin(), left_history_.end(), s,
                               [](double v, const auto& p) { return v < p.first; });
    return it == left_history_.begin() ? window_.lo : std::prev(it)->second;
}

Site CoupledSystem::right_front_at(double s) const {
    auto it = std::upper_bound(right_history_.begin(), right_history_.end(), s,
                               [](double v, const auto& p) { return v < p.first; });
    return it == right_history_.begin() ? window_.hi + 1 : std::prev(it)->second;
}

bool CoupledSystem::exact_at(const Interval& sites, double s) const {
    return sites.empty() || (left_front_at(s) < sites.lo && sites.hi < right_front_at(s));
}

void CoupledSystem::build_index() const {
    if (index_valid_) return;
    const auto w = static_cast<std::size_t>(window_.size());
    index_offsets_.assign(w + 1, 0);
    for (const auto& o : log_) ++index_offsets_[static_cast<std::size_t>(o.event.site - window_.lo) + 1];
    std::partial_sum(index_offsets_.begin(), index_offsets_.end(), index_offsets_.begin());
    index_entries_.resize(log_.size());
    std::vector<std::size_t> fill(index_offsets_.begin(), index_offsets_.end() - 1);
    for (std::size_t k = 0; k < log_.size(); ++k)
        index_entries_[fill[static_cast<std::size_t>(log_[k].event.site - window_.lo)]++] = static_cast<std::uint32_t>(k);
    jump_prefix_.assign(members_, std::vector<std::uint32_t>(log_.size()));
    for (std::size_t m = 0; m < members_; ++m) {
        auto& pre = jump_prefix_[m];
        for (std::size_t i = 0; i < w; ++i) {
            std::uint32_t n = 0;
            for (auto k = index_offsets_[i]; k < index_offsets_[i + 1]; ++k) {
                n += log_[index_entries_[k]].jumped >> m & 1u;
                pre[k] = n;
            }
        }
    }
    index_valid_ = true;
}

std::int64_t CoupledSystem::height_at(std::size_t member, Site x, double s) const {
    if (!options_.record_log) throw std::logic_error("height_at needs an event log");
    if (member >= members_) throw std::out_of_range("no such member");
    if (initial_heights_.empty()) throw std::logic_error("window does not carry the height anchor");
    if (x < window_.lo || x > window_.hi + 1) throw std::out_of_range("height queried outside window");
    if (s < start_time_ || s > time_) throw std::out_of_range("height queried outside simulated time span");
    const std::int64_t h0 = initial_heights_[member][static_cast<std::size_t>(x - window_.lo)];
    const Site from = x - 1;
    if (from < window_.lo || from >= window_.hi) return h0;
    build_index();
    const auto i = static_cast<std::size_t>(from - window_.lo);
    const auto b = index_entries_.begin() + static_cast<std::ptrdiff_t>(index_offsets_[i]);
    const auto e = index_entries_.begin() + static_cast<std::ptrdiff_t>(index_offsets_[i + 1]);
    const auto it = std::upper_bound(b, e, s, [&](double v, std::uint32_t k) { return v < log_[k].event.time; });
    if (it == b) return h0;
    return h0 + 2 * static_cast<std::int64_t>(jump_prefix_[member][static_cast<std::size_t>(it - index_entries_.begin()) - 1]);
}

std::optional<EventOutcome> CoupledSystem::last_event(Site site, double t, bool strict) const {
    if (!options_.record_log) throw std::logic_error("last_event needs an event log");
    if (!window_.contains(site)) return std::nullopt;
    build_index();
    const auto i = static_cast<std::size_t>(site - window_.lo);
    const auto b = index_entries_.begin() + static_cast<std::ptrdiff_t>(index_offsets_[i]);
    const auto e = index_entries_.begin() + static_cast<std::ptrdiff_t>(index_offsets_[i + 1]);
    const auto it = strict ? std::lower_bound(b, e, t, [&](std::uint32_t k, double v) { return log_[k].event.time < v; })
                           : std::upper_bound(b, e, t, [&](double v, std::uint32_t k) { return v < log_[k].event.time; });
    if (it == b) return std::nullopt;
    return log_[*std::prev(it)];
}

CoupledSystem make_system(std::shared_ptr<const EventStream> stream, std::vector<Configuration> members,
                          std::vector<std::int64_t> anchors, EngineOptions options, double start) {
    return CoupledSystem(std::make_unique<StreamFeed>(std::move(stream), start), std::move(members), std::move(anchors),
                         std::move(options));
}

Configuration evolve_multiclass(const Configuration& state, std::shared_ptr<const EventStream> stream, double until) {
    auto sys = make_system(std::move(stream), {state}, {0});
    sys.evolve(until);
    return sys.configuration(0);
}

MinSuperposition min_superposition(const HeightFunction& h_tau, std::shared_ptr<const EventStream> stream, double tau,
                                   double t, Site x, Interval y_range) {
    if (!stream) throw InvalidArgument("null event stream");
    if (!(0.0 <= tau && tau <= t && t <= stream->horizon())) throw InvalidArgument("min_superposition: need 0 <= tau <= t <= horizon");
    if (y_range.empty() || !stream->window().contains(y_range)) throw InvalidArgument("y range outside stream window");
    MinSuperposition best;
    bool first = true;
    for (Site y = y_range.lo; y <= y_range.hi; ++y) {
        const ic::Step step{y};
        auto sys = make_system(stream, {build_initial(step, stream->window())}, {initial_anchor(step)}, {}, tau);
        sys.evolve(t);
        const auto v = h_tau(y) + sys.height(0, x);
        best.exact = best.exact && sys.height_exact(x);
        if (first || v < best.value) {
            best.value = v;
            best.argmin = y;
            first = false;
        }
    }
    best.on_boundary = y_range.size() > 1 && (best.argmin == y_range.lo || best.argmin == y_range.hi);
    return best;
}

std::uint32_t ctmc_state(const Configuration& config) {
    if (config.window().size() > kMaxCtmcSites) throw InvalidArgument("CTMC oracle supports at most 12 sites");
    std::uint32_t s = 0;
    for (Site x = config.window().lo; x <= config.window().hi; ++x)
        if (config.occupied(x)) s |= 1u << (x - config.window().lo);
    return s;
}

Configuration ctmc_configuration(std::uint32_t state, Interval window) {
    Configuration c(window);
    for (Site x = window.lo; x <= window.hi; ++x) c.set_occupied(x, state >> (x - window.lo) & 1u);
    return c;
}

std::vector<double> exact_ctmc_distribution(const Configuration& config0, double t) {
    const auto n = static_cast<int>(config0.window().size());
    if (n < 1 || n > kMaxCtmcSites) throw InvalidArgument("CTMC oracle supports 1 to 12 sites");
    if (config0.multiclass()) throw InvalidArgument("CTMC oracle is single-class");
    if (!(t >= 0.0)) throw InvalidArgument("negative time");
    const std::size_t states = std::size_t{1} << n;
    std::vector<double> p(states, 0.0);
    p[ctmc_state(config0)] = 1.0;
    if (t == 0.0 || n == 1) return p;

    // Forward equation dp/dt = p L with L from the jump rule. Split [0, t]
    // into steps with h ||L||_1 <= 1/2 and apply a truncated Taylor series
    // of exp(h L) on each.
    const double norm = 2.0 * (n - 1);
    const auto steps = static_cast<std::size_t>(std::ceil(t * norm / 0.5));
    const double h = t / static_cast<double>(steps);
    std::vector<double> term(states), next(states);
    auto apply_generator = [&](const std::vector<double>& in, std::vector<double>& out) {
        std::fill(out.begin(), out.end(), 0.0);
        for (std::uint32_t s = 0; s < states; ++s) {
            if (in[s] == 0.0) continue;
            for (int i = 0; i + 1 < n; ++i) {
                if ((s >> i & 1u) && !(s >> (i + 1) & 1u)) {
                    const std::uint32_t to = s ^ (3u << i);
                    out[to] += in[s];
                    out[s] -= in[s];
                }
            }
        }
    };
    constexpr double kTolerance = 1e-12;
    for (std::size_t step = 0; step < steps; ++step) {
        term = p;
        for (int k = 1; k < 200; ++k) {
            apply_generator(term, next);
            double mass = 0.0;
            for (std::size_t s = 0; s < states; ++s) {
                term[s] = next[s] * h / k;
                p[s] += term[s];
                mass += std::abs(term[s]);
            }
            if (mass < kTolerance * 1e-3) break;
        }
    }
    return p;
}

}  // namespace tasep
