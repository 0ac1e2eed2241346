#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tasep/clockwork.hpp"
#include "tasep/lattice.hpp"

namespace tasep {

// Simulation window [center - (kappa t + margin), center + (kappa t + margin)].
Interval light_cone_window(double center, double t, double kappa = 3.0, std::int64_t margin = 50);

// A space-time point whose exact value is wanted.
struct ConePoint {
    Site x;
    double t;
};

struct EngineOptions {
    // Keep every applied event with its per-member jump mask; required for
    // heights at earlier times and for backwards paths.
    bool record_log = false;
    // Members whose occupations must stay ordered, first <= second.
    std::vector<std::pair<int, int>> ordered_pairs;
    // Pairs that must differ at exactly one site after every event.
    std::vector<std::pair<int, int>> single_discrepancy_pairs;
    // When non-empty, a site is updated at time s only while it lies within
    // cone_margin + (t - s) of some point (x, t) with t >= s. Sites left
    // behind are frozen and count as contaminated.
    std::vector<ConePoint> cone;
    std::int64_t cone_margin = 50;
};

// Smallest window that holds the backward cones of `points` at time 0.
Interval cone_window(const std::vector<ConePoint>& points, std::int64_t margin);
// Margin that keeps contamination from reaching the cone centre over [0, t].
std::int64_t default_cone_margin(double t);

// Passed to observers after each event. Bit m of `jumped` is set when member
// m had a particle move into an empty site (its height at site+1 rose by 2);
// bit m of `swapped` is set whenever the contents of site and site+1 were
// exchanged, including first/second-class swaps.
struct EventOutcome {
    Event event;
    std::uint32_t jumped = 0;
    std::uint32_t swapped = 0;
};

struct NoObserver {
    template <class System>
    void operator()(const System&, const EventOutcome&) const noexcept {}
};

// Several configurations driven by one event feed (basic coupling). With a
// single member holding second-class particles this is the multiclass
// process. Closed boundaries: an event at the rightmost site does nothing.
//
// Boundary effects are tracked exactly. Site `lo` may differ from the
// infinite-lattice process from time 0, and site `hi` from its first event on;
// a site becomes suspect when an event couples it to a suspect neighbour.
// Everything strictly between the two fronts is exact.
class CoupledSystem {
public:
    CoupledSystem(std::unique_ptr<EventFeed> feed, std::vector<Configuration> members,
                  std::vector<std::int64_t> anchors, EngineOptions options = {});

    std::size_t size() const noexcept { return members_; }
    const Interval& window() const noexcept { return window_; }
    // Sites still being updated.
    const Interval& active() const noexcept { return active_; }
    double time() const noexcept { return time_; }
    double start_time() const noexcept { return start_time_; }
    double horizon() const { return feed_->horizon(); }

    // Applies every event in (time(), until] in replay order.
    template <class Observer>
    void evolve(double until, Observer&& observer);
    void evolve(double until) { evolve(until, NoObserver{}); }

    Particle at(std::size_t member, Site x) const {
        return static_cast<Particle>(cells_[cell(x) * members_ + member]);
    }
    int occupied(std::size_t member, Site x) const { return at(member, x) != Particle::kHole; }
    Configuration configuration(std::size_t member) const;
    Snapshot snapshot(std::size_t member) const;

    // h(0, time()); moves by +2 on each jump from -1 to 0.
    std::int64_t anchor(std::size_t member) const { return anchors_.at(member); }
    std::int64_t height(std::size_t member, Site x) const;
    HeightFunction heights(std::size_t member) const;
    // h(x, s) for start_time() <= s <= time(); needs record_log.
    std::int64_t height_at(std::size_t member, Site x, double s) const;

    // Exactness of the simulated sites.
    Site left_front() const noexcept { return left_front_; }
    Site right_front() const noexcept { return right_front_; }
    Site left_front_at(double s) const;
    Site right_front_at(double s) const;
    bool exact(const Interval& sites) const noexcept {
        return sites.empty() || (left_front_ < sites.lo && sites.hi < right_front_);
    }
    bool exact_at(const Interval& sites, double s) const;
    // True when h(x, time()) is exact: the anchor bond and all sites
    // between 0 and x are uncontaminated.
    bool height_exact(Site x) const noexcept { return exact(height_support(x)); }
    static Interval height_support(Site x) noexcept;

    bool order_violated() const noexcept { return order_violated_; }
    std::size_t events_applied() const noexcept { return events_applied_; }

    // Event log (record_log only).
    bool has_log() const noexcept { return options_.record_log; }
    std::span<const EventOutcome> log() const noexcept { return log_; }
    // Last logged event at `site` with time <= t (strict: < t).
    std::optional<EventOutcome> last_event(Site site, double t, bool strict) const;

private:
    std::size_t cell(Site x) const {
        if (!window_.contains(x)) throw std::out_of_range("site " + std::to_string(x) + " outside window " + to_string(window_));
        return static_cast<std::size_t>(x - window_.lo);
    }
    template <class Observer>
    void apply(const Event& e, Observer& observer);
    void before_swap_checks(std::size_t i);
    void after_swap_checks(std::size_t i);
    void build_index() const;
    void update_active();

    std::unique_ptr<EventFeed> feed_;
    Interval window_;
    Interval active_;
    std::size_t members_;
    std::vector<std::uint8_t> cells_;  // site-major: cells_[i * members_ + m]
    std::vector<std::vector<std::int64_t>> initial_heights_;
    std::vector<std::int64_t> anchors_;
    EngineOptions options_;
    double start_time_;
    double time_;
    double slice_;

    Site left_front_;
    Site right_front_;
    std::vector<std::pair<double, Site>> left_history_;
    std::vector<std::pair<double, Site>> right_history_;

    bool checking_ = false;
    bool order_violated_ = false;
    std::vector<std::int64_t> discrepancy_counts_;
    std::vector<std::int64_t> local_discrepancies_;
    std::size_t events_applied_ = 0;

    std::vector<Event> batch_;
    std::vector<EventOutcome> log_;
    // Per-site view of log_, rebuilt on demand.
    mutable bool index_valid_ = false;
    mutable std::vector<std::size_t> index_offsets_;
    mutable std::vector<std::uint32_t> index_entries_;
    mutable std::vector<std::vector<std::uint32_t>> jump_prefix_;  // per member, aligned with index_entries_
};

// Coupled system over a fresh feed on the given stream, starting at `start`.
CoupledSystem make_system(std::shared_ptr<const EventStream> stream, std::vector<Configuration> members,
                          std::vector<std::int64_t> anchors, EngineOptions options = {}, double start = 0.0);

// One multiclass configuration evolved from time 0 to `until` on `stream`.
Configuration evolve_multiclass(const Configuration& state, std::shared_ptr<const EventStream> stream, double until);

struct MinSuperposition {
    std::int64_t value = 0;
    Site argmin = 0;
    bool on_boundary = false;  // minimizer at an end of y_range
    bool exact = true;         // no step evolution touched a contaminated site
};

// min over y in y_range of h(y, tau) + h^step_{y,tau}(x, t), each step height
// evolved from (y, tau) under the same stream.
MinSuperposition min_superposition(const HeightFunction& h_tau, std::shared_ptr<const EventStream> stream, double tau,
                                   double t, Site x, Interval y_range);

// Exact law of a closed system of at most 12 sites. States are bitmasks,
// bit i for site window.lo + i.
inline constexpr int kMaxCtmcSites = 12;
std::vector<double> exact_ctmc_distribution(const Configuration& config0, double t);
std::uint32_t ctmc_state(const Configuration& config);
Configuration ctmc_configuration(std::uint32_t state, Interval window);

// ---------------------------------------------------------------------------

template <class Observer>
void CoupledSystem::evolve(double until, Observer&& observer) {
    if (until > feed_->horizon()) throw InvalidArgument("evolve: time beyond stream horizon");
    if (until < time_) throw InvalidArgument("evolve: time earlier than current time");
    while (time_ < until) {
        if (!options_.cone.empty()) update_active();
        const double slice_end = std::min(until, time_ + slice_);
        batch_.clear();
        feed_->next_batch(slice_end, batch_);
        for (const auto& e : batch_) apply(e, observer);
        time_ = slice_end;
    }
}

template <class Observer>
void CoupledSystem::apply(const Event& e, Observer& observer) {
    if (!active_.contains(e.site)) return;
    ++events_applied_;
    EventOutcome out{e, 0, 0};
    if (e.site == left_front_) {
        left_front_ = e.site + 1;
        left_history_.emplace_back(e.time, left_front_);
    }
    if (e.site + 1 == right_front_) {
        right_front_ = e.site;
        right_history_.emplace_back(e.time, right_front_);
    }
    if (e.site < window_.hi) {
        const auto i = static_cast<std::size_t>(e.site - window_.lo);
        if (checking_) before_swap_checks(i);
        std::uint8_t* a = cells_.data() + i * members_;
        std::uint8_t* b = a + members_;
        for (std::size_t m = 0; m < members_; ++m) {
            if (a[m] > b[m]) {
                out.swapped |= 1u << m;
                if (b[m] == 0) out.jumped |= 1u << m;
                std::swap(a[m], b[m]);
            }
        }
        if (out.swapped) {
            if (e.site == -1)
                for (std::size_t m = 0; m < members_; ++m)
                    if (out.jumped >> m & 1u) anchors_[m] += 2;
            if (checking_) after_swap_checks(i);
        }
    }
    if (options_.record_log) {
        log_.push_back(out);
        index_valid_ = false;
    }
    observer(*this, out);
}

}  // namespace tasep
