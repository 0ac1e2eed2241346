#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "tasep/philox.hpp"
#include "tasep/types.hpp"

namespace tasep {

// Horizons beyond this leave too little double resolution between events.
inline constexpr double kMaxHorizon = 1e7;

// Rate-1 Poisson clock of one site. The k-th inter-arrival time is a
// deterministic function of (seed, site, k), so the realization does not
// depend on which other sites are simulated.
class SiteClock {
public:
    SiteClock(std::uint64_t seed, Site site);

    double peek() const noexcept { return next_; }
    double pop() noexcept {
        const double t = next_;
        advance();
        return t;
    }

private:
    void advance() noexcept;

    KeyedUniforms uniforms_;
    std::uint64_t index_ = 0;
    std::uint64_t spare_ = 0;
    double next_ = 0.0;
};

// Materialized per-site event times on window x horizon.
class EventStream {
public:
    EventStream() = default;

    std::uint64_t seed() const noexcept { return seed_; }
    const Interval& window() const noexcept { return window_; }
    double horizon() const noexcept { return horizon_; }

    std::span<const double> times(Site site) const;
    std::size_t total_events() const noexcept { return times_.size(); }
    std::size_t count(Site site) const { return times(site).size(); }

    friend EventStream generate_events(std::uint64_t seed, Interval window, double horizon);
    friend EventStream load_stream(std::istream& in);

    friend bool operator==(const EventStream&, const EventStream&) = default;

private:
    std::uint64_t seed_ = 0;
    Interval window_{};
    double horizon_ = 0.0;
    std::vector<std::size_t> offsets_;  // CSR row offsets, size() == window.size() + 1
    std::vector<double> times_;
};

EventStream generate_events(std::uint64_t seed, Interval window, double horizon);

// All events of the stream in replay order (time, then site).
std::vector<Event> merged_order(const EventStream& stream);

// Largest event time at `site` that is <= t, if any.
std::optional<double> last_event_before(const EventStream& stream, Site site, double t);
// Largest event time at `site` that is strictly < t, if any.
std::optional<double> last_event_strictly_before(const EventStream& stream, Site site, double t);

// Binary dump format (little-endian host order):
//   magic "TASEPEVS", u32 version, u64 seed, i64 lo, i64 hi, f64 horizon,
//   u64 count[window.size()], f64 times[sum(count)]
void dump_stream(const EventStream& stream, std::ostream& out);
EventStream load_stream(std::istream& in);

// Sorts a batch of events whose times lie in (t0, t1] into replay order.
// Linear-time bucket pass followed by insertion sort.
void sort_batch(std::vector<Event>& events, double t0, double t1);

// A source of events in replay order, consumed in increasing time batches.
class EventFeed {
public:
    virtual ~EventFeed() = default;

    virtual Interval window() const = 0;
    virtual double horizon() const = 0;
    // Time up to which events have been delivered.
    virtual double position() const = 0;
    // Appends all events with time in (position(), until] in replay order and
    // sets position() to until.
    virtual void next_batch(double until, std::vector<Event>& out) = 0;
    // Stop delivering events at sites outside `active`. Regions may only shrink.
    virtual void restrict(Interval active) = 0;
};

// Replays a materialized stream starting after time `start`.
class StreamFeed final : public EventFeed {
public:
    explicit StreamFeed(std::shared_ptr<const EventStream> stream, double start = 0.0);

    Interval window() const override { return stream_->window(); }
    double horizon() const override { return stream_->horizon(); }
    double position() const override { return position_; }
    void next_batch(double until, std::vector<Event>& out) override;
    void restrict(Interval active) override;

    const EventStream& stream() const noexcept { return *stream_; }

private:
    std::shared_ptr<const EventStream> stream_;
    Interval active_;
    std::vector<std::size_t> cursor_;
    double position_;
};

// Generates the same events as generate_events() on the fly, without storing
// them. Memory is O(window) regardless of the horizon.
class LiveFeed final : public EventFeed {
public:
    LiveFeed(std::uint64_t seed, Interval window, double horizon, double start = 0.0);

    Interval window() const override { return window_; }
    double horizon() const override { return horizon_; }
    double position() const override { return position_; }
    void next_batch(double until, std::vector<Event>& out) override;
    void restrict(Interval active) override;

private:
    Interval window_;
    Interval active_;
    double horizon_;
    double position_;
    std::vector<SiteClock> clocks_;
};

}  // namespace tasep
