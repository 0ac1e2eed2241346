#include "tasep/clockwork.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>

namespace tasep {

namespace {

void validate(Interval window, double horizon) {
    if (window.empty()) throw InvalidArgument("event window is empty");
    if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
    if (horizon > kMaxHorizon) throw InvalidArgument("horizon exceeds 1e7");
}

constexpr std::array<char, 8> kMagic{'T', 'A', 'S', 'E', 'P', 'E', 'V', 'S'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("truncated event stream dump");
    return v;
}

}  // namespace

SiteClock::SiteClock(std::uint64_t seed, Site site)
    : uniforms_(seed, static_cast<std::uint64_t>(site)) {
    advance();
}

void SiteClock::advance() noexcept {
    double u;
    if (index_ % 2 == 0) {
        const auto block = uniforms_.block_for(index_ / 2);
        u = uniform_open(block.first);
        spare_ = block.second;
    } else {
        u = uniform_open(spare_);
    }
    ++index_;
    const double prev = next_;
    next_ = prev - std::log(u);
    // Inter-arrival below half an ulp: keep times strictly increasing.
    if (next_ <= prev) next_ = std::nextafter(prev, std::numeric_limits<double>::infinity());
}

EventStream generate_events(std::uint64_t seed, Interval window, double horizon) {
    validate(window, horizon);
    EventStream s;
    s.seed_ = seed;
    s.window_ = window;
    s.horizon_ = horizon;
    s.offsets_.reserve(static_cast<std::size_t>(window.size()) + 1);
    s.offsets_.push_back(0);
    s.times_.reserve(static_cast<std::size_t>(static_cast<double>(window.size()) * (horizon + 3.0 * std::sqrt(horizon) + 1.0)));
    for (Site x = window.lo; x <= window.hi; ++x) {
        SiteClock clock(seed, x);
        while (clock.peek() <= horizon) s.times_.push_back(clock.pop());
        s.offsets_.push_back(s.times_.size());
    }
    return s;
}

std::span<const double> EventStream::times(Site site) const {
    if (!window_.contains(site)) throw std::out_of_range("site " + std::to_string(site) + " outside window " + to_string(window_));
    const auto i = static_cast<std::size_t>(site - window_.lo);
    return {times_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

std::vector<Event> merged_order(const EventStream& stream) {
    std::vector<Event> out;
    if (stream.window().empty()) return out;
    out.reserve(stream.total_events());
    for (Site x = stream.window().lo; x <= stream.window().hi; ++x)
        for (double t : stream.times(x)) out.push_back({t, x});
    std::sort(out.begin(), out.end(), event_before);
    return out;
}

std::optional<double> last_event_before(const EventStream& stream, Site site, double t) {
    const auto ts = stream.times(site);
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    if (it == ts.begin()) return std::nullopt;
    return *std::prev(it);
}

std::optional<double> last_event_strictly_before(const EventStream& stream, Site site, double t) {
    const auto ts = stream.times(site);
    auto it = std::lower_bound(ts.begin(), ts.end(), t);
    if (it == ts.begin()) return std::nullopt;
    return *std::prev(it);
}

void dump_stream(const EventStream& stream, std::ostream& out) {
    out.write(kMagic.data(), kMagic.size());
    write_pod(out, kVersion);
    write_pod(out, stream.seed());
    write_pod(out, stream.window().lo);
    write_pod(out, stream.window().hi);
    write_pod(out, stream.horizon());
    for (Site x = stream.window().lo; x <= stream.window().hi; ++x)
        write_pod(out, static_cast<std::uint64_t>(stream.count(x)));
    for (Site x = stream.window().lo; x <= stream.window().hi; ++x) {
        const auto ts = stream.times(x);
        out.write(reinterpret_cast<const char*>(ts.data()), static_cast<std::streamsize>(ts.size_bytes()));
    }
}

EventStream load_stream(std::istream& in) {
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) throw std::runtime_error("not an event stream dump");
    if (const auto v = read_pod<std::uint32_t>(in); v != kVersion)
        throw std::runtime_error("unsupported event stream dump version " + std::to_string(v));
    EventStream s;
    s.seed_ = read_pod<std::uint64_t>(in);
    s.window_.lo = read_pod<Site>(in);
    s.window_.hi = read_pod<Site>(in);
    s.horizon_ = read_pod<double>(in);
    validate(s.window_, s.horizon_);
    s.offsets_.assign(1, 0);
    for (Site x = s.window_.lo; x <= s.window_.hi; ++x)
        s.offsets_.push_back(s.offsets_.back() + read_pod<std::uint64_t>(in));
    s.times_.resize(s.offsets_.back());
    in.read(reinterpret_cast<char*>(s.times_.data()), static_cast<std::streamsize>(s.times_.size() * sizeof(double)));
    if (!in) throw std::runtime_error("truncated event stream dump");
    return s;
}

void sort_batch(std::vector<Event>& events, double t0, double t1) {
    const std::size_t n = events.size();
    if (n < 64 || !(t1 > t0)) {
        std::sort(events.begin(), events.end(), event_before);
        return;
    }
    // Bucket index is monotone in time, so after scattering only
    // within-bucket inversions remain.
    thread_local std::vector<std::uint32_t> counts;
    thread_local std::vector<Event> scratch;
    counts.assign(n + 1, 0);
    scratch.resize(n);
    const double scale = static_cast<double>(n) / (t1 - t0);
    auto bucket = [&](double t) {
        const double b = (t - t0) * scale;
        if (b <= 0.0) return std::size_t{0};
        return std::min(n - 1, static_cast<std::size_t>(b));
    };
    for (const auto& e : events) ++counts[bucket(e.time) + 1];
    for (std::size_t i = 1; i <= n; ++i) counts[i] += counts[i - 1];
    for (const auto& e : events) scratch[counts[bucket(e.time)]++] = e;
    for (std::size_t i = 1; i < n; ++i) {
        const Event e = scratch[i];
        std::size_t j = i;
        while (j > 0 && event_before(e, scratch[j - 1])) {
            scratch[j] = scratch[j - 1];
            --j;
        }
        scratch[j] = e;
    }
    events.swap(scratch);
}

StreamFeed::StreamFeed(std::shared_ptr<const EventStream> stream, double start)
    : stream_(std::move(stream)), position_(start) {
    if (!stream_) throw InvalidArgument("null event stream");
    active_ = stream_->window();
    if (start < 0.0 || start > stream_->horizon()) throw InvalidArgument("feed start outside [0, horizon]");
    const auto w = stream_->window();
    cursor_.reserve(static_cast<std::size_t>(w.size()));
    for (Site x = w.lo; x <= w.hi; ++x) {
        const auto ts = stream_->times(x);
        cursor_.push_back(static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), start) - ts.begin()));
    }
}

void StreamFeed::next_batch(double until, std::vector<Event>& out) {
    if (until > horizon()) throw InvalidArgument("requested time beyond stream horizon");
    if (until <= position_) return;
    if (!out.empty()) {
        std::vector<Event> batch;
        next_batch(until, batch);
        out.insert(out.end(), batch.begin(), batch.end());
        return;
    }
    const auto w = window();
    for (Site x = active_.lo; x <= active_.hi; ++x) {
        const auto ts = stream_->times(x);
        auto& c = cursor_[static_cast<std::size_t>(x - w.lo)];
        while (c < ts.size() && ts[c] <= until) out.push_back({ts[c++], x});
    }
    sort_batch(out, position_, until);
    position_ = until;
}

namespace {

Interval shrink(Interval current, Interval requested) {
    const Interval next{std::max(current.lo, requested.lo), std::min(current.hi, requested.hi)};
    if (next.empty()) throw InvalidArgument("active region became empty");
    return next;
}

}  // namespace

void StreamFeed::restrict(Interval active) { active_ = shrink(active_, active); }

LiveFeed::LiveFeed(std::uint64_t seed, Interval window, double horizon, double start)
    : window_(window), active_(window), horizon_(horizon), position_(start) {
    validate(window, horizon);
    if (start < 0.0 || start > horizon) throw InvalidArgument("feed start outside [0, horizon]");
    clocks_.reserve(static_cast<std::size_t>(window.size()));
    for (Site x = window.lo; x <= window.hi; ++x) {
        clocks_.emplace_back(seed, x);
        while (clocks_.back().peek() <= start) clocks_.back().pop();
    }
}

void LiveFeed::next_batch(double until, std::vector<Event>& out) {
    if (until > horizon_) throw InvalidArgument("requested time beyond stream horizon");
    if (until <= position_) return;
    if (!out.empty()) {
        std::vector<Event> batch;
        next_batch(until, batch);
        out.insert(out.end(), batch.begin(), batch.end());
        return;
    }
    for (Site x = active_.lo; x <= active_.hi; ++x) {
        auto& clock = clocks_[static_cast<std::size_t>(x - window_.lo)];
        while (clock.peek() <= until) out.push_back({clock.pop(), x});
    }
    sort_batch(out, position_, until);
    position_ = until;
}

void LiveFeed::restrict(Interval active) { active_ = shrink(active_, active); }

}  // namespace tasep
