#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tasep {

using Site = std::int64_t;

// Closed integer interval [lo, hi]; empty when lo > hi.
struct Interval {
    Site lo = 0;
    Site hi = -1;

    constexpr bool empty() const noexcept { return lo > hi; }
    constexpr std::int64_t size() const noexcept { return empty() ? 0 : hi - lo + 1; }
    constexpr bool contains(Site x) const noexcept { return lo <= x && x <= hi; }
    constexpr bool contains(const Interval& other) const noexcept {
        return other.empty() || (lo <= other.lo && other.hi <= hi);
    }
    friend constexpr bool operator==(const Interval&, const Interval&) = default;
};

// One clock ring: the Poisson process attached to `site` fired at `time`.
struct Event {
    double time = 0.0;
    Site site = 0;

    friend constexpr bool operator==(const Event&, const Event&) = default;
};

// Total order used for replay: by time, ties broken by site index.
constexpr bool event_before(const Event& a, const Event& b) noexcept {
    return a.time < b.time || (a.time == b.time && a.site < b.site);
}

class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline std::string to_string(const Interval& w) {
    return "[" + std::to_string(w.lo) + "," + std::to_string(w.hi) + "]";
}

}  // namespace tasep
