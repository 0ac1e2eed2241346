#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "tasep/engine.hpp"
#include "tasep/stats.hpp"
#include "tasep/tracker.hpp"

namespace tasep {

// Which neighbour a path takes at a local maximum of the height.
enum class PathVariant { kRightmost, kLeftmost };

struct PathPoint {
    double time;
    Site site;
};

// A backwards path from (x, t) to time 0, piecewise constant in time.
// trajectory[0] = (t, x). Each further entry (s, y) records a move at event
// time s: the path sits at the previous site on [s, previous time] and at y
// just before s. The last entry has time 0 and repeats the final site.
struct BackwardsPath {
    ConePoint anchor{};
    std::vector<PathPoint> trajectory;
    PathVariant variant = PathVariant::kRightmost;
    // Some step used a site or log entry outside the exact region.
    bool contaminated = false;

    Site at(double tau) const;
    Site endpoint() const { return trajectory.back().site; }
    std::size_t moves() const { return trajectory.size() - 2; }
    // sup over tau in [0, t] of |x(tau) - alpha tau|.
    double max_deviation(double alpha) const;
};

// Builds the backwards path of `member` from (x, t) out of the event log.
// Going back from time u at site y: take the last event at y - 1 before u.
// If it moved a particle into y the path stays at y; otherwise it steps to a
// neighbour whose height is one lower (the variant picks at a maximum).
BackwardsPath build_backwards_path(const CoupledSystem& system, std::size_t member, Site x, double t,
                                   PathVariant variant = PathVariant::kRightmost);

// h(x, t) == h(x(tau), tau) + h^step_{x(tau), tau}(x, t) at every sampled tau.
// `system` must replay `stream`; the step heights are evolved afresh on it.
CheckResult verify_geodesic_property(const BackwardsPath& path, const CoupledSystem& system, std::size_t member,
                                     std::shared_ptr<const EventStream> stream, const std::vector<double>& sample_times);

// x2(tau) >= x1(tau) for all tau, for the two paths from (x1, t) and (x2, t).
bool check_path_ordering(const CoupledSystem& system, std::size_t member, Site x1, Site x2, double t,
                         PathVariant variant = PathVariant::kRightmost);
bool paths_ordered(const BackwardsPath& left, const BackwardsPath& right);
// After the first time (going backwards) two paths share a site they agree.
bool paths_coalesce(const BackwardsPath& a, const BackwardsPath& b);

// Rightmost path of `member` from (x, t) stays weakly left of the rightmost
// path of `step_member`. Requires h(y, 0) = y on y >= 0 for `member` and
// h(y, 0) = |y| for `step_member`; throws InvalidArgument otherwise.
bool check_step_domination(const CoupledSystem& system, std::size_t member, std::size_t step_member, Site x, double t);

// Logged single-member system from step initial data at 0, simulated on the
// backward cone of (x, t).
CoupledSystem make_step_system(std::uint64_t seed, Site x, double t);

struct TailPoint {
    double u = 0.0;
    std::size_t exceed = 0;
    double fraction = 0.0;
    stats::Bounds ci;
};

struct LocalizationStats {
    double alpha = 0.0;
    double t = 0.0;
    std::size_t samples = 0;
    std::size_t contaminated = 0;
    std::vector<TailPoint> tail;  // P(sup |x(tau) - alpha tau| > u t^{2/3})
};

// Step initial data, rightmost path from (round(alpha t), t), seeds
// seed_base .. seed_base + n - 1.
LocalizationStats localization_statistics(double alpha, double t, std::size_t n, std::uint64_t seed_base,
                                          const std::vector<double>& u_grid);

struct EndpointControl {
    double lambda = 0.0, rho = 0.0, t = 0.0, delta = 0.0;
    std::size_t samples = 0;
    std::size_t hits = 0;
    std::size_t contaminated = 0;
    double fraction = 0.0;
    stats::Bounds ci;
};

// Deterministic shock data. Paths start at (v_s t, t): the rightmost one for
// h- and the leftmost one for tilde h+, the extreme choices for the event
// x-(0) <= -delta t, x+(0) >= delta t with delta = (rho - lambda) / 2.
EndpointControl endpoint_control_statistics(double lambda, double rho, double t, std::size_t n, std::uint64_t seed_base);

// CSV: header "tau,x", two rows per constant piece (both ends).
void write_path_csv(std::ostream& out, const BackwardsPath& path);

}  // namespace tasep
