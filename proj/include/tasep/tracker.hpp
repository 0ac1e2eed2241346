#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tasep/engine.hpp"

namespace tasep {

struct DiscrepancyTrace {
    std::vector<double> times;
    std::vector<Site> positions;
    std::string source;
};

// Site of the unique discrepancy between members a and b; throws
// std::logic_error when there is not exactly one.
Site discrepancy_site(const CoupledSystem& system, std::size_t a, std::size_t b);

// Evolves `pair` through the sorted `times` and records where members a and b
// differ. The single-discrepancy invariant is checked after every event.
DiscrepancyTrace track_second_class(CoupledSystem& pair, const std::vector<double>& times, std::size_t a = 0,
                                    std::size_t b = 1);

// h_tilde == h on x <= x2nd and h_tilde == h - 2 on x > x2nd, over `range`
// (the common domain of both height functions when omitted).
bool verify_shift_relation(const HeightFunction& h, const HeightFunction& h_tilde, Site x2nd, std::int64_t tol = 0);
bool verify_shift_relation(const HeightFunction& h, const HeightFunction& h_tilde, Site x2nd, Interval range,
                           std::int64_t tol = 0);

// The six configurations built from one base configuration with a particle
// at 0, evolved in lockstep:
//   eta, tilde eta      differ only at 0
//   eta-, eta+, tilde eta+  the split configurations
//   multiclass          first class on eta-, second class on tilde eta+ - eta-
// X2nd and the second-class particle Y started at 0 are tracked per event.
class ShockCoupling {
public:
    enum Member : std::size_t { kEta = 0, kEtaTilde, kMinus, kPlus, kTildePlus, kMulticlass };
    static constexpr std::size_t kMembers = 6;

    ShockCoupling(const Configuration& base, std::unique_ptr<EventFeed> feed, EngineOptions options = {});

    void evolve(double until);

    const CoupledSystem& system() const noexcept { return system_; }
    double time() const noexcept { return system_.time(); }
    Site second_class() const noexcept { return x2nd_; }
    Site tracked_y() const noexcept { return y_; }
    bool second_class_exact() const noexcept;
    bool tracked_y_exact() const noexcept;
    // Y == X2nd after every event applied while both sites were exact.
    bool y_always_equal() const noexcept { return y_equal_; }
    // Time at which Y or X2nd first left the exact region (infinity if never).
    double exact_until() const noexcept { return exact_until_; }

    std::int64_t height(Member m, Site x) const { return system_.height(m, x); }
    bool height_exact(Site x) const noexcept { return system_.height_exact(x); }
    // Largest interval around 0 on which every height is exact.
    Interval exact_heights() const noexcept;

private:
    struct Observer;

    CoupledSystem system_;
    Site x2nd_ = 0;
    Site y_ = 0;
    bool y_equal_ = true;
    double exact_until_;
};

// Options for the standard shock experiments. The window follows the
// backward light cone of the observation points.
struct CouplingSetup {
    double lambda = 0.25;
    double rho = 0.75;
    bool bernoulli = false;
    std::uint64_t ic_seed = 0;
    std::int64_t cone_margin = -1;  // -1: default_cone_margin(last observation time)
};

ShockCoupling make_shock_coupling(const CouplingSetup& setup, std::uint64_t seed, const std::vector<ConePoint>& observe);

struct CheckResult {
    bool holds = true;
    bool contaminated = false;
};

// [X2nd(t) >= x] <=> [h-(x,t) <= tilde h+(x,t)] at every (x, t); pairs sorted by t.
CheckResult verify_distribution_identity(std::uint64_t seed, const std::vector<ConePoint>& pairs,
                                         const CouplingSetup& setup = {});
// Y(t) == X2nd(t) at every event time in [0, horizon].
CheckResult verify_y_equals_x(std::uint64_t seed, double horizon, const CouplingSetup& setup = {});
// h-(Y) == tilde h+(Y) and h-(Y+1) == tilde h+(Y+1) + 2 at every sampled time.
CheckResult verify_height_matching(std::uint64_t seed, const std::vector<double>& times, const CouplingSetup& setup = {});
// h = min(h-, h+) and tilde h = min(h-, tilde h+) at (x, t).
CheckResult verify_min_property(std::uint64_t seed, Site x, double t, const CouplingSetup& setup = {});

// Pure checks on the current state of a coupling, restricted to exact sites.
bool check_identity_at(const ShockCoupling& c, Site x);
bool check_height_matching(const ShockCoupling& c);
bool check_min_property_at(const ShockCoupling& c, Site x);
// Whenever h-(x) == tilde h+(x), h-(y) <= tilde h+(y) for every exact y <= x.
bool check_ordering_below_equality(const ShockCoupling& c);

struct Verdict {
    std::uint64_t seed = 0;
    std::map<std::string, bool> checks;
    bool contaminated = false;
    bool passed() const;
};

// {"seed":..,"checks":{name:bool},"contaminated":bool}
std::string to_jsonl(const Verdict& v);
Verdict verdict_from_jsonl(const std::string& line);

}  // namespace tasep
