#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tasep/types.hpp"

namespace tasep {

// Particle classes. The numeric order is the priority order of the
// multiclass dynamics: a clock at s swaps the contents of s and s+1 iff
// class(s) > class(s+1). A single-class configuration uses only kHole and
// kFirst, for which the rule reduces to ordinary TASEP.
enum class Particle : std::uint8_t { kHole = 0, kSecond = 1, kFirst = 2 };

// Occupation variables on a finite window, optionally multiclass.
class Configuration {
public:
    Configuration() = default;
    // All sites empty.
    explicit Configuration(Interval window);
    Configuration(Interval window, std::vector<Particle> classes);

    const Interval& window() const noexcept { return window_; }
    Particle at(Site x) const { return classes_.at(index(x)); }
    int occupied(Site x) const { return at(x) != Particle::kHole ? 1 : 0; }
    void set(Site x, Particle p) { classes_.at(index(x)) = p; }
    void set_occupied(Site x, bool occupied) { set(x, occupied ? Particle::kFirst : Particle::kHole); }

    bool multiclass() const noexcept;
    std::int64_t particle_count() const noexcept;
    std::int64_t count(Particle p) const noexcept;

    const std::vector<Particle>& classes() const noexcept { return classes_; }
    std::vector<Particle>& classes() noexcept { return classes_; }

    // Coordinatewise eta <= other on the occupation variables.
    bool dominated_by(const Configuration& other) const;

    friend bool operator==(const Configuration&, const Configuration&) = default;

private:
    std::size_t index(Site x) const;

    Interval window_{};
    std::vector<Particle> classes_;
};

// h(x+1) - h(x) = 1 - 2 eta(x), pinned by the value at anchor_site.
class HeightFunction {
public:
    HeightFunction() = default;
    HeightFunction(Interval window, Site anchor_site, std::int64_t anchor_value, std::vector<std::int64_t> values);

    const Interval& window() const noexcept { return window_; }
    Site anchor_site() const noexcept { return anchor_site_; }
    std::int64_t anchor_value() const noexcept { return anchor_value_; }
    // Defined on [window.lo, window.hi + 1].
    std::int64_t operator()(Site x) const;
    const std::vector<std::int64_t>& values() const noexcept { return values_; }

    // Occupation reconstructed from the increments.
    Configuration occupation() const;

private:
    Interval window_{};
    Site anchor_site_ = 0;
    std::int64_t anchor_value_ = 0;
    std::vector<std::int64_t> values_;
};

// Height profile with h(0) = anchor_value. The window must contain 0 or end at -1.
HeightFunction height_of(const Configuration& config, std::int64_t anchor_value = 0);

// Densities of a two-sided shock and the derived macroscopic constants.
struct ShockParameters {
    double lambda;
    double rho;

    ShockParameters(double lambda, double rho);

    double shock_speed() const noexcept { return 1.0 - lambda - rho; }
    double height_rate() const noexcept { return 1.0 - lambda - rho + 2.0 * lambda * rho; }
    double chi_minus() const noexcept { return lambda * (1.0 - lambda); }
    double chi_plus() const noexcept { return rho * (1.0 - rho); }
};

namespace ic {
struct Step {
    Site apex = 0;  // eta = 1 on x < apex
};
struct ShockDeterministic {
    double lambda;
    double rho;
};
struct BernoulliShock {
    double lambda;
    double rho;
    std::uint64_t ic_seed;
};
struct Explicit {
    std::vector<Site> particles;
};
}  // namespace ic

using InitialCondition = std::variant<ic::Step, ic::ShockDeterministic, ic::BernoulliShock, ic::Explicit>;

// Value of h(0, 0): zero except for Step(y), whose height is |x - y|.
std::int64_t initial_anchor(const InitialCondition& ic);
std::string describe(const InitialCondition& ic);

Configuration build_initial(const InitialCondition& ic, Interval window);

// Configurations of the decomposition around a single discrepancy at 0.
struct SplitConfigurations {
    Configuration minus;        // eta on x < 0, empty on x >= 0
    Configuration plus;         // eta on x >= 0, full on x < 0
    Configuration tilde_plus;   // tilde eta on x >= 0, full on x < 0
};

SplitConfigurations split_minus_plus(const Configuration& eta, const Configuration& eta_tilde);

// The pair (eta, tilde eta) that differs only at 0: eta(0) = 0, tilde eta(0) = 1.
std::pair<Configuration, Configuration> discrepancy_pair(const Configuration& base);

// Run-length text format, one configuration per record:
//   window <lo> <hi>
//   runs <H|F|S><count> ...
std::string to_rle(const Configuration& config);
Configuration from_rle(const std::string& text);

// Snapshot record: time, height anchor h(0, t), and the configuration.
struct Snapshot {
    double time = 0.0;
    std::int64_t anchor = 0;
    Configuration config;
};
void write_snapshot(std::ostream& out, const Snapshot& snap);
Snapshot read_snapshot(std::istream& in);

}  // namespace tasep
