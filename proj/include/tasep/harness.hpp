#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "tasep/stats.hpp"
#include "tasep/types.hpp"

namespace tasep::harness {

// One experiment's parameters. Loaded from a JSON object whose keys match the
// field names; missing keys keep the defaults of default_config(experiment).
struct ExperimentConfig {
    std::string experiment = "identity";
    double lambda = 0.25;
    double rho = 0.75;
    std::vector<double> times{10.0, 50.0, 100.0};
    std::vector<Site> sites{-5, 0, 5};
    double tau = 0.0;  // time offset tau t^{2/3} of the points A, B+-
    double s = 0.0;    // space offset s t^{1/3} of A
    double nu = 0.8;
    std::vector<double> epsilons{0.5, 1.0, 2.0};
    double alpha = 0.0;
    std::vector<double> u_grid{1.0, 2.0, 3.0};
    std::size_t samples = 100;
    std::size_t secondary_samples = 0;  // localization runs, confinement runs at earlier times
    std::size_t probe_samples = 0;      // seeds with a geodesic-property probe
    std::uint64_t seed_base = 0;
    std::int64_t cone_margin = -1;  // -1: default_cone_margin(t)
    unsigned threads = 1;           // 0: hardware concurrency
    bool negative_control = false;
    std::string output_dir = "results";
    std::map<std::string, double> thresholds;

    // Throws InvalidArgument when the threshold is not set.
    double threshold(const std::string& name) const;
    // lambda < rho inside (0, 1), positive sorted times, nu in (2/3, 1), ...
    void validate() const;
};

// Names accepted by default_config and run_experiment.
const std::vector<std::string>& experiment_names();
// Calibrated defaults, thresholds included.
ExperimentConfig default_config(const std::string& experiment);
ExperimentConfig parse_config(const std::string& json_text);
// Throws std::runtime_error when the file cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path);
std::string to_json(const ExperimentConfig& config);
// TASEP_OUTPUT_DIR when set, otherwise config.output_dir.
std::filesystem::path output_directory(const ExperimentConfig& config);

struct Estimate {
    std::string name;
    double value = 0.0;
    std::size_t n = 0;
    stats::Bounds ci;
};

struct StatReport {
    std::string id;
    // pass, fail, contaminated (too many samples left the exact region) or
    // insufficient (too few samples for the estimate).
    std::string status = "pass";
    bool vacuous = false;  // no samples at all
    std::map<std::string, bool> checks;
    std::vector<Estimate> estimates;
    std::map<std::string, double> ks;
    std::size_t contaminated = 0;
    std::size_t total = 0;
    double runtime_seconds = 0.0;
    std::map<std::string, double> thresholds;

    bool passed() const { return status == "pass"; }
    const Estimate& estimate(const std::string& name) const;
    // status = fail if any check failed and no other status was set.
    void settle();
};

std::string to_jsonl(const StatReport& report);
StatReport report_from_jsonl(const std::string& line);
// Appends one line to <dir>/<id>.jsonl.
void append_report(const StatReport& report, const std::filesystem::path& dir);

// Runs f(i) for i in [0, n) on `threads` workers and returns the results in
// index order, so the outcome does not depend on the schedule.
template <class F>
auto parallel_map(std::size_t n, unsigned threads, F f) -> std::vector<decltype(f(std::size_t{}))> {
    std::vector<decltype(f(std::size_t{}))> out(n);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    for (unsigned k = 0; k < threads; ++k) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n && !failed; i = next++) {
                try {
                    out[i] = f(i);
                } catch (...) {
                    if (!failed.exchange(true)) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    return out;
}

// ---- samplers ----

// X2nd(t) for the deterministic shock (lambda, rho) on the clocks of `seed`,
// from the multiclass process; empty when the particle left the exact region.
std::optional<Site> sample_second_class(double lambda, double rho, double t, std::uint64_t seed, std::int64_t cone_margin = -1);
// h(x, t) from step initial data; empty when not exact.
std::optional<std::int64_t> sample_step_height(double t, Site x, std::uint64_t seed, std::int64_t cone_margin = -1);

// The points A, B- and B+ for (t, tau, s, nu).
struct ShockPoints {
    double xa, ta;  // A
    double xbm, xbp, tb;
};
ShockPoints shock_points(double lambda, double rho, double t, double tau, double s, double nu);

// Distribution function of (X2nd(t) - v_s t) / t^{1/3} in the limit, tabulated
// on [-8, 8] with step 0.01 and read by linear interpolation.
std::function<double(double)> second_class_limit_cdf(double lambda, double rho);
// Mean and variance of that law.
std::pair<double, double> second_class_limit_moments(double lambda, double rho);

// ---- experiments ----

StatReport run_identity_suite(const ExperimentConfig& config);
StatReport run_scaling_experiment(const ExperimentConfig& config);
StatReport run_limit_comparison(const ExperimentConfig& config);
StatReport run_independence_check(const ExperimentConfig& config);
StatReport run_slow_decorrelation(const ExperimentConfig& config);
StatReport run_step_law(const ExperimentConfig& config);
StatReport run_geodesic_suite(const ExperimentConfig& config);
// Dispatches on config.experiment.
StatReport run_experiment(const ExperimentConfig& config);

}  // namespace tasep::harness
