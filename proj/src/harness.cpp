#include "tasep/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "tasep/engine.hpp"
#include "tasep/lattice.hpp"
#include "tasep/limits.hpp"

namespace tasep::harness {

using nlohmann::json;
using nlohmann::ordered_json;

double ExperimentConfig::threshold(const std::string& name) const {
    const auto it = thresholds.find(name);
    if (it == thresholds.end()) throw InvalidArgument("config has no threshold '" + name + "'");
    return it->second;
}

void ExperimentConfig::validate() const {
    if (!(0.0 < lambda && lambda < rho && rho < 1.0)) throw InvalidArgument("config: need 0 < lambda < rho < 1");
    if (times.empty()) throw InvalidArgument("config: times must not be empty");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] > 0.0)) throw InvalidArgument("config: times must be positive");
        if (i && !(times[i] > times[i - 1])) throw InvalidArgument("config: times must be strictly increasing");
    }
    if (!(nu > 2.0 / 3.0 && nu < 1.0)) throw InvalidArgument("config: nu must lie in (2/3, 1)");
    if (!(alpha > -1.0 && alpha < 1.0)) throw InvalidArgument("config: alpha must lie in (-1, 1)");
    for (double e : epsilons)
        if (!(e > 0.0)) throw InvalidArgument("config: epsilons must be positive");
    if (cone_margin < -1) throw InvalidArgument("config: cone_margin must be -1 or non-negative");
    if (std::find(experiment_names().begin(), experiment_names().end(), experiment) == experiment_names().end())
        throw InvalidArgument("config: unknown experiment '" + experiment + "'");
}

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"identity",           "scaling",  "limit-law", "independence",
                                                "slow-decorrelation", "step-law", "geodesics"};
    return names;
}

ExperimentConfig default_config(const std::string& experiment) {
    ExperimentConfig c;
    c.experiment = experiment;
    if (experiment == "identity") {
        c.times = {10.0, 50.0, 100.0};
        c.samples = 10000;
        c.thresholds = {{"contamination_rate", 1e-3}};
    } else if (experiment == "scaling") {
        c.times = {250.0, 500.0, 1000.0, 2000.0};
        c.samples = 2000;
        c.thresholds = {{"slope_target", 2.0 / 3.0}, {"slope_tol", 0.1}, {"mean_tol", 0.3}, {"min_samples", 30},
                        {"contamination_rate", 1e-3}};
    } else if (experiment == "limit-law") {
        c.times = {1000.0};
        c.samples = 2000;
        c.thresholds = {{"ks", 0.05}, {"median", 0.05}, {"contamination_rate", 1e-3}};
    } else if (experiment == "independence") {
        c.times = {250.0, 1000.0};
        c.samples = 2000;
        c.secondary_samples = 500;
        c.thresholds = {{"corr_sigmas", 3.0}, {"neighbour_offset", 2}, {"contamination_rate", 1e-3}};
    } else if (experiment == "slow-decorrelation") {
        c.times = {250.0, 500.0, 1000.0, 2000.0};
        c.samples = 500;
        c.thresholds = {{"monotone_slack", 0.0}, {"contamination_rate", 1e-3}};
    } else if (experiment == "step-law") {
        c.times = {1000.0};
        c.samples = 2000;
        c.thresholds = {{"mean_tol", 0.1}, {"ks", 0.06}, {"contamination_rate", 1e-3}};
    } else if (experiment == "geodesics") {
        c.times = {100.0, 500.0};
        c.samples = 1000;
        c.secondary_samples = 1000;
        c.probe_samples = 200;
        c.u_grid = {1.0, 2.0, 3.0};
        c.thresholds = {{"localization_u", 3.0}, {"localization_tail", 0.05}, {"contamination_rate", 1e-3}};
    } else {
        throw InvalidArgument("unknown experiment '" + experiment + "'");
    }
    return c;
}

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
    static const std::vector<std::string> known{"experiment",  "lambda",  "rho",         "times",   "sites",
                                                "tau",         "s",       "nu",          "epsilons", "alpha",
                                                "u_grid",      "samples", "secondary_samples", "probe_samples",
                                                "seed_base",   "cone_margin", "threads", "negative_control",
                                                "output_dir",  "thresholds"};
    for (const auto& [k, v] : j.items())
        if (std::find(known.begin(), known.end(), k) == known.end()) throw InvalidArgument("config: unknown key '" + k + "'");
    auto c = default_config(j.value("experiment", std::string("identity")));
    try {
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
        };
        get("lambda", c.lambda);
        get("rho", c.rho);
        get("times", c.times);
        get("sites", c.sites);
        get("tau", c.tau);
        get("s", c.s);
        get("nu", c.nu);
        get("epsilons", c.epsilons);
        get("alpha", c.alpha);
        get("u_grid", c.u_grid);
        get("samples", c.samples);
        get("secondary_samples", c.secondary_samples);
        get("probe_samples", c.probe_samples);
        get("seed_base", c.seed_base);
        get("cone_margin", c.cone_margin);
        get("threads", c.threads);
        get("negative_control", c.negative_control);
        get("output_dir", c.output_dir);
        if (j.contains("thresholds"))
            for (const auto& [k, v] : j.at("thresholds").items()) c.thresholds[k] = v.get<double>();
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("config: wrong value type: ") + e.what());
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string to_json(const ExperimentConfig& c) {
    ordered_json j;
    j["experiment"] = c.experiment;
    j["lambda"] = c.lambda;
    j["rho"] = c.rho;
    j["times"] = c.times;
    j["sites"] = c.sites;
    j["tau"] = c.tau;
    j["s"] = c.s;
    j["nu"] = c.nu;
    j["epsilons"] = c.epsilons;
    j["alpha"] = c.alpha;
    j["u_grid"] = c.u_grid;
    j["samples"] = c.samples;
    j["secondary_samples"] = c.secondary_samples;
    j["probe_samples"] = c.probe_samples;
    j["seed_base"] = c.seed_base;
    j["cone_margin"] = c.cone_margin;
    j["threads"] = c.threads;
    j["negative_control"] = c.negative_control;
    j["output_dir"] = c.output_dir;
    j["thresholds"] = c.thresholds;
    return j.dump(2);
}

std::filesystem::path output_directory(const ExperimentConfig& c) {
    if (const char* env = std::getenv("TASEP_OUTPUT_DIR"); env && *env) return env;
    return c.output_dir;
}

const Estimate& StatReport::estimate(const std::string& name) const {
    for (const auto& e : estimates)
        if (e.name == name) return e;
    throw InvalidArgument("report has no estimate '" + name + "'");
}

void StatReport::settle() {
    if (status != "pass") return;
    for (const auto& [name, ok] : checks)
        if (!ok) status = "fail";
}

std::string to_jsonl(const StatReport& r) {
    ordered_json j;
    j["id"] = r.id;
    j["status"] = r.status;
    j["vacuous"] = r.vacuous;
    j["checks"] = ordered_json::object();
    for (const auto& [k, v] : r.checks) j["checks"][k] = v;
    j["estimates"] = ordered_json::array();
    for (const auto& e : r.estimates)
        j["estimates"].push_back({{"name", e.name}, {"value", e.value}, {"n", e.n}, {"ci", {e.ci.lo, e.ci.hi}}});
    j["ks"] = ordered_json::object();
    for (const auto& [k, v] : r.ks) j["ks"][k] = v;
    j["contaminated"] = r.contaminated;
    j["total"] = r.total;
    j["runtime_seconds"] = r.runtime_seconds;
    j["thresholds"] = ordered_json::object();
    for (const auto& [k, v] : r.thresholds) j["thresholds"][k] = v;
    return j.dump();
}

StatReport report_from_jsonl(const std::string& line) {
    const auto j = json::parse(line);
    StatReport r;
    r.id = j.at("id").get<std::string>();
    r.status = j.at("status").get<std::string>();
    r.vacuous = j.at("vacuous").get<bool>();
    for (const auto& [k, v] : j.at("checks").items()) r.checks[k] = v.get<bool>();
    for (const auto& e : j.at("estimates"))
        r.estimates.push_back({e.at("name").get<std::string>(), e.at("value").get<double>(), e.at("n").get<std::size_t>(),
                               {e.at("ci")[0].get<double>(), e.at("ci")[1].get<double>()}});
    for (const auto& [k, v] : j.at("ks").items()) r.ks[k] = v.get<double>();
    r.contaminated = j.at("contaminated").get<std::size_t>();
    r.total = j.at("total").get<std::size_t>();
    r.runtime_seconds = j.at("runtime_seconds").get<double>();
    for (const auto& [k, v] : j.at("thresholds").items()) r.thresholds[k] = v.get<double>();
    return r;
}

void append_report(const StatReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / (report.id + ".jsonl"), std::ios::app);
    if (!out) throw std::runtime_error("cannot write report to " + dir.string());
    out << to_jsonl(report) << '\n';
}

// ---- samplers ----

namespace {

std::int64_t margin_for(std::int64_t requested, double t) { return requested >= 0 ? requested : default_cone_margin(t); }

}  // namespace

std::optional<Site> sample_second_class(double lambda, double rho, double t, std::uint64_t seed, std::int64_t cone_margin) {
    const ShockParameters p{lambda, rho};
    EngineOptions opt;
    opt.cone = {{static_cast<Site>(std::lround(p.shock_speed() * t)), t}};
    opt.cone_margin = margin_for(cone_margin, t);
    const auto w = cone_window(opt.cone, opt.cone_margin);
    const auto [eta, eta_t] = discrepancy_pair(build_initial(ic::ShockDeterministic{lambda, rho}, w));
    Configuration multi(w);
    for (Site x = w.lo; x <= w.hi; ++x) {
        if (eta.occupied(x)) multi.set(x, Particle::kFirst);
        else if (eta_t.occupied(x)) multi.set(x, Particle::kSecond);
    }
    CoupledSystem sys(std::make_unique<LiveFeed>(seed, w, t), {multi}, {0}, std::move(opt));
    sys.evolve(t);
    for (Site x = sys.left_front() + 1; x < sys.right_front(); ++x)
        if (sys.at(0, x) == Particle::kSecond) return x;
    return std::nullopt;
}

std::optional<std::int64_t> sample_step_height(double t, Site x, std::uint64_t seed, std::int64_t cone_margin) {
    EngineOptions opt;
    opt.cone = {{x, t}};
    opt.cone_margin = margin_for(cone_margin, t);
    const auto w = cone_window(opt.cone, opt.cone_margin);
    const ic::Step step{0};
    CoupledSystem sys(std::make_unique<LiveFeed>(seed, w, t), {build_initial(step, w)}, {initial_anchor(step)}, std::move(opt));
    sys.evolve(t);
    if (!sys.height_exact(x)) return std::nullopt;
    return sys.height(0, x);
}

ShockPoints shock_points(double lambda, double rho, double t, double tau, double s, double nu) {
    const ShockParameters p{lambda, rho};
    const double t23 = std::pow(t, 2.0 / 3.0), tnu = std::pow(t, nu);
    const double ta = t + tau * t23;
    ShockPoints sp{};
    sp.ta = ta;
    sp.xa = p.shock_speed() * ta + s * std::cbrt(t);
    sp.tb = t - tnu;
    sp.xbm = p.shock_speed() * ta - (1.0 - 2.0 * lambda) * (tau * t23 + tnu);
    sp.xbp = p.shock_speed() * ta - (1.0 - 2.0 * rho) * (tau * t23 + tnu);
    return sp;
}

std::function<double(double)> second_class_limit_cdf(double lambda, double rho) {
    auto grid = std::make_shared<std::vector<double>>();
    for (int i = 0; i <= 1600; ++i) grid->push_back(limits::shock_limit_distribution(-8.0 + 0.01 * i, lambda, rho));
    return [grid](double z) {
        if (z <= -8.0) return 0.0;
        if (z >= 8.0) return 1.0;
        const double pos = (z + 8.0) / 0.01;
        const auto i = std::min<std::size_t>(static_cast<std::size_t>(pos), 1599);
        const double f = pos - static_cast<double>(i);
        return (*grid)[i] * (1.0 - f) + (*grid)[i + 1] * f;
    };
}

std::pair<double, double> second_class_limit_moments(double lambda, double rho) {
    // Z = (a G1 - b G2) / (2 (rho - lambda)) with G1, G2 independent GOE.
    const double a = std::cbrt(2.0) * std::pow(lambda * (1 - lambda), 2.0 / 3.0);
    const double b = std::cbrt(2.0) * std::pow(rho * (1 - rho), 2.0 / 3.0);
    const double d = 2.0 * (rho - lambda);
    const auto& goe = limits::goe_table();
    return {(a - b) * goe.mean() / d, (a * a + b * b) * goe.variance() / (d * d)};
}

StatReport run_experiment(const ExperimentConfig& c) {
    if (c.experiment == "identity") return run_identity_suite(c);
    if (c.experiment == "scaling") return run_scaling_experiment(c);
    if (c.experiment == "limit-law") return run_limit_comparison(c);
    if (c.experiment == "independence") return run_independence_check(c);
    if (c.experiment == "slow-decorrelation") return run_slow_decorrelation(c);
    if (c.experiment == "step-law") return run_step_law(c);
    if (c.experiment == "geodesics") return run_geodesic_suite(c);
    throw InvalidArgument("unknown experiment '" + c.experiment + "'");
}

}  // namespace tasep::harness
