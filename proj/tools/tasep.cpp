// Command-line front end: one subcommand per experiment plus table
// generation, a single-trajectory trace and a report summary.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tasep/harness.hpp"
#include "tasep/limits.hpp"
#include "tasep/tracker.hpp"

namespace fs = std::filesystem;
using namespace tasep;
using namespace tasep::harness;

namespace {

struct Overrides {
    std::string config_path;
    std::string output_dir;
    std::size_t samples = 0;
    std::uint64_t seed_base = 0;
    bool seed_base_set = false;
    unsigned threads = 0;
    bool threads_set = false;
    bool negative_control = false;
};

ExperimentConfig resolve_config(const std::string& experiment, const Overrides& o, const CLI::App& sub) {
    ExperimentConfig c = default_config(experiment);
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in) throw std::runtime_error("cannot read config file " + o.config_path);
        std::stringstream ss;
        ss << in.rdbuf();
        auto j = nlohmann::json::parse(ss.str(), nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw InvalidArgument("config file " + o.config_path + " is not a JSON object");
        if (!j.contains("experiment")) j["experiment"] = experiment;
        if (j["experiment"] != experiment)
            throw InvalidArgument("config file is for '" + j["experiment"].get<std::string>() + "', not '" + experiment + "'");
        c = parse_config(j.dump());
    }
    if (sub.count("--samples")) c.samples = o.samples;
    if (o.seed_base_set) c.seed_base = o.seed_base;
    if (o.threads_set) c.threads = o.threads;
    if (o.negative_control) c.negative_control = true;
    if (!o.output_dir.empty()) c.output_dir = o.output_dir;
    c.validate();
    return c;
}

void print_report(const StatReport& r) {
    std::printf("%s: %s (%zu samples, %zu contaminated, %.1f s)%s\n", r.id.c_str(), r.status.c_str(), r.total, r.contaminated,
                r.runtime_seconds, r.vacuous ? " [vacuous]" : "");
    for (const auto& [name, ok] : r.checks) std::printf("  %-34s %s\n", name.c_str(), ok ? "pass" : "FAIL");
    for (const auto& [name, d] : r.ks) std::printf("  ks[%s] = %.4f\n", name.c_str(), d);
    for (const auto& e : r.estimates)
        std::printf("  %-34s %.6g  [%.6g, %.6g]  n=%zu\n", e.name.c_str(), e.value, e.ci.lo, e.ci.hi, e.n);
}

int run_and_record(const ExperimentConfig& c) {
    const auto dir = output_directory(c);
    fs::create_directories(dir);
    {
        std::ofstream cfg(dir / (c.experiment + ".config.json"));
        cfg << to_json(c) << '\n';
    }
    const auto r = run_experiment(c);
    append_report(r, dir);
    print_report(r);
    return r.passed() ? 0 : 1;
}

int simulate(double lambda, double rho, double t, std::uint64_t seed, int points, const fs::path& dir) {
    CouplingSetup setup;
    setup.lambda = lambda;
    setup.rho = rho;
    auto c = make_shock_coupling(setup, seed, {{0, t}});
    fs::create_directories(dir);
    std::ofstream out(dir / "simulate_trace.csv");
    out << "t,x2nd,y,h_minus_0,h_tilde_plus_0,exact\n";
    using S = ShockCoupling;
    for (int k = 0; k <= points; ++k) {
        const double tk = t * k / points;
        c.evolve(tk);
        out << tk << ',' << c.second_class() << ',' << c.tracked_y() << ',' << c.height(S::kMinus, 0) << ','
            << c.height(S::kTildePlus, 0) << ',' << (c.second_class_exact() && c.height_exact(0)) << '\n';
    }
    const bool ok = c.y_always_equal() && c.exact_until() > t;
    std::printf("simulate: X2nd(%g) = %lld, Y == X2nd throughout: %s\n", t, static_cast<long long>(c.second_class()),
                ok ? "yes" : "no");
    return ok ? 0 : 1;
}

int fredholm_tables(const std::string& law_name, double lo, double hi, double step, int order, const fs::path& out) {
    const auto law = law_name == "gue" ? limits::Law::kGue : limits::Law::kGoe;
    const auto table = limits::tabulate(law, lo, hi, step, order);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write " + out.string());
    table.write_csv(f);
    std::printf("%s: %zu points, mean %.6f, variance %.6f -> %s\n", law_name.c_str(), table.s.size(), table.mean(),
                table.variance(), out.c_str());
    return 0;
}

int report(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw std::runtime_error("no results directory " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".jsonl") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("no reports in " + dir.string());
    std::ofstream summary(dir / "summary.csv");
    summary << "id,status,checks_passed,checks_total,samples,contaminated,runtime_seconds\n";
    bool all = true;
    for (const auto& path : files) {
        std::ifstream in(path);
        std::string line, last;
        while (std::getline(in, line))
            if (!line.empty()) last = line;
        if (last.empty()) continue;
        const auto r = report_from_jsonl(last);
        std::size_t passed = 0;
        for (const auto& [name, ok] : r.checks) passed += ok;
        std::printf("%-22s %-13s %zu/%zu checks  n=%zu\n", r.id.c_str(), r.status.c_str(), passed, r.checks.size(), r.total);
        summary << r.id << ',' << r.status << ',' << passed << ',' << r.checks.size() << ',' << r.total << ',' << r.contaminated
                << ',' << r.runtime_seconds << '\n';
        all = all && r.passed();
    }
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TASEP shock simulator and limit-law numerics"};
    app.require_subcommand(1);
    app.fallthrough();
    Overrides o;
    app.add_option("--config", o.config_path, "JSON experiment config")->check(CLI::ExistingFile);
    app.add_option("--output-dir", o.output_dir, "results directory (TASEP_OUTPUT_DIR takes precedence)");

    struct Experiment {
        const char* command;
        const char* name;
        const char* help;
    };
    const std::vector<Experiment> experiments{
        {"verify-identity", "identity", "pathwise coupling identities over many seeds"},
        {"geodesics", "geodesics", "backwards paths: geodesic property, ordering, domination, localization"},
        {"scaling", "scaling", "variance exponent of the second-class particle"},
        {"limit-law", "limit-law", "rescaled second-class position against the limit law"},
        {"independence", "independence", "correlation of the two sides of the shock"},
        {"slow-decorrelation", "slow-decorrelation", "height increments along characteristics"},
        {"step-law", "step-law", "step initial data height against F_GUE"},
    };
    std::map<CLI::App*, std::string> experiment_of;
    for (const auto& e : experiments) {
        auto* sub = app.add_subcommand(e.command, e.help);
        sub->add_option(std::string(e.command) == "verify-identity" ? "--seeds,--samples" : "--samples", o.samples,
                        "number of seeds");
        sub->add_option("--seed-base", o.seed_base)->each([&](const std::string&) { o.seed_base_set = true; });
        sub->add_option("--threads", o.threads, "worker threads (0: all cores)")->each([&](const std::string&) {
            o.threads_set = true;
        });
        if (std::string(e.name) == "identity")
            sub->add_flag("--negative-control", o.negative_control, "pair X2nd with heights from another seed");
        experiment_of[sub] = e.name;
    }

    double lambda = 0.25, rho = 0.75, t = 100.0;
    std::uint64_t seed = 0;
    int points = 100;
    auto* sim = app.add_subcommand("simulate", "one coupled trajectory, traced to CSV");
    sim->add_option("--lambda", lambda);
    sim->add_option("--rho", rho);
    sim->add_option("--t", t);
    sim->add_option("--seed", seed);
    sim->add_option("--points", points)->check(CLI::PositiveNumber);

    std::string law = "goe", out;
    double lo = -8.0, hi = 8.0, step = 0.01;
    int order = 60;
    auto* tables = app.add_subcommand("fredholm-tables", "Tracy-Widom distribution table by Fredholm quadrature");
    tables->add_option("--law", law)->check(CLI::IsMember({"goe", "gue"}));
    tables->add_option("--lo", lo);
    tables->add_option("--hi", hi);
    tables->add_option("--step", step)->check(CLI::PositiveNumber);
    tables->add_option("--order", order)->check(CLI::PositiveNumber);
    tables->add_option("--out", out, "output CSV (default <output-dir>/tw_<law>.csv)");

    auto* rep = app.add_subcommand("report", "summarise the latest report of every experiment");

    CLI11_PARSE(app, argc, argv);
    try {
        const auto results = [&] {
            ExperimentConfig c;
            if (!o.output_dir.empty()) c.output_dir = o.output_dir;
            return output_directory(c);
        };
        auto* sub = app.get_subcommands().front();
        if (experiment_of.count(sub)) return run_and_record(resolve_config(experiment_of[sub], o, *sub));
        if (sub == sim) return simulate(lambda, rho, t, seed, points, results());
        if (sub == tables) return fredholm_tables(law, lo, hi, step, order, out.empty() ? results() / ("tw_" + law + ".csv") : fs::path(out));
        if (sub == rep) return report(results());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
