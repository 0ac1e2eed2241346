#include "tasep/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "tasep/philox.hpp"

namespace tasep {

namespace {

void check_density(double d, const char* name) {
    if (!(d > 0.0 && d < 1.0)) throw InvalidArgument(std::string(name) + " must lie in (0,1)");
}

void check_shock(double lambda, double rho) {
    check_density(lambda, "lambda");
    check_density(rho, "rho");
    if (!(lambda < rho)) throw InvalidArgument("shock requires lambda < rho");
}

// Keeps the initial-data draws disjoint from every clock stream, whose
// stream word is a site index (high 16 bits all zero or all one).
constexpr std::uint64_t kBernoulliTag = 0x4B1Dull << 48;

char class_code(Particle p) {
    switch (p) {
        case Particle::kHole: return 'H';
        case Particle::kSecond: return 'S';
        case Particle::kFirst: return 'F';
    }
    return '?';
}

Particle class_from_code(char c) {
    switch (c) {
        case 'H': return Particle::kHole;
        case 'S': return Particle::kSecond;
        case 'F': return Particle::kFirst;
        default: throw std::runtime_error(std::string("bad class code '") + c + "'");
    }
}

}  // namespace

Configuration::Configuration(Interval window)
    : window_(window), classes_(static_cast<std::size_t>(window.size()), Particle::kHole) {}

Configuration::Configuration(Interval window, std::vector<Particle> classes)
    : window_(window), classes_(std::move(classes)) {
    if (static_cast<std::int64_t>(classes_.size()) != window.size())
        throw InvalidArgument("class vector does not match window " + to_string(window));
}

std::size_t Configuration::index(Site x) const {
    if (!window_.contains(x)) throw std::out_of_range("site " + std::to_string(x) + " outside window " + to_string(window_));
    return static_cast<std::size_t>(x - window_.lo);
}

bool Configuration::multiclass() const noexcept {
    return std::any_of(classes_.begin(), classes_.end(), [](Particle p) { return p == Particle::kSecond; });
}

std::int64_t Configuration::particle_count() const noexcept {
    return static_cast<std::int64_t>(classes_.size()) - count(Particle::kHole);
}

std::int64_t Configuration::count(Particle p) const noexcept {
    return std::count(classes_.begin(), classes_.end(), p);
}

bool Configuration::dominated_by(const Configuration& other) const {
    if (window_ != other.window_) throw InvalidArgument("comparing configurations on different windows");
    for (std::size_t i = 0; i < classes_.size(); ++i)
        if (classes_[i] != Particle::kHole && other.classes_[i] == Particle::kHole) return false;
    return true;
}

HeightFunction::HeightFunction(Interval window, Site anchor_site, std::int64_t anchor_value, std::vector<std::int64_t> values)
    : window_(window), anchor_site_(anchor_site), anchor_value_(anchor_value), values_(std::move(values)) {
    if (static_cast<std::int64_t>(values_.size()) != window.size() + 1)
        throw InvalidArgument("height vector must cover window plus one site");
}

std::int64_t HeightFunction::operator()(Site x) const {
    if (x < window_.lo || x > window_.hi + 1) throw std::out_of_range("height queried outside window");
    return values_[static_cast<std::size_t>(x - window_.lo)];
}

Configuration HeightFunction::occupation() const {
    Configuration c(window_);
    for (Site x = window_.lo; x <= window_.hi; ++x) {
        const auto d = (*this)(x + 1) - (*this)(x);
        if (d != 1 && d != -1) throw std::runtime_error("height increment is not +-1");
        c.set_occupied(x, d == -1);
    }
    return c;
}

HeightFunction height_of(const Configuration& config, std::int64_t anchor_value) {
    const auto w = config.window();
    if (!(w.lo <= 0 && 0 <= w.hi + 1)) throw InvalidArgument("height anchor site 0 outside window " + to_string(w));
    std::vector<std::int64_t> h(static_cast<std::size_t>(w.size()) + 1);
    const auto zero = static_cast<std::size_t>(-w.lo);
    h[zero] = anchor_value;
    for (std::size_t i = zero; i < static_cast<std::size_t>(w.size()); ++i)
        h[i + 1] = h[i] + 1 - 2 * config.occupied(w.lo + static_cast<Site>(i));
    for (std::size_t i = zero; i > 0; --i)
        h[i - 1] = h[i] - (1 - 2 * config.occupied(w.lo + static_cast<Site>(i) - 1));
    return HeightFunction(w, 0, anchor_value, std::move(h));
}

ShockParameters::ShockParameters(double lambda_, double rho_) : lambda(lambda_), rho(rho_) { check_shock(lambda, rho); }

std::int64_t initial_anchor(const InitialCondition& ic) {
    if (const auto* s = std::get_if<ic::Step>(&ic)) return s->apex < 0 ? -s->apex : s->apex;
    return 0;
}

std::string describe(const InitialCondition& ic) {
    std::ostringstream os;
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, ic::Step>) os << "step(" << v.apex << ")";
            else if constexpr (std::is_same_v<T, ic::ShockDeterministic>) os << "shock(" << v.lambda << "," << v.rho << ")";
            else if constexpr (std::is_same_v<T, ic::BernoulliShock>) os << "bernoulli(" << v.lambda << "," << v.rho << ";" << v.ic_seed << ")";
            else os << "explicit(" << v.particles.size() << ")";
        },
        ic);
    return os.str();
}

Configuration build_initial(const InitialCondition& ic, Interval window) {
    if (window.empty()) throw InvalidArgument("empty window");
    Configuration c(window);
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, ic::Step>) {
                for (Site x = window.lo; x <= std::min(window.hi, v.apex - 1); ++x) c.set_occupied(x, true);
            } else if constexpr (std::is_same_v<T, ic::ShockDeterministic>) {
                check_shock(v.lambda, v.rho);
                // X0(n) = -floor(n / lambda) for n >= 1, -floor(n / rho) for n <= 0.
                for (std::int64_t n = 1;; ++n) {
                    const auto x = -static_cast<Site>(std::floor(static_cast<double>(n) / v.lambda));
                    if (x < window.lo) break;
                    if (x <= window.hi) c.set_occupied(x, true);
                }
                for (std::int64_t n = 0;; --n) {
                    const auto x = -static_cast<Site>(std::floor(static_cast<double>(n) / v.rho));
                    if (x > window.hi) break;
                    if (x >= window.lo) c.set_occupied(x, true);
                }
            } else if constexpr (std::is_same_v<T, ic::BernoulliShock>) {
                check_shock(v.lambda, v.rho);
                for (Site x = window.lo; x <= window.hi; ++x) {
                    const KeyedUniforms u(v.ic_seed, static_cast<std::uint64_t>(x) ^ kBernoulliTag);
                    c.set_occupied(x, u(0) < (x < 0 ? v.lambda : v.rho));
                }
            } else {
                for (Site x : v.particles) {
                    if (!window.contains(x)) throw InvalidArgument("explicit particle outside window");
                    c.set_occupied(x, true);
                }
            }
        },
        ic);
    return c;
}

SplitConfigurations split_minus_plus(const Configuration& eta, const Configuration& eta_tilde) {
    const auto w = eta.window();
    if (w != eta_tilde.window()) throw InvalidArgument("split: windows differ");
    if (!w.contains(0)) throw InvalidArgument("split: window must contain 0");
    for (Site x = w.lo; x <= w.hi; ++x) {
        if (x == 0) continue;
        if (eta.occupied(x) != eta_tilde.occupied(x)) throw InvalidArgument("split: configurations differ away from 0");
    }
    if (eta.occupied(0) != 0 || eta_tilde.occupied(0) != 1)
        throw InvalidArgument("split: need eta(0) = 0 and tilde eta(0) = 1");

    SplitConfigurations out{Configuration(w), Configuration(w), Configuration(w)};
    for (Site x = w.lo; x <= w.hi; ++x) {
        if (x < 0) {
            out.minus.set_occupied(x, eta.occupied(x));
            out.plus.set_occupied(x, true);
            out.tilde_plus.set_occupied(x, true);
        } else {
            out.plus.set_occupied(x, eta.occupied(x));
            out.tilde_plus.set_occupied(x, eta_tilde.occupied(x));
        }
    }
    return out;
}

std::pair<Configuration, Configuration> discrepancy_pair(const Configuration& base) {
    if (!base.window().contains(0)) throw InvalidArgument("discrepancy pair: window must contain 0");
    std::pair<Configuration, Configuration> p{base, base};
    for (auto& x : p.first.classes())
        if (x != Particle::kHole) x = Particle::kFirst;
    p.second = p.first;
    p.first.set(0, Particle::kHole);
    p.second.set(0, Particle::kFirst);
    return p;
}

std::string to_rle(const Configuration& config) {
    std::ostringstream os;
    os << "window " << config.window().lo << ' ' << config.window().hi << "\nruns";
    const auto& cls = config.classes();
    for (std::size_t i = 0; i < cls.size();) {
        std::size_t j = i;
        while (j < cls.size() && cls[j] == cls[i]) ++j;
        os << ' ' << class_code(cls[i]) << (j - i);
        i = j;
    }
    os << '\n';
    return os.str();
}

Configuration from_rle(const std::string& text) {
    std::istringstream is(text);
    std::string word;
    Interval w;
    if (!(is >> word >> w.lo >> w.hi) || word != "window") throw std::runtime_error("rle: expected 'window lo hi'");
    if (!(is >> word) || word != "runs") throw std::runtime_error("rle: expected 'runs'");
    std::vector<Particle> cls;
    while (is >> word) {
        if (word.size() < 2) throw std::runtime_error("rle: bad run '" + word + "'");
        const auto p = class_from_code(word[0]);
        const auto n = std::stoll(word.substr(1));
        if (n <= 0) throw std::runtime_error("rle: nonpositive run length");
        cls.insert(cls.end(), static_cast<std::size_t>(n), p);
    }
    if (static_cast<std::int64_t>(cls.size()) != w.size()) throw std::runtime_error("rle: run lengths do not cover window");
    return Configuration(w, std::move(cls));
}

void write_snapshot(std::ostream& out, const Snapshot& snap) {
    out.precision(17);
    out << "snapshot time " << snap.time << " anchor " << snap.anchor << '\n' << to_rle(snap.config);
}

Snapshot read_snapshot(std::istream& in) {
    Snapshot s;
    std::string a, b, c;
    if (!(in >> a >> b >> s.time >> c >> s.anchor) || a != "snapshot" || b != "time" || c != "anchor")
        throw std::runtime_error("snapshot: bad header");
    std::string line, body;
    std::getline(in, line);
    for (int i = 0; i < 2 && std::getline(in, line); ++i) body += line + '\n';
    s.config = from_rle(body);
    return s;
}

}  // namespace tasep
