#include <doctest.h>

#include <cmath>
#include <sstream>

#include "tasep/lattice.hpp"

using namespace tasep;

namespace {

std::vector<Site> particles(const Configuration& c) {
    std::vector<Site> out;
    for (Site x = c.window().lo; x <= c.window().hi; ++x)
        if (c.occupied(x)) out.push_back(x);
    return out;
}

}  // namespace

TEST_CASE("step initial condition and its height") {
    const auto c = build_initial(ic::Step{0}, {-10, 10});
    for (Site x = -10; x <= 10; ++x) CHECK(c.occupied(x) == (x < 0));
    const auto h = height_of(c, initial_anchor(ic::Step{0}));
    for (Site x = -10; x <= 11; ++x) CHECK(h(x) == std::abs(x));

    const ic::Step shifted{3};
    const auto hs = height_of(build_initial(shifted, {-10, 10}), initial_anchor(shifted));
    for (Site x = -10; x <= 11; ++x) CHECK(hs(x) == std::abs(x - 3));
    const ic::Step left{-4};
    const auto hl = height_of(build_initial(left, {-10, 10}), initial_anchor(left));
    for (Site x = -10; x <= 11; ++x) CHECK(hl(x) == std::abs(x + 4));
}

TEST_CASE("deterministic shock follows the floor formula") {
    SUBCASE("lambda = 1/2 leaves every second site on the left") {
        const auto c = build_initial(ic::ShockDeterministic{0.5, 0.75}, {-20, 0});
        for (Site x = -20; x < 0; ++x) CHECK(c.occupied(x) == (x % 2 == 0));
    }
    SUBCASE("lambda = 1/4, rho = 3/4") {
        const auto c = build_initial(ic::ShockDeterministic{0.25, 0.75}, {-12, 10});
        CHECK(particles(c) == std::vector<Site>{-12, -8, -4, 0, 2, 3, 4, 6, 7, 8, 10});
    }
    SUBCASE("height stays within the floor error of the macroscopic slopes") {
        for (auto [lam, rho] : {std::pair{0.25, 0.75}, std::pair{0.3, 0.6}, std::pair{0.1, 0.95}}) {
            const auto h = height_of(build_initial(ic::ShockDeterministic{lam, rho}, {-500, 500}));
            for (Site x = -500; x < 0; ++x) CHECK(std::abs(h(x) - (1 - 2 * lam) * x) <= 2 / lam);
            for (Site x = 1; x <= 500; ++x) CHECK(std::abs(h(x) - (1 - 2 * rho) * x) <= 2 / rho);
        }
        const auto h = height_of(build_initial(ic::ShockDeterministic{0.25, 0.75}, {-4000, 10}));
        CHECK(h(-4000) / -4000.0 == doctest::Approx(0.5).epsilon(0.01));
    }
}

TEST_CASE("shock parameters") {
    const ShockParameters p(0.25, 0.75);
    CHECK(p.shock_speed() == 0.0);
    CHECK(p.height_rate() == doctest::Approx(0.375));
    CHECK(p.chi_minus() == doctest::Approx(0.1875));
    CHECK(p.chi_plus() == doctest::Approx(0.1875));
    CHECK_THROWS_AS(ShockParameters(0.75, 0.25), InvalidArgument);
    CHECK_THROWS_AS(ShockParameters(0.0, 0.5), InvalidArgument);
    CHECK_THROWS_AS(ShockParameters(0.5, 1.0), InvalidArgument);
    CHECK_THROWS_AS(build_initial(ic::ShockDeterministic{0.6, 0.5}, {-5, 5}), InvalidArgument);
    CHECK_THROWS_AS(build_initial(ic::BernoulliShock{0.2, 1.5, 1}, {-5, 5}), InvalidArgument);
}

TEST_CASE("bernoulli shock densities and seed independence") {
    const auto a = build_initial(ic::BernoulliShock{0.2, 0.7, 99}, {-20000, 19999});
    const auto b = build_initial(ic::BernoulliShock{0.2, 0.7, 99}, {-20000, 19999});
    const auto c = build_initial(ic::BernoulliShock{0.2, 0.7, 100}, {-20000, 19999});
    CHECK(a == b);
    CHECK_FALSE(a == c);
    double left = 0, right = 0;
    for (Site x = -20000; x < 0; ++x) left += a.occupied(x);
    for (Site x = 0; x < 20000; ++x) right += a.occupied(x);
    // Three binomial standard errors.
    CHECK(std::abs(left / 20000 - 0.2) < 3 * std::sqrt(0.2 * 0.8 / 20000));
    CHECK(std::abs(right / 20000 - 0.7) < 3 * std::sqrt(0.7 * 0.3 / 20000));
}

TEST_CASE("height function invariants") {
    const auto c = build_initial(ic::BernoulliShock{0.3, 0.6, 5}, {-50, 50});
    const auto h = height_of(c, 7);
    CHECK(h(0) == 7);
    for (Site x = -50; x <= 50; ++x) {
        CHECK(h(x + 1) - h(x) == 1 - 2 * c.occupied(x));
        CHECK(std::abs(h(x + 1) - h(x)) == 1);
    }
    CHECK(h.occupation() == c);
    CHECK_THROWS_AS(h(52), std::out_of_range);

    Configuration full({-5, 5});
    for (Site x = -5; x <= 5; ++x) full.set_occupied(x, true);
    const auto hf = height_of(full);
    for (Site x = -5; x <= 5; ++x) CHECK(hf(x + 1) == hf(x) - 1);
    CHECK_THROWS_AS(height_of(Configuration({3, 9})), InvalidArgument);
}

TEST_CASE("split configurations around a discrepancy at 0") {
    const auto [eta, eta_t] = discrepancy_pair(build_initial(ic::ShockDeterministic{0.25, 0.75}, {-40, 40}));
    CHECK(eta.occupied(0) == 0);
    CHECK(eta_t.occupied(0) == 1);
    const auto s = split_minus_plus(eta, eta_t);
    for (Site x = -40; x <= 40; ++x) {
        if (x < 0) {
            CHECK(s.minus.occupied(x) == eta.occupied(x));
            CHECK(s.plus.occupied(x) == 1);
            CHECK(s.tilde_plus.occupied(x) == 1);
        } else {
            CHECK(s.minus.occupied(x) == 0);
            CHECK(s.plus.occupied(x) == eta.occupied(x));
            CHECK(s.tilde_plus.occupied(x) == eta_t.occupied(x));
        }
    }
    CHECK(s.minus.dominated_by(s.tilde_plus));
    CHECK(s.plus.dominated_by(s.tilde_plus));

    auto broken = eta_t;
    broken.set_occupied(5, !broken.occupied(5));
    CHECK_THROWS_AS(split_minus_plus(eta, broken), InvalidArgument);
    CHECK_THROWS_AS(split_minus_plus(eta_t, eta), InvalidArgument);
}

TEST_CASE("run-length text format round trips") {
    Configuration c({-3, 4});
    c.set(-3, Particle::kFirst);
    c.set(-2, Particle::kFirst);
    c.set(0, Particle::kSecond);
    c.set(4, Particle::kFirst);
    const auto text = to_rle(c);
    CHECK(text == "window -3 4\nruns F2 H1 S1 H3 F1\n");
    CHECK(from_rle(text) == c);
    CHECK(c.multiclass());
    CHECK(c.count(Particle::kFirst) == 3);
    CHECK(c.particle_count() == 4);
    CHECK_THROWS(from_rle("window 0 3\nruns F2\n"));
    CHECK_THROWS(from_rle("window 0 1\nruns X2\n"));

    std::stringstream io;
    write_snapshot(io, {12.25, -4, c});
    const auto snap = read_snapshot(io);
    CHECK(snap.time == 12.25);
    CHECK(snap.anchor == -4);
    CHECK(snap.config == c);
}
