#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "tasep/clockwork.hpp"

using namespace tasep;

TEST_CASE("philox known-answer vectors") {
    using P = Philox4x32;
    CHECK(P::generate({0, 0, 0, 0}, {0, 0}) == P::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(P::generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          P::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(P::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          P::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("open uniforms stay strictly inside (0,1)") {
    CHECK(uniform_open(0) > 0.0);
    CHECK(uniform_open(~std::uint64_t{0}) < 1.0);
}

TEST_CASE("generate_events rejects bad arguments") {
    CHECK_THROWS_AS(generate_events(1, {0, 0}, 0.0), InvalidArgument);
    CHECK_THROWS_AS(generate_events(1, {0, 0}, -1.0), InvalidArgument);
    CHECK_THROWS_AS(generate_events(1, {3, 2}, 1.0), InvalidArgument);
    CHECK_THROWS_AS(generate_events(1, {0, 0}, 2e7), InvalidArgument);
}

TEST_CASE("vanishing horizon gives no events") {
    const auto s = generate_events(7, {0, 0}, 1e-300);
    CHECK(s.total_events() == 0);
    CHECK(s.times(0).empty());
}

TEST_CASE("generation is deterministic and window-extension stable") {
    const auto a = generate_events(7, {-5, 5}, 10.0);
    const auto b = generate_events(7, {-5, 5}, 10.0);
    CHECK(a == b);
    const auto wide = generate_events(7, {-10, 10}, 10.0);
    for (Site x = -5; x <= 5; ++x) {
        const auto u = a.times(x), v = wide.times(x);
        CHECK(std::equal(u.begin(), u.end(), v.begin(), v.end()));
    }
    const auto other = generate_events(8, {-5, 5}, 10.0);
    CHECK_FALSE(a == other);
}

TEST_CASE("per-site times are strictly increasing in (0, horizon]") {
    const auto s = generate_events(3, {-20, 20}, 50.0);
    for (Site x = -20; x <= 20; ++x) {
        const auto ts = s.times(x);
        for (std::size_t i = 0; i < ts.size(); ++i) {
            CHECK(ts[i] > 0.0);
            CHECK(ts[i] <= 50.0);
            if (i > 0) CHECK(ts[i] > ts[i - 1]);
        }
    }
    CHECK_THROWS_AS(s.times(21), std::out_of_range);
}

TEST_CASE("event counts have Poisson mean and variance") {
    constexpr int kSeeds = 100000;
    constexpr double T = 3.0;
    double sum = 0, sum2 = 0;
    for (int k = 0; k < kSeeds; ++k) {
        SiteClock clock(static_cast<std::uint64_t>(k), 0);
        int n = 0;
        while (clock.peek() <= T) {
            clock.pop();
            ++n;
        }
        sum += n;
        sum2 += double(n) * n;
    }
    const double mean = sum / kSeeds;
    const double var = (sum2 - kSeeds * mean * mean) / (kSeeds - 1);
    // Standard errors of the sample mean and variance for Poisson(T).
    const double se_mean = std::sqrt(T / kSeeds);
    const double se_var = std::sqrt((T + 2 * T * T) / kSeeds);
    CHECK(std::abs(mean - T) < 3 * se_mean);
    CHECK(std::abs(var - T) < 3 * se_var);
}

TEST_CASE("inter-arrival times are exponential(1)") {
    std::vector<double> gaps;
    for (Site x = 0; gaps.size() < 100000; ++x) {
        SiteClock clock(11, x);
        double prev = 0.0;
        for (int i = 0; i < 50; ++i) {
            const double t = clock.pop();
            gaps.push_back(t - prev);
            prev = t;
        }
    }
    std::sort(gaps.begin(), gaps.end());
    double d = 0.0;
    const double n = static_cast<double>(gaps.size());
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        const double f = 1.0 - std::exp(-gaps[i]);
        d = std::max({d, std::abs(f - i / n), std::abs(f - (i + 1) / n)});
    }
    CHECK(d < 0.01);
}

TEST_CASE("merged_order") {
    SUBCASE("sorted, complete and a partition of the per-site lists") {
        const auto s = generate_events(5, {-3, 3}, 20.0);
        const auto m = merged_order(s);
        CHECK(m.size() == s.total_events());
        CHECK(std::is_sorted(m.begin(), m.end(), event_before));
        for (Site x = -3; x <= 3; ++x) {
            std::vector<double> replay;
            for (const auto& e : m)
                if (e.site == x) replay.push_back(e.time);
            const auto ts = s.times(x);
            CHECK(std::equal(replay.begin(), replay.end(), ts.begin(), ts.end()));
        }
    }
    SUBCASE("ties are broken by site") {
        std::vector<Event> ev{{1.0, 4}, {1.0, -2}, {0.5, 9}};
        sort_batch(ev, 0.0, 1.0);
        CHECK(ev == std::vector<Event>{{0.5, 9}, {1.0, -2}, {1.0, 4}});
    }
}

TEST_CASE("last_event_before and strict variant") {
    const auto s = generate_events(9, {0, 2}, 30.0);
    const auto ts = s.times(1);
    REQUIRE(ts.size() >= 3);
    CHECK(last_event_before(s, 1, ts[1]) == ts[1]);
    CHECK(last_event_strictly_before(s, 1, ts[1]) == ts[0]);
    CHECK(last_event_before(s, 1, 0.5 * (ts[1] + ts[2])) == ts[1]);
    CHECK_FALSE(last_event_before(s, 1, 0.5 * ts[0]).has_value());
    CHECK_THROWS_AS(last_event_before(s, 3, 1.0), std::out_of_range);
}

TEST_CASE("binary dump round trip") {
    const auto s = generate_events(42, {-4, 6}, 12.5);
    std::stringstream buf;
    dump_stream(s, buf);
    CHECK(load_stream(buf) == s);
    std::stringstream bad("NOTASTREAM");
    CHECK_THROWS(load_stream(bad));
    std::stringstream cut(buf.str().substr(0, 40));
    CHECK_THROWS(load_stream(cut));
}

TEST_CASE("stream and live feeds deliver identical batches") {
    const Interval w{-30, 30};
    auto s = std::make_shared<const EventStream>(generate_events(13, w, 40.0));
    const auto all = merged_order(*s);
    for (double start : {0.0, 7.3}) {
        StreamFeed a(s, start);
        LiveFeed b(13, w, 40.0, start);
        std::vector<Event> ea, eb;
        for (double t = start + 0.9; t < 40.0; t += 0.9) {
            a.next_batch(t, ea);
            b.next_batch(t, eb);
        }
        a.next_batch(40.0, ea);
        b.next_batch(40.0, eb);
        CHECK(ea == eb);
        std::vector<Event> expect;
        std::copy_if(all.begin(), all.end(), std::back_inserter(expect), [&](const Event& e) { return e.time > start; });
        CHECK(ea == expect);
        CHECK_THROWS_AS(a.next_batch(41.0, ea), InvalidArgument);
    }
}
