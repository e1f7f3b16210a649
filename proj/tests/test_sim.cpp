#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pfdoa/sim.hpp"

using namespace pfdoa;

namespace {

void check_spacing(const Trajectory& t) {
    for (std::size_t i = 1; i < t.waypoints.size(); ++i)
        CHECK(distance(t.waypoints[i - 1], t.waypoints[i]) <= t.step_length + 1e-9);
}

} // namespace

TEST_CASE("square workspace") {
    const auto ws = Workspace::square(6);
    CHECK(ws.bounds.min == Vec2{0, 0});
    CHECK(ws.bounds.max == Vec2{6, 6});
    CHECK(ws.layout.kind() == LayoutKind::four_corner);
    CHECK(ws.layout.anchors()[2].position == Vec2{6, 6});
    CHECK_THROWS_AS(Workspace::square(0), Error);
}

TEST_CASE("boundary trajectory") {
    const auto ws = Workspace::square(6);
    const auto t = generate_trajectory(ws, TrajectoryKind::boundary, 0.5);
    REQUIRE(t.waypoints.size() == 40);
    CHECK(t.waypoints.front() == Vec2{0.5, 0.5});
    for (const auto& p : t.waypoints) {
        const bool on_edge = std::abs(p.x - 0.5) < 1e-12 || std::abs(p.x - 5.5) < 1e-12 ||
                             std::abs(p.y - 0.5) < 1e-12 || std::abs(p.y - 5.5) < 1e-12;
        CHECK(on_edge);
    }
    check_spacing(t);
    CHECK(distance(t.waypoints.back(), t.waypoints.front()) == doctest::Approx(0.5));
}

TEST_CASE("diagonal trajectory endpoints") {
    const auto ws = Workspace::square(6);
    const auto t = generate_trajectory(ws, TrajectoryKind::diagonal, 0.1);
    CHECK(t.waypoints.front() == Vec2{0.5, 0.5});
    CHECK(t.waypoints.back().x == doctest::Approx(5.5));
    CHECK(t.waypoints.back().y == doctest::Approx(0.5));
    bool reached_opposite = false;
    for (const auto& p : t.waypoints) reached_opposite |= distance(p, {5.5, 5.5}) < 1e-9;
    CHECK(reached_opposite);
    check_spacing(t);
}

TEST_CASE("cross coverage sweeps lanes") {
    const auto ws = Workspace::square(6);
    const auto t = generate_trajectory(ws, TrajectoryKind::cross_coverage, 0.25);
    CHECK(t.waypoints.front() == Vec2{0.5, 0.5});
    CHECK(t.waypoints.back().y == doctest::Approx(5.5));
    for (double lane = 0.5; lane < 5.75; lane += 1.0) {
        bool left = false, right = false;
        for (const auto& p : t.waypoints) {
            if (std::abs(p.y - lane) > 1e-9) continue;
            left |= std::abs(p.x - 0.5) < 1e-9;
            right |= std::abs(p.x - 5.5) < 1e-9;
        }
        CHECK(left);
        CHECK(right);
    }
    check_spacing(t);
}

TEST_CASE("all trajectories stay inside") {
    for (double side : {3.0, 6.0, 10.0})
        for (auto k : {TrajectoryKind::boundary, TrajectoryKind::cross_coverage, TrajectoryKind::diagonal})
            for (double step : {0.05, 0.1, 0.25, 0.7}) {
                const auto ws = Workspace::square(side);
                const auto t = generate_trajectory(ws, k, step);
                CHECK(t.kind == k);
                CHECK(t.waypoints.size() >= 2);
                for (const auto& p : t.waypoints) CHECK(ws.bounds.contains(p));
                check_spacing(t);
            }
}

TEST_CASE("trajectory errors") {
    const auto ws = Workspace::square(6);
    CHECK_THROWS_AS(generate_trajectory(ws, TrajectoryKind::boundary, 7), Error);
    CHECK_THROWS_AS(generate_trajectory(ws, TrajectoryKind::boundary, 0), Error);
    CHECK_THROWS_AS(generate_trajectory(ws, TrajectoryKind::boundary, -1), Error);
    CHECK_THROWS_AS(generate_trajectory(ws, TrajectoryKind::boundary, 0.1, {3.5, 1.0}), Error);
    CHECK_THROWS_AS(generate_trajectory(ws, TrajectoryKind::custom, 0.1), Error);
    CHECK_THROWS_AS(parse_trajectory_kind("zigzag"), Error);
    CHECK(parse_trajectory_kind("cross") == TrajectoryKind::cross_coverage);
    CHECK(to_string(TrajectoryKind::diagonal) == "diagonal");
}

TEST_CASE("custom trajectory") {
    const auto ws = Workspace::square(6);
    const std::vector<Vec2> v{{1, 1}, {4, 1}, {4, 3}};
    const auto t = custom_trajectory(ws, v, 0.4);
    CHECK(t.waypoints.front() == Vec2{1, 1});
    CHECK(t.waypoints.back() == Vec2{4, 3});
    check_spacing(t);
    const std::vector<Vec2> outside{{1, 1}, {7, 1}};
    CHECK_THROWS_AS(custom_trajectory(ws, outside, 0.4), Error);
}

TEST_CASE("simulate_stream") {
    const auto ws = Workspace::square(6);
    const auto t = generate_trajectory(ws, TrajectoryKind::diagonal, 0.25);
    const PathLossModel exact(-40, 3, 0), noisy(-40, 3, 2);
    const auto s = simulate_stream(ws, t, exact, 1);
    REQUIRE(s.size() == t.waypoints.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(s[i].timestamp_index == static_cast<std::int64_t>(i));
        REQUIRE(s[i].true_position);
        CHECK(*s[i].true_position == t.waypoints[i]);
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(s[i].rssi_by_anchor[j] == predict_rssi(exact, distance(t.waypoints[i], ws.layout.anchors()[j].position)));
    }
    const auto a = simulate_stream(ws, t, noisy, 9), b = simulate_stream(ws, t, noisy, 9),
               c = simulate_stream(ws, t, noisy, 10);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].rssi_by_anchor == b[i].rssi_by_anchor);
        differs |= a[i].rssi_by_anchor != c[i].rssi_by_anchor;
    }
    CHECK(differs);
}

TEST_CASE("center symmetry") {
    const auto ws = Workspace::square(6);
    const std::vector<Vec2> v{{3, 3}, {3, 3.5}};
    const auto s = simulate_stream(ws, custom_trajectory(ws, v, 0.5), PathLossModel(-40, 3, 0), 1);
    const auto& r = s[0].rssi_by_anchor;
    CHECK(r[0] == r[1]);
    CHECK(r[1] == r[2]);
    CHECK(r[2] == r[3]);
    const Vec2 g = rss_gradient(ws.layout, s[0]);
    CHECK(g.x == 0.0);
    CHECK(g.y == 0.0);
}

TEST_CASE("odometry deltas") {
    const auto ws = Workspace::square(6);
    const auto t = generate_trajectory(ws, TrajectoryKind::boundary, 0.1);
    const auto s = simulate_stream(ws, t, PathLossModel(-40, 3, 0), 1);
    const auto exact = odometry_deltas(s, 0.0, 5);
    REQUIRE(exact.size() == s.size());
    CHECK(*exact[0] == Vec2{0, 0});
    for (std::size_t i = 1; i < s.size(); ++i) {
        CHECK(exact[i]->x == doctest::Approx(t.waypoints[i].x - t.waypoints[i - 1].x));
        CHECK(exact[i]->y == doctest::Approx(t.waypoints[i].y - t.waypoints[i - 1].y));
    }
    const auto n1 = odometry_deltas(s, 0.02, 5), n2 = odometry_deltas(s, 0.02, 5);
    double sq = 0;
    for (std::size_t i = 1; i < s.size(); ++i) {
        CHECK(*n1[i] == *n2[i]);
        sq += squared_norm(*n1[i] - *exact[i]);
    }
    CHECK(std::sqrt(sq / (2.0 * (s.size() - 1))) == doctest::Approx(0.02).epsilon(0.15));
    auto no_truth = s;
    no_truth[3].true_position.reset();
    const auto partial = odometry_deltas(no_truth, 0.0, 1);
    CHECK_FALSE(partial[3].has_value());
    CHECK_FALSE(partial[4].has_value());
    CHECK(partial[5].has_value());
}
