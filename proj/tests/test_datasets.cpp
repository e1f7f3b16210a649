#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "pfdoa/datasets.hpp"

using namespace pfdoa;

namespace {

const char* kTriangle = R"(name = triangle
technology = wifi
width = 6
height = 5.5
layout = general
anchor = T1 1 1
anchor = T2 5 1
anchor = T3 3 4.464
)";

ScenarioDescriptor triangle(const std::string& extra = "") {
    std::istringstream in(std::string(kTriangle) + extra);
    return parse_descriptor(in);
}

std::vector<Vec2> grid49() {
    std::vector<Vec2> out;
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j) out.push_back({1.5 + 0.5 * i, 1.25 + 0.5 * j});
    return out;
}

std::vector<CanonicalRecord> records_for(const ScenarioDescriptor& d, const std::vector<Vec2>& pts,
                                         const PathLossModel& m, std::uint64_t seed, const std::string& tech = "wifi") {
    std::mt19937_64 rng(seed);
    std::vector<CanonicalRecord> out;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (const auto& a : d.workspace.layout.anchors())
            out.push_back({static_cast<std::int64_t>(i), pts[i].x, pts[i].y, a.id,
                           sample_rssi(m, distance(a.position, pts[i]), rng), std::nullopt, tech});
    return out;
}

std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("pfdoa_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

} // namespace

TEST_CASE("descriptor parsing") {
    const auto d = triangle("channel = all\n");
    CHECK(d.name == "triangle");
    CHECK(d.technology == Technology::wifi);
    CHECK(d.workspace.bounds.max == Vec2{6, 5.5});
    CHECK(d.workspace.layout.size() == 3);
    CHECK(d.workspace.layout.kind() == LayoutKind::general);
    CHECK(d.combine_channels);
    CHECK_FALSE(d.model.has_value());

    const auto m = triangle("reference_power_dbm = -45\npath_loss_exponent = 2.5\nnoise_std_dbm = 3\n");
    REQUIRE(m.model);
    CHECK(m.model->reference_power_dbm() == -45);
    CHECK(m.model->path_loss_exponent() == 2.5);
    CHECK(m.model->noise_std_dbm() == 3);
}

TEST_CASE("descriptor errors") {
    CHECK_THROWS_AS(triangle("colour = red\n"), Error);
    CHECK_THROWS_AS(triangle("channel = 3\n"), Error); // wifi has no channels
    CHECK_THROWS_AS(triangle("reference_power_dbm = -40\n"), Error);
    CHECK_THROWS_AS(triangle("anchor = T4 1\n"), Error);
    CHECK_THROWS_AS(triangle("width = abc\n"), Error);
    std::istringstream no_eq("width 6\n");
    CHECK_THROWS_AS(parse_descriptor(no_eq), Error);
    std::istringstream ble("technology = ble\nwidth = 10\nheight = 10\nanchor = N1 0 0\nanchor = N2 0 10\n"
                           "anchor = N3 10 10\nanchor = N4 10 0\nchannel = 40\n");
    CHECK_THROWS_AS(parse_descriptor(ble), Error);
}

TEST_CASE("descriptor round trip") {
    auto d = triangle("region = inside\nordering = point_id\ndata = pts.csv\nreference_power_dbm = -41.5\n"
                      "path_loss_exponent = 2.2\n");
    std::ostringstream out;
    write_descriptor(out, d);
    std::istringstream in(out.str());
    const auto back = parse_descriptor(in);
    CHECK(back.name == d.name);
    CHECK(back.region == d.region);
    CHECK(back.ordering == Ordering::point_id);
    CHECK(back.data == d.data);
    CHECK(back.model->path_loss_exponent() == 2.2);
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(back.workspace.layout.anchors()[j].position == d.workspace.layout.anchors()[j].position);
}

TEST_CASE("canonical csv round trip is bit-exact") {
    const auto ws = Workspace::square(6);
    const auto t = generate_trajectory(ws, TrajectoryKind::cross_coverage, 0.25);
    const auto stream = simulate_stream(ws, t, PathLossModel(-40, 3, 2), 4);
    std::stringstream buf;
    write_canonical_csv(buf, to_canonical(stream, ws.layout, "simulated"));
    const auto recs = read_canonical_csv(buf);
    ScenarioDescriptor d{"rt", ws, Technology::simulated, std::nullopt, false, std::nullopt, Ordering::point_id, {},
                         std::nullopt};
    const auto loaded = load_scenario(recs, d);
    REQUIRE(loaded.snapshots.size() == stream.size());
    CHECK(loaded.imputed.empty());
    for (std::size_t i = 0; i < stream.size(); ++i) {
        CHECK(loaded.snapshots[i].timestamp_index == stream[i].timestamp_index);
        CHECK(*loaded.snapshots[i].true_position == *stream[i].true_position);
        CHECK(loaded.snapshots[i].rssi_by_anchor == stream[i].rssi_by_anchor);
    }
}

TEST_CASE("canonical csv errors") {
    std::istringstream bad_header("point,x,y,anchor,rssi,channel,technology\n");
    CHECK_THROWS_AS(read_canonical_csv(bad_header), Error);
    std::istringstream short_row(std::string(kCanonicalHeader) + "\n1,2,3,N1,-50\n");
    CHECK_THROWS_AS(read_canonical_csv(short_row), Error);
    std::istringstream bad_num(std::string(kCanonicalHeader) + "\n1,2,x,N1,-50,,wifi\n");
    CHECK_THROWS_AS(read_canonical_csv(bad_num), Error);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_canonical_csv(empty), Error);
    std::istringstream bom("\xEF\xBB\xBF" + std::string(kCanonicalHeader) + "\r\n1,2,3,N1,-50,5,ble\r\n");
    const auto r = read_canonical_csv(bom);
    REQUIRE(r.size() == 1);
    CHECK(r[0].channel == 5);
    CHECK(r[0].technology == "ble");
}

TEST_CASE("49 fingerprints load as 49 snapshots") {
    const auto d = triangle();
    const auto recs = records_for(d, grid49(), PathLossModel(-40, 3, 2), 1);
    const auto s = load_scenario(recs, d);
    REQUIRE(s.snapshots.size() == 49);
    for (const auto& snap : s.snapshots) CHECK(snap.rssi_by_anchor.size() == 3);
}

TEST_CASE("missing readings are imputed with the anchor median") {
    const auto d = triangle();
    auto recs = records_for(d, grid49(), PathLossModel(-40, 3, 2), 2);
    const auto removed = std::find_if(recs.begin(), recs.end(),
                                      [](const CanonicalRecord& r) { return r.point_id == 10 && r.anchor_id == "T2"; });
    REQUIRE(removed != recs.end());
    recs.erase(removed);
    std::vector<double> t2;
    for (const auto& r : recs)
        if (r.anchor_id == "T2") t2.push_back(r.rssi);
    std::sort(t2.begin(), t2.end());
    const double med = 0.5 * (t2[23] + t2[24]);
    const auto s = load_scenario(recs, d);
    REQUIRE(s.imputed.size() == 1);
    CHECK(s.imputed[0].point_id == 10);
    CHECK(s.imputed[0].anchor_id == "T2");
    CHECK(s.imputed[0].value == med);
    const auto it = std::find_if(s.snapshots.begin(), s.snapshots.end(),
                                 [](const RssiSnapshot& x) { return x.timestamp_index == 10; });
    CHECK(it->rssi_by_anchor[1] == med);
}

TEST_CASE("loader rejects bad data") {
    const auto d = triangle();
    auto recs = records_for(d, grid49(), PathLossModel(-40, 3, 0), 1);
    auto dup = recs;
    dup.push_back(recs[0]);
    CHECK_THROWS_AS(load_scenario(dup, d), Error);
    auto unknown = recs;
    unknown[4].anchor_id = "T9";
    CHECK_THROWS_AS(load_scenario(unknown, d), Error);
    auto outside = recs;
    outside[0].x = 9;
    CHECK_THROWS_AS(load_scenario(outside, d), Error);
    CHECK_THROWS_AS(load_scenario(std::vector<CanonicalRecord>{}, d), Error);
    // all records are for another technology
    const auto zig = records_for(d, grid49(), PathLossModel(-40, 3, 0), 1, "zigbee");
    CHECK_THROWS_AS(load_scenario(zig, d), Error);
}

TEST_CASE("technology filter and channel handling") {
    std::istringstream in("technology = ble\nwidth = 10\nheight = 10\nanchor = N1 0 0\nanchor = N2 0 10\n"
                          "anchor = N3 10 10\nanchor = N4 10 0\nchannel = 1\nordering = point_id\n");
    auto d = parse_descriptor(in);
    std::vector<CanonicalRecord> recs;
    for (int ch = 0; ch < 3; ++ch)
        for (const auto& a : d.workspace.layout.anchors()) {
            recs.push_back({1, 2, 3, a.id, -50.0 - ch, ch, "ble"});
            recs.push_back({2, 4, 3, a.id, -60.0 - ch, ch, "ble"});
        }
    recs.push_back({1, 2, 3, "N1", -10, std::nullopt, "wifi"}); // ignored
    const auto one = load_scenario(recs, d);
    REQUIRE(one.snapshots.size() == 2);
    CHECK(one.snapshots[0].rssi_by_anchor == std::vector<double>(4, -51.0));

    d.channel.reset();
    d.combine_channels = true;
    const auto all = load_scenario(recs, d);
    CHECK(all.snapshots[0].rssi_by_anchor == std::vector<double>(4, -51.0));
    CHECK(all.snapshots[1].rssi_by_anchor == std::vector<double>(4, -61.0));

    d.combine_channels = false;
    CHECK_THROWS_AS(load_scenario(recs, d), Error);
}

TEST_CASE("nearest neighbor chaining") {
    const std::vector<Vec2> pts{{0, 0}, {5, 0}, {1, 0}, {3, 0}, {2, 0}};
    const auto order = nearest_neighbor_order(pts);
    CHECK(order == std::vector<std::size_t>{0, 2, 4, 3, 1});
    CHECK(nearest_neighbor_order(std::vector<Vec2>{}).empty());

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 10);
    for (int k = 0; k < 50; ++k) {
        std::vector<Vec2> p(1 + k * 3);
        for (auto& v : p) v = {u(rng), u(rng)};
        const auto o = nearest_neighbor_order(p);
        CHECK(o.size() == p.size());
        CHECK(std::set<std::size_t>(o.begin(), o.end()).size() == p.size());
        CHECK(o[0] == 0);
    }
}

TEST_CASE("loader is deterministic and chains points") {
    const auto d = triangle();
    auto pts = grid49();
    std::shuffle(pts.begin() + 1, pts.end(), std::mt19937_64(8));
    const auto recs = records_for(d, pts, PathLossModel(-40, 3, 2), 5);
    const auto a = load_scenario(recs, d), b = load_scenario(recs, d);
    REQUIRE(a.snapshots.size() == 49);
    std::set<std::int64_t> seen;
    for (std::size_t i = 0; i < a.snapshots.size(); ++i) {
        CHECK(a.snapshots[i].rssi_by_anchor == b.snapshots[i].rssi_by_anchor);
        seen.insert(a.snapshots[i].timestamp_index);
    }
    CHECK(seen.size() == 49);
    CHECK(*a.snapshots[0].true_position == pts[0]);
    // every hop in the chain goes to the nearest remaining point, so the first hop is short
    CHECK(distance(*a.snapshots[0].true_position, *a.snapshots[1].true_position) == doctest::Approx(0.5));
}

TEST_CASE("load from files") {
    const auto dir = temp_dir("files");
    const auto d0 = triangle("data = pts.csv\n");
    {
        std::ofstream csv(dir / "pts.csv");
        write_canonical_csv(csv, records_for(d0, grid49(), PathLossModel(-40, 3, 1), 3));
        std::ofstream desc(dir / "scenario.txt");
        desc << kTriangle << "data = pts.csv\n";
    }
    const auto d = read_descriptor(dir / "scenario.txt");
    CHECK(d.data == dir / "pts.csv");
    CHECK(load_scenario(d).snapshots.size() == 49);
    CHECK_THROWS_AS(read_descriptor(dir / "missing.txt"), Error);
    CHECK_THROWS_AS(load_scenario(dir / "missing.csv", d), Error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("calibration examples") {
    const auto d = triangle();
    const auto exact = load_scenario(records_for(d, grid49(), PathLossModel(-40, 2, 0), 1), d);
    const auto m = calibrate_model(exact.snapshots, d.workspace.layout);
    CHECK(m.reference_power_dbm() == doctest::Approx(-40).epsilon(1e-11));
    CHECK(m.path_loss_exponent() == doctest::Approx(2).epsilon(1e-11));
    CHECK(m.noise_std_dbm() < 1e-9);

    const auto two = AnchorLayout::general({{"a", {0, 0}}, {"b", {20, 0}}, {"c", {0, 20}}});
    // d=1 to a -> -40; d=10 to a -> -60; other anchors consistent with n=2
    std::vector<RssiSnapshot> s;
    for (Vec2 p : {Vec2{1, 0}, Vec2{10, 0}}) {
        RssiSnapshot snap{0, {}, p};
        for (const auto& a : two.anchors()) snap.rssi_by_anchor.push_back(-40 - 20 * std::log10(distance(a.position, p)));
        s.push_back(snap);
    }
    const auto m2 = calibrate_model(s, two);
    CHECK(m2.reference_power_dbm() == doctest::Approx(-40).epsilon(1e-12));
    CHECK(m2.path_loss_exponent() == doctest::Approx(2).epsilon(1e-12));
}

TEST_CASE("calibration errors") {
    const auto sq = AnchorLayout::four_corner(Rect{{0, 0}, {6, 6}});
    RssiSnapshot c{0, {-50, -50, -50, -50}, Vec2{3, 3}};
    CHECK_THROWS_AS(calibrate_model(std::vector<RssiSnapshot>{c, c}, sq), Error);
    CHECK_THROWS_AS(calibrate_model(std::vector<RssiSnapshot>{c}, sq), Error);
    // louder when farther -> fitted n < 0
    const RssiSnapshot near{0, {-80, -50, -30, -50}, Vec2{0.5, 0.5}};
    const RssiSnapshot far{1, {-30, -50, -80, -50}, Vec2{5.5, 5.5}};
    CHECK_THROWS_AS(calibrate_model(std::vector<RssiSnapshot>{near, far}, sq), Error);
}

TEST_CASE("calibration on noisy 49-point scenes") {
    const auto d = triangle();
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const auto s = load_scenario(records_for(d, grid49(), PathLossModel(-40, 3, 2), seed), d);
        CHECK(std::abs(calibrate_model(s.snapshots, d.workspace.layout).path_loss_exponent() - 3) <= 0.3);
    }
}

TEST_CASE("calibration is invariant to anchor order") {
    const auto d = triangle();
    const auto s = load_scenario(records_for(d, grid49(), PathLossModel(-43, 2.6, 2), 7), d);
    const auto m = calibrate_model(s.snapshots, d.workspace.layout);
    const auto flipped = AnchorLayout::general({{"T3", {3, 4.464}}, {"T1", {1, 1}}, {"T2", {5, 1}}});
    auto reordered = s.snapshots;
    for (auto& snap : reordered) {
        const auto& r = snap.rssi_by_anchor;
        snap.rssi_by_anchor = {r[2], r[0], r[1]};
    }
    const auto m2 = calibrate_model(reordered, flipped);
    CHECK(m2.path_loss_exponent() == doctest::Approx(m.path_loss_exponent()).epsilon(1e-12));
    CHECK(m2.reference_power_dbm() == doctest::Approx(m.reference_power_dbm()).epsilon(1e-12));
    CHECK(m2.noise_std_dbm() == doctest::Approx(m.noise_std_dbm()).epsilon(1e-12));
}
