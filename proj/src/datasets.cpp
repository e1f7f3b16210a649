#include "pfdoa/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

#include "text.hpp"

namespace pfdoa {

std::string to_string(Technology t) {
    switch (t) {
    case Technology::wifi: return "wifi";
    case Technology::ble: return "ble";
    case Technology::zigbee: return "zigbee";
    case Technology::simulated: return "simulated";
    }
    return "simulated";
}

Technology parse_technology(const std::string& s) {
    const auto v = text::lower(s);
    if (v == "wifi" || v == "wi-fi") return Technology::wifi;
    if (v == "ble") return Technology::ble;
    if (v == "zigbee") return Technology::zigbee;
    if (v == "simulated") return Technology::simulated;
    throw Error("unknown technology '" + s + "'");
}

std::string to_string(Region r) {
    switch (r) {
    case Region::diagonal: return "diagonal";
    case Region::inside: return "inside";
    case Region::boundary: return "boundary";
    }
    return "inside";
}

Region parse_region(const std::string& s) {
    const auto v = text::lower(s);
    if (v == "diagonal") return Region::diagonal;
    if (v == "inside") return Region::inside;
    if (v == "boundary") return Region::boundary;
    throw Error("unknown region '" + s + "'");
}

std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& in) {
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view v(line);
        if (const auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
        v = text::trim(v);
        if (v.empty()) continue;
        const auto eq = v.find('=');
        if (eq == std::string_view::npos)
            throw Error("line " + std::to_string(lineno) + ": expected 'key = value'");
        out.emplace_back(std::string(text::trim(v.substr(0, eq))), std::string(text::trim(v.substr(eq + 1))));
    }
    return out;
}

ScenarioDescriptor parse_descriptor(std::istream& in, const std::filesystem::path& base_dir) {
    std::optional<double> width, height, ref_power, exponent;
    double origin_x = 0.0, origin_y = 0.0, noise_std = 0.0;
    LayoutKind kind = LayoutKind::four_corner;
    std::vector<Anchor> anchors;
    ScenarioDescriptor d{"", Workspace::square(1.0), Technology::simulated, std::nullopt, false, std::nullopt,
                         Ordering::nearest_neighbor, {}, std::nullopt};

    for (const auto& [key, value] : parse_key_values(in)) {
        if (key == "name") d.name = value;
        else if (key == "technology") d.technology = parse_technology(value);
        else if (key == "width") width = text::parse_double(value, "width");
        else if (key == "height") height = text::parse_double(value, "height");
        else if (key == "origin_x") origin_x = text::parse_double(value, "origin_x");
        else if (key == "origin_y") origin_y = text::parse_double(value, "origin_y");
        else if (key == "layout") {
            if (value == "four_corner") kind = LayoutKind::four_corner;
            else if (value == "general") kind = LayoutKind::general;
            else throw Error("descriptor: unknown layout '" + value + "'");
        } else if (key == "anchor") {
            const auto parts = text::split_ws(value);
            if (parts.size() != 3) throw Error("descriptor: anchor needs 'id x y', got '" + value + "'");
            anchors.push_back({std::string(parts[0]),
                               {text::parse_double(parts[1], "anchor x"), text::parse_double(parts[2], "anchor y")}});
        } else if (key == "channel") {
            if (text::lower(value) == "all") {
                d.combine_channels = true;
                d.channel.reset();
            } else {
                const auto ch = text::parse_int(value, "channel");
                if (ch < 0 || ch > 39) throw Error("descriptor: channel must be in 0..39 or 'all'");
                d.channel = static_cast<int>(ch);
                d.combine_channels = false;
            }
        } else if (key == "region") d.region = parse_region(value);
        else if (key == "ordering") {
            if (value == "nearest_neighbor") d.ordering = Ordering::nearest_neighbor;
            else if (value == "point_id") d.ordering = Ordering::point_id;
            else throw Error("descriptor: unknown ordering '" + value + "'");
        } else if (key == "data") d.data = base_dir / value;
        else if (key == "reference_power_dbm") ref_power = text::parse_double(value, "reference_power_dbm");
        else if (key == "path_loss_exponent") exponent = text::parse_double(value, "path_loss_exponent");
        else if (key == "noise_std_dbm") noise_std = text::parse_double(value, "noise_std_dbm");
        else throw Error("descriptor: unknown key '" + key + "'");
    }
    if (!width || !height) throw Error("descriptor: width and height are required");
    if (anchors.empty()) throw Error("descriptor: no anchors declared");
    const Rect bounds{{origin_x, origin_y}, {origin_x + *width, origin_y + *height}};
    if (!bounds.has_area()) throw Error("descriptor: workspace has no area");
    d.workspace = Workspace{bounds, AnchorLayout::make(std::move(anchors), kind)};
    if (ref_power.has_value() != exponent.has_value())
        throw Error("descriptor: reference_power_dbm and path_loss_exponent must be given together");
    if (ref_power) d.model = PathLossModel(*ref_power, *exponent, noise_std);
    if (d.channel && d.technology != Technology::ble)
        throw Error("descriptor: channel selection applies to multi-channel BLE data only");
    return d;
}

ScenarioDescriptor read_descriptor(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open descriptor " + path.string());
    return parse_descriptor(in, path.parent_path());
}

void write_descriptor(std::ostream& out, const ScenarioDescriptor& d) {
    const Rect& b = d.workspace.bounds;
    out << "name = " << d.name << '\n'
        << "technology = " << to_string(d.technology) << '\n'
        << "origin_x = " << text::format_double(b.min.x) << '\n'
        << "origin_y = " << text::format_double(b.min.y) << '\n'
        << "width = " << text::format_double(b.width()) << '\n'
        << "height = " << text::format_double(b.height()) << '\n'
        << "layout = " << (d.workspace.layout.kind() == LayoutKind::four_corner ? "four_corner" : "general") << '\n';
    for (const auto& a : d.workspace.layout.anchors())
        out << "anchor = " << a.id << ' ' << text::format_double(a.position.x) << ' '
            << text::format_double(a.position.y) << '\n';
    if (d.combine_channels) out << "channel = all\n";
    else if (d.channel) out << "channel = " << *d.channel << '\n';
    if (d.region) out << "region = " << to_string(*d.region) << '\n';
    out << "ordering = " << (d.ordering == Ordering::point_id ? "point_id" : "nearest_neighbor") << '\n';
    if (!d.data.empty()) out << "data = " << d.data.generic_string() << '\n';
    if (d.model) {
        out << "reference_power_dbm = " << text::format_double(d.model->reference_power_dbm()) << '\n'
            << "path_loss_exponent = " << text::format_double(d.model->path_loss_exponent()) << '\n'
            << "noise_std_dbm = " << text::format_double(d.model->noise_std_dbm()) << '\n';
    }
}

std::vector<CanonicalRecord> read_canonical_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error("canonical csv: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3); // UTF-8 BOM
    if (line != kCanonicalHeader)
        throw Error("canonical csv: header must be '" + std::string(kCanonicalHeader) + "', got '" + line + "'");
    std::vector<CanonicalRecord> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        const auto f = text::split(line, ',');
        if (f.size() != 7)
            throw Error("canonical csv line " + std::to_string(lineno) + ": expected 7 fields, got " +
                        std::to_string(f.size()));
        CanonicalRecord r;
        r.point_id = text::parse_int(f[0], "point_id");
        r.x = text::parse_double(f[1], "x");
        r.y = text::parse_double(f[2], "y");
        r.anchor_id = std::string(text::trim(f[3]));
        r.rssi = text::parse_double(f[4], "rssi");
        if (!text::trim(f[5]).empty()) r.channel = static_cast<int>(text::parse_int(f[5], "channel"));
        r.technology = std::string(text::trim(f[6]));
        if (r.anchor_id.empty()) throw Error("canonical csv line " + std::to_string(lineno) + ": empty anchor_id");
        if (!std::isfinite(r.x) || !std::isfinite(r.y) || !std::isfinite(r.rssi))
            throw Error("canonical csv line " + std::to_string(lineno) + ": non-finite value");
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<CanonicalRecord> read_canonical_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    return read_canonical_csv(in);
}

void write_canonical_csv(std::ostream& out, std::span<const CanonicalRecord> records) {
    out << kCanonicalHeader << '\n';
    for (const auto& r : records) {
        out << r.point_id << ',' << text::format_double(r.x) << ',' << text::format_double(r.y) << ','
            << r.anchor_id << ',' << text::format_double(r.rssi) << ',';
        if (r.channel) out << *r.channel;
        out << ',' << r.technology << '\n';
    }
}

std::vector<CanonicalRecord> to_canonical(std::span<const RssiSnapshot> snapshots, const AnchorLayout& layout,
                                          const std::string& technology) {
    std::vector<CanonicalRecord> out;
    for (const auto& s : snapshots) {
        if (!s.true_position) throw Error("to_canonical: snapshot without ground truth");
        if (s.rssi_by_anchor.size() != layout.size()) throw Error("to_canonical: snapshot/layout size mismatch");
        for (std::size_t j = 0; j < layout.size(); ++j)
            out.push_back({s.timestamp_index, s.true_position->x, s.true_position->y, layout.anchors()[j].id,
                           s.rssi_by_anchor[j], std::nullopt, technology});
    }
    return out;
}

std::vector<std::size_t> nearest_neighbor_order(std::span<const Vec2> points) {
    std::vector<std::size_t> order;
    if (points.empty()) return order;
    std::vector<bool> used(points.size(), false);
    std::size_t current = 0;
    used[0] = true;
    order.push_back(0);
    for (std::size_t step = 1; step < points.size(); ++step) {
        std::size_t best = points.size();
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (used[j]) continue;
            const double d = squared_norm(points[j] - points[current]);
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        used[best] = true;
        order.push_back(best);
        current = best;
    }
    return order;
}

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

bool technology_matches(const std::string& record_tech, Technology wanted) {
    if (record_tech.empty()) return true;
    try {
        return parse_technology(record_tech) == wanted;
    } catch (const Error&) {
        return false;
    }
}

} // namespace

LoadedScenario load_scenario(std::span<const CanonicalRecord> records, const ScenarioDescriptor& descriptor) {
    const AnchorLayout& layout = descriptor.workspace.layout;
    const Rect& bounds = descriptor.workspace.bounds;

    struct Point {
        Vec2 position;
        std::vector<std::vector<double>> readings; // per anchor, one per channel kept
    };
    std::map<std::int64_t, Point> points;
    std::vector<std::int64_t> first_seen;
    std::set<std::tuple<std::int64_t, std::string, int>> keys;

    for (const auto& r : records) {
        if (!technology_matches(r.technology, descriptor.technology)) continue;
        const auto anchor = layout.index_of(r.anchor_id);
        if (!anchor) throw Error("load_scenario: anchor '" + r.anchor_id + "' is not declared in the descriptor");
        if (descriptor.channel && r.channel != descriptor.channel) continue;
        if (!keys.emplace(r.point_id, r.anchor_id, r.channel.value_or(-1)).second)
            throw Error("load_scenario: duplicate reading for point " + std::to_string(r.point_id) + ", anchor " +
                        r.anchor_id);
        const Vec2 pos{r.x, r.y};
        if (!bounds.contains(pos, 1e-9))
            throw Error("load_scenario: point " + std::to_string(r.point_id) + " lies outside the workspace");
        auto [it, inserted] = points.try_emplace(r.point_id);
        if (inserted) {
            it->second.position = pos;
            it->second.readings.resize(layout.size());
            first_seen.push_back(r.point_id);
        } else if (!(it->second.position == pos)) {
            throw Error("load_scenario: point " + std::to_string(r.point_id) + " has inconsistent coordinates");
        }
        it->second.readings[*anchor].push_back(r.rssi);
    }
    if (points.empty()) throw Error("load_scenario: scenario '" + descriptor.name + "' has no readings");

    // one value per (point, anchor): a single channel, or the mean over channels
    std::vector<std::vector<double>> per_anchor(layout.size());
    for (auto& [id, p] : points) {
        for (std::size_t j = 0; j < layout.size(); ++j) {
            auto& v = p.readings[j];
            if (v.size() > 1 && !descriptor.combine_channels)
                throw Error("load_scenario: point " + std::to_string(id) +
                            " has several channels; set 'channel' to a number or 'all'");
            if (v.size() > 1) {
                double sum = 0.0;
                for (double x : v) sum += x;
                v.assign(1, sum / static_cast<double>(v.size()));
            }
            if (!v.empty()) per_anchor[j].push_back(v[0]);
        }
    }
    std::vector<double> medians(layout.size());
    for (std::size_t j = 0; j < layout.size(); ++j) {
        if (per_anchor[j].empty())
            throw Error("load_scenario: anchor '" + layout.anchors()[j].id + "' has no readings");
        medians[j] = median(per_anchor[j]);
    }

    std::vector<std::int64_t> ids;
    if (descriptor.ordering == Ordering::point_id) {
        for (const auto& [id, p] : points) ids.push_back(id);
    } else {
        std::vector<Vec2> positions;
        for (auto id : first_seen) positions.push_back(points.at(id).position);
        for (auto k : nearest_neighbor_order(positions)) ids.push_back(first_seen[k]);
    }

    LoadedScenario out;
    for (auto id : ids) {
        const Point& p = points.at(id);
        RssiSnapshot s;
        s.timestamp_index = id;
        s.true_position = p.position;
        for (std::size_t j = 0; j < layout.size(); ++j) {
            if (p.readings[j].empty()) {
                s.rssi_by_anchor.push_back(medians[j]);
                out.imputed.push_back({id, layout.anchors()[j].id, medians[j]});
            } else {
                s.rssi_by_anchor.push_back(p.readings[j][0]);
            }
        }
        out.snapshots.push_back(std::move(s));
    }
    return out;
}

LoadedScenario load_scenario(const std::filesystem::path& csv, const ScenarioDescriptor& descriptor) {
    const auto records = read_canonical_csv(csv);
    return load_scenario(records, descriptor);
}

LoadedScenario load_scenario(const ScenarioDescriptor& descriptor) {
    if (descriptor.data.empty()) throw Error("load_scenario: descriptor '" + descriptor.name + "' names no data file");
    return load_scenario(descriptor.data, descriptor);
}

PathLossModel calibrate_model(std::span<const RssiSnapshot> snapshots, const AnchorLayout& layout) {
    std::vector<double> xs, ys;
    std::size_t with_truth = 0;
    for (const auto& s : snapshots) {
        if (!s.true_position) continue;
        if (s.rssi_by_anchor.size() != layout.size()) throw Error("calibrate_model: snapshot/layout size mismatch");
        ++with_truth;
        for (std::size_t j = 0; j < layout.size(); ++j) {
            const double d = std::fmax(distance(*s.true_position, layout.anchors()[j].position),
                                       PathLossModel::kMinDistance);
            xs.push_back(std::log10(d));
            ys.push_back(s.rssi_by_anchor[j]);
        }
    }
    if (with_truth < 2) throw Error("calibrate_model: need at least 2 snapshots with ground truth");
    const auto n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx <= 1e-12 * std::max(1.0, mx * mx) * n)
        throw Error("calibrate_model: all anchor distances are equal; (A, n) is not identifiable");
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ssr = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (intercept + slope * xs[i]);
        ssr += r * r;
    }
    const double exponent = -slope / 10.0;
    if (!(exponent > 0.0))
        throw Error("calibrate_model: fitted path-loss exponent is not positive (" + std::to_string(exponent) + ")");
    return PathLossModel(intercept, exponent, std::sqrt(ssr / n));
}

} // namespace pfdoa
