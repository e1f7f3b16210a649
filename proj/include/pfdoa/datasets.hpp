#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pfdoa/sim.hpp"

namespace pfdoa {

enum class Technology { wifi, ble, zigbee, simulated };
enum class Region { diagonal, inside, boundary };
/// How test points are ordered into a trajectory.
enum class Ordering { nearest_neighbor, point_id };

std::string to_string(Technology t);
Technology parse_technology(const std::string& s);
std::string to_string(Region r);
Region parse_region(const std::string& s);

/// Key/value text file describing one scenario:
///
///     name = dataset2-ch0-inside
///     technology = ble
///     width = 10
///     height = 10
///     layout = four_corner            # or general
///     anchor = N1 0 0                 # one line per anchor, in layout order
///     channel = 0                     # or "all" to average channels 0-39
///     region = inside
///     ordering = nearest_neighbor     # or point_id
///     data = ch0_inside.csv           # relative to the descriptor
///     reference_power_dbm = -40       # optional; both or neither
///     path_loss_exponent = 3
///     noise_std_dbm = 2               # optional
struct ScenarioDescriptor {
    std::string name;
    Workspace workspace;
    Technology technology = Technology::simulated;
    std::optional<int> channel;
    bool combine_channels = false;
    std::optional<Region> region;
    Ordering ordering = Ordering::nearest_neighbor;
    std::filesystem::path data;
    std::optional<PathLossModel> model;
};

/// Key/value lines with '#' comments, in file order (keys may repeat).
std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& in);

ScenarioDescriptor parse_descriptor(std::istream& in, const std::filesystem::path& base_dir = {});
ScenarioDescriptor read_descriptor(const std::filesystem::path& path);
void write_descriptor(std::ostream& out, const ScenarioDescriptor& d);

/// One row of the long-format interchange CSV.
struct CanonicalRecord {
    std::int64_t point_id = 0;
    double x = 0.0;
    double y = 0.0;
    std::string anchor_id;
    double rssi = 0.0;
    std::optional<int> channel;
    std::string technology;
};

inline constexpr const char* kCanonicalHeader = "point_id,x,y,anchor_id,rssi,channel,technology";

std::vector<CanonicalRecord> read_canonical_csv(std::istream& in);
std::vector<CanonicalRecord> read_canonical_csv(const std::filesystem::path& path);
/// Numbers are written in shortest round-trip form.
void write_canonical_csv(std::ostream& out, std::span<const CanonicalRecord> records);

/// Snapshot stream as canonical records (point_id = timestamp_index).
std::vector<CanonicalRecord> to_canonical(std::span<const RssiSnapshot> snapshots, const AnchorLayout& layout,
                                          const std::string& technology);

struct ImputedReading {
    std::int64_t point_id = 0;
    std::string anchor_id;
    double value = 0.0;
};

struct LoadedScenario {
    std::vector<RssiSnapshot> snapshots; ///< timestamp_index = point_id
    std::vector<ImputedReading> imputed;
};

LoadedScenario load_scenario(std::span<const CanonicalRecord> records, const ScenarioDescriptor& descriptor);
LoadedScenario load_scenario(const std::filesystem::path& csv, const ScenarioDescriptor& descriptor);
/// Uses descriptor.data as the CSV path.
LoadedScenario load_scenario(const ScenarioDescriptor& descriptor);

/// Least-squares (A, n) from every (distance, rssi) pair with ground truth;
/// noise_std is the RMS residual.
PathLossModel calibrate_model(std::span<const RssiSnapshot> snapshots, const AnchorLayout& layout);

/// Greedy nearest-neighbor chain from points[0]; returns the visiting order.
std::vector<std::size_t> nearest_neighbor_order(std::span<const Vec2> points);

} // namespace pfdoa
