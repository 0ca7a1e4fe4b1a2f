#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace starris {

struct Position3D {
  double x = 0.0;
  double y = 0.0;
  double h = 0.0;  // altitude

  bool operator==(const Position3D&) const = default;
};

double distance(const Position3D& a, const Position3D& b);

/// Static description of the network: geometry, radio parameters and the
/// per-UE rate/energy thresholds. All quantities are SI (m, s, Hz, W, J,
/// bit/s); gains and Rician factors are linear ratios.
///
/// The UAV displacement per slot must stay well below the flight height so
/// that the UAV can be treated as static within a slot. This is enforced as
/// slot_length * v_max < uav_height / 10.
struct ScenarioConfig {
  double area_size = 800.0;
  int num_ues = 12;
  int num_ris = 3;
  int elements_per_ris = 40;
  std::vector<Position3D> ris_positions;
  // nullopt: UEs are drawn uniformly over the area from the build seed.
  std::optional<std::vector<Position3D>> ue_positions;
  Position3D uav_start{0.0, 0.0, 200.0};
  double uav_height = 200.0;
  double v_max = 10.0;
  double slot_length = 1.0;
  int num_slots = 200;
  double bandwidth = 1e6;
  double noise_power = 1e-9;
  double p_max = 1.0;
  double e_max = 180.0;
  double r_min = 300000.0;
  double alpha_ue_ris = 2.8;
  double alpha_ris_uav = 2.2;
  double alpha_ue_uav = 3.5;
  double rician_ue_ris = 10.0;
  double rician_ris_uav = 10.0;
  double rician_ue_uav = 10.0;
  double ref_gain = 3.1622776601683795e-05;  // -45 dB
  double carrier_frequency = 3.6e9;

  // Throws ConfigError on the first violated invariant.
  void validate() const;

  double wavelength() const;
  double element_spacing() const { return wavelength() / 2.0; }
  double episode_duration() const { return slot_length * num_slots; }
};

struct Scenario {
  ScenarioConfig config;
  std::vector<Position3D> ues;
  std::vector<Position3D> ris;

  int num_ues() const { return static_cast<int>(ues.size()); }
  int num_ris() const { return static_cast<int>(ris.size()); }
  int elements() const { return config.elements_per_ris; }
};

enum class Side { kLeft, kRight };

/// Nearest-surface association and the left/right partition of each
/// surface's UEs by x coordinate.
struct Association {
  std::vector<int> serving_ris;             // per UE
  std::vector<Side> side;                   // per UE
  std::vector<std::vector<int>> left_sets;  // per RIS, ascending UE index
  std::vector<std::vector<int>> right_sets;

  const std::vector<int>& cluster(int ris, Side s) const {
    return s == Side::kLeft ? left_sets[ris] : right_sets[ris];
  }
};

Scenario build_scenario(const ScenarioConfig& config, std::uint64_t seed);

Association associate(const Scenario& scenario);

// Full-size configuration: 800 m area, 12 random UEs, three surfaces, 200 slots.
ScenarioConfig paper_preset(int elements_per_ris = 40);

// Small configuration (K=4, I=2, M=8, N=50) used by CI and the acceptance
// suite. Its link budget is scaled so the surface-aided path is comparable
// to the direct link at M=8; see docs/presets.md.
ScenarioConfig desk_preset(int elements_per_ris = 8);

void to_json(nlohmann::json& j, const Position3D& p);
void from_json(const nlohmann::json& j, Position3D& p);
void to_json(nlohmann::json& j, const ScenarioConfig& c);
void from_json(const nlohmann::json& j, ScenarioConfig& c);

ScenarioConfig load_scenario_config(const std::string& path);
void save_scenario_config(const ScenarioConfig& config, const std::string& path);

}  // namespace starris
