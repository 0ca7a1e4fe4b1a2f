#include "starris/scenario.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "starris/errors.hpp"
#include "starris/random.hpp"

namespace starris {

namespace {

constexpr double kSpeedOfLight = 299792458.0;

bool inside_area(const Position3D& p, double area) {
  return p.x >= 0.0 && p.x <= area && p.y >= 0.0 && p.y <= area;
}

bool finite(const Position3D& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.h);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid scenario config: " + what);
}

}  // namespace

std::string serialize_rng(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

Rng deserialize_rng(const std::string& text) {
  Rng rng;
  std::istringstream is(text);
  is >> rng;
  if (!is) throw ConfigError("corrupt RNG state");
  return rng;
}

double distance(const Position3D& a, const Position3D& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dh = a.h - b.h;
  return std::sqrt(dx * dx + dy * dy + dh * dh);
}

double ScenarioConfig::wavelength() const {
  return kSpeedOfLight / carrier_frequency;
}

void ScenarioConfig::validate() const {
  require(std::isfinite(area_size) && area_size > 0.0, "area_size must be positive");
  require(num_ues >= 1, "num_ues must be >= 1");
  require(num_ris >= 1, "num_ris must be >= 1");
  require(elements_per_ris >= 1, "elements_per_ris must be >= 1");
  require(static_cast<int>(ris_positions.size()) == num_ris,
          "ris_positions must list exactly num_ris entries");
  for (const auto& p : ris_positions) {
    require(finite(p) && inside_area(p, area_size), "RIS outside area");
  }
  if (ue_positions) {
    require(static_cast<int>(ue_positions->size()) == num_ues,
            "ue_positions must list exactly num_ues entries");
    for (const auto& p : *ue_positions) {
      require(finite(p) && inside_area(p, area_size), "UE outside area");
    }
  }
  require(finite(uav_start) && inside_area(uav_start, area_size),
          "uav_start outside area");
  require(uav_height > 0.0, "uav_height must be positive");
  require(std::abs(uav_start.h - uav_height) <= 1e-9,
          "uav_start altitude must equal uav_height");
  require(v_max > 0.0, "v_max must be positive");
  require(slot_length > 0.0, "slot_length must be positive");
  require(slot_length * v_max < uav_height / 10.0,
          "slot_length * v_max must be below uav_height / 10");
  require(num_slots >= 1, "num_slots must be >= 1");
  require(bandwidth > 0.0, "bandwidth must be positive");
  require(noise_power > 0.0, "noise_power must be positive");
  require(p_max > 0.0, "p_max must be positive");
  require(e_max > 0.0, "e_max must be positive");
  require(r_min >= 0.0 && std::isfinite(r_min), "r_min must be non-negative");
  require(alpha_ue_ris > 0.0 && alpha_ris_uav > 0.0 && alpha_ue_uav > 0.0,
          "path-loss exponents must be positive");
  require(rician_ue_ris >= 0.0 && rician_ris_uav >= 0.0 && rician_ue_uav >= 0.0,
          "Rician factors must be non-negative");
  require(ref_gain > 0.0, "ref_gain must be positive");
  require(carrier_frequency > 0.0, "carrier_frequency must be positive");
}

Scenario build_scenario(const ScenarioConfig& config, std::uint64_t seed) {
  config.validate();
  Scenario s;
  s.config = config;
  s.ris = config.ris_positions;
  if (config.ue_positions) {
    s.ues = *config.ue_positions;
  } else {
    Rng rng(seed);
    s.ues.reserve(config.num_ues);
    while (static_cast<int>(s.ues.size()) < config.num_ues) {
      Position3D p{uniform(rng, 0.0, config.area_size),
                   uniform(rng, 0.0, config.area_size), 0.0};
      bool on_surface_plane = false;
      for (const auto& r : s.ris) on_surface_plane |= (p.x == r.x);
      if (!on_surface_plane) s.ues.push_back(p);
    }
  }
  for (auto& u : s.ues) u.h = 0.0;
  return s;
}

Association associate(const Scenario& scenario) {
  const int K = scenario.num_ues();
  const int I = scenario.num_ris();
  Association a;
  a.serving_ris.resize(K);
  a.side.resize(K);
  a.left_sets.assign(I, {});
  a.right_sets.assign(I, {});
  for (int k = 0; k < K; ++k) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < I; ++i) {
      const double d = distance(scenario.ues[k], scenario.ris[i]);
      if (d < best_d) {  // strict: ties keep the lower index
        best_d = d;
        best = i;
      }
    }
    a.serving_ris[k] = best;
    if (scenario.ues[k].x < scenario.ris[best].x) {
      a.side[k] = Side::kLeft;
      a.left_sets[best].push_back(k);
    } else {
      a.side[k] = Side::kRight;
      a.right_sets[best].push_back(k);
    }
  }
  return a;
}

ScenarioConfig paper_preset(int elements_per_ris) {
  ScenarioConfig c;
  c.area_size = 800.0;
  c.num_ues = 12;
  c.num_ris = 3;
  c.elements_per_ris = elements_per_ris;
  c.ris_positions = {{400.0, 600.0, 10.0}, {200.0, 300.0, 10.0}, {600.0, 200.0, 10.0}};
  c.uav_start = {0.0, 0.0, 200.0};
  c.uav_height = 200.0;
  c.num_slots = 200;
  return c;
}

ScenarioConfig desk_preset(int elements_per_ris) {
  ScenarioConfig c;
  c.area_size = 300.0;
  c.num_ues = 4;
  c.num_ris = 2;
  c.elements_per_ris = elements_per_ris;
  c.ris_positions = {{150.0, 80.0, 10.0}, {150.0, 220.0, 10.0}};
  c.ue_positions = std::vector<Position3D>{
      {90.0, 80.0, 0.0}, {20.0, 70.0, 0.0}, {210.0, 220.0, 0.0}, {90.0, 225.0, 0.0}};
  c.uav_start = {0.0, 0.0, 200.0};
  c.uav_height = 200.0;
  c.num_slots = 50;
  c.alpha_ue_ris = 2.0;
  c.alpha_ris_uav = 2.0;
  c.alpha_ue_uav = 3.0;
  c.ref_gain = 1.0;
  c.e_max = 45.0;
  c.r_min = 300000.0;
  return c;
}

void to_json(nlohmann::json& j, const Position3D& p) { j = {p.x, p.y, p.h}; }

void from_json(const nlohmann::json& j, Position3D& p) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("position must be [x, y, h]");
  p = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void to_json(nlohmann::json& j, const ScenarioConfig& c) {
  j = nlohmann::json{
      {"area_size", c.area_size},
      {"num_ues", c.num_ues},
      {"num_ris", c.num_ris},
      {"elements_per_ris", c.elements_per_ris},
      {"ris_positions", c.ris_positions},
      {"uav_start", c.uav_start},
      {"uav_height", c.uav_height},
      {"v_max", c.v_max},
      {"slot_length", c.slot_length},
      {"num_slots", c.num_slots},
      {"bandwidth", c.bandwidth},
      {"noise_power", c.noise_power},
      {"p_max", c.p_max},
      {"e_max", c.e_max},
      {"r_min", c.r_min},
      {"alpha_ue_ris", c.alpha_ue_ris},
      {"alpha_ris_uav", c.alpha_ris_uav},
      {"alpha_ue_uav", c.alpha_ue_uav},
      {"rician_ue_ris", c.rician_ue_ris},
      {"rician_ris_uav", c.rician_ris_uav},
      {"rician_ue_uav", c.rician_ue_uav},
      {"ref_gain", c.ref_gain},
      {"carrier_frequency", c.carrier_frequency},
  };
  if (c.ue_positions) {
    j["ue_positions"] = *c.ue_positions;
  } else {
    j["ue_positions"] = "random";
  }
}

void from_json(const nlohmann::json& j, ScenarioConfig& c) {
  // Missing keys keep their defaults; present keys must have the right type.
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  try {
    get("area_size", c.area_size);
    get("num_ues", c.num_ues);
    get("num_ris", c.num_ris);
    get("elements_per_ris", c.elements_per_ris);
    get("ris_positions", c.ris_positions);
    get("uav_start", c.uav_start);
    get("uav_height", c.uav_height);
    get("v_max", c.v_max);
    get("slot_length", c.slot_length);
    get("num_slots", c.num_slots);
    get("bandwidth", c.bandwidth);
    get("noise_power", c.noise_power);
    get("p_max", c.p_max);
    get("e_max", c.e_max);
    get("r_min", c.r_min);
    get("alpha_ue_ris", c.alpha_ue_ris);
    get("alpha_ris_uav", c.alpha_ris_uav);
    get("alpha_ue_uav", c.alpha_ue_uav);
    get("rician_ue_ris", c.rician_ue_ris);
    get("rician_ris_uav", c.rician_ris_uav);
    get("rician_ue_uav", c.rician_ue_uav);
    get("ref_gain", c.ref_gain);
    get("carrier_frequency", c.carrier_frequency);
    if (j.contains("ue_positions")) {
      const auto& u = j.at("ue_positions");
      if (u.is_string()) {
        if (u.get<std::string>() != "random") {
          throw ConfigError("ue_positions must be an array or \"random\"");
        }
        c.ue_positions.reset();
      } else {
        c.ue_positions = u.get<std::vector<Position3D>>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario JSON: ") + e.what());
  }
}

ScenarioConfig load_scenario_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario JSON: ") + e.what());
  }
  ScenarioConfig c;
  from_json(j, c);
  return c;
}

void save_scenario_config(const ScenarioConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << nlohmann::json(config).dump(2) << '\n';
}

}  // namespace starris
