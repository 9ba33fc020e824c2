// Fixture loading and small builders shared by the test binaries.
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dipplan/io.hpp"
#include "dipplan/pipeline.hpp"

namespace support {

inline std::string fixture(const std::string& name) { return std::string(DIPPLAN_FIXTURE_DIR) + "/" + name; }

inline const std::vector<std::string>& building_fixtures() {
  static const std::vector<std::string> names{"scene_1", "scene_2", "scene_3", "scene_4", "scene_5"};
  return names;
}

inline dipplan::PlannerConfig fixture_config() {
  dipplan::PlannerConfig cfg = dipplan::config_from_json(dipplan::read_json(fixture("config.json")));
  cfg.camera = dipplan::camera_from_json(dipplan::read_json(fixture("camera.json")));
  return cfg;
}

inline dipplan::Scene fixture_scene(const std::string& name, double d_min = 10.0) {
  return dipplan::parse_scene(dipplan::read_json(fixture(name + ".json")), d_min);
}

inline dipplan::Ring rect(double x, double y, double w, double h) {
  return {{x, y}, {x + w, y}, {x + w, y + h}, {x, y + h}};
}

inline dipplan::Scene scene_of(const std::vector<dipplan::Ring>& rings, double H = 60.0, double min_alt = 10.0,
                               double d_min = 10.0) {
  std::vector<std::pair<std::string, dipplan::Ring>> named;
  for (std::size_t i = 0; i < rings.size(); ++i) named.push_back({"b" + std::to_string(i), rings[i]});
  return dipplan::make_scene(named, H, min_alt, d_min);
}

}  // namespace support
