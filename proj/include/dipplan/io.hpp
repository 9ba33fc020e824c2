#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "dipplan/pipeline.hpp"

namespace dipplan {

/// Reads a whole file; InputError naming the path on failure.
std::string read_text(const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);
/// Writes a whole file; InputError naming the path on failure.
void write_text(const std::filesystem::path& path, std::string_view text);

SurfaceRef parse_surface_name(std::string_view name, const std::string& pointer = "");

nlohmann::json flightplan_to_json(const FlightPlan& plan);
FlightPlan flightplan_from_json(const nlohmann::json& doc);
/// One row per capture: x_m,y_m,z_m,yaw_deg,pitch_deg,capture.
std::string flightplan_csv(const FlightPlan& plan);

nlohmann::json quality_to_json(const QualityReport& report);
nlohmann::json summary_to_json(const PlanSummary& summary);
nlohmann::json dipping_to_json(const DippingPlan& plan, const LiftedDipping& lifted);
nlohmann::json planar_to_json(const PlanarPlan& plan, double tilt_deg);
/// bin_lo,bin_hi,count rows of the reconstructability histogram.
std::string histogram_csv(const QualityReport& report);

/// Pretty JSON with a trailing newline.
std::string dump(const nlohmann::json& doc);

inline const std::set<std::string>& all_layers() {
  static const std::set<std::string> layers{"map",        "zone",   "candidates",
                                            "dipping_points", "directions", "planar_stations",
                                            "route"};
  return layers;
}

struct RenderSpec {
  std::set<std::string> layers = all_layers();
  double scale = 0.0;  ///< px per metre; <= 0 fits the map into 800 px
};

struct RenderInput {
  const Scene& scene;
  const NoDippingZone& zone;
  std::vector<Vec2> candidates;
  const FlightPlan& flight;
};

/// Deterministic SVG of the map and plan; the route is the only polyline.
std::string render_svg(const RenderInput& in, const RenderSpec& spec = {});

/// Output colours.
inline constexpr const char* kDippingColor = "#d62728";
inline constexpr const char* kPlanarColor = "#1f77b4";

}  // namespace dipplan
