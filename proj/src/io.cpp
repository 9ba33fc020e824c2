#include "dipplan/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "dipplan/error.hpp"

namespace dipplan {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string num(double v) {
  std::string s = fmt("%.2f", v);
  return s == "-0.00" ? "0.00" : s;
}

const json& field(const json& doc, const std::string& key, const std::string& pointer) {
  if (!doc.is_object() || !doc.contains(key)) throw InputError("missing field", pointer + "/" + key);
  return doc.at(key);
}

double number(const json& v, const std::string& pointer) {
  if (!v.is_number()) throw InputError("expected a number", pointer);
  return v.get<double>();
}

Vec3 vec3(const json& v, const std::string& pointer) {
  if (!v.is_array() || v.size() != 3) throw InputError("expected [x, y, z]", pointer);
  return {number(v[0], pointer + "/0"), number(v[1], pointer + "/1"), number(v[2], pointer + "/2")};
}

json to_json(Vec3 p) { return {p.x, p.y, p.z}; }

const char* kind_name(HoverGroup::Kind k) {
  return k == HoverGroup::Kind::Dipping ? "dipping" : "planar";
}

}  // namespace

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write file " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw InputError("cannot write file " + path.string());
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

SurfaceRef parse_surface_name(std::string_view name, const std::string& pointer) {
  if (name == "ground") return {SurfaceKind::Ground, 0};
  auto indexed = [&](std::string_view prefix, SurfaceKind kind) -> std::optional<SurfaceRef> {
    if (name.substr(0, prefix.size()) != prefix) return std::nullopt;
    const std::string rest(name.substr(prefix.size()));
    if (rest.empty() || !std::all_of(rest.begin(), rest.end(), ::isdigit))
      throw InputError("malformed surface name '" + std::string(name) + "'", pointer);
    return SurfaceRef{kind, std::stoi(rest)};
  };
  if (auto r = indexed("facade:", SurfaceKind::Facade)) return *r;
  if (auto r = indexed("roof:", SurfaceKind::Roof)) return *r;
  throw InputError("unknown surface name '" + std::string(name) + "'", pointer);
}

json flightplan_to_json(const FlightPlan& plan) {
  json wps = json::array();
  for (const Waypoint& w : plan.waypoints) {
    json caps = json::array();
    for (const CaptureRecord& c : w.captures)
      caps.push_back({{"yaw_deg", c.yaw_deg}, {"pitch_deg", c.pitch_deg}, {"target", surface_name(c.target)}});
    wps.push_back({{"position", to_json(w.position)},
                   {"kind", kind_name(w.kind)},
                   {"source", w.source},
                   {"captures", caps}});
  }
  json legs = json::array();
  for (const auto& leg : plan.legs) {
    json line = json::array();
    for (Vec3 p : leg) line.push_back(to_json(p));
    legs.push_back(line);
  }
  return {{"waypoints", wps}, {"legs", legs}, {"trajectory_m", plan.trajectory_m}};
}

FlightPlan flightplan_from_json(const json& doc) {
  FlightPlan plan;
  const json& wps = field(doc, "waypoints", "");
  if (!wps.is_array()) throw InputError("expected an array", "/waypoints");
  for (std::size_t i = 0; i < wps.size(); ++i) {
    const std::string ptr = "/waypoints/" + std::to_string(i);
    Waypoint w;
    w.position = vec3(field(wps[i], "position", ptr), ptr + "/position");
    const json& kind = field(wps[i], "kind", ptr);
    if (kind == "dipping") w.kind = HoverGroup::Kind::Dipping;
    else if (kind == "planar") w.kind = HoverGroup::Kind::Planar;
    else throw InputError("kind must be 'dipping' or 'planar'", ptr + "/kind");
    if (wps[i].contains("source")) {
      if (!wps[i]["source"].is_number_integer()) throw InputError("expected an integer", ptr + "/source");
      w.source = wps[i]["source"].get<int>();
    }
    const json& caps = field(wps[i], "captures", ptr);
    if (!caps.is_array()) throw InputError("expected an array", ptr + "/captures");
    for (std::size_t j = 0; j < caps.size(); ++j) {
      const std::string cp = ptr + "/captures/" + std::to_string(j);
      CaptureRecord c;
      c.yaw_deg = number(field(caps[j], "yaw_deg", cp), cp + "/yaw_deg");
      c.pitch_deg = number(field(caps[j], "pitch_deg", cp), cp + "/pitch_deg");
      if (!(c.yaw_deg >= 0.0 && c.yaw_deg < 360.0)) throw InputError("yaw must lie in [0, 360)", cp + "/yaw_deg");
      if (!(c.pitch_deg >= -90.0 && c.pitch_deg <= 0.0)) throw InputError("pitch must lie in [-90, 0]", cp + "/pitch_deg");
      const json& t = field(caps[j], "target", cp);
      if (!t.is_string()) throw InputError("expected a string", cp + "/target");
      c.target = parse_surface_name(t.get<std::string>(), cp + "/target");
      w.captures.push_back(c);
    }
    plan.waypoints.push_back(std::move(w));
  }
  if (doc.contains("legs")) {
    const json& legs = doc["legs"];
    if (!legs.is_array()) throw InputError("expected an array", "/legs");
    for (std::size_t i = 0; i < legs.size(); ++i) {
      std::vector<Vec3> line;
      for (std::size_t j = 0; j < legs[i].size(); ++j)
        line.push_back(vec3(legs[i][j], "/legs/" + std::to_string(i) + "/" + std::to_string(j)));
      plan.legs.push_back(std::move(line));
    }
  } else {
    for (std::size_t i = 1; i < plan.waypoints.size(); ++i)
      plan.legs.push_back({plan.waypoints[i - 1].position, plan.waypoints[i].position});
  }
  if (!plan.waypoints.empty() && plan.legs.size() != plan.waypoints.size() - 1)
    throw InputError("expected one leg between consecutive waypoints", "/legs");
  if (doc.contains("trajectory_m")) {
    plan.trajectory_m = number(doc["trajectory_m"], "/trajectory_m");
  } else {
    for (const auto& leg : plan.legs) plan.trajectory_m += polyline_length(leg);
  }
  return plan;
}

std::string flightplan_csv(const FlightPlan& plan) {
  std::string out = "x_m,y_m,z_m,yaw_deg,pitch_deg,capture\n";
  for (const Waypoint& w : plan.waypoints)
    for (const CaptureRecord& c : w.captures) {
      char row[160];
      std::snprintf(row, sizeof row, "%.3f,%.3f,%.3f,%.3f,%.3f,true\n", w.position.x, w.position.y,
                    w.position.z, c.yaw_deg, c.pitch_deg);
      out += row;
    }
  return out;
}

json quality_to_json(const QualityReport& r) {
  json facades = json::array();
  for (const FacadeReport& f : r.facades)
    facades.push_back({{"facade", f.facade},
                       {"observable", f.observable},
                       {"q_s", f.quality.q_s},
                       {"q_d", f.quality.q_d},
                       {"q_u", f.quality.q_u},
                       {"q_c", f.quality.q_c},
                       {"total", f.quality.total},
                       {"views", f.quality.n_views},
                       {"mean_view_q_d", f.mean_view_q_d},
                       {"consistency", f.consistency}});
  json planes = json::array();
  for (const PlaneReport& p : r.planes)
    planes.push_back({{"plane", surface_name(p.plane)},
                      {"samples", p.samples},
                      {"q_u", p.quality.q_u},
                      {"q_c", p.quality.q_c},
                      {"total", p.quality.total},
                      {"views", p.quality.n_views}});
  return {{"facades", facades},
          {"planes", planes},
          {"reconstructability",
           {{"samples", r.recon.size()},
            {"min", r.recon_min},
            {"below_threshold", r.recon_below_tau},
            {"histogram", r.histogram}}},
          {"mean_view_q_d", r.mean_view_q_d},
          {"images", r.images},
          {"hover", r.hovers},
          {"trajectory_m", r.trajectory_m},
          {"unsafe_waypoints", r.unsafe_waypoints}};
}

json summary_to_json(const PlanSummary& s) {
  return {{"images", s.images}, {"hover", s.hover}, {"trajectory_m", s.trajectory_m}};
}

json dipping_to_json(const DippingPlan& plan, const LiftedDipping& lifted) {
  json dirs = json::array();
  for (std::size_t f = 0; f < plan.directions.size(); ++f) {
    if (plan.directions[f])
      dirs.push_back({{"facade", f}, {"yaw_deg", yaw_of(*plan.directions[f])}});
    else
      dirs.push_back({{"facade", f}, {"yaw_deg", nullptr}});
  }
  json points = json::array();
  for (const DippingPoint& p : plan.points)
    points.push_back({{"position", {p.position.x, p.position.y}}, {"facades", p.facades}, {"grid_index", p.grid_index}});
  json hovers = json::array();
  for (const HoverGroup& g : lifted.hovers) {
    json caps = json::array();
    for (const Capture& c : g.captures)
      caps.push_back({{"yaw_deg", c.view.yaw_deg}, {"pitch_deg", c.view.pitch_deg}, {"facade", c.target.index}});
    hovers.push_back({{"position", to_json(g.position)}, {"point", g.source}, {"views", caps}});
  }
  return {{"candidates", plan.candidate_count},
          {"directions", dirs},
          {"points", points},
          {"hovers", hovers},
          {"analytic_cost", lifted.analytic_cost},
          {"merged_pairs", lifted.merged_pairs}};
}

json planar_to_json(const PlanarPlan& plan, double tilt_deg) {
  json stations = json::array();
  for (const PlanarStation& s : plan.stations) {
    json views = json::array();
    for (const View3D& v : station_views(s, tilt_deg))
      views.push_back({{"yaw_deg", v.yaw_deg}, {"pitch_deg", v.pitch_deg}});
    stations.push_back({{"position", to_json(s.position)}, {"views", views}});
  }
  return {{"step", {plan.step.x, plan.step.y}},
          {"grid_stations", plan.grid_count},
          {"densified", plan.densified},
          {"repaired", plan.repaired},
          {"removed", plan.optimization.removed},
          {"moved", plan.optimization.moved},
          {"stations", stations}};
}

std::string histogram_csv(const QualityReport& r) {
  std::string out = "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < r.histogram.size(); ++i) {
    const double lo = 0.1 * static_cast<double>(i);
    const std::string hi = i + 1 == r.histogram.size() ? "inf" : fmt("%.1f", lo + 0.1);
    out += fmt("%.1f", lo) + "," + hi + "," + std::to_string(r.histogram[i]) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// SVG

std::string render_svg(const RenderInput& in, const RenderSpec& spec) {
  const Box2 box = in.scene.bounds;
  const double margin = 20.0, legend_h = 110.0;
  const double scale =
      spec.scale > 0.0 ? spec.scale : 800.0 / std::max({box.width(), box.height(), 1.0});
  const double w = box.width() * scale + 2 * margin;
  const double h = box.height() * scale + 2 * margin + legend_h;
  auto X = [&](double x) { return num((x - box.lo.x) * scale + margin); };
  auto Y = [&](double y) { return num((box.hi.y - y) * scale + margin); };
  auto points = [&](const Ring& r) {
    std::string s;
    for (std::size_t i = 0; i < r.size(); ++i) s += (i ? " " : "") + X(r[i].x) + "," + Y(r[i].y);
    return s;
  };
  auto on = [&](const char* layer) { return spec.layers.count(layer) > 0; };

  std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + num(w) + "\" height=\"" + num(h) + "\" fill=\"#ffffff\"/>\n";

  if (on("zone")) {
    svg += "<g id=\"zone\" fill=\"#fdebd0\" fill-opacity=\"0.6\" stroke=\"#e67e22\" stroke-dasharray=\"4 3\">\n";
    for (const auto& poly : in.zone.polygons()) {
      svg += "<polygon points=\"" + points(poly.outer) + "\"/>\n";
      for (const Ring& hole : poly.holes)
        svg += "<polygon points=\"" + points(hole) + "\" fill=\"#ffffff\"/>\n";
    }
    svg += "</g>\n";
  }
  if (on("map")) {
    svg += "<g id=\"map\" fill=\"#bdbdbd\" stroke=\"#424242\">\n";
    for (const Building& b : in.scene.buildings)
      svg += "<polygon points=\"" + points(b.ring) + "\"><title>" + b.id + "</title></polygon>\n";
    svg += "</g>\n";
  }
  if (on("candidates")) {
    svg += "<g id=\"candidates\" fill=\"#9e9e9e\">\n";
    for (Vec2 c : in.candidates)
      if (box.contains(c)) svg += "<circle cx=\"" + X(c.x) + "\" cy=\"" + Y(c.y) + "\" r=\"0.8\"/>\n";
    svg += "</g>\n";
  }

  // Dipping points with their capture directions.
  std::map<std::pair<double, double>, std::set<double>> dipping;
  for (const Waypoint& wp : in.flight.waypoints)
    if (wp.kind == HoverGroup::Kind::Dipping)
      for (const CaptureRecord& c : wp.captures) dipping[{wp.position.x, wp.position.y}].insert(c.yaw_deg);
  if (on("directions")) {
    svg += std::string("<g id=\"directions\" stroke=\"") + kDippingColor + "\" stroke-width=\"1.2\">\n";
    for (const auto& [p, yaws] : dipping)
      for (double yaw : yaws) {
        const Vec2 d = direction_of_yaw(yaw);
        const double len = 14.0 / scale;
        svg += "<line x1=\"" + X(p.first) + "\" y1=\"" + Y(p.second) + "\" x2=\"" + X(p.first + d.x * len) +
               "\" y2=\"" + Y(p.second + d.y * len) + "\"/>\n";
      }
    svg += "</g>\n";
  }
  if (on("dipping_points")) {
    svg += std::string("<g id=\"dipping_points\" fill=\"") + kDippingColor + "\">\n";
    for (const auto& [p, yaws] : dipping)
      svg += "<circle cx=\"" + X(p.first) + "\" cy=\"" + Y(p.second) + "\" r=\"3.5\"/>\n";
    svg += "</g>\n";
  }
  if (on("planar_stations")) {
    svg += std::string("<g id=\"planar_stations\" fill=\"") + kPlanarColor + "\">\n";
    for (const Waypoint& wp : in.flight.waypoints)
      if (wp.kind == HoverGroup::Kind::Planar)
        svg += "<rect x=\"" + num((wp.position.x - box.lo.x) * scale + margin - 3.0) + "\" y=\"" +
               num((box.hi.y - wp.position.y) * scale + margin - 3.0) + "\" width=\"6.00\" height=\"6.00\"/>\n";
    svg += "</g>\n";
  }
  if (on("route") && !in.flight.waypoints.empty()) {
    std::vector<Vec2> line{in.flight.waypoints.front().position.xy()};
    for (const auto& leg : in.flight.legs)
      for (Vec3 p : leg)
        if (!(line.back() == p.xy())) line.push_back(p.xy());
    std::string pts;
    for (std::size_t i = 0; i < line.size(); ++i) pts += (i ? " " : "") + X(line[i].x) + "," + Y(line[i].y);
    svg += "<polyline id=\"route\" points=\"" + pts +
           "\" fill=\"none\" stroke=\"#2e7d32\" stroke-width=\"1.0\" stroke-opacity=\"0.8\"/>\n";
  }

  // Legend.
  struct Entry {
    const char* layer;
    const char* color;
    const char* label;
  };
  const Entry entries[] = {{"map", "#bdbdbd", "building"},
                           {"zone", "#e67e22", "no-dipping zone"},
                           {"dipping_points", kDippingColor, "dipping view"},
                           {"planar_stations", kPlanarColor, "planar view"},
                           {"route", "#2e7d32", "route"}};
  double ly = h - legend_h + 10.0;
  svg += "<g id=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
  for (const Entry& e : entries) {
    if (!on(e.layer)) continue;
    svg += "<rect x=\"" + num(margin) + "\" y=\"" + num(ly) + "\" width=\"12.00\" height=\"12.00\" fill=\"" +
           e.color + "\"/>\n";
    svg += "<text x=\"" + num(margin + 18.0) + "\" y=\"" + num(ly + 10.0) + "\">" + e.label + "</text>\n";
    ly += 18.0;
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

}  // namespace dipplan
