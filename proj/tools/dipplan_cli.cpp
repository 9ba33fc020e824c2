// dipplan command-line front end.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dipplan/error.hpp"
#include "dipplan/io.hpp"
#include "dipplan/pipeline.hpp"

namespace fs = std::filesystem;
using namespace dipplan;

namespace {

struct Inputs {
  std::string scene, camera, config;
};

PlannerConfig load_config(const Inputs& in) {
  PlannerConfig cfg;
  if (!in.config.empty()) cfg = config_from_json(read_json(in.config));
  if (!in.camera.empty()) cfg.camera = camera_from_json(read_json(in.camera));
  cfg.validate();
  return cfg;
}

Scene load_scene(const Inputs& in, const PlannerConfig& cfg) {
  return parse_scene(read_json(in.scene), cfg.d_min);
}

fs::path out_dir(const std::string& flag) {
  fs::path dir = flag;
  if (dir.empty()) {
    const char* env = std::getenv("DIPPLAN_OUT_DIR");
    dir = env && *env ? env : ".";
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InputError("cannot create output directory " + dir.string());
  return dir;
}

std::string summary_table(const PlanSummary& s) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-10s %-8s %-14s\n%-10d %-8d %-14.1f\n", "#images", "#hover",
                "trajectory_m", s.images, s.hover, s.trajectory_m);
  return buf;
}

void add_inputs(CLI::App* cmd, Inputs& in, bool scene_required) {
  auto* s = cmd->add_option("--scene", in.scene, "Scene JSON");
  if (scene_required) s->required();
  cmd->add_option("--camera", in.camera, "Camera JSON");
  cmd->add_option("--config", in.config, "Planner config JSON");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline UAV facade-capture planner with dipping views"};
  app.require_subcommand(1);

  Inputs in;
  std::string out, plan_path, layers;
  bool details = false, deterministic = true, json_out = false, timing = false;
  double scale = 0.0;

  auto* plan_cmd = app.add_subcommand("plan", "Plan a flight for a scene");
  add_inputs(plan_cmd, in, true);
  plan_cmd->add_option("--out", out, "Output directory (default $DIPPLAN_OUT_DIR or .)");
  plan_cmd->add_flag("--details", details, "Also write stage outputs and plan.svg");
  plan_cmd->add_flag("--deterministic", deterministic, "Always on");
  plan_cmd->add_flag("--timing", timing, "Print wall time per stage to stderr");

  auto* eval_cmd = app.add_subcommand("evaluate", "Score an existing flight plan");
  add_inputs(eval_cmd, in, true);
  eval_cmd->add_option("--plan", plan_path, "flightplan.json")->required();
  eval_cmd->add_option("--out", out, "Write quality.json here instead of stdout");

  auto* render_cmd = app.add_subcommand("render", "Render a plan to SVG");
  add_inputs(render_cmd, in, true);
  render_cmd->add_option("--plan", plan_path, "flightplan.json")->required();
  render_cmd->add_option("--out", out, "Output directory (default $DIPPLAN_OUT_DIR or .)");
  render_cmd->add_option("--layers", layers, "Comma-separated layers (default all)");
  render_cmd->add_option("--scale", scale, "Pixels per metre");

  auto* sum_cmd = app.add_subcommand("summary", "Print #images, #hover and trajectory length");
  sum_cmd->add_option("--plan", plan_path, "flightplan.json")->required();
  sum_cmd->add_flag("--json", json_out, "Print summary JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*plan_cmd) {
      const PlannerConfig cfg = load_config(in);
      const Scene scene = load_scene(in, cfg);
      const fs::path dir = out_dir(out);
      const PlanResult res = plan(scene, cfg);
      write_text(dir / "flightplan.json", dump(flightplan_to_json(res.flight)));
      write_text(dir / "flightplan.csv", flightplan_csv(res.flight));
      write_text(dir / "quality.json", dump(quality_to_json(res.quality)));
      write_text(dir / "summary.json", dump(summary_to_json(res.summary)));
      if (details) {
        write_text(dir / "dipping.json", dump(dipping_to_json(res.dipping, res.lifted)));
        write_text(dir / "planar.json", dump(planar_to_json(res.planar, cfg.tilt_deg)));
        write_text(dir / "recon_histogram.csv", histogram_csv(res.quality));
        write_text(dir / "plan.svg", render_svg({scene, res.zone, res.candidates, res.flight}));
      }
      for (const std::string& w : res.warnings) std::cerr << "warning: " << w << "\n";
      if (timing)
        for (const auto& [stage, seconds] : res.stage_seconds)
          std::fprintf(stderr, "%-9s %8.3f s\n", stage.c_str(), seconds);
      std::cout << summary_table(res.summary);
    } else if (*eval_cmd) {
      const PlannerConfig cfg = load_config(in);
      const Scene scene = load_scene(in, cfg);
      const FlightPlan flight = flightplan_from_json(read_json(plan_path));
      const std::string text = dump(quality_to_json(evaluate(flight, scene, cfg)));
      if (out.empty()) std::cout << text;
      else write_text(out, text);
    } else if (*render_cmd) {
      const PlannerConfig cfg = load_config(in);
      const Scene scene = load_scene(in, cfg);
      const FlightPlan flight = flightplan_from_json(read_json(plan_path));
      RenderSpec spec;
      spec.scale = scale;
      if (!layers.empty()) {
        spec.layers.clear();
        std::stringstream ss(layers);
        for (std::string item; std::getline(ss, item, ',');) {
          if (!all_layers().count(item)) throw InputError("unknown layer '" + item + "'");
          spec.layers.insert(item);
        }
      }
      const NoDippingZone zone(scene, cfg.d_min);
      const double d_max = quality_params(cfg).d_max;
      const std::vector<Vec2> candidates =
          grid_sample_candidates(scene, zone, cfg.effective_step(), d_max).points;
      const fs::path dir = out_dir(out);
      write_text(dir / "plan.svg", render_svg({scene, zone, candidates, flight}, spec));
    } else if (*sum_cmd) {
      const FlightPlan flight = flightplan_from_json(read_json(plan_path));
      const PlanSummary s = summarize(flight);
      std::cout << (json_out ? dump(summary_to_json(s)) : summary_table(s));
    }
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const PlanningError& e) {
    std::cerr << "planning error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
