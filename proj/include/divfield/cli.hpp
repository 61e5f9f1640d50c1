#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "divfield/analysis.hpp"
#include "divfield/ensemble.hpp"
#include "divfield/fragment.hpp"
#include "divfield/io.hpp"
#include "divfield/render.hpp"
#include "divfield/smoothing.hpp"

namespace divfield::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerificationFailed = 1;
inline constexpr int kExitUsage = 2;

/// Defaults read from an optional key=value file; flags override them.
struct Config {
  std::optional<int> n;
  std::string output_dir;
  unsigned workers = 1;
};

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  Config cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "n") {
        cfg.n = std::stoi(value);
      } else if (key == "output_dir" || key == "outdir") {
        cfg.output_dir = value;
      } else if (key == "workers") {
        cfg.workers = static_cast<unsigned>(std::stoul(value));
      } else {
        throw UsageError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
      }
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const UsageError*>(&e) != nullptr) throw;
      throw UsageError(path + ":" + std::to_string(lineno) + ": bad value for '" + key + "'");
    }
  }
  return cfg;
}

inline Axis parse_axis(const std::string& s) {
  if (s == "h" || s == "H") return Axis::H;
  if (s == "v" || s == "V") return Axis::V;
  throw UsageError("axis must be h or v, got '" + s + "'");
}

inline std::vector<std::int64_t> parse_ints(const std::string& s, std::size_t count, const char* what) {
  std::vector<std::int64_t> out;
  std::stringstream ss(s);
  std::string item;
  try {
    while (std::getline(ss, item, ',')) out.push_back(std::stoll(item));
  } catch (const std::logic_error&) {
    throw UsageError(std::string("bad ") + what + " '" + s + "'");
  }
  if (out.size() != count) throw UsageError(std::string("bad ") + what + " '" + s + "'");
  return out;
}

inline std::vector<double> parse_reals(const std::string& s, std::size_t count, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  try {
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  } catch (const std::logic_error&) {
    throw UsageError(std::string("bad ") + what + " '" + s + "'");
  }
  if (out.size() != count) throw UsageError(std::string("bad ") + what + " '" + s + "'");
  return out;
}

inline VertexRect parse_rect(const std::string& s) {
  const auto v = parse_ints(s, 4, "rectangle");
  return {v[0], v[1], v[2], v[3]};
}

inline Shift parse_shift(const std::string& s) {
  const auto v = parse_ints(s, 2, "shift");
  return {v[0], v[1]};
}

namespace detail {

inline std::string resolve(const Config& cfg, const std::string& path) {
  if (cfg.output_dir.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(cfg.output_dir) / path).string();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  if (!out) throw IoError("failed writing " + path);
}

// Pulls "--config PATH" / "--config=PATH" out of argv before the real parse.
inline std::optional<std::string> find_config(std::vector<std::string>& args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      std::string path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      return path;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      std::string path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      return path;
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Runs one CLI invocation. args[0] is the program name.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  Config cfg;
  try {
    if (const auto path = detail::find_config(args)) cfg = load_config(*path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  CLI::App app{"Stationary integer vector fields on Z^2 with divergence 1: construction and exact laws",
               args.empty() ? "divfield" : args[0]};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  std::string config_path;  // consumed by find_config; declared for --help
  app.add_option("--config", config_path, "key=value defaults file (n, output_dir, workers)");

  int n = cfg.n.value_or(2);
  unsigned workers = cfg.workers;
  app.add_option("--workers", workers, "worker threads for shift enumeration")->capture_default_str();
  const auto level_option = [&](CLI::App* sub) {
    auto* opt = sub->add_option("--n", n, "fragment level");
    if (!cfg.n) opt->required();
  };

  int status = kExitOk;
  std::function<void()> action;

  // build
  std::string json_path;
  auto* build = app.add_subcommand("build", "construct a fragment and print a summary");
  level_option(build);
  build->add_option("--json", json_path, "write the fragment as JSON");
  build->callback([&] {
    action = [&] {
      const auto frag = build_fragment(n);
      out << "level " << frag->level() << " side " << frag->side() << " root " << frag->root() << " tree_edges "
          << frag->tree_flow().size() << " root_divergence " << -root_outflow(n) << '\n';
      if (!json_path.empty()) detail::write_file(detail::resolve(cfg, json_path), to_json(*frag).dump(1) + "\n");
    };
  });

  // verify
  auto* verify = app.add_subcommand("verify", "check fragment invariants and copy consistency");
  level_option(verify);
  verify->callback([&] {
    action = [&] {
      const auto check = check_fragment(*build_fragment(n));
      json report = {{"level", check.level},
                     {"vertices", check.vertices},
                     {"tree_edges", check.tree_edges},
                     {"spanning_tree", check.spanning_tree},
                     {"root_divergence", check.root_divergence},
                     {"non_root_vertices_with_divergence_not_1", check.bad_vertices},
                     {"max_flow", check.max_flow},
                     {"max_flow_only_on_root_edge", check.max_on_root_edge && check.max_flow_edges == 1}};
      bool ok = check.passed();
      if (n >= 2) {
        const auto consistency = verify_consistency(n);
        report["consistency"] = to_json(consistency);
        ok = ok && consistency.passed();
      }
      report["passed"] = ok;
      out << report.dump(1) << '\n';
      if (!ok) status = kExitVerificationFailed;
    };
  });

  // consistency
  auto* consistency = app.add_subcommand("consistency", "compare each quadrant copy with the previous level");
  level_option(consistency);
  consistency->callback([&] {
    action = [&] {
      const auto report = verify_consistency(n);
      out << to_json(report).dump(1) << '\n';
      if (!report.passed()) status = kExitVerificationFailed;
    };
  });

  // divlaw
  bool as_json = false;
  auto* divlaw = app.add_subcommand("divlaw", "exact law of the divergence at a vertex");
  level_option(divlaw);
  divlaw->add_flag("--json", as_json, "print JSON instead of text");
  divlaw->callback([&] {
    action = [&] {
      const auto law = div_law(n);
      out << (as_json ? to_json(law).dump() : format_law(law)) << '\n';
    };
  });

  // edgelaw
  std::string axis_text = "h";
  auto* edgelaw = app.add_subcommand("edgelaw", "exact law of the field on one edge");
  level_option(edgelaw);
  edgelaw->add_option("--axis", axis_text, "h or v")->required();
  edgelaw->add_flag("--json", as_json, "print JSON instead of text");
  edgelaw->callback([&] {
    action = [&] {
      const auto law = edge_law(n, parse_axis(axis_text));
      out << (as_json ? to_json(law).dump() : format_law(law)) << '\n';
    };
  });

  // windowlaw
  std::string edges_text;
  auto* windowlaw = app.add_subcommand("windowlaw", "exact joint law on a window of edges");
  level_option(windowlaw);
  windowlaw->add_option("--edges", edges_text, "edges as x,y,D;x,y,D (D in E,N,W,S)")->required();
  windowlaw->callback([&] {
    action = [&] { out << to_json(window_law(n, parse_edge_list(edges_text), workers)).dump(1) << '\n'; };
  });

  // tail
  std::int64_t threshold = 0;
  auto* tail = app.add_subcommand("tail", "Pr[|v| > C] on one edge");
  level_option(tail);
  tail->add_option("--axis", axis_text, "h or v")->required();
  tail->add_option("--c", threshold, "threshold C >= 0")->required();
  tail->callback([&] {
    action = [&] { out << tail_prob(n, parse_axis(axis_text), threshold) << '\n'; };
  });

  // tail bound report
  int k_max = 4;
  int n_max = 10;
  auto* lemma2 = app.add_subcommand("lemma2", "check the tail bound 2*2^-k for all levels up to nmax");
  lemma2->add_option("--kmax", k_max, "largest k")->required();
  lemma2->add_option("--nmax", n_max, "largest level")->required();
  lemma2->callback([&] {
    action = [&] {
      const auto report = tail_report(k_max, n_max);
      out << to_json(report).dump(1) << '\n';
      if (!report.passed()) status = kExitVerificationFailed;
    };
  });

  // moment
  auto* moment = app.add_subcommand("moment", "E sqrt|v| on one edge");
  level_option(moment);
  moment->add_option("--axis", axis_text, "h or v")->required();
  moment->callback([&] {
    action = [&] { out << to_json(half_moment(n, parse_axis(axis_text))).dump(1) << '\n'; };
  });

  // converge
  std::string window_text;
  int n_from = 2;
  int n_to = 9;
  auto* converge = app.add_subcommand("converge", "total-variation distances between consecutive levels");
  converge->add_option("--window", window_text, "edges as x,y,D;x,y,D")->required();
  converge->add_option("--from", n_from, "first level")->required();
  converge->add_option("--to", n_to, "last level")->required();
  converge->callback([&] {
    action = [&] {
      out << to_json(convergence_table(parse_edge_list(window_text), n_from, n_to, workers)).dump(1) << '\n';
    };
  });

  // oned
  int period = 1;
  int bound = 1;
  auto* oned = app.add_subcommand("oned", "exhaustive 1-D periodic check");
  oned->add_option("--period", period, "period P <= 8")->required();
  oned->add_option("--bound", bound, "value bound B <= 3")->required();
  oned->callback([&] {
    action = [&] {
      const auto verdict = one_d_check(period, bound);
      out << to_json(verdict).dump(1) << '\n';
      if (!verdict.passed()) status = kExitVerificationFailed;
    };
  });

  // sample
  std::uint64_t seed = 0;
  std::string rect_text;
  std::string csv_path;
  auto* sample = app.add_subcommand("sample", "draw one shift and print the edges around a rectangle");
  level_option(sample);
  sample->add_option("--seed", seed, "generator seed")->required();
  sample->add_option("--rect", rect_text, "X0,Y0,X1,Y1 (inclusive vertex range)")->required();
  sample->add_option("--csv", csv_path, "write CSV here instead of stdout");
  sample->callback([&] {
    action = [&] {
      const auto patch = sample_patch(n, seed, parse_rect(rect_text));
      std::ostringstream csv;
      write_patch_csv(csv, patch);
      if (csv_path.empty()) {
        out << csv.str();
      } else {
        detail::write_file(detail::resolve(cfg, csv_path), csv.str());
        out << "shift " << patch.shift.a << ',' << patch.shift.b << '\n';
      }
    };
  });

  // smooth
  std::string shift_text = "0,0";
  std::string point_text;
  auto* smooth = app.add_subcommand("smooth", "evaluate the box-smoothed field at a point");
  level_option(smooth);
  smooth->add_option("--shift", shift_text, "A,B")->capture_default_str();
  smooth->add_option("--point", point_text, "X,Y")->required();
  smooth->callback([&] {
    action = [&] {
      const RecursiveFragment frag(n);
      const PeriodicField<RecursiveFragment> field(frag, parse_shift(shift_text));
      const auto p = parse_reals(point_text, 2, "point");
      const ContinuousPoint pt{p[0], p[1]};
      const auto s = smooth_eval(field, pt);
      json j = {{"x", pt.x}, {"y", pt.y}, {"h", s.h}, {"v", s.v}};
      j["div"] = on_half_integer(pt.x) || on_half_integer(pt.y) ? json(nullptr) : json(smooth_div(field, pt));
      out << j.dump() << '\n';
    };
  });

  // raster
  std::string region_text;
  int resolution = 4;
  auto* raster_cmd = app.add_subcommand("raster", "sample the smoothed field and its divergence on a grid (CSV)");
  level_option(raster_cmd);
  raster_cmd->add_option("--shift", shift_text, "A,B")->capture_default_str();
  raster_cmd->add_option("--region", region_text, "X0,Y0,X1,Y1 (real coordinates)")->required();
  raster_cmd->add_option("--res", resolution, "samples per unit length")->capture_default_str();
  raster_cmd->add_option("--csv", csv_path, "write CSV here instead of stdout");
  raster_cmd->callback([&] {
    action = [&] {
      const RecursiveFragment frag(n);
      const PeriodicField<RecursiveFragment> field(frag, parse_shift(shift_text));
      const auto r = parse_reals(region_text, 4, "region");
      std::ostringstream csv;
      write_raster_csv(csv, raster(field, r[0], r[1], r[2], r[3], resolution));
      if (csv_path.empty()) {
        out << csv.str();
      } else {
        detail::write_file(detail::resolve(cfg, csv_path), csv.str());
      }
    };
  });

  // render
  std::string target_text;
  std::string out_path;
  double arrow_scale = 1.0;
  auto* render = app.add_subcommand("render", "write an SVG of a fragment, tiling, divergence map or smoothed field");
  level_option(render);
  render->add_option("--target", target_text, "fragment|periodic|divergence|smoothed")->required();
  auto* shift_opt = render->add_option("--shift", shift_text, "A,B");
  render->add_option("--rect", rect_text, "X0,Y0,X1,Y1");
  render->add_option("--out", out_path, "output SVG path")->required();
  render->add_option("--arrow-scale", arrow_scale, "arrow/cell scale")->capture_default_str();
  render->callback([&] {
    action = [&] {
      RenderSpec spec;
      spec.target = parse_render_target(target_text);
      spec.level = n;
      if (shift_opt->count() > 0) spec.shift = parse_shift(shift_text);
      if (!rect_text.empty()) spec.rect = parse_rect(rect_text);
      spec.out_path = detail::resolve(cfg, out_path);
      spec.arrow_scale = arrow_scale;
      render_svg(spec);
      out << "wrote " << spec.out_path << '\n';
    };
  });

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (action) action();
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::logic_error& e) {
    // Bounds, capacity, usage and precondition errors all derive from logic_error.
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return status;
}

}  // namespace divfield::cli
