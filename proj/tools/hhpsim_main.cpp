#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hhpsim/analysis.hpp"
#include "hhpsim/fixtures.hpp"
#include "hhpsim/json_io.hpp"

namespace fs = std::filesystem;
using namespace hhpsim;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_invalid = 1;
constexpr int exit_unmappable = 2;
constexpr int exit_internal = 3;

njson load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  njson j;
  in >> j;
  return j;
}

machine_config resolve_architecture(const std::string& ref) {
  if (auto m = find_architecture(ref)) return *m;
  if (fs::exists(ref)) return machine_from_json(load_json(ref));
  throw std::runtime_error("unknown architecture '" + ref +
                           "' (not a fixture, not a file)");
}

// a workload is an inline spec, a builtin fixture, or an explicit cascade file
struct workload_source {
  bool from_file = false;
  transformer_spec spec;
  cascade file_casc;
  std::string label;
};

workload_source resolve_workload(const run_spec& rs) {
  workload_source ws;
  if (rs.workload_inline) {
    ws.spec = *rs.workload_inline;
    ws.label = "inline";
    return ws;
  }
  if (auto w = find_workload(rs.workload_name)) {
    ws.spec = *w;
    ws.label = rs.workload_name;
    return ws;
  }
  if (fs::exists(rs.workload_name)) {
    ws.from_file = true;
    ws.file_casc = cascade_from_json(load_json(rs.workload_name));
    ws.label = ws.file_casc.name;
    return ws;
  }
  throw std::runtime_error("unknown workload '" + rs.workload_name +
                           "' (not a fixture, not a file)");
}

cascade cascade_at_scale(const workload_source& ws, double sc) {
  if (ws.from_file) {
    if (sc != 1.0)
      throw std::runtime_error(
          "scale applies only to generated workloads, not cascade files");
    return ws.file_casc;
  }
  return build_cascade(scaled(ws.spec, sc));
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
}

struct cli_common {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool keep_going = false;
  double bucket_cycles = 0.0;
  std::string energy_table_path;
};

void add_common(CLI::App* cmd, cli_common& c) {
  cmd->add_option("--config", c.config_path, "run configuration JSON")
      ->required();
  cmd->add_option("--out", c.out_dir, "output directory (default .)");
  cmd->add_option("--seed", c.seed, "override the search seed")
      ->each([&](const std::string&) { c.seed_set = true; });
  cmd->add_flag("--keep-going", c.keep_going,
                "record per-config failures and continue");
  cmd->add_option("--bucket-cycles", c.bucket_cycles,
                  "timeline bucket width in cycles");
  cmd->add_option("--energy-table", c.energy_table_path,
                  "JSON map of level name to energy/word ('mac' for MACs)");
}

run_options make_options(const run_spec& rs, const cli_common& c) {
  run_options opt;
  opt.budget = rs.budget;
  if (c.seed_set) opt.budget.seed = c.seed;
  opt.part = rs.part;
  opt.mac_energy = rs.mac_energy;
  opt.keep_going = c.keep_going;
  opt.bucket_cycles = c.bucket_cycles;
  if (!c.energy_table_path.empty()) {
    njson ej = load_json(c.energy_table_path);
    for (const auto& [k, v] : ej.items()) {
      if (k == "mac")
        opt.mac_energy = v.get<double>();
      else
        opt.energy_table[k] = v.get<double>();
    }
  }
  return opt;
}

int classify_failure(const compare_report& rep) {
  bool any_bad = false, all_unmappable = true;
  for (const auto& r : rep.results) {
    if (r.ok) continue;
    any_bad = true;
    for (const auto& e : r.errors)
      if (e.find("unmappable") == std::string::npos) all_unmappable = false;
    if (r.errors.empty()) all_unmappable = false;
  }
  if (!any_bad) return exit_ok;
  return all_unmappable ? exit_unmappable : exit_invalid;
}

void print_summary(const compare_report& rep) {
  for (const auto& r : rep.results) {
    std::cout << r.config_name << ": ";
    if (!r.ok) {
      std::cout << "FAILED";
      for (const auto& e : r.errors) std::cout << "\n    " << e;
      std::cout << "\n";
      continue;
    }
    std::cout << hier_name(r.cls.hier) << "/" << het_name(r.cls.het)
              << "  makespan " << r.makespan << " cyc, energy "
              << r.total_energy;
    auto sp = rep.speedup_vs_baseline.find(r.config_name);
    if (sp != rep.speedup_vs_baseline.end())
      std::cout << ", speedup x" << sp->second;
    std::cout << "\n";
  }
}

int cmd_run(const cli_common& c) {
  run_spec rs = run_spec_from_json(load_json(c.config_path));
  workload_source ws = resolve_workload(rs);
  cascade casc = cascade_at_scale(ws, rs.scale);
  std::vector<machine_config> cfgs;
  for (const auto& ref : rs.architecture_refs)
    cfgs.push_back(resolve_architecture(ref));
  std::string baseline = rs.baseline.empty() ? cfgs.front().name : rs.baseline;
  run_options opt = make_options(rs, c);

  compare_report rep = compare_configs(cfgs, casc, baseline, opt);

  fs::create_directories(c.out_dir);
  write_file(fs::path(c.out_dir) / "report.json",
             report_to_json(rep, casc).dump(2) + "\n");
  write_file(fs::path(c.out_dir) / "summary.csv", summary_csv(rep, ws.label));
  write_file(fs::path(c.out_dir) / "timeline.csv", timeline_csv(rep));
  print_summary(rep);
  int rc = classify_failure(rep);
  return c.keep_going ? exit_ok : rc;
}

int cmd_sweep(const cli_common& c) {
  run_spec rs = run_spec_from_json(load_json(c.config_path));
  if (rs.sweep.empty())
    throw std::runtime_error("sweep: config has no sweep axes");
  if (rs.sweep.points() > 1024)
    throw std::runtime_error("sweep: more than 1024 points");
  workload_source ws = resolve_workload(rs);
  std::vector<machine_config> base_cfgs;
  for (const auto& ref : rs.architecture_refs)
    base_cfgs.push_back(resolve_architecture(ref));
  std::string baseline =
      rs.baseline.empty() ? base_cfgs.front().name : rs.baseline;
  run_options base_opt = make_options(rs, c);

  auto axis = [](const std::vector<double>& v, double def) {
    return v.empty() ? std::vector<double>{def} : v;
  };
  const memory_level* dram = base_cfgs.front().level_at(0);
  std::vector<double> bws =
      axis(rs.sweep.dram_bw_words, dram ? dram->read_bw_words : 256.0);
  std::vector<double> lows = axis(rs.sweep.bw_fraction_low, -1.0);
  std::vector<double> scales = axis(rs.sweep.scale, rs.scale);

  std::vector<sweep_point> points;
  cascade casc;  // last cascade built, reused for the json meta
  for (double bw : bws)
    for (double low : lows)
      for (double sc : scales) {
        sweep_point pt;
        pt.dram_bw_words = bw;
        pt.bw_fraction_low = low;
        pt.scale = sc;
        casc = cascade_at_scale(ws, sc);
        std::vector<machine_config> cfgs = base_cfgs;
        for (auto& cfg : cfgs)
          for (auto& lv : cfg.levels)
            if (lv.depth == 0) {
              lv.read_bw_words = bw;
              lv.write_bw_words = bw;
            }
        run_options opt = base_opt;
        if (low >= 0) opt.part.bw_fraction_low = low;
        pt.rep = compare_configs(cfgs, casc, baseline, opt);
        points.push_back(std::move(pt));
      }

  fs::create_directories(c.out_dir);
  write_file(fs::path(c.out_dir) / "report.json",
             sweep_to_json(points, casc).dump(2) + "\n");
  write_file(fs::path(c.out_dir) / "sweep.csv", sweep_csv(points));
  std::cout << points.size() << " sweep points written\n";
  int rc = exit_ok;
  for (const auto& pt : points) {
    int prc = classify_failure(pt.rep);
    if (prc != exit_ok) rc = prc;
  }
  return c.keep_going ? exit_ok : rc;
}

int cmd_list_fixtures() {
  std::cout << "architectures:\n";
  for (const auto& m : builtin_architectures()) {
    classification cls = classify(m);
    std::cout << "  " << m.name << "  (" << hier_name(cls.hier) << "/"
              << het_name(cls.het) << ", " << m.subs.size() << " sub";
    if (m.subs.size() != 1) std::cout << "s";
    std::cout << ", " << m.total_pes() << " PEs)\n";
  }
  std::cout << "workloads:\n";
  for (const auto& w : builtin_workloads()) {
    std::cout << "  " << w.name << "  (";
    if (w.spec.kind == transformer_spec::model_kind::encoder)
      std::cout << "encoder d=" << w.spec.d_model << " seq=" << w.spec.seq_len;
    else
      std::cout << "decoder d=" << w.spec.d_model
                << " prefill=" << w.spec.prefill_len
                << " decode=" << w.spec.decode_len << " stride="
                << w.spec.decode_stride;
    std::cout << ")\n";
  }
  return exit_ok;
}

int cmd_validate(const std::string& config_path, const std::string& arch_ref) {
  std::vector<std::string> errs;
  if (!arch_ref.empty()) {
    machine_config m = resolve_architecture(arch_ref);
    errs = validate(m);
  } else {
    run_spec rs = run_spec_from_json(load_json(config_path));
    cascade casc = cascade_at_scale(resolve_workload(rs), rs.scale);
    auto werrs = validate(casc);
    errs.insert(errs.end(), werrs.begin(), werrs.end());
    for (const auto& ref : rs.architecture_refs) {
      machine_config m = resolve_architecture(ref);
      for (const auto& e : validate(m)) errs.push_back(m.name + ": " + e);
    }
  }
  if (errs.empty()) {
    std::cout << "valid\n";
    return exit_ok;
  }
  for (const auto& e : errs) std::cout << e << "\n";
  return exit_invalid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "analytical latency/energy simulator for tiled tensor accelerators"};
  app.require_subcommand(1);

  cli_common run_c, sweep_c;
  CLI::App* run = app.add_subcommand("run", "evaluate one comparison point");
  add_common(run, run_c);
  CLI::App* sweep = app.add_subcommand("sweep", "evaluate a parameter sweep");
  add_common(sweep, sweep_c);
  app.add_subcommand("list-fixtures", "print builtin architectures/workloads");
  std::string v_config, v_arch;
  CLI::App* val = app.add_subcommand("validate", "check configs for violations");
  val->add_option("--config", v_config, "run configuration JSON");
  val->add_option("--arch", v_arch, "architecture fixture name or JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_c);
    if (sweep->parsed()) return cmd_sweep(sweep_c);
    if (app.get_subcommand("list-fixtures")->parsed()) return cmd_list_fixtures();
    if (val->parsed()) {
      if (v_config.empty() && v_arch.empty()) {
        std::cerr << "validate: need --config or --arch\n";
        return exit_invalid;
      }
      return cmd_validate(v_config, v_arch);
    }
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_invalid;
  } catch (const njson::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_invalid;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return exit_internal;
  }
  return exit_internal;
}
