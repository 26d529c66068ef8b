#include "hhpsim/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

namespace hhpsim {

namespace {

void check_keys(const njson& j, const std::string& where,
                std::set<std::string> allowed) {
  if (!j.is_object())
    throw std::runtime_error(where + ": expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k))
      throw std::runtime_error(where + ": unknown key '" + k + "'");
}

template <typename T>
T get_or(const njson& j, const std::string& key, T def) {
  auto it = j.find(key);
  if (it == j.end()) return def;
  return it->get<T>();
}

template <typename T>
T require(const njson& j, const std::string& where, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end())
    throw std::runtime_error(where + ": missing key '" + key + "'");
  return it->get<T>();
}

std::string num(double v) {
  char buf[64];
  // trim integral values so counters stay readable in the CSVs
  if (v == std::floor(v) && std::fabs(v) < 1e15)
    std::snprintf(buf, sizeof buf, "%.0f", v);
  else
    std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

machine_config machine_from_json(const njson& j) {
  check_keys(j, "architecture", {"name", "levels", "sub_accels", "fsm_groups"});
  machine_config m;
  m.name = require<std::string>(j, "architecture", "name");
  for (const auto& lj : require<njson>(j, "architecture", "levels")) {
    check_keys(lj, "level",
               {"name", "depth", "capacity_bytes", "read_bw", "write_bw",
                "energy_per_word", "shared"});
    memory_level lv;
    lv.name = require<std::string>(lj, "level", "name");
    lv.depth = require<int>(lj, "level", "depth");
    lv.capacity_bytes = get_or<double>(lj, "capacity_bytes", 0.0);
    lv.read_bw_words = get_or<double>(lj, "read_bw", 1e18);
    lv.write_bw_words = get_or<double>(lj, "write_bw", 1e18);
    lv.energy_per_word = get_or<double>(lj, "energy_per_word", 0.0);
    lv.shared = get_or<bool>(lj, "shared", true);
    m.levels.push_back(lv);
  }
  for (const auto& sj : require<njson>(j, "architecture", "sub_accels")) {
    check_keys(sj, "sub_accel",
               {"id", "pe_count", "rows", "cols", "attach_depth", "bw_fraction",
                "llb_fraction"});
    sub_accel s;
    s.id = require<std::string>(sj, "sub_accel", "id");
    s.rows = require<std::int64_t>(sj, "sub_accel", "rows");
    s.cols = require<std::int64_t>(sj, "sub_accel", "cols");
    s.pe_count = get_or<std::int64_t>(sj, "pe_count", s.rows * s.cols);
    s.attach_depth = require<int>(sj, "sub_accel", "attach_depth");
    s.bw_fraction = get_or<double>(sj, "bw_fraction", 1.0);
    s.buf_fraction = get_or<double>(sj, "llb_fraction", 1.0);
    m.subs.push_back(s);
  }
  auto it = j.find("fsm_groups");
  if (it != j.end()) {
    for (const auto& gj : *it)
      m.fsm_groups.push_back(gj.get<std::vector<std::string>>());
  } else {
    for (const auto& s : m.subs) m.fsm_groups.push_back({s.id});
  }
  return m;
}

njson machine_to_json(const machine_config& m) {
  njson j;
  j["name"] = m.name;
  j["levels"] = njson::array();
  for (const auto& lv : m.levels)
    j["levels"].push_back({{"name", lv.name},
                           {"depth", lv.depth},
                           {"capacity_bytes", lv.capacity_bytes},
                           {"read_bw", lv.read_bw_words},
                           {"write_bw", lv.write_bw_words},
                           {"energy_per_word", lv.energy_per_word},
                           {"shared", lv.shared}});
  j["sub_accels"] = njson::array();
  for (const auto& s : m.subs)
    j["sub_accels"].push_back({{"id", s.id},
                               {"pe_count", s.pe_count},
                               {"rows", s.rows},
                               {"cols", s.cols},
                               {"attach_depth", s.attach_depth},
                               {"bw_fraction", s.bw_fraction},
                               {"llb_fraction", s.buf_fraction}});
  j["fsm_groups"] = m.fsm_groups;
  return j;
}

transformer_spec workload_from_json(const njson& j) {
  check_keys(j, "workload",
             {"kind", "d_model", "n_heads", "ffn_mult", "n_layers", "seq_len",
              "prefill_len", "decode_len", "decode_stride",
              "include_vector_ops"});
  transformer_spec s;
  std::string kind = require<std::string>(j, "workload", "kind");
  if (kind == "encoder")
    s.kind = transformer_spec::model_kind::encoder;
  else if (kind == "decoder")
    s.kind = transformer_spec::model_kind::decoder;
  else
    throw std::runtime_error("workload: kind must be encoder or decoder");
  s.d_model = require<std::int64_t>(j, "workload", "d_model");
  s.n_heads = get_or<std::int64_t>(j, "n_heads", 16);
  s.ffn_mult = get_or<std::int64_t>(j, "ffn_mult", 4);
  s.n_layers = get_or<int>(j, "n_layers", 1);
  s.seq_len = get_or<std::int64_t>(j, "seq_len", 0);
  s.prefill_len = get_or<std::int64_t>(j, "prefill_len", 0);
  s.decode_len = get_or<std::int64_t>(j, "decode_len", 0);
  s.decode_stride = get_or<std::int64_t>(j, "decode_stride", 1);
  s.include_vector_ops = get_or<bool>(j, "include_vector_ops", false);
  if (s.d_model <= 0 || s.n_heads <= 0 || s.d_model % s.n_heads != 0)
    throw std::runtime_error("workload: d_model must be a positive multiple of n_heads");
  if (s.kind == transformer_spec::model_kind::encoder && s.seq_len <= 0)
    throw std::runtime_error("workload: encoder needs seq_len");
  if (s.kind == transformer_spec::model_kind::decoder &&
      (s.prefill_len <= 0 || s.decode_len <= 0))
    throw std::runtime_error("workload: decoder needs prefill_len and decode_len");
  return s;
}

njson workload_to_json(const transformer_spec& s) {
  njson j;
  j["kind"] = s.kind == transformer_spec::model_kind::encoder ? "encoder"
                                                              : "decoder";
  j["d_model"] = s.d_model;
  j["n_heads"] = s.n_heads;
  j["ffn_mult"] = s.ffn_mult;
  j["n_layers"] = s.n_layers;
  if (s.kind == transformer_spec::model_kind::encoder) {
    j["seq_len"] = s.seq_len;
  } else {
    j["prefill_len"] = s.prefill_len;
    j["decode_len"] = s.decode_len;
    j["decode_stride"] = s.decode_stride;
  }
  j["include_vector_ops"] = s.include_vector_ops;
  return j;
}

cascade cascade_from_json(const njson& j) {
  check_keys(j, "cascade", {"name", "partition_style", "ops"});
  cascade c;
  c.name = require<std::string>(j, "cascade", "name");
  std::string style = get_or<std::string>(j, "partition_style", "intra-cascade");
  if (style == "intra-cascade")
    c.style = partition_style::intra_cascade;
  else if (style == "inter-cascade")
    c.style = partition_style::inter_cascade;
  else
    throw std::runtime_error("cascade: unknown partition_style " + style);
  for (const auto& oj : require<njson>(j, "cascade", "ops")) {
    check_keys(oj, "op",
               {"id", "kind", "dims", "word_bits", "phase", "deps", "weight",
                "vector_op"});
    einsum_op op;
    op.id = require<std::string>(oj, "op", "id");
    std::string kind = get_or<std::string>(oj, "kind", "gemm");
    if (kind == "gemm")
      op.kind = op_kind::gemm;
    else if (kind == "bmm")
      op.kind = op_kind::bmm;
    else
      throw std::runtime_error("op: kind must be gemm or bmm");
    const njson& dj = require<njson>(oj, "op", "dims");
    check_keys(dj, "dims", {"B", "M", "N", "K"});
    op.dims[0] = get_or<std::int64_t>(dj, "B", 1);
    op.dims[1] = require<std::int64_t>(dj, "dims", "M");
    op.dims[2] = require<std::int64_t>(dj, "dims", "N");
    op.dims[3] = require<std::int64_t>(dj, "dims", "K");
    op.word_bits = get_or<int>(oj, "word_bits", 8);
    std::string phase = get_or<std::string>(oj, "phase", "encoder");
    if (phase == "encoder")
      op.phase = exec_phase::encoder;
    else if (phase == "prefill")
      op.phase = exec_phase::prefill;
    else if (phase == "decode")
      op.phase = exec_phase::decode;
    else
      throw std::runtime_error("op: unknown phase " + phase);
    op.deps = get_or<std::vector<std::string>>(oj, "deps", {});
    op.weight = get_or<double>(oj, "weight", 1.0);
    op.vector_op = get_or<bool>(oj, "vector_op", false);
    c.ops.push_back(op);
  }
  auto errs = validate(c);
  if (!errs.empty()) throw std::runtime_error("cascade: " + errs.front());
  return c;
}

njson cascade_to_json(const cascade& c) {
  njson j;
  j["name"] = c.name;
  j["partition_style"] = c.style == partition_style::intra_cascade
                             ? "intra-cascade"
                             : "inter-cascade";
  j["ops"] = njson::array();
  for (const auto& op : c.ops) {
    njson oj = {{"id", op.id},
                {"kind", op.kind == op_kind::gemm ? "gemm" : "bmm"},
                {"dims",
                 {{"B", op.dims[0]},
                  {"M", op.dims[1]},
                  {"N", op.dims[2]},
                  {"K", op.dims[3]}}},
                {"word_bits", op.word_bits},
                {"phase", phase_name(op.phase)},
                {"deps", op.deps},
                {"weight", op.weight}};
    if (op.vector_op) oj["vector_op"] = true;
    j["ops"].push_back(oj);
  }
  return j;
}

run_spec run_spec_from_json(const njson& j) {
  check_keys(j, "config",
             {"schema_version", "workload", "architectures", "baseline",
              "scale", "budget", "partition", "mac_energy", "sweep"});
  run_spec rs;
  rs.schema_version = require<int>(j, "config", "schema_version");
  if (rs.schema_version != 1)
    throw std::runtime_error("config: unsupported schema_version");
  const njson& w = j.at("workload");
  if (w.is_string())
    rs.workload_name = w.get<std::string>();
  else
    rs.workload_inline = workload_from_json(w);
  rs.architecture_refs =
      require<std::vector<std::string>>(j, "config", "architectures");
  if (rs.architecture_refs.empty())
    throw std::runtime_error("config: architectures list is empty");
  rs.baseline = get_or<std::string>(j, "baseline", "");
  rs.scale = get_or<double>(j, "scale", 1.0);
  if (!(rs.scale > 0))
    throw std::runtime_error("config: scale must be positive");
  if (auto it = j.find("budget"); it != j.end()) {
    check_keys(*it, "budget", {"mode", "samples", "seed"});
    std::string mode = get_or<std::string>(*it, "mode", "random");
    if (mode == "random")
      rs.budget.mode = search_budget::mode_t::random_sample;
    else if (mode == "exhaustive")
      rs.budget.mode = search_budget::mode_t::exhaustive;
    else
      throw std::runtime_error("budget: mode must be random or exhaustive");
    rs.budget.samples = get_or<std::int64_t>(*it, "samples", 2000);
    rs.budget.seed = get_or<std::uint64_t>(*it, "seed", 1);
  }
  if (auto it = j.find("partition"); it != j.end()) {
    check_keys(*it, "partition",
               {"policy", "ai_threshold", "bw_fraction_low", "buf_fraction_low",
                "manual"});
    if (auto p = it->find("policy"); p != it->end()) {
      std::string pol = p->get<std::string>();
      if (pol == "by-reuse")
        rs.part.policy = partition_policy::by_reuse;
      else if (pol == "phase-based")
        rs.part.policy = partition_policy::phase_based;
      else if (pol == "manual")
        rs.part.policy = partition_policy::manual;
      else
        throw std::runtime_error("partition: unknown policy " + pol);
    }
    if (auto p = it->find("ai_threshold"); p != it->end())
      rs.part.ai_threshold = p->get<double>();
    if (auto p = it->find("bw_fraction_low"); p != it->end())
      rs.part.bw_fraction_low = p->get<double>();
    if (auto p = it->find("buf_fraction_low"); p != it->end())
      rs.part.buf_fraction_low = p->get<double>();
    if (auto p = it->find("manual"); p != it->end())
      rs.part.manual = p->get<std::map<std::string, std::string>>();
  }
  rs.mac_energy = get_or<double>(j, "mac_energy", 0.25);
  if (auto it = j.find("sweep"); it != j.end()) {
    check_keys(*it, "sweep", {"dram_bw_words", "bw_fraction_low", "scale"});
    rs.sweep.dram_bw_words =
        get_or<std::vector<double>>(*it, "dram_bw_words", {});
    rs.sweep.bw_fraction_low =
        get_or<std::vector<double>>(*it, "bw_fraction_low", {});
    rs.sweep.scale = get_or<std::vector<double>>(*it, "scale", {});
  }
  return rs;
}

namespace {

njson config_to_json(const config_report& r, const cascade& c,
                     const compare_report& rep) {
  njson cj;
  cj["name"] = r.config_name;
  cj["ok"] = r.ok;
  cj["errors"] = r.errors;
  cj["classification"] = {{"hier", hier_name(r.cls.hier)},
                          {"het", het_name(r.cls.het)}};
  cj["plan"] = {{"policy", policy_name(r.plan.policy)},
                {"ai_threshold", r.plan.ai_threshold},
                {"high_unit", r.plan.high_unit},
                {"low_unit", r.plan.low_unit},
                {"collapsed", r.plan.collapsed},
                {"bw_fraction", r.plan.bw_fraction},
                {"buf_fraction", r.plan.buf_fraction}};
  cj["search"] = {{"searches", r.mapped.stats.searches},
                  {"memo_hits", r.mapped.stats.memo_hits}};
  cj["metrics"] = {{"makespan_cycles", r.makespan},
                   {"total_energy", r.total_energy},
                   {"total_macs", r.total_macs},
                   {"mac_energy", r.mac_energy},
                   {"energy_by_level", r.energy_by_level},
                   {"energy_low_reuse", r.energy_low_reuse},
                   {"energy_high_reuse", r.energy_high_reuse},
                   {"unit_busy", r.sched.unit_busy},
                   {"unit_util", r.sched.unit_util}};
  auto sp = rep.speedup_vs_baseline.find(r.config_name);
  if (sp != rep.speedup_vs_baseline.end())
    cj["speedup_vs_baseline"] = sp->second;
  cj["ops"] = njson::array();
  for (const auto& so : r.sched.ops) {
    const einsum_op* op = c.find(so.id);
    auto it = r.mapped.by_op.find(so.id);
    if (!op || it == r.mapped.by_op.end()) continue;
    const op_plan& p = it->second;
    njson oj = {{"id", so.id},
                {"unit", so.unit},
                {"phase", phase_name(so.phase)},
                {"weight", so.weight},
                {"start", so.start},
                {"end", so.end},
                {"latency_cycles", p.cost.latency_cycles},
                {"energy", p.cost.energy_total},
                {"ai", arithmetic_intensity(*op)},
                {"utilization", p.cost.utilization},
                {"waste", p.cost.waste},
                {"limiting_depth", p.cost.limiting_depth}};
    if (!p.vector_op) oj["mapping"] = p.m.to_string();
    cj["ops"].push_back(oj);
  }
  return cj;
}

}  // namespace

njson report_to_json(const compare_report& rep, const cascade& c) {
  njson j;
  j["schema_version"] = 1;
  j["baseline"] = rep.baseline;
  j["workload"] = {{"name", c.name},
                   {"ops", c.ops.size()},
                   {"total_macs", double(c.total_macs())}};
  j["configs"] = njson::array();
  for (const auto& r : rep.results)
    j["configs"].push_back(config_to_json(r, c, rep));
  return j;
}

std::string summary_csv(const compare_report& rep,
                        const std::string& workload) {
  std::ostringstream os;
  os << "config,workload,metric,value\n";
  for (const auto& r : rep.results) {
    auto row = [&](const std::string& metric, const std::string& value) {
      os << r.config_name << "," << workload << "," << metric << "," << value
         << "\n";
    };
    row("ok", r.ok ? "1" : "0");
    row("hier_class", hier_name(r.cls.hier));
    row("het_class", het_name(r.cls.het));
    row("policy", policy_name(r.plan.policy));
    row("ai_threshold", num(r.plan.ai_threshold));
    row("makespan_cycles", num(r.makespan));
    row("total_energy", num(r.total_energy));
    row("total_macs", num(r.total_macs));
    row("mac_energy", num(r.mac_energy));
    for (const auto& [lvl, e] : r.energy_by_level)
      row("energy_level_" + lvl, num(e));
    row("energy_low_reuse", num(r.energy_low_reuse));
    row("energy_high_reuse", num(r.energy_high_reuse));
    for (const auto& [unit, busy] : r.sched.unit_busy)
      row("busy_" + unit, num(busy));
    for (const auto& [unit, util] : r.sched.unit_util)
      row("util_" + unit, num(util));
    auto sp = rep.speedup_vs_baseline.find(r.config_name);
    if (sp != rep.speedup_vs_baseline.end())
      row("speedup_vs_baseline", num(sp->second));
  }
  return os.str();
}

std::string timeline_csv(const compare_report& rep) {
  std::ostringstream os;
  os << "config,unit,bucket,start_cycle,busy_fraction\n";
  for (const auto& r : rep.results) {
    for (const auto& [unit, v] : r.tl.busy_frac)
      for (std::size_t b = 0; b < v.size(); ++b)
        os << r.config_name << "," << unit << "," << b << ","
           << num(double(b) * r.tl.bucket_cycles) << "," << num(v[b]) << "\n";
  }
  return os.str();
}

njson sweep_to_json(const std::vector<sweep_point>& points, const cascade& c) {
  njson j;
  j["schema_version"] = 1;
  j["workload"] = {{"name", c.name}, {"ops", c.ops.size()}};
  j["points"] = njson::array();
  for (const auto& pt : points) {
    njson pj = {{"dram_bw_words", pt.dram_bw_words},
                {"bw_fraction_low", pt.bw_fraction_low},
                {"scale", pt.scale},
                {"baseline", pt.rep.baseline}};
    pj["configs"] = njson::array();
    for (const auto& r : pt.rep.results) {
      njson cj = {{"name", r.config_name},
                  {"ok", r.ok},
                  {"makespan_cycles", r.makespan},
                  {"total_energy", r.total_energy}};
      auto sp = pt.rep.speedup_vs_baseline.find(r.config_name);
      if (sp != pt.rep.speedup_vs_baseline.end())
        cj["speedup_vs_baseline"] = sp->second;
      pj["configs"].push_back(cj);
    }
    j["points"].push_back(pj);
  }
  return j;
}

std::string sweep_csv(const std::vector<sweep_point>& points) {
  std::ostringstream os;
  os << "config,dram_bw_words,bw_fraction_low,scale,makespan_cycles,"
        "total_energy,speedup_vs_baseline\n";
  for (const auto& pt : points)
    for (const auto& r : pt.rep.results) {
      auto sp = pt.rep.speedup_vs_baseline.find(r.config_name);
      os << r.config_name << "," << num(pt.dram_bw_words) << ","
         << num(pt.bw_fraction_low) << "," << num(pt.scale) << ","
         << num(r.makespan) << "," << num(r.total_energy) << ","
         << (sp != pt.rep.speedup_vs_baseline.end() ? num(sp->second) : "")
         << "\n";
    }
  return os.str();
}

}  // namespace hhpsim
