#include "hhpsim/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace hhpsim {

roofline_point roofline(double ai, double peak_macs, double bw_words) {
  roofline_point p;
  p.ai = ai;
  p.peak_macs = peak_macs;
  p.bw_words = bw_words;
  p.attainable = std::min(peak_macs, ai * bw_words);
  p.memory_bound = ai * bw_words < peak_macs;
  return p;
}

double required_bandwidth(double ai, double peak_macs, double bw_peak_words) {
  if (ai <= 0) return bw_peak_words;
  return std::min(bw_peak_words, peak_macs / ai);
}

config_report run_config(const machine_config& cfg, const cascade& c,
                         const run_options& opt) {
  config_report rep;
  rep.config_name = cfg.name;

  machine_config machine = cfg;
  if (!opt.energy_table.empty())
    for (auto& lv : machine.levels) {
      auto it = opt.energy_table.find(lv.name);
      if (it != opt.energy_table.end()) lv.energy_per_word = it->second;
    }

  rep.errors = validate(machine);
  auto werrs = validate(c);
  rep.errors.insert(rep.errors.end(), werrs.begin(), werrs.end());
  if (!rep.errors.empty()) return rep;

  rep.cls = classify(machine);
  rep.plan = make_partition_plan(c, machine, opt.part);
  machine_config shared = apply_plan(machine, rep.plan);
  rep.mapped = plan_cascade(c, shared, rep.plan.unit_of, opt.budget,
                            opt.mac_energy, opt.keep_going);
  for (const auto& e : rep.mapped.errors) rep.errors.push_back(e);
  if (!rep.mapped.ok() && !opt.keep_going) return rep;

  rep.sched = simulate_schedule(c, rep.mapped);
  rep.tl = build_timeline(rep.sched, opt.bucket_cycles);
  rep.makespan = rep.sched.makespan;
  rep.total_energy = rep.sched.total_energy;
  for (const auto& op : c.ops) {
    auto it = rep.mapped.by_op.find(op.id);
    if (it == rep.mapped.by_op.end()) continue;
    const op_cost& cost = it->second.cost;
    rep.total_macs += cost.macs_true * op.weight;
    rep.mac_energy += cost.mac_energy * op.weight;
    double onchip = cost.mac_energy;
    for (const auto& lt : cost.per_level) {
      rep.energy_by_level[lt.name] += lt.energy * op.weight;
      if (lt.depth > 0) onchip += lt.energy;
    }
    // on-chip split follows the assignment when the plan has two roles,
    // otherwise the op's own intensity decides
    bool low;
    if (it->second.unit == rep.plan.low_unit &&
        rep.plan.low_unit != rep.plan.high_unit)
      low = true;
    else if (it->second.unit == rep.plan.high_unit &&
             rep.plan.low_unit != rep.plan.high_unit)
      low = false;
    else
      low = classify_reuse(op, rep.plan.ai_threshold) == reuse_class::low;
    (low ? rep.energy_low_reuse : rep.energy_high_reuse) += onchip * op.weight;
  }
  rep.ok = rep.mapped.ok() || opt.keep_going;
  return rep;
}

compare_report compare_configs(const std::vector<machine_config>& cfgs,
                               const cascade& c, const std::string& baseline,
                               const run_options& opt) {
  compare_report rep;
  rep.baseline = baseline.empty() && !cfgs.empty() ? cfgs.front().name
                                                   : baseline;
  for (const auto& cfg : cfgs) rep.results.push_back(run_config(cfg, c, opt));
  const config_report* base = nullptr;
  for (const auto& r : rep.results)
    if (r.config_name == rep.baseline) base = &r;
  if (base && base->ok && base->makespan > 0)
    for (const auto& r : rep.results)
      if (r.ok && r.makespan > 0)
        rep.speedup_vs_baseline[r.config_name] = base->makespan / r.makespan;
  return rep;
}

}  // namespace hhpsim
