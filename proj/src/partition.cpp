#include "hhpsim/partition.hpp"

#include <algorithm>
#include <set>

namespace hhpsim {

const char* policy_name(partition_policy p) {
  switch (p) {
    case partition_policy::by_reuse: return "by-reuse";
    case partition_policy::phase_based: return "phase-based";
    case partition_policy::manual: return "manual";
  }
  return "?";
}

partition_plan make_partition_plan(const cascade& c, const machine_config& cfg,
                                   const partition_options& opt) {
  partition_plan plan;
  plan.policy = opt.policy.value_or(c.style == partition_style::inter_cascade
                                        ? partition_policy::phase_based
                                        : partition_policy::by_reuse);
  plan.ai_threshold = opt.ai_threshold.value_or(cfg.ai_tipping());

  // high = biggest array, low = smallest; ties break on id for determinism
  const sub_accel* high = nullptr;
  const sub_accel* low = nullptr;
  for (const auto& s : cfg.subs) {
    if (!high || s.pe_count > high->pe_count ||
        (s.pe_count == high->pe_count && s.id < high->id))
      high = &s;
    if (!low || s.pe_count < low->pe_count ||
        (s.pe_count == low->pe_count && s.id < low->id))
      low = &s;
  }
  if (!high) return plan;
  plan.high_unit = high->id;
  plan.low_unit = low->id;

  if (plan.policy == partition_policy::manual) {
    plan.unit_of = opt.manual;
  } else if (cfg.subs.size() == 1) {
    for (const auto& op : c.ops) plan.unit_of[op.id] = high->id;
  } else if (plan.policy == partition_policy::by_reuse) {
    for (const auto& op : c.ops)
      plan.unit_of[op.id] =
          classify_reuse(op, plan.ai_threshold) == reuse_class::high
              ? plan.high_unit
              : plan.low_unit;
  } else {
    for (const auto& op : c.ops)
      plan.unit_of[op.id] =
          op.phase == exec_phase::decode ? plan.low_unit : plan.high_unit;
  }

  std::set<std::string> used;
  for (const auto& [op, unit] : plan.unit_of) used.insert(unit);

  bool decoder = false;
  for (const auto& op : c.ops)
    if (op.phase == exec_phase::decode) decoder = true;

  if (used.size() == 1 && cfg.subs.size() > 1) {
    // whoever runs the whole cascade holds the whole machine's shared
    // resources; idle silicon reserves nothing
    plan.collapsed = true;
    plan.bw_fraction[*used.begin()] = 1.0;
    plan.buf_fraction[*used.begin()] = 1.0;
  } else if (cfg.subs.size() == 2) {
    double bw_low = opt.bw_fraction_low.value_or(decoder ? 0.75 : 0.5);
    double pe_ratio = double(low->pe_count) / double(cfg.total_pes());
    double buf_low = opt.buf_fraction_low.value_or(pe_ratio);
    plan.bw_fraction[plan.low_unit] = bw_low;
    plan.bw_fraction[plan.high_unit] = 1.0 - bw_low;
    plan.buf_fraction[plan.low_unit] = buf_low;
    plan.buf_fraction[plan.high_unit] = 1.0 - buf_low;
  }
  // configs with one sub or more than two keep their configured fractions
  return plan;
}

machine_config apply_plan(const machine_config& cfg,
                          const partition_plan& plan) {
  machine_config out = cfg;
  for (auto& s : out.subs) {
    auto bw = plan.bw_fraction.find(s.id);
    if (bw != plan.bw_fraction.end()) s.bw_fraction = bw->second;
    auto buf = plan.buf_fraction.find(s.id);
    if (buf != plan.buf_fraction.end()) s.buf_fraction = buf->second;
  }
  return out;
}

}  // namespace hhpsim
