#include "hhpsim/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_map>

namespace hhpsim {

schedule_result simulate_schedule(const cascade& c, const plan_result& plan) {
  schedule_result out;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < c.ops.size(); ++i) index[c.ops[i].id] = i;

  // Kahn order, always picking the earliest-emitted ready op
  std::vector<int> indeg(c.ops.size(), 0);
  std::vector<std::vector<std::size_t>> succ(c.ops.size());
  for (std::size_t i = 0; i < c.ops.size(); ++i)
    for (const auto& dep : c.ops[i].deps) {
      succ[index.at(dep)].push_back(i);
      ++indeg[i];
    }
  std::priority_queue<std::size_t, std::vector<std::size_t>,
                      std::greater<std::size_t>>
      ready;
  for (std::size_t i = 0; i < c.ops.size(); ++i)
    if (indeg[i] == 0) ready.push(i);

  std::unordered_map<std::string, double> unit_free;
  std::vector<double> finish(c.ops.size(), 0.0);
  while (!ready.empty()) {
    std::size_t i = ready.top();
    ready.pop();
    const einsum_op& op = c.ops[i];
    auto pit = plan.by_op.find(op.id);
    if (pit == plan.by_op.end()) {
      // op failed to map under keep-going: zero-width placeholder so the
      // rest of the graph still schedules
      double start = 0.0;
      for (const auto& dep : op.deps)
        start = std::max(start, finish[index.at(dep)]);
      finish[i] = start;
      for (std::size_t j : succ[i])
        if (--indeg[j] == 0) ready.push(j);
      continue;
    }
    const op_plan& p = pit->second;
    double start = unit_free[p.unit];
    for (const auto& dep : op.deps)
      start = std::max(start, finish[index.at(dep)]);
    double dur = p.cost.latency_cycles * op.weight;
    double end = start + dur;
    unit_free[p.unit] = end;
    finish[i] = end;
    out.unit_busy[p.unit] += dur;

    scheduled_op so;
    so.id = op.id;
    so.unit = p.unit;
    so.phase = op.phase;
    so.start = start;
    so.end = end;
    so.weight = op.weight;
    so.energy = p.cost.energy_total * op.weight;
    out.total_energy += so.energy;
    out.makespan = std::max(out.makespan, end);
    out.ops.push_back(std::move(so));

    for (std::size_t j : succ[i])
      if (--indeg[j] == 0) ready.push(j);
  }
  for (const auto& [unit, busy] : out.unit_busy)
    out.unit_util[unit] = out.makespan > 0 ? busy / out.makespan : 0.0;
  return out;
}

timeline build_timeline(const schedule_result& sched, double bucket_cycles) {
  timeline tl;
  if (sched.makespan <= 0) return tl;
  tl.bucket_cycles =
      bucket_cycles > 0 ? bucket_cycles : sched.makespan / 64.0;
  tl.buckets = std::size_t(std::ceil(sched.makespan / tl.bucket_cycles));
  for (const auto& so : sched.ops) {
    auto& v = tl.busy_frac[so.unit];
    v.resize(tl.buckets, 0.0);
    // spread [start, end) over the buckets it straddles
    std::size_t b0 = std::size_t(so.start / tl.bucket_cycles);
    std::size_t b1 = std::size_t((so.end - 1e-9) / tl.bucket_cycles);
    b1 = std::min(b1, tl.buckets - 1);
    for (std::size_t b = b0; b <= b1; ++b) {
      double lo = std::max(so.start, double(b) * tl.bucket_cycles);
      double hi = std::min(so.end, double(b + 1) * tl.bucket_cycles);
      if (hi > lo) v[b] += (hi - lo) / tl.bucket_cycles;
    }
  }
  for (auto& [unit, v] : tl.busy_frac) v.resize(tl.buckets, 0.0);
  return tl;
}

}  // namespace hhpsim
