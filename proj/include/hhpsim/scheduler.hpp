#pragma once

#include <map>
#include <string>
#include <vector>

#include "hhpsim/mapper.hpp"
#include "hhpsim/workload.hpp"

namespace hhpsim {

struct scheduled_op {
  std::string id;
  std::string unit;
  exec_phase phase = exec_phase::encoder;
  double start = 0.0;
  double end = 0.0;
  double energy = 0.0;  // weighted
  double weight = 1.0;
};

struct schedule_result {
  std::vector<scheduled_op> ops;  // in issue order
  double makespan = 0.0;
  double total_energy = 0.0;
  std::map<std::string, double> unit_busy;  // cycles
  std::map<std::string, double> unit_util;  // busy / makespan
};

// dependency-respecting list schedule: ops issue in deterministic topological
// order, each unit runs its queue in that order back to back
schedule_result simulate_schedule(const cascade& c, const plan_result& plan);

struct timeline {
  double bucket_cycles = 0.0;
  std::size_t buckets = 0;
  std::map<std::string, std::vector<double>> busy_frac;  // per unit, per bucket
};

// bucket_cycles <= 0 picks makespan/64
timeline build_timeline(const schedule_result& sched, double bucket_cycles);

}  // namespace hhpsim
