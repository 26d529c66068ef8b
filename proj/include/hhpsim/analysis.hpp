#pragma once

#include <map>
#include <string>
#include <vector>

#include "hhpsim/architecture.hpp"
#include "hhpsim/mapper.hpp"
#include "hhpsim/partition.hpp"
#include "hhpsim/scheduler.hpp"
#include "hhpsim/workload.hpp"

namespace hhpsim {

struct roofline_point {
  double ai = 0.0;
  double peak_macs = 0.0;
  double bw_words = 0.0;
  double attainable = 0.0;  // MACs per cycle
  bool memory_bound = false;
};

roofline_point roofline(double ai, double peak_macs, double bw_words);

// words per cycle an op needs to stay compute bound, clipped at the machine
double required_bandwidth(double ai, double peak_macs, double bw_peak_words);

struct run_options {
  search_budget budget;
  partition_options part;
  double mac_energy = 0.25;
  bool keep_going = false;
  double bucket_cycles = 0.0;  // <= 0: makespan / 64
  // overrides level energy/word by level name when non-empty
  std::map<std::string, double> energy_table;
};

struct config_report {
  std::string config_name;
  bool ok = false;
  std::vector<std::string> errors;
  classification cls;
  partition_plan plan;
  plan_result mapped;
  schedule_result sched;
  timeline tl;
  // weighted rollups over the schedule
  double makespan = 0.0;
  double total_energy = 0.0;
  double total_macs = 0.0;
  double mac_energy = 0.0;
  std::map<std::string, double> energy_by_level;
  // on-chip (non-DRAM) energy split by which role an op was assigned to
  double energy_low_reuse = 0.0;
  double energy_high_reuse = 0.0;
};

config_report run_config(const machine_config& cfg, const cascade& c,
                         const run_options& opt);

struct compare_report {
  std::vector<config_report> results;
  std::string baseline;
  std::map<std::string, double> speedup_vs_baseline;  // makespan ratio
};

compare_report compare_configs(const std::vector<machine_config>& cfgs,
                               const cascade& c, const std::string& baseline,
                               const run_options& opt);

}  // namespace hhpsim
