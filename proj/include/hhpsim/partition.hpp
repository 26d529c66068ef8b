#pragma once

#include <map>
#include <optional>
#include <string>

#include "hhpsim/architecture.hpp"
#include "hhpsim/workload.hpp"

namespace hhpsim {

enum class partition_policy { by_reuse, phase_based, manual };

const char* policy_name(partition_policy p);

struct partition_plan {
  partition_policy policy = partition_policy::by_reuse;
  double ai_threshold = 0.0;
  std::string high_unit;  // largest PE count
  std::string low_unit;   // smallest PE count
  std::map<std::string, std::string> unit_of;  // op id -> sub id
  std::map<std::string, double> bw_fraction;   // sub id -> share
  std::map<std::string, double> buf_fraction;
  bool collapsed = false;  // everything landed on one unit, it got it all
};

struct partition_options {
  std::optional<partition_policy> policy;   // default follows cascade style
  std::optional<double> ai_threshold;       // default: machine ridge point
  std::optional<double> bw_fraction_low;    // low unit's bandwidth share
  std::optional<double> buf_fraction_low;   // low unit's shared-buffer share
  std::map<std::string, std::string> manual;  // for the manual policy
};

// decides which ops run where and how shared resources split between the
// high-throughput and low-latency units
partition_plan make_partition_plan(const cascade& c, const machine_config& cfg,
                                   const partition_options& opt);

// copy of cfg with the plan's resource fractions written into the subs
machine_config apply_plan(const machine_config& cfg,
                          const partition_plan& plan);

}  // namespace hhpsim
