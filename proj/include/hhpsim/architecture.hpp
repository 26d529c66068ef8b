#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hhpsim/workload.hpp"

namespace hhpsim {

// one level of the memory hierarchy, outermost (depth 0) is off-chip
struct memory_level {
  std::string name;
  int depth = 0;
  double capacity_bytes = 0.0;      // <= 0 means unbounded
  double read_bw_words = 1e18;      // words per cycle; 1e18 = effectively unbounded
  double write_bw_words = 1e18;
  double energy_per_word = 0.0;     // abstract units per word accessed
  bool shared = true;               // shared across sub-accelerators vs per-instance

  bool bounded() const { return capacity_bytes > 0.0; }
};

// a PE array attached at some hierarchy depth
struct sub_accel {
  std::string id;
  std::int64_t pe_count = 0;
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  int attach_depth = 0;
  double bw_fraction = 1.0;   // share of shared-level bandwidth
  double buf_fraction = 1.0;  // share of bounded shared-level capacity
};

struct machine_config {
  std::string name;
  std::vector<memory_level> levels;       // sorted by depth after validation
  std::vector<sub_accel> subs;
  // co-scheduled groups (one control FSM each); ids partition subs
  std::vector<std::vector<std::string>> fsm_groups;

  int max_depth() const;
  const memory_level* level_at(int depth) const;
  const sub_accel* find_sub(const std::string& id) const;
  std::int64_t total_pes() const;
  double peak_macs_per_cycle() const { return double(total_pes()); }
  // ridge point of the whole machine against off-chip bandwidth
  double ai_tipping() const;
};

enum class hier_class { leaf_only, hierarchical };
enum class het_class { homogeneous, intra_node, cross_node, cross_depth, compound };

const char* hier_name(hier_class h);
const char* het_name(het_class h);

struct classification {
  hier_class hier = hier_class::leaf_only;
  het_class het = het_class::homogeneous;
};

// derived purely from structure: unit type = (pe_count, rows, cols)
classification classify(const machine_config& cfg);

// structural invariants; empty result means valid
std::vector<std::string> validate(const machine_config& cfg);

// what the mapper must respect when tiling for one sub
struct mapping_constraints {
  std::vector<int> level_depths;        // 0 .. attach_depth
  std::optional<dim4> forced_col_dim;   // set for fused multi-type groups
};

mapping_constraints derive_mapping_constraints(const machine_config& cfg,
                                               const std::string& sub_id);

}  // namespace hhpsim
