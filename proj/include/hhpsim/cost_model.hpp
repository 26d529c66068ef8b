#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hhpsim/architecture.hpp"
#include "hhpsim/workload.hpp"

namespace hhpsim {

// per-level temporal tiling factors plus the innermost loop choice.
// loop order within a level is canonical B,M,N,K with the chosen inner dim
// moved last; bound-1 loops vanish.
struct level_tiling {
  dims4 f = {1, 1, 1, 1};
  dim4 inner = dim4::K;
};

struct mapping {
  std::vector<level_tiling> levels;  // index 0 = outermost (off-chip) level
  dim4 row_dim = dim4::M;
  std::int64_t row_factor = 1;
  dim4 col_dim = dim4::N;
  std::int64_t col_factor = 1;

  std::int64_t spatial(dim4 d) const {
    std::int64_t s = 1;
    if (row_dim == d) s *= row_factor;
    if (col_dim == d) s *= col_factor;
    return s;
  }
  std::int64_t padded(dim4 d) const {
    std::int64_t p = spatial(d);
    for (const auto& lt : levels) p *= lt.f[static_cast<int>(d)];
    return p;
  }
  // canonical encoding for deterministic tie-breaking and reporting
  std::vector<std::int64_t> encode() const;
  std::string to_string() const;
};

// one memory level as seen by a single sub-accelerator, resource shares applied
struct level_use {
  int depth = 0;
  std::string name;
  double cap_bytes = 0.0;  // <= 0 unbounded
  double read_bw = 1e18;   // words/cycle (per instance at the per-PE level)
  double write_bw = 1e18;
  double energy_per_word = 0.0;
  bool shared = true;
  bool per_pe = false;  // innermost register level, one instance per PE
};

struct unit_env {
  std::string unit_id;
  std::vector<level_use> levels;  // ascending depth; back() is the attach level
  bool attach_per_pe = false;
  std::int64_t rows = 1;
  std::int64_t cols = 1;
  std::int64_t pe_count = 1;
  double mac_energy = 0.25;
};

// applies bw/buffer fractions for shared levels and PE-proportional splits for
// private array buffers shared between co-attached subs
unit_env build_unit_env(const machine_config& cfg, const std::string& sub_id,
                        double mac_energy = 0.25);

struct level_traffic {
  int depth = 0;
  std::string name;
  double reads = 0.0;   // words
  double writes = 0.0;  // words
  double energy = 0.0;
};

struct op_cost {
  double latency_cycles = 0.0;
  double compute_cycles = 0.0;
  double transfer_cycles = 0.0;   // slowest level
  int limiting_depth = -1;        // -1 = compute bound, else level depth
  double macs_true = 0.0;
  double macs_padded = 0.0;
  double waste = 1.0;             // padded / true
  double utilization = 0.0;       // true MACs per PE per cycle of latency
  double energy_total = 0.0;
  double mac_energy = 0.0;
  std::vector<level_traffic> per_level;
  std::int64_t active_pes = 0;
};

// returns empty if the mapping is invalid or exceeds a capacity; the reason is
// written to *why when given
std::optional<op_cost> evaluate_mapping(const einsum_op& op, const mapping& m,
                                        const unit_env& env,
                                        std::string* why = nullptr);

// pure data movement ops: stream the output tensor through the level chain once
op_cost evaluate_vector_op(const einsum_op& op, const unit_env& env);

}  // namespace hhpsim
