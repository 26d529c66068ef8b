#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hhpsim/cost_model.hpp"

namespace hhpsim {

struct search_budget {
  enum class mode_t { exhaustive, random_sample };
  mode_t mode = mode_t::random_sample;
  std::int64_t samples = 2000;   // attempts, not feasible candidates
  std::uint64_t seed = 1;
};

struct search_result {
  bool found = false;
  mapping best;
  op_cost cost;
  std::int64_t evaluated = 0;
  std::int64_t feasible = 0;
  std::string fail_reason;
};

// deterministic: best by (latency, energy, canonical encoding). the random
// mode draws from a stream seeded by budget.seed and the op/unit identity, so
// results do not depend on evaluation order elsewhere.
search_result search_mapping(const einsum_op& op, const unit_env& env,
                             const mapping_constraints& mc,
                             const search_budget& budget);

struct op_plan {
  std::string unit;
  bool vector_op = false;
  mapping m;
  op_cost cost;
};

struct plan_stats {
  std::int64_t searches = 0;
  std::int64_t memo_hits = 0;
};

struct plan_result {
  std::map<std::string, op_plan> by_op;
  plan_stats stats;
  std::vector<std::string> errors;
  bool ok() const { return errors.empty(); }
};

// maps every op onto its assigned unit; identical (shape, unit) pairs share
// one search via memoization
plan_result plan_cascade(const cascade& c, const machine_config& cfg,
                         const std::map<std::string, std::string>& assignment,
                         const search_budget& budget, double mac_energy = 0.25,
                         bool keep_going = false);

}  // namespace hhpsim
