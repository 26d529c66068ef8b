#pragma once

#include <vector>

#include "hhpsim/cost_model.hpp"

namespace hhpsim::testing {

struct oracle_traffic {
  std::vector<double> reads;   // per level index, words
  std::vector<double> writes;
  double macs = 0.0;
};

// Ground truth for the analytical traffic model: walks the padded loop nest
// literally, tracks the resident tile of every (level, tensor) by coordinates,
// counts fills when coordinates change, collapses multicast fetches with set
// unions across PE instances, and follows partial output tiles up and back
// down the hierarchy using per-word completion counters. Slow but exact;
// intended for small padded spaces.
oracle_traffic simulate_traffic(const einsum_op& op, const mapping& m,
                                const unit_env& env);

}  // namespace hhpsim::testing
