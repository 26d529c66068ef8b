#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hhpsim/architecture.hpp"
#include "hhpsim/workload.hpp"

namespace hhpsim {

// compiled-in architecture configs covering the taxonomy corners plus the
// default homogeneous machine
std::vector<machine_config> builtin_architectures();
std::optional<machine_config> find_architecture(const std::string& name);

struct workload_fixture {
  std::string name;
  transformer_spec spec;
};

// transformer presets; the -desk decoder variants model one steady-state
// pipeline window (short decode tail) for latency studies
std::vector<workload_fixture> builtin_workloads();
std::optional<transformer_spec> find_workload(const std::string& name);

}  // namespace hhpsim
