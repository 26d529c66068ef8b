#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hhpsim/analysis.hpp"
#include "hhpsim/architecture.hpp"
#include "hhpsim/workload.hpp"

namespace hhpsim {

using njson = nlohmann::json;

// all parsers are strict: unknown keys raise std::runtime_error with the path

machine_config machine_from_json(const njson& j);
njson machine_to_json(const machine_config& m);

transformer_spec workload_from_json(const njson& j);
njson workload_to_json(const transformer_spec& s);

// explicit op-list form, for cascades not generated from a transformer spec
cascade cascade_from_json(const njson& j);
njson cascade_to_json(const cascade& c);

struct sweep_axes {
  std::vector<double> dram_bw_words;
  std::vector<double> bw_fraction_low;
  std::vector<double> scale;
  std::size_t points() const {
    auto n = [](const std::vector<double>& v) { return v.empty() ? 1 : v.size(); };
    return n(dram_bw_words) * n(bw_fraction_low) * n(scale);
  }
  bool empty() const {
    return dram_bw_words.empty() && bw_fraction_low.empty() && scale.empty();
  }
};

struct run_spec {
  int schema_version = 1;
  std::string workload_name;  // builtin fixture, unless inline is given
  std::optional<transformer_spec> workload_inline;
  std::vector<std::string> architecture_refs;  // builtin names or file paths
  std::string baseline;  // default: first architecture
  double scale = 1.0;
  search_budget budget;
  partition_options part;
  double mac_energy = 0.25;
  sweep_axes sweep;
};

run_spec run_spec_from_json(const njson& j);

// reporting; workload tags every summary row so sweeps concatenate cleanly
njson report_to_json(const compare_report& rep, const cascade& c);
std::string summary_csv(const compare_report& rep, const std::string& workload);
std::string timeline_csv(const compare_report& rep);

struct sweep_point {
  double dram_bw_words = 0.0;
  double bw_fraction_low = 0.0;
  double scale = 1.0;
  compare_report rep;
};

njson sweep_to_json(const std::vector<sweep_point>& points, const cascade& c);
std::string sweep_csv(const std::vector<sweep_point>& points);

}  // namespace hhpsim
