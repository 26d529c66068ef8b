#include "hhpsim/fixtures.hpp"

namespace hhpsim {

namespace {

std::vector<memory_level> standard_levels(double dram_bw_words = 256.0) {
  std::vector<memory_level> lv(4);
  lv[0] = {"dram", 0, 0.0, dram_bw_words, dram_bw_words, 128.0, true};
  lv[1] = {"llb", 1, 4.0 * 1024 * 1024, 1e18, 1e18, 16.0, true};
  lv[2] = {"l1", 2, 128.0 * 1024, 1e18, 1e18, 4.0, false};
  lv[3] = {"rf", 3, 64.0, 1e18, 1e18, 1.0, false};
  return lv;
}

sub_accel make_sub(const std::string& id, std::int64_t rows, std::int64_t cols,
                   int attach, double bw, double buf) {
  sub_accel s;
  s.id = id;
  s.rows = rows;
  s.cols = cols;
  s.pe_count = rows * cols;
  s.attach_depth = attach;
  s.bw_fraction = bw;
  s.buf_fraction = buf;
  return s;
}

}  // namespace

std::vector<machine_config> builtin_architectures() {
  std::vector<machine_config> out;

  {  // single big array, everything attached at the registers
    machine_config m;
    m.name = "leaf-homogeneous";
    m.levels = standard_levels();
    m.subs = {make_sub("acc0", 256, 160, 3, 1.0, 1.0)};
    m.fsm_groups = {{"acc0"}};
    out.push_back(m);
  }
  {  // big + small arrays side by side, independent control
    machine_config m;
    m.name = "leaf-crossnode";
    m.levels = standard_levels();
    m.subs = {make_sub("high", 256, 128, 3, 0.5, 0.8),
              make_sub("low", 64, 128, 3, 0.5, 0.2)};
    m.fsm_groups = {{"high"}, {"low"}};
    out.push_back(m);
  }
  {  // same arrays fused under one controller (shared column drive)
    machine_config m;
    m.name = "leaf-intranode";
    m.levels = standard_levels();
    m.subs = {make_sub("high", 256, 128, 3, 0.5, 0.8),
              make_sub("low", 64, 128, 3, 0.5, 0.2)};
    m.fsm_groups = {{"high", "low"}};
    out.push_back(m);
  }
  {  // small array moved up to stream from the shared buffer
    machine_config m;
    m.name = "hier-crossdepth";
    m.levels = standard_levels();
    m.subs = {make_sub("high", 256, 128, 3, 0.5, 0.8),
              make_sub("low", 64, 128, 1, 0.5, 0.2)};
    m.fsm_groups = {{"high"}, {"low"}};
    out.push_back(m);
  }
  {  // identical arrays at two depths
    machine_config m;
    m.name = "hier-homogeneous";
    m.levels = standard_levels();
    m.subs = {make_sub("a0", 128, 128, 3, 0.5, 0.5),
              make_sub("a1", 128, 128, 1, 0.5, 0.5)};
    m.fsm_groups = {{"a0"}, {"a1"}};
    out.push_back(m);
  }
  {  // cross-node pair at the leaves plus a copy of the big array above them
    machine_config m;
    m.name = "hier-crossnode";
    m.levels = standard_levels();
    m.subs = {make_sub("x0", 256, 128, 3, 0.34, 0.4),
              make_sub("y0", 64, 128, 3, 0.33, 0.2),
              make_sub("x1", 256, 128, 1, 0.33, 0.4)};
    m.fsm_groups = {{"x0"}, {"y0"}, {"x1"}};
    out.push_back(m);
  }
  {  // fused mixed pair at the leaves plus a copy of the big array above
    machine_config m;
    m.name = "hier-intranode";
    m.levels = standard_levels();
    m.subs = {make_sub("x0", 256, 128, 3, 0.34, 0.4),
              make_sub("y0", 64, 128, 3, 0.33, 0.2),
              make_sub("x1", 256, 128, 1, 0.33, 0.4)};
    m.fsm_groups = {{"x0", "y0"}, {"x1"}};
    out.push_back(m);
  }
  {  // distinct types split across siblings and depths at once
    machine_config m;
    m.name = "hier-compound";
    m.levels = standard_levels();
    m.subs = {make_sub("x0", 256, 128, 3, 0.34, 0.4),
              make_sub("y0", 64, 128, 3, 0.33, 0.2),
              make_sub("z1", 64, 64, 1, 0.33, 0.4)};
    m.fsm_groups = {{"x0"}, {"y0"}, {"z1"}};
    out.push_back(m);
  }
  return out;
}

std::optional<machine_config> find_architecture(const std::string& name) {
  for (auto& m : builtin_architectures())
    if (m.name == name) return m;
  return std::nullopt;
}

std::vector<workload_fixture> builtin_workloads() {
  std::vector<workload_fixture> out;
  {
    transformer_spec s;
    s.kind = transformer_spec::model_kind::encoder;
    s.d_model = 1024;
    s.n_heads = 16;
    s.seq_len = 256;
    out.push_back({"bert-large", s});
    out.push_back({"bert-desk", s});  // alias; encoders have no decode tail
  }
  {
    transformer_spec s;
    s.kind = transformer_spec::model_kind::decoder;
    s.d_model = 4096;
    s.n_heads = 32;
    s.prefill_len = 3000;
    s.decode_len = 1000;
    s.decode_stride = 64;
    out.push_back({"llama2", s});
    s.decode_len = 24;
    s.decode_stride = 4;
    out.push_back({"llama2-desk", s});
  }
  {
    transformer_spec s;
    s.kind = transformer_spec::model_kind::decoder;
    s.d_model = 12288;
    s.n_heads = 96;
    s.prefill_len = 3000;
    s.decode_len = 1000;
    s.decode_stride = 64;
    out.push_back({"gpt3", s});
    s.decode_len = 24;
    s.decode_stride = 4;
    out.push_back({"gpt3-desk", s});
  }
  return out;
}

std::optional<transformer_spec> find_workload(const std::string& name) {
  for (auto& w : builtin_workloads())
    if (w.name == name) return w.spec;
  return std::nullopt;
}

}  // namespace hhpsim
