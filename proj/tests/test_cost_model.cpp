#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hhpsim/cost_model.hpp"
#include "support/trace_oracle.hpp"

using namespace hhpsim;
using hhpsim::testing::simulate_traffic;

namespace {

einsum_op make_op(std::int64_t b, std::int64_t m, std::int64_t n,
                  std::int64_t k) {
  einsum_op op;
  op.id = "op";
  op.kind = b == 1 ? op_kind::gemm : op_kind::bmm;
  op.dims = {b, m, n, k};
  return op;
}

level_use mem(int depth, const char* name, double cap, double rbw, double wbw,
              double e, bool per_pe = false) {
  level_use u;
  u.depth = depth;
  u.name = name;
  u.cap_bytes = cap;
  u.read_bw = rbw;
  u.write_bw = wbw;
  u.energy_per_word = e;
  u.per_pe = per_pe;
  return u;
}

// registers directly under DRAM, whole array visible as rows x cols
unit_env pe_env2(std::int64_t rows, std::int64_t cols, double dram_bw = 1e18,
                 double rf_cap = 0.0) {
  unit_env env;
  env.unit_id = "u";
  env.rows = rows;
  env.cols = cols;
  env.pe_count = rows * cols;
  env.attach_per_pe = true;
  env.levels = {mem(0, "dram", 0.0, dram_bw, dram_bw, 128.0),
                mem(1, "rf", rf_cap, 1e18, 1e18, 1.0, true)};
  return env;
}

unit_env pe_env3(std::int64_t rows, std::int64_t cols, double dram_bw = 1e18,
                 double llb_cap = 0.0, double rf_cap = 0.0) {
  unit_env env = pe_env2(rows, cols, dram_bw, rf_cap);
  env.levels = {mem(0, "dram", 0.0, dram_bw, dram_bw, 128.0),
                mem(1, "llb", llb_cap, 1e18, 1e18, 16.0),
                mem(2, "rf", rf_cap, 1e18, 1e18, 1.0, true)};
  return env;
}

// array that consumes a big shared buffer directly; no register level modeled
unit_env stream_env2(std::int64_t rows, std::int64_t cols,
                     double dram_bw = 1e18, double llb_cap = 0.0) {
  unit_env env;
  env.unit_id = "s";
  env.rows = rows;
  env.cols = cols;
  env.pe_count = rows * cols;
  env.attach_per_pe = false;
  env.levels = {mem(0, "dram", 0.0, dram_bw, dram_bw, 128.0),
                mem(1, "llb", llb_cap, 1e18, 1e18, 16.0)};
  return env;
}

unit_env stream_env3(std::int64_t rows, std::int64_t cols) {
  unit_env env = stream_env2(rows, cols);
  env.levels = {mem(0, "dram", 0.0, 1e18, 1e18, 128.0),
                mem(1, "llb", 0.0, 1e18, 1e18, 16.0),
                mem(2, "l1", 0.0, 1e18, 1e18, 4.0)};
  return env;
}

mapping make_mapping(std::vector<level_tiling> levels, dim4 rd,
                     std::int64_t rf, dim4 cd, std::int64_t cf) {
  mapping m;
  m.levels = std::move(levels);
  m.row_dim = rd;
  m.row_factor = rf;
  m.col_dim = cd;
  m.col_factor = cf;
  return m;
}

void check_against_oracle(const einsum_op& op, const mapping& m,
                          const unit_env& env) {
  std::string why;
  auto cost = evaluate_mapping(op, m, env, &why);
  REQUIRE_MESSAGE(cost.has_value(), why);
  auto oracle = simulate_traffic(op, m, env);
  REQUIRE(oracle.reads.size() == env.levels.size());
  CHECK(cost->macs_padded == oracle.macs);
  for (std::size_t i = 0; i < env.levels.size(); ++i) {
    INFO("level ", i, " (", env.levels[i].name, ") mapping ", m.to_string());
    CHECK(cost->per_level[i].reads == oracle.reads[i]);
    CHECK(cost->per_level[i].writes == oracle.writes[i]);
  }
}

}  // namespace

TEST_CASE("untiled 2x2x2 on one PE moves each operand word once") {
  einsum_op op = make_op(1, 2, 2, 2);
  unit_env env = pe_env2(1, 1, 256.0);
  mapping m = make_mapping({{{1, 1, 1, 1}, dim4::K}, {{1, 2, 2, 2}, dim4::K}},
                           dim4::M, 1, dim4::N, 1);
  auto cost = evaluate_mapping(op, m, env);
  REQUIRE(cost.has_value());
  CHECK(cost->compute_cycles == 8.0);
  CHECK(cost->per_level[0].reads == 8.0);   // A 4 + B 4
  CHECK(cost->per_level[0].writes == 4.0);  // C once
  CHECK(cost->latency_cycles == 8.0);
  CHECK(cost->limiting_depth == -1);
  CHECK(cost->utilization == doctest::Approx(1.0));
  check_against_oracle(op, m, env);
}

TEST_CASE("all-K innermost accumulates in place, one output write per word") {
  einsum_op op = make_op(1, 4, 4, 4);
  unit_env env = pe_env3(1, 1);
  // K lives entirely at the registers; M,N walked above it
  mapping m = make_mapping({{{1, 2, 2, 1}, dim4::K},
                            {{1, 2, 2, 1}, dim4::K},
                            {{1, 1, 1, 4}, dim4::K}},
                           dim4::M, 1, dim4::N, 1);
  auto cost = evaluate_mapping(op, m, env);
  REQUIRE(cost.has_value());
  CHECK(cost->per_level[0].writes == 16.0);  // M*N exactly once
  // no partial-sum round trips: reads are pure operand fills. A refills per
  // M step (16), B per (M,N) step because N inside evicts it (32).
  CHECK(cost->per_level[0].reads == 16.0 + 32.0);
  check_against_oracle(op, m, env);
}

TEST_CASE("splitting K above the registers costs partial-sum round trips") {
  einsum_op op = make_op(1, 4, 4, 4);
  unit_env env = pe_env3(1, 1);
  // K at the top with N inside it: every output tile is evicted per N step
  // and restored on the next K pass
  mapping hi_k = make_mapping({{{1, 2, 2, 4}, dim4::N},
                               {{1, 2, 2, 1}, dim4::K},
                               {{1, 1, 1, 1}, dim4::K}},
                              dim4::M, 1, dim4::N, 1);
  auto cost = evaluate_mapping(op, hi_k, env);
  REQUIRE(cost.has_value());
  CHECK(cost->per_level[0].writes == 64.0);        // 16 words x 4 K-steps
  CHECK(cost->per_level[0].reads >= 64.0 - 16.0);  // restores come back down
  check_against_oracle(op, hi_k, env);

  // but K innermost at the top leaves the buffered tile accumulating in
  // place: the partial sums never reach DRAM
  mapping k_inner = make_mapping({{{1, 2, 2, 4}, dim4::K},
                                  {{1, 2, 2, 1}, dim4::K},
                                  {{1, 1, 1, 1}, dim4::K}},
                                 dim4::M, 1, dim4::N, 1);
  auto ci = evaluate_mapping(op, k_inner, env);
  REQUIRE(ci.has_value());
  CHECK(ci->per_level[0].writes == 16.0);
  check_against_oracle(op, k_inner, env);
}

TEST_CASE("inner loop choice moves the refetch boundary") {
  einsum_op op = make_op(1, 2, 2, 2);
  unit_env env = stream_env2(1, 1);
  // N and K both walked at DRAM; whichever sits innermost forces A refetches
  mapping k_inner = make_mapping({{{1, 1, 2, 2}, dim4::K}, {{1, 2, 1, 1}, dim4::K}},
                                 dim4::M, 1, dim4::N, 1);
  mapping n_inner = make_mapping({{{1, 1, 2, 2}, dim4::N}, {{1, 2, 1, 1}, dim4::K}},
                                 dim4::M, 1, dim4::N, 1);
  auto ck = evaluate_mapping(op, k_inner, env);
  auto cn = evaluate_mapping(op, n_inner, env);
  REQUIRE(ck.has_value());
  REQUIRE(cn.has_value());
  // inner=K (loops N,K): the A tile dies every K step (8 fill words), the
  // output tile rides out the whole K reduction so DRAM sees it once.
  // inner=N (loops K,N): A survives N and refills per K step (4 words), but
  // now the output is evicted per N step and K above restores it (8 words).
  CHECK(ck->per_level[0].writes == 4.0);
  CHECK(cn->per_level[0].writes == 8.0);
  CHECK(ck->per_level[1].writes == 16.0);  // A 8 + B 4 + C 4
  CHECK(cn->per_level[1].writes == 16.0);  // A 4 + B 4 + C 8
  check_against_oracle(op, k_inner, env);
  check_against_oracle(op, n_inner, env);
}

TEST_CASE("spatial multicast collapses parent reads but not child fills") {
  einsum_op op = make_op(1, 4, 4, 2);
  unit_env env = pe_env2(2, 2);
  // M across rows, N across cols: A is N-agnostic so both columns share it
  mapping m = make_mapping({{{1, 1, 1, 1}, dim4::K}, {{1, 2, 2, 2}, dim4::K}},
                           dim4::M, 2, dim4::N, 2);
  auto cost = evaluate_mapping(op, m, env);
  REQUIRE(cost.has_value());
  // per-PE A tile = 2x2=4 words; 4 instances write it, 2 distinct row copies
  // leave DRAM. same for B mirrored across rows.
  CHECK(cost->per_level[0].reads == 2.0 * 4.0 + 2.0 * 4.0);
  check_against_oracle(op, m, env);
}

TEST_CASE("traffic model equals the literal walk across random mappings") {
  std::mt19937_64 rng(2026);
  auto rnd_dim = [&](std::int64_t cap) {
    return 1 + std::int64_t(rng() % cap);
  };
  auto rnd_map = [&](const einsum_op& op, const unit_env& env) {
    std::size_t n = env.levels.size();
    mapping m;
    m.levels.resize(n);
    m.row_dim = all_dims[rng() % 4];
    m.col_dim = all_dims[rng() % 4];
    std::int64_t rd = dim_of(op.dims, m.row_dim);
    std::int64_t cd = dim_of(op.dims, m.col_dim);
    m.row_factor = 1 + std::int64_t(rng() % std::min<std::int64_t>(env.rows, rd));
    m.col_factor = 1 + std::int64_t(rng() % std::min<std::int64_t>(env.cols, cd));
    for (auto& lt : m.levels) {
      lt.inner = all_dims[rng() % 4];
      for (int d = 0; d < 4; ++d) lt.f[d] = 1 + std::int64_t(rng() % 2);
    }
    // grow the outermost factor until the nest covers each dimension
    for (dim4 d : all_dims) {
      std::int64_t need = dim_of(op.dims, d);
      while (m.padded(d) < need) ++m.levels[0].f[static_cast<int>(d)];
    }
    return m;
  };

  auto drive = [&](const unit_env& env, int cases, std::int64_t dim_cap) {
    int checked = 0;
    while (checked < cases) {
      einsum_op op =
          make_op(rnd_dim(2), rnd_dim(dim_cap), rnd_dim(dim_cap), rnd_dim(dim_cap));
      mapping m = rnd_map(op, env);
      if (evaluate_mapping(op, m, env)) {
        check_against_oracle(op, m, env);
        ++checked;
      }
    }
  };

  SUBCASE("registers straight under DRAM") { drive(pe_env2(2, 2), 60, 6); }
  SUBCASE("three deep with a shared buffer") { drive(pe_env3(2, 2), 60, 6); }
  SUBCASE("wide array") { drive(pe_env2(4, 4), 30, 8); }
  SUBCASE("streaming attach") { drive(stream_env2(2, 2), 60, 6); }
  SUBCASE("streaming attach three deep") { drive(stream_env3(2, 4), 40, 6); }
}

TEST_CASE("padding waste is charged to compute, never to true work") {
  einsum_op op = make_op(1, 7, 4, 4);
  unit_env env = pe_env2(4, 4);
  // M=7 over 4 rows forces a padded extent of 8
  mapping m = make_mapping({{{1, 2, 1, 1}, dim4::K}, {{1, 1, 1, 4}, dim4::K}},
                           dim4::M, 4, dim4::N, 4);
  auto cost = evaluate_mapping(op, m, env);
  REQUIRE(cost.has_value());
  CHECK(cost->macs_true == 7.0 * 4 * 4);
  CHECK(cost->macs_padded == 8.0 * 4 * 4);
  CHECK(cost->waste == doctest::Approx(8.0 / 7.0));
  CHECK(cost->compute_cycles == doctest::Approx(8.0 * 4 * 4 / 16.0));
  check_against_oracle(op, m, env);
}

TEST_CASE("capacity is enforced per level with the word size applied") {
  einsum_op op = make_op(1, 4, 4, 4);
  op.word_bits = 16;
  unit_env env = pe_env3(1, 1, 1e18, 0.0, 16.0);  // 16-byte registers
  // rf tile: A 2x2 + B 2x2 + C 2x2 = 12 words = 24 bytes > 16
  mapping too_big = make_mapping({{{1, 2, 2, 2}, dim4::K},
                                  {{1, 1, 1, 1}, dim4::K},
                                  {{1, 2, 2, 2}, dim4::K}},
                                 dim4::M, 1, dim4::N, 1);
  std::string why;
  CHECK_FALSE(evaluate_mapping(op, too_big, env, &why).has_value());
  CHECK(why.find("rf") != std::string::npos);
  // one step smaller fits: A 2 + B 2 + C 4... still 8 words = 16 bytes exactly
  mapping fits = make_mapping({{{1, 2, 2, 4}, dim4::K},
                               {{1, 1, 1, 1}, dim4::K},
                               {{1, 2, 2, 1}, dim4::K}},
                              dim4::M, 1, dim4::N, 1);
  CHECK(evaluate_mapping(op, fits, env, &why).has_value());
}

TEST_CASE("quartered bandwidth quadruples a memory-bound latency") {
  einsum_op op = make_op(1, 1, 1, 64);
  mapping m = make_mapping({{{1, 1, 1, 1}, dim4::K}, {{1, 1, 1, 64}, dim4::K}},
                           dim4::M, 1, dim4::N, 1);
  unit_env full = pe_env2(1, 1, 1.0);
  unit_env quarter = pe_env2(1, 1, 0.25);
  auto cf = evaluate_mapping(op, m, full);
  auto cq = evaluate_mapping(op, m, quarter);
  REQUIRE(cf.has_value());
  REQUIRE(cq.has_value());
  REQUIRE(cf->limiting_depth == 0);
  REQUIRE(cq->limiting_depth == 0);
  CHECK(cq->latency_cycles == doctest::Approx(4.0 * cf->latency_cycles));
  // and the traffic itself is bandwidth-independent
  CHECK(cq->per_level[0].reads == cf->per_level[0].reads);
}

TEST_CASE("more bandwidth never hurts a fixed mapping") {
  std::mt19937_64 rng(11);
  unit_env base = pe_env3(2, 2, 4.0);
  for (int t = 0; t < 40; ++t) {
    einsum_op op = make_op(1, 1 + std::int64_t(rng() % 6),
                           1 + std::int64_t(rng() % 6),
                           1 + std::int64_t(rng() % 6));
    mapping m = make_mapping({{{1, 2, 2, 2}, dim4::K},
                              {{1, 2, 2, 2}, dim4::K},
                              {{1, 2, 2, 2}, dim4::K}},
                             dim4::M, std::int64_t(1 + rng() % 2), dim4::N,
                             std::int64_t(1 + rng() % 2));
    for (dim4 d : all_dims)
      while (m.padded(d) < dim_of(op.dims, d)) ++m.levels[0].f[int(d)];
    auto slow = evaluate_mapping(op, m, base);
    if (!slow) continue;
    unit_env fast = base;
    fast.levels[0].read_bw *= 3;
    fast.levels[0].write_bw *= 3;
    auto quick = evaluate_mapping(op, m, fast);
    REQUIRE(quick.has_value());
    CHECK(quick->latency_cycles <= slow->latency_cycles);
  }
}

TEST_CASE("energy sums across levels plus the MAC term") {
  einsum_op op = make_op(2, 4, 4, 4);
  unit_env env = pe_env3(2, 2);
  env.mac_energy = 0.25;
  mapping m = make_mapping({{{2, 1, 1, 2}, dim4::K},
                            {{1, 2, 2, 1}, dim4::K},
                            {{1, 1, 1, 2}, dim4::K}},
                           dim4::M, 2, dim4::N, 2);
  auto cost = evaluate_mapping(op, m, env);
  REQUIRE(cost.has_value());
  double sum = cost->mac_energy;
  for (const auto& lt : cost->per_level) {
    CHECK(lt.energy ==
          doctest::Approx((lt.reads + lt.writes) *
                          env.levels[&lt - cost->per_level.data()]
                              .energy_per_word));
    sum += lt.energy;
  }
  CHECK(cost->energy_total == doctest::Approx(sum));
  CHECK(cost->mac_energy == doctest::Approx(cost->macs_padded * 0.25));
}

TEST_CASE("vector ops stream the output through every level") {
  einsum_op op = make_op(4, 8, 8, 1);
  op.vector_op = true;
  unit_env env = pe_env3(2, 2, 16.0);
  op_cost cost = evaluate_vector_op(op, env);
  double words = 4.0 * 8 * 8;
  for (std::size_t i = 0; i < env.levels.size(); ++i) {
    CHECK(cost.per_level[i].reads == words);
    CHECK(cost.per_level[i].writes == words);
  }
  CHECK(cost.latency_cycles == doctest::Approx(words / 16.0));
  CHECK(cost.macs_true == 0.0);
  double e = 0;
  for (const auto& lt : cost.per_level) e += lt.energy;
  CHECK(cost.energy_total == doctest::Approx(e));
}

TEST_CASE("mappings that do not cover the op are rejected with a reason") {
  einsum_op op = make_op(1, 8, 8, 8);
  unit_env env = pe_env2(2, 2);
  mapping short_m = make_mapping({{{1, 1, 1, 1}, dim4::K}, {{1, 2, 2, 2}, dim4::K}},
                                 dim4::M, 2, dim4::N, 2);
  std::string why;
  CHECK_FALSE(evaluate_mapping(op, short_m, env, &why).has_value());
  CHECK(why.find("cover") != std::string::npos);
  mapping wrong_depth = make_mapping({{{1, 8, 8, 8}, dim4::K}}, dim4::M, 1,
                                     dim4::N, 1);
  CHECK_FALSE(evaluate_mapping(op, wrong_depth, env, &why).has_value());
}

TEST_CASE("level shares derived from a machine configuration") {
  machine_config m;
  m.name = "pair";
  m.levels = {{"dram", 0, 0.0, 256, 256, 128.0, true},
              {"llb", 1, 4096.0 * 1024, 1e18, 1e18, 16.0, true},
              {"l1", 2, 128.0 * 1024, 1e18, 1e18, 4.0, false},
              {"rf", 3, 64.0, 1e18, 1e18, 1.0, false}};
  sub_accel hi{"hi", 3 * 256, 3, 256, 3, 0.5, 0.8};
  sub_accel lo{"lo", 256, 1, 256, 3, 0.5, 0.2};
  m.subs = {hi, lo};
  m.fsm_groups = {{"hi"}, {"lo"}};

  unit_env eh = build_unit_env(m, "hi");
  REQUIRE(eh.levels.size() == 4);
  CHECK(eh.attach_per_pe);
  CHECK(eh.levels[0].read_bw == doctest::Approx(128.0));   // half of 256
  CHECK(eh.levels[1].cap_bytes == doctest::Approx(0.8 * 4096.0 * 1024));
  // private l1 splits by PE share: hi holds 3/4 of the PEs under depth 2
  CHECK(eh.levels[2].cap_bytes == doctest::Approx(0.75 * 128.0 * 1024));
  CHECK(eh.levels[3].per_pe);
  CHECK(eh.levels[3].cap_bytes == doctest::Approx(64.0));  // per instance

  // a unit attached above the leaf sees only the shared prefix
  m.subs[1].attach_depth = 1;
  unit_env el = build_unit_env(m, "lo");
  REQUIRE(el.levels.size() == 2);
  CHECK_FALSE(el.attach_per_pe);
  CHECK(el.levels[1].name == "llb");
  // and the leaf unit now owns l1 outright
  unit_env eh2 = build_unit_env(m, "hi");
  CHECK(eh2.levels[2].cap_bytes == doctest::Approx(128.0 * 1024));
}
