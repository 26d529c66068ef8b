#include "hhpsim/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hhpsim {

std::vector<std::int64_t> mapping::encode() const {
  std::vector<std::int64_t> v;
  v.push_back(static_cast<std::int64_t>(row_dim));
  v.push_back(row_factor);
  v.push_back(static_cast<std::int64_t>(col_dim));
  v.push_back(col_factor);
  for (const auto& lt : levels) {
    v.push_back(static_cast<std::int64_t>(lt.inner));
    for (int d = 0; d < 4; ++d) v.push_back(lt.f[d]);
  }
  return v;
}

std::string mapping::to_string() const {
  std::ostringstream os;
  os << "spatial[" << dim_name(row_dim) << ":" << row_factor << " x "
     << dim_name(col_dim) << ":" << col_factor << "]";
  for (std::size_t i = 0; i < levels.size(); ++i) {
    os << " L" << i << "(";
    bool first = true;
    for (dim4 d : all_dims) {
      std::int64_t f = levels[i].f[static_cast<int>(d)];
      if (f == 1) continue;
      if (!first) os << " ";
      os << dim_name(d) << f;
      first = false;
    }
    os << "|in:" << dim_name(levels[i].inner) << ")";
  }
  return os.str();
}

unit_env build_unit_env(const machine_config& cfg, const std::string& sub_id,
                        double mac_energy) {
  unit_env env;
  const sub_accel* sub = cfg.find_sub(sub_id);
  if (!sub) return env;
  env.unit_id = sub_id;
  env.rows = sub->rows;
  env.cols = sub->cols;
  env.pe_count = sub->pe_count;
  env.mac_energy = mac_energy;
  const int leaf = cfg.max_depth();
  env.attach_per_pe = (sub->attach_depth == leaf);
  for (int d = 0; d <= sub->attach_depth; ++d) {
    const memory_level* lv = cfg.level_at(d);
    if (!lv) continue;
    level_use u;
    u.depth = d;
    u.name = lv->name;
    u.shared = lv->shared;
    u.per_pe = (d == leaf);
    u.energy_per_word = lv->energy_per_word;
    u.read_bw = lv->read_bw_words;
    u.write_bw = lv->write_bw_words;
    u.cap_bytes = lv->capacity_bytes;
    if (lv->shared) {
      u.read_bw *= sub->bw_fraction;
      u.write_bw *= sub->bw_fraction;
      if (lv->bounded()) u.cap_bytes *= sub->buf_fraction;
    } else if (!u.per_pe && lv->bounded()) {
      // array buffer split between every sub reaching this depth, by PE count
      std::int64_t users = 0;
      for (const auto& s : cfg.subs)
        if (s.attach_depth >= d) users += s.pe_count;
      if (users > sub->pe_count)
        u.cap_bytes *= double(sub->pe_count) / double(users);
    }
    env.levels.push_back(u);
  }
  return env;
}

namespace {

struct flat_loop {
  dim4 d;
  std::int64_t bound;
};

// loops of levels [0, upto), outermost first, bound-1 loops dropped
std::vector<flat_loop> outer_loops(const mapping& m, std::size_t upto) {
  std::vector<flat_loop> loops;
  for (std::size_t i = 0; i < upto && i < m.levels.size(); ++i) {
    const level_tiling& lt = m.levels[i];
    for (dim4 d : all_dims) {
      if (d == lt.inner) continue;
      std::int64_t b = lt.f[static_cast<int>(d)];
      if (b > 1) loops.push_back({d, b});
    }
    std::int64_t b = lt.f[static_cast<int>(lt.inner)];
    if (b > 1) loops.push_back({lt.inner, b});
  }
  return loops;
}

constexpr std::array<bool, 4> rel_a = {true, true, false, true};   // B,M,K
constexpr std::array<bool, 4> rel_b = {true, false, true, true};   // B,N,K
constexpr std::array<bool, 4> rel_c = {true, true, true, false};   // B,M,N

bool relevant(const std::array<bool, 4>& rel, dim4 d) {
  return rel[static_cast<int>(d)];
}

// product of all loop bounds at or outside the innermost loop touching the
// tensor; 1 when no loop touches it (tile stays resident for the whole run)
double refetch_factor(const std::vector<flat_loop>& loops,
                      const std::array<bool, 4>& rel) {
  std::ptrdiff_t last = -1;
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(loops.size()); ++i)
    if (relevant(rel, loops[i].d)) last = i;
  if (last < 0) return 1.0;
  double f = 1.0;
  for (std::ptrdiff_t i = 0; i <= last; ++i) f *= double(loops[i].bound);
  return f;
}

double footprint(const std::array<bool, 4>& rel, const dims4& tile) {
  double w = 1.0;
  for (dim4 d : all_dims)
    if (relevant(rel, d)) w *= double(tile[static_cast<int>(d)]);
  return w;
}

}  // namespace

std::optional<op_cost> evaluate_mapping(const einsum_op& op, const mapping& m,
                                        const unit_env& env, std::string* why) {
  auto fail = [&](const std::string& msg) -> std::optional<op_cost> {
    if (why) *why = msg;
    return std::nullopt;
  };
  const std::size_t n = env.levels.size();
  if (n == 0) return fail("unit has no memory levels");
  if (m.levels.size() != n) return fail("mapping level count mismatch");
  if (m.row_factor < 1 || m.row_factor > env.rows)
    return fail("row unroll exceeds array rows");
  if (m.col_factor < 1 || m.col_factor > env.cols)
    return fail("col unroll exceeds array cols");
  for (const auto& lt : m.levels)
    for (int d = 0; d < 4; ++d)
      if (lt.f[d] < 1) return fail("non-positive tiling factor");
  for (dim4 d : all_dims)
    if (m.padded(d) < dim_of(op.dims, d))
      return fail("tiling does not cover dim " + std::string(dim_name(d)));

  const double word_bytes = double(op.word_bits) / 8.0;
  double macs_true = double(op.macs());
  double macs_padded = 1.0;
  for (dim4 d : all_dims) macs_padded *= double(m.padded(d));

  // resident tile at each level: product of factors at and below it, spatial
  // extent included except in the per-PE registers where it is distributed
  std::vector<dims4> tile(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (dim4 dd : all_dims) {
      int d = static_cast<int>(dd);
      std::int64_t t = 1;
      for (std::size_t j = i; j < n; ++j) t *= m.levels[j].f[d];
      if (!(env.attach_per_pe && i == n - 1)) t *= m.spatial(dd);
      tile[i][d] = t;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const level_use& lv = env.levels[i];
    if (lv.cap_bytes <= 0) continue;
    double words = footprint(rel_a, tile[i]) + footprint(rel_b, tile[i]) +
                   footprint(rel_c, tile[i]);
    if (words * word_bytes > lv.cap_bytes * (1.0 + 1e-12))
      return fail("tile exceeds capacity of " + lv.name);
  }

  op_cost cost;
  cost.macs_true = macs_true;
  cost.macs_padded = macs_padded;
  cost.waste = macs_padded / macs_true;
  cost.active_pes = m.row_factor * m.col_factor;
  cost.per_level.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    cost.per_level[i].depth = env.levels[i].depth;
    cost.per_level[i].name = env.levels[i].name;
  }
  auto& traffic = cost.per_level;

  const std::size_t a = n - 1;  // attach level index
  const double bmn = double(m.padded(dim4::B)) * double(m.padded(dim4::M)) *
                     double(m.padded(dim4::N));

  if (n == 1) {
    // datapath streams straight out of the root level
    traffic[0].reads += footprint(rel_a, tile[0]) + footprint(rel_b, tile[0]);
    traffic[0].writes += bmn;
  } else {
    // input operand fills per level, refetch factor from the loops above it
    for (const auto* rel : {&rel_a, &rel_b}) {
      for (std::size_t i = 1; i < n; ++i) {
        auto loops = outer_loops(m, i);
        double fills = footprint(*rel, tile[i]) * refetch_factor(loops, *rel);
        double instances = 1.0, distinct = 1.0;
        if (env.attach_per_pe && i == a) {
          instances = double(m.row_factor * m.col_factor);
          if (relevant(*rel, m.row_dim)) distinct *= double(m.row_factor);
          if (relevant(*rel, m.col_dim)) distinct *= double(m.col_factor);
        }
        traffic[i].writes += fills * instances;
        traffic[i - 1].reads += fills * distinct;
      }
      // operand consumption at the attach level
      if (env.attach_per_pe) {
        traffic[a].reads += macs_padded;
      } else {
        auto loops = outer_loops(m, a);
        traffic[a].reads += footprint(*rel, tile[a]) * refetch_factor(loops, *rel);
      }
    }

    // output: fills at level i, spatial-reduced dims collapse in-network
    auto out_fills = [&](std::size_t i) {
      auto loops = outer_loops(m, i);
      double f = footprint(rel_c, tile[i]) * refetch_factor(loops, rel_c);
      if (env.attach_per_pe && i == a) {
        if (relevant(rel_c, m.row_dim)) f *= double(m.row_factor);
        if (relevant(rel_c, m.col_dim)) f *= double(m.col_factor);
      }
      return f;
    };
    std::vector<double> fc(n);
    for (std::size_t i = 0; i < n; ++i) fc[i] = out_fills(i);
    // every fill beyond one pass per output element is a partial-sum round trip
    if (env.attach_per_pe) {
      traffic[a].reads += macs_padded;         // accumulator read-modify-write
      traffic[a].writes += macs_padded;
      traffic[a].reads += fc[a];               // tile evictions out
      traffic[a].writes += fc[a] - bmn;        // partial restores back in
    } else {
      traffic[a].writes += fc[a];              // accumulator flushes into buffer
      traffic[a].reads += 2.0 * fc[a] - bmn;   // evictions + partial restores
    }
    for (std::size_t i = 1; i < a; ++i) {
      traffic[i].writes += fc[i + 1] + (fc[i] - bmn);
      traffic[i].reads += fc[i] + (fc[i + 1] - bmn);
    }
    traffic[0].writes += fc[1];
    traffic[0].reads += fc[1] - bmn;
  }

  cost.compute_cycles = macs_padded / double(cost.active_pes);
  cost.transfer_cycles = 0.0;
  cost.limiting_depth = -1;
  for (std::size_t i = 0; i < n; ++i) {
    const level_use& lv = env.levels[i];
    double rbw = lv.read_bw, wbw = lv.write_bw;
    if (lv.per_pe) {
      rbw *= double(cost.active_pes);
      wbw *= double(cost.active_pes);
    }
    double cyc = std::max(traffic[i].reads / rbw, traffic[i].writes / wbw);
    if (cyc > cost.transfer_cycles) {
      cost.transfer_cycles = cyc;
      cost.limiting_depth = lv.depth;
    }
  }
  cost.latency_cycles = std::max(cost.compute_cycles, cost.transfer_cycles);
  if (cost.compute_cycles >= cost.transfer_cycles) cost.limiting_depth = -1;

  cost.mac_energy = macs_padded * env.mac_energy;
  cost.energy_total = cost.mac_energy;
  for (std::size_t i = 0; i < n; ++i) {
    traffic[i].energy =
        (traffic[i].reads + traffic[i].writes) * env.levels[i].energy_per_word;
    cost.energy_total += traffic[i].energy;
  }
  cost.utilization = macs_true / double(env.pe_count) / cost.latency_cycles;
  return cost;
}

op_cost evaluate_vector_op(const einsum_op& op, const unit_env& env) {
  op_cost cost;
  double words = double(op.words_c());
  cost.per_level.resize(env.levels.size());
  cost.transfer_cycles = 0.0;
  cost.limiting_depth = env.levels.empty() ? 0 : env.levels.front().depth;
  for (std::size_t i = 0; i < env.levels.size(); ++i) {
    const level_use& lv = env.levels[i];
    auto& t = cost.per_level[i];
    t.depth = lv.depth;
    t.name = lv.name;
    t.reads = words;
    t.writes = words;
    t.energy = 2.0 * words * lv.energy_per_word;
    cost.energy_total += t.energy;
    double rbw = lv.read_bw, wbw = lv.write_bw;
    double cyc = std::max(words / rbw, words / wbw);
    if (cyc > cost.transfer_cycles) {
      cost.transfer_cycles = cyc;
      cost.limiting_depth = lv.depth;
    }
  }
  cost.latency_cycles = std::max(1.0, cost.transfer_cycles);
  return cost;
}

}  // namespace hhpsim
