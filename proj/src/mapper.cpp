#include "hhpsim/mapper.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

namespace hhpsim {

namespace {

std::vector<std::int64_t> divisors(std::int64_t v) {
  std::vector<std::int64_t> out;
  for (std::int64_t d = 1; d * d <= v; ++d) {
    if (v % d) continue;
    out.push_back(d);
    if (d != v / d) out.push_back(v / d);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::int64_t next_pow2(std::int64_t v) {
  std::int64_t p = 1;
  while (p < v) p *= 2;
  return p;
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t stream_seed(const einsum_op& op, const unit_env& env,
                          std::uint64_t seed) {
  std::uint64_t h = 1469598103934665603ULL;
  h = fnv1a(h, op.dims.data(), sizeof(op.dims));
  h = fnv1a(h, &op.word_bits, sizeof(op.word_bits));
  h = fnv1a(h, env.unit_id.data(), env.unit_id.size());
  std::uint64_t n = env.levels.size();
  h = fnv1a(h, &n, sizeof(n));
  return h ^ seed;
}

struct best_tracker {
  bool found = false;
  mapping m;
  op_cost cost;
  std::vector<std::int64_t> enc;

  void offer(const mapping& cand, const op_cost& c) {
    auto e = cand.encode();
    if (found) {
      if (c.latency_cycles > cost.latency_cycles) return;
      if (c.latency_cycles == cost.latency_cycles) {
        if (c.energy_total > cost.energy_total) return;
        if (c.energy_total == cost.energy_total && e >= enc) return;
      }
    }
    found = true;
    m = cand;
    cost = c;
    enc = std::move(e);
  }
};

struct reject_log {
  std::map<std::string, std::int64_t> counts;
  void add(const std::string& why) { ++counts[why]; }
  std::string dominant() const {
    std::string best = "no candidate generated";
    std::int64_t n = 0;
    for (const auto& [k, v] : counts)
      if (v > n) {
        n = v;
        best = k;
      }
    return best;
  }
};

// greedy tile growth from the attach level outward, largest divisor of the
// remaining extent that still fits each capacity; leftovers go off-chip
mapping greedy_fill(const einsum_op& op, const unit_env& env, dim4 rd,
                    std::int64_t rf, dim4 cd, std::int64_t cf,
                    dim4 outer_inner) {
  const std::size_t n = env.levels.size();
  mapping m;
  m.levels.assign(n, level_tiling{});
  m.row_dim = rd;
  m.row_factor = rf;
  m.col_dim = cd;
  m.col_factor = cf;
  dims4 q;
  for (int d = 0; d < 4; ++d) {
    std::int64_t s = m.spatial(static_cast<dim4>(d));
    q[d] = (op.dims[d] + s - 1) / s;
  }
  const double word_bytes = double(op.word_bits) / 8.0;
  // footprint of the level-lvl tile given current factors
  auto fits = [&](std::size_t lvl) {
    const level_use& u = env.levels[lvl];
    if (u.cap_bytes <= 0) return true;
    dims4 t;
    for (int d = 0; d < 4; ++d) {
      std::int64_t v = 1;
      for (std::size_t j = lvl; j < n; ++j) v *= m.levels[j].f[d];
      if (!(env.attach_per_pe && lvl == n - 1))
        v *= m.spatial(static_cast<dim4>(d));
      t[d] = v;
    }
    double words = double(t[0]) * t[1] * t[3] + double(t[0]) * t[3] * t[2] +
                   double(t[0]) * t[1] * t[2];
    return words * word_bytes <= env.levels[lvl].cap_bytes;
  };
  const dim4 priority[4] = {dim4::K, dim4::M, dim4::N, dim4::B};
  for (std::size_t lvl = n; lvl-- > 1;) {
    for (dim4 dd : priority) {
      int d = static_cast<int>(dd);
      std::int64_t best = 1;
      for (std::int64_t f : divisors(q[d])) {
        m.levels[lvl].f[d] = f;
        if (fits(lvl))
          best = f;
        else
          break;
      }
      m.levels[lvl].f[d] = best;
      q[d] /= best;
    }
    m.levels[lvl].inner = dim4::K;
  }
  for (int d = 0; d < 4; ++d) m.levels[0].f[d] = q[d];
  m.levels[0].inner = outer_inner;
  return m;
}

void offer_candidate(const einsum_op& op, const unit_env& env, const mapping& m,
                     best_tracker& best, reject_log& rejects,
                     std::int64_t& evaluated, std::int64_t& feasible) {
  ++evaluated;
  std::string why;
  if (auto c = evaluate_mapping(op, m, env, &why)) {
    ++feasible;
    best.offer(m, *c);
  } else {
    rejects.add(why);
  }
}

}  // namespace

search_result search_mapping(const einsum_op& op, const unit_env& env,
                             const mapping_constraints& mc,
                             const search_budget& budget) {
  search_result res;
  const std::size_t n = env.levels.size();
  if (n == 0) {
    res.fail_reason = "unit reaches no memory levels";
    return res;
  }
  best_tracker best;
  reject_log rejects;

  std::vector<dim4> col_dims(all_dims.begin(), all_dims.end());
  if (mc.forced_col_dim) col_dims = {*mc.forced_col_dim};

  auto spatial_cap = [&](dim4 d, std::int64_t physical) {
    return std::max<std::int64_t>(
        1, std::min(physical, dim_of(op.dims, d)));
  };

  if (budget.mode == search_budget::mode_t::exhaustive) {
    // every spatial unroll, padded-extent variant, ordered divisor split and
    // inner-loop choice; meant for small shapes and shallow hierarchies
    for (dim4 rd : all_dims) {
      for (dim4 cd : col_dims) {
        for (std::int64_t rf = 1; rf <= spatial_cap(rd, env.rows); ++rf) {
          for (std::int64_t cf = 1; cf <= spatial_cap(cd, env.cols); ++cf) {
            mapping proto;
            proto.levels.assign(n, level_tiling{});
            proto.row_dim = rd;
            proto.row_factor = rf;
            proto.col_dim = cd;
            proto.col_factor = cf;
            // per-dim temporal extents, exact or padded to a power of two
            std::array<std::vector<std::int64_t>, 4> extents;
            for (int d = 0; d < 4; ++d) {
              std::int64_t s = proto.spatial(static_cast<dim4>(d));
              std::int64_t q = (op.dims[d] + s - 1) / s;
              extents[d] = {q};
              if (next_pow2(q) != q) extents[d].push_back(next_pow2(q));
            }
            std::array<std::size_t, 4> ei{};
            while (true) {
              // ordered factorizations of each extent across the levels
              std::array<std::vector<std::vector<std::int64_t>>, 4> fsets;
              for (int d = 0; d < 4; ++d) {
                std::vector<std::vector<std::int64_t>>& fs = fsets[d];
                std::vector<std::int64_t> cur(n, 1);
                std::function<void(std::size_t, std::int64_t)> rec =
                    [&](std::size_t lvl, std::int64_t rem) {
                      if (lvl + 1 == n) {
                        cur[lvl] = rem;
                        fs.push_back(cur);
                        return;
                      }
                      for (std::int64_t dv : divisors(rem)) {
                        cur[lvl] = dv;
                        rec(lvl + 1, rem / dv);
                      }
                    };
                rec(0, extents[d][ei[d]]);
              }
              std::array<std::size_t, 4> fi{};
              while (true) {
                for (int d = 0; d < 4; ++d)
                  for (std::size_t lvl = 0; lvl < n; ++lvl)
                    proto.levels[lvl].f[d] = fsets[d][fi[d]][lvl];
                // all inner-dim choices
                std::vector<std::size_t> ic(n, 0);
                while (true) {
                  for (std::size_t lvl = 0; lvl < n; ++lvl)
                    proto.levels[lvl].inner = all_dims[ic[lvl]];
                  offer_candidate(op, env, proto, best, rejects, res.evaluated,
                                  res.feasible);
                  std::size_t j = n;
                  bool wrapped = true;
                  while (j-- > 0) {
                    if (++ic[j] < 4) {
                      wrapped = false;
                      break;
                    }
                    ic[j] = 0;
                  }
                  if (wrapped) break;
                }
                bool wrapped = true;
                for (std::size_t j = 4; j-- > 0;) {
                  if (++fi[j] < fsets[j].size()) {
                    wrapped = false;
                    break;
                  }
                  fi[j] = 0;
                }
                if (wrapped) break;
              }
              bool wrapped = true;
              for (std::size_t j = 4; j-- > 0;) {
                if (++ei[j] < extents[j].size()) {
                  wrapped = false;
                  break;
                }
                ei[j] = 0;
              }
              if (wrapped) break;
            }
          }
        }
      }
    }
  } else {
    // deterministic greedy seeds: every spatial dim pair at full unroll, a few
    // outer inner-loop choices
    for (dim4 rd : all_dims) {
      for (dim4 cd : col_dims) {
        std::int64_t rf = spatial_cap(rd, env.rows);
        std::int64_t cf = spatial_cap(cd, env.cols);
        if (rd == cd) {
          // both axes on one dim: split it across rows first
          std::int64_t need = (dim_of(op.dims, rd) + rf - 1) / rf;
          cf = std::max<std::int64_t>(1, std::min(env.cols, need));
        }
        for (dim4 oi : all_dims) {
          mapping g = greedy_fill(op, env, rd, rf, cd, cf, oi);
          offer_candidate(op, env, g, best, rejects, res.evaluated,
                          res.feasible);
        }
      }
    }
    // minimal streaming fallback keeps the op mappable under tiny buffers
    {
      mapping fallback;
      fallback.levels.assign(n, level_tiling{});
      for (int d = 0; d < 4; ++d) fallback.levels[0].f[d] = op.dims[d];
      offer_candidate(op, env, fallback, best, rejects, res.evaluated,
                      res.feasible);
    }

    std::mt19937_64 rng(stream_seed(op, env, budget.seed));
    auto rnd = [&](std::int64_t m) {
      return std::int64_t(rng() % std::uint64_t(m));
    };
    for (std::int64_t attempt = 0; attempt < budget.samples; ++attempt) {
      mapping cand;
      cand.levels.assign(n, level_tiling{});
      cand.row_dim = all_dims[std::size_t(rnd(4))];
      cand.col_dim = mc.forced_col_dim ? *mc.forced_col_dim
                                       : all_dims[std::size_t(rnd(4))];
      cand.row_factor = 1 + rnd(spatial_cap(cand.row_dim, env.rows));
      cand.col_factor = 1 + rnd(spatial_cap(cand.col_dim, env.cols));
      for (int d = 0; d < 4; ++d) {
        std::int64_t s = cand.spatial(static_cast<dim4>(d));
        std::int64_t q = (op.dims[d] + s - 1) / s;
        if (rnd(2) == 1) q = next_pow2(q);
        // random ordered divisor split over the levels
        for (std::size_t lvl = 0; lvl + 1 < n; ++lvl) {
          auto dv = divisors(q);
          std::int64_t pick = dv[std::size_t(rnd(std::int64_t(dv.size())))];
          cand.levels[lvl].f[d] = pick;
          q /= pick;
        }
        cand.levels[n - 1].f[d] = q;
      }
      for (std::size_t lvl = 0; lvl < n; ++lvl)
        cand.levels[lvl].inner = all_dims[std::size_t(rnd(4))];
      offer_candidate(op, env, cand, best, rejects, res.evaluated,
                      res.feasible);
    }
  }

  if (!best.found) {
    res.fail_reason = rejects.dominant();
    return res;
  }
  res.found = true;
  res.best = best.m;
  res.cost = best.cost;
  return res;
}

plan_result plan_cascade(const cascade& c, const machine_config& cfg,
                         const std::map<std::string, std::string>& assignment,
                         const search_budget& budget, double mac_energy,
                         bool keep_going) {
  plan_result out;
  std::map<std::string, unit_env> envs;
  std::map<std::string, mapping_constraints> cons;
  auto env_for = [&](const std::string& unit) -> unit_env& {
    auto it = envs.find(unit);
    if (it == envs.end()) {
      it = envs.emplace(unit, build_unit_env(cfg, unit, mac_energy)).first;
      cons.emplace(unit, derive_mapping_constraints(cfg, unit));
    }
    return it->second;
  };

  struct memo_entry {
    search_result sr;
  };
  std::map<std::string, memo_entry> memo;
  auto memo_key = [](const einsum_op& op, const std::string& unit) {
    std::ostringstream os;
    os << unit << "|" << op.dims[0] << "," << op.dims[1] << "," << op.dims[2]
       << "," << op.dims[3] << "|" << op.word_bits;
    return os.str();
  };

  for (const auto& op : c.ops) {
    auto ait = assignment.find(op.id);
    if (ait == assignment.end()) {
      out.errors.push_back(op.id + ": no unit assigned");
      if (!keep_going) return out;
      continue;
    }
    const std::string& unit = ait->second;
    if (!cfg.find_sub(unit)) {
      out.errors.push_back(op.id + ": unknown unit " + unit);
      if (!keep_going) return out;
      continue;
    }
    unit_env& env = env_for(unit);
    op_plan plan;
    plan.unit = unit;
    if (op.vector_op) {
      plan.vector_op = true;
      plan.cost = evaluate_vector_op(op, env);
      out.by_op.emplace(op.id, std::move(plan));
      continue;
    }
    std::string key = memo_key(op, unit);
    auto mit = memo.find(key);
    if (mit == memo.end()) {
      ++out.stats.searches;
      memo_entry e;
      e.sr = search_mapping(op, env, cons.at(unit), budget);
      mit = memo.emplace(key, std::move(e)).first;
    } else {
      ++out.stats.memo_hits;
    }
    const search_result& sr = mit->second.sr;
    if (!sr.found) {
      out.errors.push_back(op.id + ": unmappable on " + unit + " (" +
                           sr.fail_reason + ")");
      if (!keep_going) return out;
      continue;
    }
    plan.m = sr.best;
    plan.cost = sr.cost;
    out.by_op.emplace(op.id, std::move(plan));
  }
  return out;
}

}  // namespace hhpsim
