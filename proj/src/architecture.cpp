#include "hhpsim/architecture.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

namespace hhpsim {

int machine_config::max_depth() const {
  int d = 0;
  for (const auto& lv : levels) d = std::max(d, lv.depth);
  return d;
}

const memory_level* machine_config::level_at(int depth) const {
  for (const auto& lv : levels)
    if (lv.depth == depth) return &lv;
  return nullptr;
}

const sub_accel* machine_config::find_sub(const std::string& id) const {
  for (const auto& s : subs)
    if (s.id == id) return &s;
  return nullptr;
}

std::int64_t machine_config::total_pes() const {
  std::int64_t n = 0;
  for (const auto& s : subs) n += s.pe_count;
  return n;
}

double machine_config::ai_tipping() const {
  const memory_level* dram = level_at(0);
  if (!dram || dram->read_bw_words <= 0) return 0.0;
  return peak_macs_per_cycle() / dram->read_bw_words;
}

const char* hier_name(hier_class h) {
  return h == hier_class::leaf_only ? "leaf-only" : "hierarchical";
}

const char* het_name(het_class h) {
  switch (h) {
    case het_class::homogeneous: return "homogeneous";
    case het_class::intra_node: return "intra-node";
    case het_class::cross_node: return "cross-node";
    case het_class::cross_depth: return "cross-depth";
    case het_class::compound: return "compound";
  }
  return "?";
}

namespace {
using unit_type = std::tuple<std::int64_t, std::int64_t, std::int64_t>;
unit_type type_of(const sub_accel& s) { return {s.pe_count, s.rows, s.cols}; }
}  // namespace

classification classify(const machine_config& cfg) {
  classification out;
  const int leaf = cfg.max_depth();
  for (const auto& s : cfg.subs)
    if (s.attach_depth < leaf) out.hier = hier_class::hierarchical;

  std::set<unit_type> types;
  for (const auto& s : cfg.subs) types.insert(type_of(s));
  if (types.size() <= 1) {
    out.het = het_class::homogeneous;
    return out;
  }

  // group index per sub id
  std::map<std::string, int> group_of;
  for (std::size_t g = 0; g < cfg.fsm_groups.size(); ++g)
    for (const auto& id : cfg.fsm_groups[g]) group_of[id] = int(g);

  // intra-node: some fused group mixes unit types
  bool intra = false;
  for (const auto& grp : cfg.fsm_groups) {
    std::set<unit_type> seen;
    for (const auto& id : grp)
      if (const sub_accel* s = cfg.find_sub(id)) seen.insert(type_of(*s));
    if (seen.size() >= 2) intra = true;
  }

  // cross-node: two different types side by side at one depth under separate FSMs
  bool cross_node = false;
  for (const auto& a : cfg.subs)
    for (const auto& b : cfg.subs) {
      if (type_of(a) == type_of(b)) continue;
      if (a.attach_depth != b.attach_depth) continue;
      if (group_of[a.id] != group_of[b.id]) cross_node = true;
    }

  // cross-depth: some pair of types that never share a depth at all
  std::map<unit_type, std::set<int>> depths_of;
  for (const auto& s : cfg.subs) depths_of[type_of(s)].insert(s.attach_depth);
  bool cross_depth = false;
  for (auto ita = depths_of.begin(); ita != depths_of.end(); ++ita)
    for (auto itb = std::next(ita); itb != depths_of.end(); ++itb) {
      std::vector<int> common;
      std::set_intersection(ita->second.begin(), ita->second.end(),
                            itb->second.begin(), itb->second.end(),
                            std::back_inserter(common));
      if (common.empty()) cross_depth = true;
    }

  int hits = int(intra) + int(cross_node) + int(cross_depth);
  if (hits >= 2)
    out.het = het_class::compound;
  else if (intra)
    out.het = het_class::intra_node;
  else if (cross_depth)
    out.het = het_class::cross_depth;
  else
    out.het = het_class::cross_node;
  return out;
}

std::vector<std::string> validate(const machine_config& cfg) {
  std::vector<std::string> errs;
  if (cfg.levels.empty()) {
    errs.push_back("no memory levels");
    return errs;
  }
  std::set<int> depths;
  std::set<std::string> level_names;
  for (const auto& lv : cfg.levels) {
    if (!depths.insert(lv.depth).second)
      errs.push_back("duplicate level depth " + std::to_string(lv.depth));
    if (!level_names.insert(lv.name).second)
      errs.push_back("duplicate level name " + lv.name);
    if (lv.read_bw_words <= 0 || lv.write_bw_words <= 0)
      errs.push_back(lv.name + ": non-positive bandwidth");
    if (lv.energy_per_word < 0)
      errs.push_back(lv.name + ": negative energy per word");
  }
  const int maxd = cfg.max_depth();
  for (int d = 0; d <= maxd; ++d)
    if (!depths.count(d))
      errs.push_back("level depths not contiguous, missing " + std::to_string(d));
  if (const memory_level* root = cfg.level_at(0)) {
    if (root->bounded()) errs.push_back("depth-0 level must be unbounded");
    if (!root->shared) errs.push_back("depth-0 level must be shared");
  }
  // shared prefix, then private levels; capacity shrinks as depth grows
  bool seen_private = false;
  for (int d = 0; d <= maxd; ++d) {
    const memory_level* lv = cfg.level_at(d);
    if (!lv) continue;
    if (seen_private && lv->shared)
      errs.push_back(lv->name + ": shared level below a private one");
    if (!lv->shared) seen_private = true;
    if (d > 0) {
      const memory_level* up = cfg.level_at(d - 1);
      if (up && up->bounded() && lv->bounded() &&
          lv->capacity_bytes > up->capacity_bytes)
        errs.push_back(lv->name + ": larger than level above it");
    }
  }

  if (cfg.subs.empty()) errs.push_back("no sub-accelerators");
  std::set<std::string> sub_ids;
  double bw_sum = 0, buf_sum = 0;
  for (const auto& s : cfg.subs) {
    if (!sub_ids.insert(s.id).second) errs.push_back("duplicate sub id " + s.id);
    if (s.pe_count <= 0 || s.rows <= 0 || s.cols <= 0)
      errs.push_back(s.id + ": non-positive geometry");
    if (s.rows * s.cols != s.pe_count)
      errs.push_back(s.id + ": rows*cols != pe_count");
    if (s.attach_depth < 0 || s.attach_depth > maxd)
      errs.push_back(s.id + ": attach_depth out of range");
    if (s.bw_fraction <= 0 || s.bw_fraction > 1.0)
      errs.push_back(s.id + ": bw_fraction outside (0,1]");
    if (s.buf_fraction <= 0 || s.buf_fraction > 1.0)
      errs.push_back(s.id + ": buf_fraction outside (0,1]");
    bw_sum += s.bw_fraction;
    buf_sum += s.buf_fraction;
  }
  if (bw_sum > 1.0 + 1e-9)
    errs.push_back("bw_fraction sum exceeds 1");
  if (buf_sum > 1.0 + 1e-9)
    errs.push_back("buf_fraction sum exceeds 1");

  // fsm groups must partition the subs
  std::map<std::string, int> seen_in_group;
  for (const auto& grp : cfg.fsm_groups)
    for (const auto& id : grp) {
      if (!sub_ids.count(id))
        errs.push_back("fsm group references unknown sub " + id);
      else
        ++seen_in_group[id];
    }
  for (const auto& id : sub_ids) {
    auto it = seen_in_group.find(id);
    if (it == seen_in_group.end())
      errs.push_back("sub " + id + " not in any fsm group");
    else if (it->second > 1)
      errs.push_back("sub " + id + " in multiple fsm groups");
  }
  // fused multi-type groups drive one column broadcast: columns must match
  for (const auto& grp : cfg.fsm_groups) {
    std::set<unit_type> seen;
    std::set<std::int64_t> cols;
    for (const auto& id : grp)
      if (const sub_accel* s = cfg.find_sub(id)) {
        seen.insert(type_of(*s));
        cols.insert(s->cols);
      }
    if (seen.size() >= 2 && cols.size() > 1)
      errs.push_back("fused group mixes column counts");
  }
  return errs;
}

mapping_constraints derive_mapping_constraints(const machine_config& cfg,
                                               const std::string& sub_id) {
  mapping_constraints mc;
  const sub_accel* s = cfg.find_sub(sub_id);
  if (!s) return mc;
  for (int d = 0; d <= s->attach_depth; ++d) mc.level_depths.push_back(d);
  for (const auto& grp : cfg.fsm_groups) {
    if (std::find(grp.begin(), grp.end(), sub_id) == grp.end()) continue;
    std::set<unit_type> seen;
    for (const auto& id : grp)
      if (const sub_accel* m = cfg.find_sub(id)) seen.insert(type_of(*m));
    if (seen.size() >= 2) mc.forced_col_dim = dim4::N;
  }
  return mc;
}

}  // namespace hhpsim
