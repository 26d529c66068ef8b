#include "hhpsim/workload.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace hhpsim {

double arithmetic_intensity(const einsum_op& op) {
  if (op.vector_op) return 0.0;
  double moved = double(op.words_a()) + double(op.words_b()) + double(op.words_c());
  return double(op.macs()) / moved;
}

reuse_class classify_reuse(const einsum_op& op, double ai_threshold) {
  return arithmetic_intensity(op) >= ai_threshold ? reuse_class::high
                                                  : reuse_class::low;
}

const einsum_op* cascade::find(const std::string& id) const {
  for (const auto& op : ops)
    if (op.id == id) return &op;
  return nullptr;
}

std::int64_t cascade::total_macs() const {
  double total = 0.0;
  for (const auto& op : ops)
    if (!op.vector_op) total += double(op.macs()) * op.weight;
  return std::llround(total);
}

transformer_spec scaled(const transformer_spec& spec, double factor) {
  transformer_spec s = spec;
  auto scale_len = [&](std::int64_t v) {
    return std::max<std::int64_t>(1, std::llround(double(v) * factor));
  };
  // keep head count; round d_model to a multiple of it so head_dim stays whole
  std::int64_t d = scale_len(spec.d_model);
  d = std::max(spec.n_heads, (d / spec.n_heads) * spec.n_heads);
  s.d_model = d;
  s.seq_len = scale_len(spec.seq_len);
  if (spec.prefill_len > 0) s.prefill_len = scale_len(spec.prefill_len);
  if (spec.decode_len > 0) s.decode_len = scale_len(spec.decode_len);
  return s;
}

namespace {

struct block_ctx {
  std::string prefix;       // "enc.l0", "pre.l2", "dec.t17.l0"
  exec_phase phase;
  double weight;
  std::int64_t seq_q;       // query rows (1 in decode)
  std::int64_t seq_kv;      // key/value length seen by attention
  std::vector<std::string> input_deps;  // deps of the qkv projections
};

// appends one attention+ffn block; returns id of its last op (ffn2)
std::string emit_block(const transformer_spec& spec, const block_ctx& ctx,
                       std::vector<einsum_op>& out) {
  const std::int64_t d = spec.d_model;
  const std::int64_t h = spec.n_heads;
  const std::int64_t hd = spec.head_dim();
  auto qualify = [&](const char* name) { return ctx.prefix + "." + name; };
  auto push = [&](const char* name, op_kind kind, dims4 dims,
                  std::vector<std::string> deps) {
    einsum_op op;
    op.id = qualify(name);
    op.kind = kind;
    op.dims = dims;
    op.phase = ctx.phase;
    op.weight = ctx.weight;
    op.deps = std::move(deps);
    out.push_back(std::move(op));
  };
  auto push_vec = [&](const char* name, dims4 dims,
                      std::vector<std::string> deps) {
    einsum_op op;
    op.id = qualify(name);
    op.kind = dims[0] == 1 ? op_kind::gemm : op_kind::bmm;
    op.dims = dims;
    op.phase = ctx.phase;
    op.weight = ctx.weight;
    op.deps = std::move(deps);
    op.vector_op = true;
    out.push_back(std::move(op));
  };

  push("qgen", op_kind::gemm, {1, ctx.seq_q, d, d}, ctx.input_deps);
  push("kgen", op_kind::gemm, {1, ctx.seq_q, d, d}, ctx.input_deps);
  push("vgen", op_kind::gemm, {1, ctx.seq_q, d, d}, ctx.input_deps);
  push("logit", op_kind::bmm, {h, ctx.seq_q, ctx.seq_kv, hd},
       {qualify("qgen"), qualify("kgen")});
  std::string attend_in = qualify("logit");
  if (spec.include_vector_ops) {
    push_vec("softmax", {h, ctx.seq_q, ctx.seq_kv, 1}, {qualify("logit")});
    attend_in = qualify("softmax");
  }
  push("attend", op_kind::bmm, {h, ctx.seq_q, hd, ctx.seq_kv},
       {attend_in, qualify("vgen")});
  push("deproj", op_kind::gemm, {1, ctx.seq_q, d, d}, {qualify("attend")});
  std::string ffn_in = qualify("deproj");
  if (spec.include_vector_ops) {
    push_vec("ln1", {1, ctx.seq_q, d, 1}, {qualify("deproj")});
    ffn_in = qualify("ln1");
  }
  push("ffn1", op_kind::gemm, {1, ctx.seq_q, spec.ffn_mult * d, d}, {ffn_in});
  push("ffn2", op_kind::gemm, {1, ctx.seq_q, d, spec.ffn_mult * d},
       {qualify("ffn1")});
  if (spec.include_vector_ops) {
    push_vec("ln2", {1, ctx.seq_q, d, 1}, {qualify("ffn2")});
    return qualify("ln2");
  }
  return qualify("ffn2");
}

}  // namespace

cascade build_cascade(const transformer_spec& spec) {
  cascade c;
  if (spec.kind == transformer_spec::model_kind::encoder) {
    c.name = "encoder";
    c.style = partition_style::intra_cascade;
    std::vector<std::string> carry;
    for (int l = 0; l < spec.n_layers; ++l) {
      block_ctx ctx;
      ctx.prefix = "enc.l" + std::to_string(l);
      ctx.phase = exec_phase::encoder;
      ctx.weight = 1.0;
      ctx.seq_q = spec.seq_len;
      ctx.seq_kv = spec.seq_len;
      ctx.input_deps = carry;
      carry = {emit_block(spec, ctx, c.ops)};
    }
    return c;
  }

  c.name = "decoder";
  c.style = partition_style::inter_cascade;
  // prefill sub-cascade: encoder-shaped pass over the prompt
  std::vector<std::string> carry;
  for (int l = 0; l < spec.n_layers; ++l) {
    block_ctx ctx;
    ctx.prefix = "pre.l" + std::to_string(l);
    ctx.phase = exec_phase::prefill;
    ctx.weight = 1.0;
    ctx.seq_q = spec.prefill_len;
    ctx.seq_kv = spec.prefill_len;
    ctx.input_deps = carry;
    carry = {emit_block(spec, ctx, c.ops)};
  }
  // decode sub-cascade: auto-regressive tokens, sampled every stride-th token
  // with a weight covering the skipped ones; windows sum to decode_len exactly.
  // no edges between prefill and decode so a schedule can overlap the phases
  // (steady-state pipeline across requests).
  const std::int64_t s = std::max<std::int64_t>(1, spec.decode_stride);
  carry.clear();
  for (std::int64_t t = 1; t <= spec.decode_len; t += s) {
    double w = double(std::min(t + s - 1, spec.decode_len) - t + 1);
    for (int l = 0; l < spec.n_layers; ++l) {
      block_ctx ctx;
      ctx.prefix = "dec.t" + std::to_string(t) + ".l" + std::to_string(l);
      ctx.phase = exec_phase::decode;
      ctx.weight = w;
      ctx.seq_q = 1;
      ctx.seq_kv = spec.prefill_len + t;  // kv cache grows per generated token
      ctx.input_deps = carry;
      carry = {emit_block(spec, ctx, c.ops)};
    }
  }
  return c;
}

std::int64_t encoder_layer_macs(const transformer_spec& spec) {
  const std::int64_t d = spec.d_model, sq = spec.seq_len;
  // 3 projections + deproj + ffn ( +4d, x4d ) + logit + attend
  return 12 * sq * d * d + 2 * sq * sq * d;
}

std::int64_t decoder_layer_macs(const transformer_spec& spec) {
  const std::int64_t d = spec.d_model, p = spec.prefill_len,
                     t = spec.decode_len;
  std::int64_t prefill = 12 * p * d * d + 2 * p * p * d;
  std::int64_t dense = 12 * t * d * d;
  std::int64_t attn = 2 * d * (t * p + t * (t + 1) / 2);
  return prefill + dense + attn;
}

std::vector<std::string> validate(const cascade& c) {
  std::vector<std::string> errs;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < c.ops.size(); ++i) {
    const auto& op = c.ops[i];
    if (op.id.empty()) errs.push_back("op at index " + std::to_string(i) + " has empty id");
    if (!index.emplace(op.id, i).second)
      errs.push_back("duplicate op id: " + op.id);
    for (dim4 d : all_dims)
      if (dim_of(op.dims, d) < 1)
        errs.push_back(op.id + ": dim " + dim_name(d) + " < 1");
    if (op.weight <= 0) errs.push_back(op.id + ": weight <= 0");
    if (op.word_bits <= 0) errs.push_back(op.id + ": word_bits <= 0");
    if (op.kind == op_kind::gemm && op.dims[0] != 1)
      errs.push_back(op.id + ": gemm must have B = 1");
    if (c.style == partition_style::intra_cascade &&
        op.phase != exec_phase::encoder)
      errs.push_back(op.id + ": intra-cascade ops must be encoder phase");
    if (c.style == partition_style::inter_cascade &&
        op.phase == exec_phase::encoder)
      errs.push_back(op.id + ": inter-cascade ops must be prefill or decode");
  }
  for (const auto& op : c.ops)
    for (const auto& dep : op.deps)
      if (!index.count(dep))
        errs.push_back(op.id + ": unknown dep " + dep);
  if (!errs.empty()) return errs;

  // Kahn's algorithm; leftover nodes mean a cycle
  std::vector<int> indeg(c.ops.size(), 0);
  std::vector<std::vector<std::size_t>> succ(c.ops.size());
  for (std::size_t i = 0; i < c.ops.size(); ++i)
    for (const auto& dep : c.ops[i].deps) {
      succ[index.at(dep)].push_back(i);
      ++indeg[i];
    }
  std::deque<std::size_t> ready;
  for (std::size_t i = 0; i < c.ops.size(); ++i)
    if (indeg[i] == 0) ready.push_back(i);
  std::size_t seen = 0;
  while (!ready.empty()) {
    std::size_t i = ready.front();
    ready.pop_front();
    ++seen;
    for (std::size_t j : succ[i])
      if (--indeg[j] == 0) ready.push_back(j);
  }
  if (seen != c.ops.size()) errs.push_back("dependency graph has a cycle");
  return errs;
}

}  // namespace hhpsim
