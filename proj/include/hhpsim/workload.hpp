#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace hhpsim {

// tensor dims of a dense einsum C[b,m,n] += A[b,m,k] * B[b,k,n]
enum class dim4 : int { B = 0, M = 1, N = 2, K = 3 };
inline const char* dim_name(dim4 d) {
  static const char* names[4] = {"B", "M", "N", "K"};
  return names[static_cast<int>(d)];
}
constexpr std::array<dim4, 4> all_dims = {dim4::B, dim4::M, dim4::N, dim4::K};

using dims4 = std::array<std::int64_t, 4>;

inline std::int64_t dim_of(const dims4& d, dim4 which) {
  return d[static_cast<int>(which)];
}

enum class op_kind { gemm, bmm };
enum class exec_phase { encoder, prefill, decode };

inline const char* phase_name(exec_phase p) {
  switch (p) {
    case exec_phase::encoder: return "encoder";
    case exec_phase::prefill: return "prefill";
    case exec_phase::decode: return "decode";
  }
  return "?";
}

struct einsum_op {
  std::string id;
  op_kind kind = op_kind::gemm;
  dims4 dims = {1, 1, 1, 1};   // B, M, N, K
  int word_bits = 8;
  exec_phase phase = exec_phase::encoder;
  std::vector<std::string> deps;  // ids of producer ops
  // decode-token sampling weight: latency and energy are multiplied by this
  double weight = 1.0;
  // pure data-movement op (softmax, layernorm); no MACs, cost = stream words
  bool vector_op = false;

  std::int64_t macs() const { return dims[0] * dims[1] * dims[2] * dims[3]; }
  // word counts of the three operand tensors
  std::int64_t words_a() const { return dims[0] * dims[1] * dims[3]; }
  std::int64_t words_b() const { return dims[0] * dims[3] * dims[2]; }
  std::int64_t words_c() const { return dims[0] * dims[1] * dims[2]; }
};

// MACs per word moved if each operand crosses the boundary exactly once
double arithmetic_intensity(const einsum_op& op);

enum class reuse_class { high, low };
reuse_class classify_reuse(const einsum_op& op, double ai_threshold);

// how a partitioner should treat the cascade by default
enum class partition_style { intra_cascade, inter_cascade };

struct cascade {
  std::string name;
  std::vector<einsum_op> ops;
  partition_style style = partition_style::intra_cascade;

  const einsum_op* find(const std::string& id) const;
  std::int64_t total_macs() const;  // weighted by op weight
};

struct transformer_spec {
  enum class model_kind { encoder, decoder };
  model_kind kind = model_kind::encoder;
  std::int64_t d_model = 1024;
  std::int64_t n_heads = 16;
  std::int64_t ffn_mult = 4;
  int n_layers = 1;
  // encoder
  std::int64_t seq_len = 256;
  // decoder
  std::int64_t prefill_len = 0;
  std::int64_t decode_len = 0;
  std::int64_t decode_stride = 1;  // sample every s-th generated token
  bool include_vector_ops = false;

  std::int64_t head_dim() const { return d_model / n_heads; }
};

// uniformly scales d_model and sequence lengths; head count fixed
transformer_spec scaled(const transformer_spec& spec, double factor);

cascade build_cascade(const transformer_spec& spec);

// closed-form MAC count for one layer at full (unsampled) length; used to
// check builders against brute force
std::int64_t encoder_layer_macs(const transformer_spec& spec);
std::int64_t decoder_layer_macs(const transformer_spec& spec);

// structural checks: unique ids, deps resolve, graph acyclic, dims positive
std::vector<std::string> validate(const cascade& c);

}  // namespace hhpsim
