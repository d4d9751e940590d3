#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "kcl/linalg.hpp"

namespace kcl {

struct EncoderDims {
  int feat_dim = 0;      // D_v
  int hidden = 0;        // H, embedding dimension of both towers
  int skp_hidden = 0;    // width of the concept-prediction MLP
  int vocab_tokens = 0;  // caption token table rows
  int num_concepts = 0;  // K, concept vocabulary size

  bool operator==(const EncoderDims&) const = default;
};

// All trainable parameters of the two-tower encoder plus the concept head.
// Matrices are stored (input x output); forward passes compute x^T W + b.
struct EncoderParams {
  EncoderDims dims;
  Matrix w_v;           // feat_dim x hidden
  Vector b_v;           // hidden
  Matrix token_table;   // vocab_tokens x hidden
  Matrix w_t;           // hidden x hidden
  Vector b_t;           // hidden
  Matrix w_skp1;        // hidden x skp_hidden
  Vector b_skp1;        // skp_hidden
  Matrix w_skp2;        // skp_hidden x num_concepts
  Vector b_skp2;        // num_concepts
};

struct PairEmbedding {
  Vector z_v;
  Vector z_t;
};

// Intermediates kept for the backward passes.
struct VideoCache {
  Vector input;   // x
  Vector h;       // tanh(x^T W_v + b_v)
  double h_norm = 0.0;
};

struct TextCache {
  // sorted unique caption tokens with weight count/len; canonical order
  // makes the bag-of-tokens mean exactly permutation-invariant
  std::vector<std::pair<int, double>> token_weights;
  Vector mean_embed;  // weighted sum of token_table rows
  Vector h;
  double h_norm = 0.0;
};

struct SkpCache {
  Vector z_v;
  Vector u;  // tanh(z_v^T W_skp1 + b_skp1)
};

// Xavier-uniform weights (range sqrt(6/(fan_in+fan_out))), zero biases,
// deterministic in the seed.
EncoderParams init_params(const EncoderDims& dims, uint64_t seed);

EncoderParams zeros_like(const EncoderParams& params);

// z = h / (||h|| + 1e-12) with h = tanh(x^T W_v + b_v).
Vector encode_video(const EncoderParams& params, std::span<const double> video_feat,
                    VideoCache* cache = nullptr);

// Bag-of-tokens tower: mean token embedding, then tanh affine, then the same
// epsilon-guarded normalization. Order of caption tokens is irrelevant.
Vector encode_text(const EncoderParams& params, std::span<const int> caption,
                   TextCache* cache = nullptr);

// Pre-sigmoid concept logits from the video embedding.
Vector skp_head(const EncoderParams& params, const Vector& z_v, SkpCache* cache = nullptr);

// Backward passes accumulate parameter gradients into `grads` (shapes must
// match). encode_*_backward take d(loss)/d(z); skp_head_backward takes
// d(loss)/d(logits) and returns d(loss)/d(z_v).
void encode_video_backward(const EncoderParams& params, const VideoCache& cache,
                           const Vector& grad_z, EncoderParams& grads);
void encode_text_backward(const EncoderParams& params, const TextCache& cache,
                          const Vector& grad_z, EncoderParams& grads);
Vector skp_head_backward(const EncoderParams& params, const SkpCache& cache,
                         const Vector& grad_logits, EncoderParams& grads);

// Plain SGD step: params -= lr * grads.
void apply_gradients(EncoderParams& params, const EncoderParams& grads, double lr);

// Checkpoint: binary dump with a dimension header; load rejects mismatched
// or truncated files.
void save_checkpoint(const EncoderParams& params, const std::string& path);
EncoderParams load_checkpoint(const std::string& path);

}  // namespace kcl
