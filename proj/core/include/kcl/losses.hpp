#pragma once

#include <span>

#include "kcl/encoder.hpp"
#include "kcl/linalg.hpp"

namespace kcl {

struct LossConfig {
  double margin_delta = 0.2;  // hinge margin on cosine similarities
  double skp_weight = 1.0;
  double kcl_weight = 1.0;
  // When set, one task is picked at random per batch instead of summing.
  bool random_task_switch = false;
};

void validate(const LossConfig& config);

// Per-step report; one CSV row per training step.
struct LossReport {
  double skp_loss = 0.0;
  double kcl_loss = 0.0;
  int t2v_terms = 0;  // active (nonzero) hinge terms
  int v2t_terms = 0;
};

struct SkpLossResult {
  double loss = 0.0;
  Matrix grad_logits;  // d(loss)/d(logit), already includes the 1/N factor
};

// Multi-label binary cross-entropy over concept logits, summed over labels
// per sample and averaged over the batch. Uses the stable log-sigmoid form;
// labels must be exactly 0 or 1.
SkpLossResult skp_loss(const Matrix& logits, const Matrix& labels);

struct TripletLossResult {
  double loss = 0.0;
  Matrix grad_zv;
  Matrix grad_zt;
  int t2v_active = 0;
  int v2t_active = 0;
};

// Symmetrical hinge triplet loss over one batch of paired unit embeddings
// (rows of z_t pair with rows of z_v):
//   L = (1/N) * sum_i sum_{j!=i} [ max(0, delta + zt_i.zv_j - zt_i.zv_i)
//                                + max(0, delta + zv_i.zt_j - zv_i.zt_i) ]
// Gradients are exact subgradients with d max(0,u)/du = 0 at u = 0.
// Requires N >= 2 and rows unit-norm within 1e-4.
TripletLossResult kcl_triplet_loss(const Matrix& z_t, const Matrix& z_v, double delta);

// Convenience over a batch of PairEmbedding; grad rows follow batch order.
TripletLossResult kcl_triplet_loss(std::span<const PairEmbedding> batch, double delta);

}  // namespace kcl
