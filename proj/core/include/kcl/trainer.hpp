#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kcl/corpus.hpp"
#include "kcl/encoder.hpp"
#include "kcl/knowledge.hpp"
#include "kcl/losses.hpp"
#include "kcl/metrics.hpp"
#include "kcl/run_log.hpp"
#include "kcl/sampler.hpp"
#include "kcl/toml_lite.hpp"

namespace kcl {

// Ablation variants: base trains the triplet loss on random batches only;
// skp_only adds the concept-prediction loss; kcl_only enables hard-negative
// batch planning; full enables both plus knowledge-guided anchor weights
// and the pseudo-label refresh.
enum class TrainMode { base, skp_only, kcl_only, full };

std::string to_string(TrainMode mode);
TrainMode train_mode_from_string(const std::string& s);

struct TrainConfig {
  int epochs = 30;
  double lr = 0.05;
  LossConfig loss;
  SamplerConfig sampler;
  std::optional<int> refresh_start_epoch;  // absent: labels never refreshed
  double refresh_threshold = 0.5;
  int eval_every = 10;  // epochs between heldout evaluations
  uint64_t seed = 0;
  TrainMode mode = TrainMode::full;
  int hidden_dim = 32;
  int skp_hidden_dim = 32;
  int vocab_k = 512;
  double holdout_fraction = 0.1;
};

void validate(const TrainConfig& config);

TrainConfig train_config_from_toml(TomlLite toml);
CorpusConfig corpus_config_from_toml(TomlLite toml);
std::string to_toml(const TrainConfig& config);

struct HoldoutSplit {
  std::vector<Sample> train;
  std::vector<Sample> heldout;
};

// Deterministic shuffled split; the heldout part keeps the corpus topic
// structure statistically.
HoldoutSplit split_corpus(const std::vector<Sample>& corpus, double holdout_fraction,
                          uint64_t seed);

struct EvalResult {
  RetrievalReport t2v;
  RetrievalReport v2t;
  SpaceReport space;
};

// Encodes every sample of the split and computes retrieval both ways plus
// alignment/uniformity. Read-only; idempotent.
EvalResult evaluate(const std::vector<Sample>& samples, const EncoderParams& params);

struct TrainOutput {
  RunLog log;
  EncoderParams params;
  KnowledgeVocab vocab;
  std::vector<PseudoLabelVector> labels;  // final (possibly refreshed) labels
};

// Runs the full loop: epoch plan -> forward -> losses -> gradients ->
// parameter update -> memory update -> optional pseudo-label refresh.
// Deterministic in (corpus, config); RNG streams for init, planning, the
// holdout split and task switching are isolated from each other.
TrainOutput train(const std::vector<Sample>& corpus, const TrainConfig& config);

}  // namespace kcl
