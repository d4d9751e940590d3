#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "kcl/corpus.hpp"
#include "kcl/knowledge.hpp"
#include "kcl/linalg.hpp"
#include "kcl/rng.hpp"

namespace kcl {

// Online-updated cache of fused sample embeddings (z_v + z_t) / 2. Empty
// before the first epoch completes; overwritten in batch order afterwards.
struct EmbeddingMemory {
  std::unordered_map<int64_t, Vector> entries;
  std::unordered_map<int64_t, int> epoch_stamp;

  bool empty() const { return entries.empty(); }
  size_t size() const { return entries.size(); }
};

enum class BatchKind { hard, random };

struct Batch {
  BatchKind kind = BatchKind::random;
  std::vector<int64_t> sample_ids;  // exactly N, distinct within the batch
  std::optional<int64_t> anchor_id; // set on hard batches
};

struct BatchPlan {
  std::vector<Batch> batches;
};

struct SamplerConfig {
  int batch_size = 32;          // N
  int num_hard_batches = -1;    // L; negative selects floor(0.5 * |D| / N)
  int knn_k = -1;               // negative selects 2N
  double action_weight = 1.0;   // w_hi for anchors carrying desired concepts
  double base_weight = 1.0;     // w_lo for everything else
  std::set<std::string> desired_concepts;
  uint64_t seed = 0;
};

void validate(const SamplerConfig& config);

int resolved_knn_k(const SamplerConfig& config);
int resolved_num_hard_batches(const SamplerConfig& config, size_t corpus_size);

// Exact k nearest entries by Euclidean distance, ascending; ties broken by
// ascending sample id. Returns all entries when the memory holds fewer
// than k. Throws StateError on an empty memory.
std::vector<std::pair<int64_t, double>> knn_search(const EmbeddingMemory& memory,
                                                   std::span<const double> query, int k);

// Weighted anchor sampling without replacement: weight w_hi when the
// sample's (possibly refreshed) label bits intersect desired_concepts,
// otherwise w_lo. Deterministic given the rng state.
std::vector<int64_t> sample_anchors(const std::vector<Sample>& corpus,
                                    const std::vector<PseudoLabelVector>& labels,
                                    const KnowledgeVocab& vocab, const SamplerConfig& config,
                                    int num_anchors, Rng& rng);

// For each anchor: retrieve its knn_k nearest neighbors in memory (the
// anchor self-matches at distance 0) and uniformly pick batch_size of them.
std::vector<Batch> assemble_hard_batches(const EmbeddingMemory& memory,
                                         const std::vector<int64_t>& anchors,
                                         const SamplerConfig& config, Rng& rng);

// Random batches covering the given ids exactly once; the last batch is
// padded to full size from ids already placed in earlier batches.
std::vector<Batch> build_random_plan(std::vector<int64_t> ids, int batch_size, Rng& rng);

// As above, with extra already-covered ids eligible for remainder padding
// (used for backfill batches, where hard-batch members are also covered).
std::vector<Batch> build_random_plan_with_pool(std::vector<int64_t> ids, int batch_size, Rng& rng,
                                               std::vector<int64_t> pad_pool);

// One epoch of Algorithm-style planning: empty memory yields an all-random
// plan; otherwise hard batches around sampled anchors plus random backfill
// batches over every id the hard batches missed, in shuffled order. A pure
// function of (corpus, memory, labels, config, epoch_index).
BatchPlan build_epoch_plan(const std::vector<Sample>& corpus, const EmbeddingMemory& memory,
                           const std::vector<PseudoLabelVector>& labels,
                           const KnowledgeVocab& vocab, const SamplerConfig& config,
                           int epoch_index);

struct BatchEmbedding {
  int64_t sample_id = 0;
  Vector z_v;
  Vector z_t;
};

// Overwrites entries with (z_v + z_t) / 2 and stamps the epoch; the latest
// write wins for samples visited more than once.
void update_memory(EmbeddingMemory& memory, const std::vector<BatchEmbedding>& batch,
                   int epoch_index);

}  // namespace kcl
