#include "kcl/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "kcl/errors.hpp"

namespace kcl {

void validate(const SamplerConfig& config) {
  if (config.batch_size < 2) throw ConfigError("batch_size must be >= 2");
  if (!(config.base_weight > 0.0)) throw ConfigError("base_weight must be > 0");
  if (!(config.action_weight >= config.base_weight))
    throw ConfigError("action_weight must be >= base_weight");
  if (config.knn_k >= 0 && config.knn_k < config.batch_size)
    throw ConfigError("knn_k must be >= batch_size");
}

int resolved_knn_k(const SamplerConfig& config) {
  return config.knn_k >= 0 ? config.knn_k : 2 * config.batch_size;
}

int resolved_num_hard_batches(const SamplerConfig& config, size_t corpus_size) {
  if (config.num_hard_batches >= 0) return config.num_hard_batches;
  return static_cast<int>(corpus_size / (2 * static_cast<size_t>(config.batch_size)));
}

std::vector<std::pair<int64_t, double>> knn_search(const EmbeddingMemory& memory,
                                                   std::span<const double> query, int k) {
  if (memory.empty()) throw StateError("knn_search: memory is empty");
  if (k < 1) throw ValidationError("knn_search: k must be >= 1");

  std::vector<std::pair<double, int64_t>> scored;  // (squared distance, id)
  scored.reserve(memory.size());
  for (const auto& [id, vec] : memory.entries)
    scored.emplace_back(squared_distance(query, vec), id);

  const size_t take = std::min<size_t>(static_cast<size_t>(k), scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                    scored.end());
  std::vector<std::pair<int64_t, double>> out;
  out.reserve(take);
  for (size_t i = 0; i < take; ++i)
    out.emplace_back(scored[i].second, std::sqrt(scored[i].first));
  return out;
}

std::vector<int64_t> sample_anchors(const std::vector<Sample>& corpus,
                                    const std::vector<PseudoLabelVector>& labels,
                                    const KnowledgeVocab& vocab, const SamplerConfig& config,
                                    int num_anchors, Rng& rng) {
  if (num_anchors < 0 || static_cast<size_t>(num_anchors) > corpus.size())
    throw ValidationError("sample_anchors: anchor count exceeds corpus size");
  if (num_anchors == 0) return {};

  // desired-concept positions in the vocabulary
  std::vector<int> desired_positions;
  for (const auto& key : config.desired_concepts) {
    const int pos = vocab.position(key);
    if (pos >= 0) desired_positions.push_back(pos);
  }
  std::unordered_map<int64_t, const PseudoLabelVector*> by_id;
  by_id.reserve(labels.size());
  for (const auto& l : labels) by_id.emplace(l.sample_id, &l);

  auto weight_of = [&](const Sample& s) {
    if (desired_positions.empty()) return config.base_weight;
    auto it = by_id.find(s.id);
    if (it == by_id.end()) return config.base_weight;
    for (int pos : desired_positions)
      if (it->second->bits[static_cast<size_t>(pos)]) return config.action_weight;
    return config.base_weight;
  };

  // Weighted sampling without replacement via exponential-key ranking
  // (Efraimidis-Spirakis): draw u per sample, rank by u^(1/w) descending.
  // Distribution is identical to successive draws proportional to weight.
  std::vector<std::pair<double, int64_t>> keyed;
  keyed.reserve(corpus.size());
  for (const Sample& s : corpus) {
    const double w = weight_of(s);
    const double u = rng.uniform();
    keyed.emplace_back(std::pow(u, 1.0 / w), s.id);
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<int64_t> anchors;
  anchors.reserve(static_cast<size_t>(num_anchors));
  for (int i = 0; i < num_anchors; ++i) anchors.push_back(keyed[static_cast<size_t>(i)].second);
  return anchors;
}

std::vector<Batch> assemble_hard_batches(const EmbeddingMemory& memory,
                                         const std::vector<int64_t>& anchors,
                                         const SamplerConfig& config, Rng& rng) {
  const int N = config.batch_size;
  if (static_cast<int>(memory.size()) < N)
    throw StateError("assemble_hard_batches: memory smaller than batch size");
  const int k = resolved_knn_k(config);

  std::vector<Batch> out;
  out.reserve(anchors.size());
  for (int64_t anchor : anchors) {
    auto it = memory.entries.find(anchor);
    if (it == memory.entries.end())
      throw StateError("assemble_hard_batches: anchor " + std::to_string(anchor) +
                       " missing from memory");
    auto neighbors = knn_search(memory, it->second, k);
    std::vector<int64_t> candidates;
    candidates.reserve(neighbors.size());
    for (const auto& [id, dist] : neighbors) candidates.push_back(id);
    Batch b;
    b.kind = BatchKind::hard;
    b.anchor_id = anchor;
    b.sample_ids = rng.choose(std::move(candidates), static_cast<size_t>(N));
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<Batch> build_random_plan(std::vector<int64_t> ids, int batch_size, Rng& rng) {
  return build_random_plan_with_pool(std::move(ids), batch_size, rng, {});
}

std::vector<Batch> build_random_plan_with_pool(std::vector<int64_t> ids, int batch_size, Rng& rng,
                                               std::vector<int64_t> pad_pool) {
  const size_t N = static_cast<size_t>(batch_size);
  rng.shuffle(ids);
  std::vector<Batch> out;
  size_t pos = 0;
  while (pos < ids.size()) {
    Batch b;
    b.kind = BatchKind::random;
    const size_t take = std::min(N, ids.size() - pos);
    b.sample_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(pos),
                        ids.begin() + static_cast<std::ptrdiff_t>(pos + take));
    pos += take;
    if (b.sample_ids.size() < N) {
      // pad the remainder batch from ids already covered by earlier batches
      std::vector<int64_t> pool(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(pos - take));
      pool.insert(pool.end(), pad_pool.begin(), pad_pool.end());
      std::sort(pool.begin(), pool.end());
      const size_t need = N - b.sample_ids.size();
      if (pool.size() < need)
        throw ValidationError("cannot pad batch to size " + std::to_string(batch_size) +
                              ": corpus too small");
      auto pad = rng.choose(std::move(pool), need);
      b.sample_ids.insert(b.sample_ids.end(), pad.begin(), pad.end());
    }
    out.push_back(std::move(b));
  }
  return out;
}

BatchPlan build_epoch_plan(const std::vector<Sample>& corpus, const EmbeddingMemory& memory,
                           const std::vector<PseudoLabelVector>& labels,
                           const KnowledgeVocab& vocab, const SamplerConfig& config,
                           int epoch_index) {
  validate(config);
  if (corpus.size() < static_cast<size_t>(config.batch_size))
    throw ValidationError("corpus smaller than batch size");

  Rng rng(derive_seed(config.seed, "epoch_plan", static_cast<uint64_t>(epoch_index)));
  std::vector<int64_t> all_ids;
  all_ids.reserve(corpus.size());
  for (const Sample& s : corpus) all_ids.push_back(s.id);

  BatchPlan plan;
  if (memory.empty()) {
    plan.batches = build_random_plan(std::move(all_ids), config.batch_size, rng);
    return plan;
  }

  const int L = resolved_num_hard_batches(config, corpus.size());
  const auto anchors = sample_anchors(corpus, labels, vocab, config, L, rng);
  auto hard = assemble_hard_batches(memory, anchors, config, rng);

  std::set<int64_t> visited;
  for (const Batch& b : hard) visited.insert(b.sample_ids.begin(), b.sample_ids.end());
  std::vector<int64_t> missing;
  for (int64_t id : all_ids)
    if (!visited.count(id)) missing.push_back(id);

  std::vector<Batch> backfill;
  if (!missing.empty()) {
    std::vector<int64_t> pool(visited.begin(), visited.end());
    backfill = build_random_plan_with_pool(std::move(missing), config.batch_size, rng,
                                           std::move(pool));
  }

  plan.batches = std::move(hard);
  plan.batches.insert(plan.batches.end(), std::make_move_iterator(backfill.begin()),
                      std::make_move_iterator(backfill.end()));
  rng.shuffle(plan.batches);
  return plan;
}

void update_memory(EmbeddingMemory& memory, const std::vector<BatchEmbedding>& batch,
                   int epoch_index) {
  for (const auto& e : batch) {
    Vector fused(e.z_v.size());
    for (size_t i = 0; i < fused.size(); ++i) fused[i] = 0.5 * (e.z_v[i] + e.z_t[i]);
    memory.entries[e.sample_id] = std::move(fused);
    memory.epoch_stamp[e.sample_id] = epoch_index;
  }
}

}  // namespace kcl
