#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kcl/linalg.hpp"

namespace kcl {

enum class ConceptKind { noun, verb, visual_object };

std::string to_string(ConceptKind kind);
ConceptKind concept_kind_from_string(const std::string& s);

struct ConceptAnnotation {
  std::string surface;
  ConceptKind kind = ConceptKind::noun;
  // Index of the noun annotation acting as subject; set only on verbs.
  std::optional<int> subject_link;

  bool operator==(const ConceptAnnotation&) const = default;
};

// One paired item e = (v, t): a dense "video" feature vector, a caption
// token sequence and the concept annotations shipped with the corpus.
struct Sample {
  int64_t id = 0;
  Vector video_feat;
  std::vector<int> caption;
  std::vector<ConceptAnnotation> concepts;
  // Synthetic ground truth only; never visible to training.
  std::optional<int> topic_id;

  bool operator==(const Sample&) const = default;
};

struct CorpusConfig {
  int64_t num_samples = 0;
  int num_topics = 1;
  int feat_dim = 2;
  int vocab_tokens = 256;
  double noise_sigma = 0.0;
  double action_topic_fraction = 0.0;
  uint64_t seed = 0;
};

// Throws ConfigError when invariants are violated.
void validate(const CorpusConfig& config);

// Deterministic synthetic corpus with known latent topics. Each sample is
// drawn from one of num_topics topics; video_feat = topic centroid +
// noise_sigma * (attribute shifts + isotropic noise), so noise_sigma = 0
// collapses every topic onto its centroid exactly. Captions and concept
// annotations come from topic-specific pools; the leading
// round(action_topic_fraction * num_topics) topics are "action" topics whose
// samples carry a verb annotation with a subject link.
std::vector<Sample> generate_synthetic(const CorpusConfig& config);

// JSONL interchange: one object per line with fields id, video_feat,
// caption, concepts, optional topic_id. Field order is stable on save and a
// reload yields an equal corpus.
std::vector<Sample> load_jsonl(const std::string& path);
void save_jsonl(const std::vector<Sample>& samples, const std::string& path);

// Shared invariant checks (finite features, non-empty captions, unique ids,
// valid subject links, consistent feature dimension). Used by both the
// loader and the trainer before any work starts.
void validate_corpus(const std::vector<Sample>& samples);

}  // namespace kcl
