#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "kcl/corpus.hpp"

namespace kcl {

enum class ConceptOrigin { as_is, subject_predicate, skp_predicted };

struct StructuralConcept {
  std::string key;
  ConceptOrigin origin = ConceptOrigin::as_is;

  bool operator<(const StructuralConcept& o) const { return key < o.key; }
  bool operator==(const StructuralConcept& o) const { return key == o.key; }
};

using ConceptSet = std::set<StructuralConcept>;

// Separator joining subject and predicate in composed concept keys.
inline constexpr char kSubjectPredicateSep = '#';

// Top-K concept vocabulary, ordered by descending corpus frequency with
// lexicographic tie-break. Immutable after build.
struct KnowledgeVocab {
  std::vector<std::string> concepts;
  std::unordered_map<std::string, int> index;

  size_t size() const { return concepts.size(); }
  // -1 when the key is out of vocabulary.
  int position(const std::string& key) const {
    auto it = index.find(key);
    return it == index.end() ? -1 : it->second;
  }
};

struct PseudoLabelVector {
  int64_t sample_id = 0;
  std::vector<uint8_t> bits;  // bits[i] = 1 iff vocab concept i is in o_e
};

// A relational transform maps a sample's annotations to derived concepts.
using ConceptTransform = std::function<ConceptSet(const std::vector<ConceptAnnotation>&)>;

// Keeps every distinct annotation surface as a concept.
ConceptSet transform_as_is(const std::vector<ConceptAnnotation>& concepts);

// Emits "subject#verb" for every verb annotation carrying a subject link.
// Verbs without a link emit nothing. Dangling links are a ValidationError.
ConceptSet transform_subject_predicate(const std::vector<ConceptAnnotation>& concepts);

// Union of all transform outputs for one sample. extra_transforms extends
// the built-in pair (e.g. external-KB linking, superordinate concepts).
ConceptSet build_structural_knowledge(const Sample& sample,
                                      std::span<const ConceptTransform> extra_transforms = {});

// Top-k by frequency across the corpus. Empty corpus yields an empty vocab.
KnowledgeVocab build_vocab(const std::vector<Sample>& corpus, int k);

PseudoLabelVector label_vector(const Sample& sample, const KnowledgeVocab& vocab);

std::vector<PseudoLabelVector> label_vectors(const std::vector<Sample>& corpus,
                                             const KnowledgeVocab& vocab);

// Additive refresh from predicted probabilities: bit[i] := bit[i] OR
// (prob[i] >= threshold). Never clears an original bit.
std::vector<PseudoLabelVector> refresh_pseudo_labels(
    const std::unordered_map<int64_t, Vector>& sample_probs, const KnowledgeVocab& vocab,
    double threshold, const std::vector<PseudoLabelVector>& labels);

// Vocab dump: one concept key per line in vocab order (line = label index).
void save_vocab(const KnowledgeVocab& vocab, const std::string& path);
KnowledgeVocab load_vocab(const std::string& path);

}  // namespace kcl
