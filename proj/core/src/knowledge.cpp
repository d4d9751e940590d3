#include "kcl/knowledge.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "kcl/errors.hpp"

namespace kcl {

ConceptSet transform_as_is(const std::vector<ConceptAnnotation>& concepts) {
  ConceptSet out;
  for (const auto& c : concepts) out.insert({c.surface, ConceptOrigin::as_is});
  return out;
}

ConceptSet transform_subject_predicate(const std::vector<ConceptAnnotation>& concepts) {
  ConceptSet out;
  for (const auto& c : concepts) {
    if (c.kind != ConceptKind::verb || !c.subject_link) continue;
    const int link = *c.subject_link;
    if (link < 0 || link >= static_cast<int>(concepts.size()) ||
        concepts[static_cast<size_t>(link)].kind != ConceptKind::noun)
      throw ValidationError("dangling subject_link on verb '" + c.surface + "'");
    out.insert({concepts[static_cast<size_t>(link)].surface + kSubjectPredicateSep + c.surface,
                ConceptOrigin::subject_predicate});
  }
  return out;
}

ConceptSet build_structural_knowledge(const Sample& sample,
                                      std::span<const ConceptTransform> extra_transforms) {
  ConceptSet out = transform_as_is(sample.concepts);
  ConceptSet sp = transform_subject_predicate(sample.concepts);
  out.insert(sp.begin(), sp.end());
  for (const auto& transform : extra_transforms) {
    ConceptSet more = transform(sample.concepts);
    out.insert(more.begin(), more.end());
  }
  return out;
}

KnowledgeVocab build_vocab(const std::vector<Sample>& corpus, int k) {
  if (k < 1) throw ValidationError("build_vocab: k must be >= 1");
  // std::map keeps keys sorted, which settles frequency ties lexicographically
  std::map<std::string, int64_t> freq;
  for (const Sample& s : corpus)
    for (const auto& c : build_structural_knowledge(s)) ++freq[c.key];

  std::vector<std::pair<std::string, int64_t>> items(freq.begin(), freq.end());
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  KnowledgeVocab vocab;
  const size_t n = std::min<size_t>(static_cast<size_t>(k), items.size());
  vocab.concepts.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    vocab.index.emplace(items[i].first, static_cast<int>(i));
    vocab.concepts.push_back(std::move(items[i].first));
  }
  return vocab;
}

PseudoLabelVector label_vector(const Sample& sample, const KnowledgeVocab& vocab) {
  PseudoLabelVector out;
  out.sample_id = sample.id;
  out.bits.assign(vocab.size(), 0);
  for (const auto& c : build_structural_knowledge(sample)) {
    const int pos = vocab.position(c.key);
    if (pos >= 0) out.bits[static_cast<size_t>(pos)] = 1;
  }
  return out;
}

std::vector<PseudoLabelVector> label_vectors(const std::vector<Sample>& corpus,
                                             const KnowledgeVocab& vocab) {
  std::vector<PseudoLabelVector> out;
  out.reserve(corpus.size());
  for (const Sample& s : corpus) out.push_back(label_vector(s, vocab));
  return out;
}

std::vector<PseudoLabelVector> refresh_pseudo_labels(
    const std::unordered_map<int64_t, Vector>& sample_probs, const KnowledgeVocab& vocab,
    double threshold, const std::vector<PseudoLabelVector>& labels) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw ValidationError("refresh threshold must be in (0,1)");
  std::vector<PseudoLabelVector> out = labels;
  for (auto& label : out) {
    if (label.bits.size() != vocab.size())
      throw ValidationError("label vector length does not match vocab size");
    auto it = sample_probs.find(label.sample_id);
    if (it == sample_probs.end()) continue;
    const Vector& probs = it->second;
    if (probs.size() != vocab.size())
      throw ValidationError("probability vector length does not match vocab size (sample " +
                            std::to_string(label.sample_id) + ")");
    for (size_t i = 0; i < probs.size(); ++i)
      if (probs[i] >= threshold) label.bits[i] = 1;
  }
  return out;
}

void save_vocab(const KnowledgeVocab& vocab, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (const auto& key : vocab.concepts) out << key << '\n';
  if (!out) throw IoError("write failed: " + path);
}

KnowledgeVocab load_vocab(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocab file: " + path);
  KnowledgeVocab vocab;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (vocab.index.count(line))
      throw DataError(path + ": duplicate vocab key '" + line + "'");
    vocab.index.emplace(line, static_cast<int>(vocab.concepts.size()));
    vocab.concepts.push_back(line);
  }
  return vocab;
}

}  // namespace kcl
