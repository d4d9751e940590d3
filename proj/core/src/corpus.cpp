#include "kcl/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "kcl/errors.hpp"
#include "kcl/rng.hpp"

namespace kcl {

namespace {

using ordered_json = nlohmann::ordered_json;

// Corpus model. Topics are well-separated clusters (independent centroids);
// within a topic, samples differ in two families of detail:
//   - local attributes: per-topic feature directions whose caption tokens
//     are always mentioned (fully observable from the pair);
//   - global objects: feature directions shared across all topics, always
//     present in the concept annotations but mentioned in the caption only
//     half the time (partially observable from the pair).
// Concept annotations are global names (nouns identify the topic as a pair,
// verbs mark action topics, objects mark active shifts), so the concept
// space forms a cross-topic coordinate system.
constexpr int kGlobalNouns = 8;
constexpr int kGlobalVerbs = 4;
constexpr int kGlobalObjects = 6;
constexpr int kLocalAttrs = 4;
constexpr int kObjectSlots = 4;
constexpr int kTopicTokens = 3;
constexpr int kFillerTokens = 4;
constexpr double kShiftScale = 4.0;        // detail shift, relative to noise_sigma
constexpr double kObjectMentionProb = 0.5; // caption mention rate for objects

int topic_token(int topic, int slot, int vocab_tokens) {
  return (kFillerTokens + topic * (kTopicTokens + kLocalAttrs) + slot) % vocab_tokens;
}
int local_attr_token(int topic, int attr, int vocab_tokens) {
  return topic_token(topic, kTopicTokens + attr, vocab_tokens);
}
int verb_token(int i, int num_topics, int vocab_tokens) {
  return (kFillerTokens + num_topics * (kTopicTokens + kLocalAttrs) + i) % vocab_tokens;
}
int object_token(int i, int num_topics, int vocab_tokens) {
  return (kFillerTokens + num_topics * (kTopicTokens + kLocalAttrs) + kGlobalVerbs + i) %
         vocab_tokens;
}

// t-th unordered noun pair in lexicographic order, wrapping past C(n,2).
std::pair<int, int> topic_noun_pair(int topic) {
  const int total = kGlobalNouns * (kGlobalNouns - 1) / 2;
  int p = topic % total;
  for (int a = 0; a < kGlobalNouns - 1; ++a) {
    const int in_row = kGlobalNouns - 1 - a;
    if (p < in_row) return {a, a + 1 + p};
    p -= in_row;
  }
  return {0, 1};  // unreachable
}

// slot j of topic t names one of the global objects (distinct per slot)
int topic_object(int topic, int slot) { return (topic + slot * 5) % kGlobalObjects; }

}  // namespace

std::string to_string(ConceptKind kind) {
  switch (kind) {
    case ConceptKind::noun: return "noun";
    case ConceptKind::verb: return "verb";
    case ConceptKind::visual_object: return "visual_object";
  }
  throw ValidationError("unknown ConceptKind");
}

ConceptKind concept_kind_from_string(const std::string& s) {
  if (s == "noun") return ConceptKind::noun;
  if (s == "verb") return ConceptKind::verb;
  if (s == "visual_object") return ConceptKind::visual_object;
  throw DataError("unknown concept kind: '" + s + "'");
}

void validate(const CorpusConfig& config) {
  if (config.num_topics < 1) throw ConfigError("num_topics must be >= 1");
  if (config.num_samples < config.num_topics)
    throw ConfigError("num_samples must be >= num_topics");
  if (config.feat_dim < 2) throw ConfigError("feat_dim must be >= 2");
  if (config.vocab_tokens < 1) throw ConfigError("vocab_tokens must be >= 1");
  if (!(config.noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
  if (!(config.action_topic_fraction >= 0.0 && config.action_topic_fraction <= 1.0))
    throw ConfigError("action_topic_fraction must be in [0,1]");
}

std::vector<Sample> generate_synthetic(const CorpusConfig& config) {
  validate(config);
  Rng rng(derive_seed(config.seed, "corpus"));

  const int T = config.num_topics;
  const int D = config.feat_dim;
  const int n_action = static_cast<int>(std::llround(config.action_topic_fraction * T));

  auto draw_directions = [&](int count) {
    std::vector<Vector> dirs(static_cast<size_t>(count));
    for (auto& d : dirs) {
      d.resize(static_cast<size_t>(D));
      double s = 0.0;
      for (auto& v : d) {
        v = rng.normal();
        s += v * v;
      }
      s = std::sqrt(s);
      if (s == 0.0) s = 1.0;
      for (auto& v : d) v /= s;
    }
    return dirs;
  };
  const auto centroids = draw_directions(T);
  const auto object_dirs = draw_directions(kGlobalObjects);
  std::vector<std::vector<Vector>> local_dirs(static_cast<size_t>(T));
  for (auto& dirs : local_dirs) dirs = draw_directions(kLocalAttrs);

  std::vector<Sample> out;
  out.reserve(static_cast<size_t>(config.num_samples));
  for (int64_t i = 0; i < config.num_samples; ++i) {
    const int t = static_cast<int>(i % T);
    const bool action = t < n_action;
    const auto [noun_a, noun_b] = topic_noun_pair(t);
    const int verb = t % kGlobalVerbs;
    Sample s;
    s.id = i;
    s.topic_id = t;

    std::vector<int> active_attrs;
    for (int j = 0; j < kLocalAttrs; ++j)
      if (rng.uniform() < 0.5) active_attrs.push_back(j);
    std::vector<int> active_objects;
    for (int j = 0; j < kObjectSlots; ++j)
      if (rng.uniform() < 0.5) active_objects.push_back(topic_object(t, j));

    // video = topic centroid + sigma-scaled detail shifts + isotropic noise
    // (sigma = 0 collapses each topic onto its exact centroid)
    s.video_feat.assign(static_cast<size_t>(D), 0.0);
    for (int d = 0; d < D; ++d) {
      double v = centroids[static_cast<size_t>(t)][static_cast<size_t>(d)];
      for (int j : active_attrs)
        v += config.noise_sigma * kShiftScale *
             local_dirs[static_cast<size_t>(t)][static_cast<size_t>(j)][static_cast<size_t>(d)];
      for (int obj : active_objects)
        v += config.noise_sigma * kShiftScale *
             object_dirs[static_cast<size_t>(obj)][static_cast<size_t>(d)];
      v += config.noise_sigma * rng.normal();
      s.video_feat[static_cast<size_t>(d)] = v;
    }

    // caption: two of the topic's three tokens, every active local-attr
    // token, the verb token on action topics, object tokens with
    // probability 1/2, one filler
    int a = static_cast<int>(rng.uniform_int(kTopicTokens));
    int b = static_cast<int>(rng.uniform_int(kTopicTokens - 1));
    if (b >= a) ++b;
    s.caption.push_back(topic_token(t, a, config.vocab_tokens));
    s.caption.push_back(topic_token(t, b, config.vocab_tokens));
    for (int j : active_attrs) s.caption.push_back(local_attr_token(t, j, config.vocab_tokens));
    if (action) s.caption.push_back(verb_token(verb, T, config.vocab_tokens));
    for (int obj : active_objects)
      if (rng.uniform() < kObjectMentionProb)
        s.caption.push_back(object_token(obj, T, config.vocab_tokens));
    s.caption.push_back(static_cast<int>(rng.uniform_int(kFillerTokens)) % config.vocab_tokens);

    // concept annotations: global nouns and verb plus every active object
    s.concepts.push_back({"noun_" + std::to_string(noun_a), ConceptKind::noun, std::nullopt});
    s.concepts.push_back({"noun_" + std::to_string(noun_b), ConceptKind::noun, std::nullopt});
    if (action)
      s.concepts.push_back({"verb_" + std::to_string(verb), ConceptKind::verb, 0});
    for (int obj : active_objects)
      s.concepts.push_back({"obj_" + std::to_string(obj), ConceptKind::visual_object, std::nullopt});

    out.push_back(std::move(s));
  }
  return out;
}

void validate_corpus(const std::vector<Sample>& samples) {
  std::unordered_set<int64_t> seen;
  seen.reserve(samples.size());
  size_t feat_dim = samples.empty() ? 0 : samples.front().video_feat.size();
  for (const Sample& s : samples) {
    if (s.id < 0) throw ValidationError("sample id must be non-negative (id " + std::to_string(s.id) + ")");
    if (!seen.insert(s.id).second)
      throw ValidationError("duplicate sample id " + std::to_string(s.id));
    if (s.video_feat.size() != feat_dim)
      throw ValidationError("inconsistent video_feat dimension at id " + std::to_string(s.id));
    if (!all_finite(s.video_feat))
      throw ValidationError("non-finite video_feat entry at id " + std::to_string(s.id));
    if (s.caption.empty()) throw ValidationError("empty caption at id " + std::to_string(s.id));
    for (const auto& c : s.concepts) {
      if (c.subject_link) {
        const int link = *c.subject_link;
        if (link < 0 || link >= static_cast<int>(s.concepts.size()) ||
            s.concepts[static_cast<size_t>(link)].kind != ConceptKind::noun)
          throw ValidationError("subject_link must point at a noun annotation (id " + std::to_string(s.id) + ")");
      }
    }
  }
}

namespace {

ordered_json sample_to_json(const Sample& s) {
  ordered_json j;
  j["id"] = s.id;
  j["video_feat"] = s.video_feat;
  j["caption"] = s.caption;
  ordered_json concepts = ordered_json::array();
  for (const auto& c : s.concepts) {
    ordered_json cj;
    cj["surface"] = c.surface;
    cj["kind"] = to_string(c.kind);
    if (c.subject_link) cj["subject_link"] = *c.subject_link;
    concepts.push_back(std::move(cj));
  }
  j["concepts"] = std::move(concepts);
  if (s.topic_id) j["topic_id"] = *s.topic_id;
  return j;
}

Sample sample_from_json(const ordered_json& j) {
  Sample s;
  s.id = j.at("id").get<int64_t>();
  s.video_feat = j.at("video_feat").get<Vector>();
  s.caption = j.at("caption").get<std::vector<int>>();
  for (const auto& cj : j.at("concepts")) {
    ConceptAnnotation c;
    c.surface = cj.at("surface").get<std::string>();
    c.kind = concept_kind_from_string(cj.at("kind").get<std::string>());
    if (cj.contains("subject_link") && !cj["subject_link"].is_null())
      c.subject_link = cj["subject_link"].get<int>();
    s.concepts.push_back(std::move(c));
  }
  if (j.contains("topic_id") && !j["topic_id"].is_null()) s.topic_id = j["topic_id"].get<int>();
  return s;
}

}  // namespace

std::vector<Sample> load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file: " + path);
  std::vector<Sample> samples;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      samples.push_back(sample_from_json(ordered_json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  try {
    validate_corpus(samples);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return samples;
}

void save_jsonl(const std::vector<Sample>& samples, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (const Sample& s : samples) out << sample_to_json(s).dump() << '\n';
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace kcl
