#include "kcl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "kcl/errors.hpp"

namespace kcl {

std::string to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::base: return "base";
    case TrainMode::skp_only: return "skp_only";
    case TrainMode::kcl_only: return "kcl_only";
    case TrainMode::full: return "full";
  }
  throw ValidationError("unknown TrainMode");
}

TrainMode train_mode_from_string(const std::string& s) {
  if (s == "base") return TrainMode::base;
  if (s == "skp_only") return TrainMode::skp_only;
  if (s == "kcl_only") return TrainMode::kcl_only;
  if (s == "full") return TrainMode::full;
  throw ConfigError("unknown mode '" + s + "' (expected base|skp_only|kcl_only|full)");
}

void validate(const TrainConfig& config) {
  if (config.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (config.eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (!(config.lr >= 0.0) || !std::isfinite(config.lr)) throw ConfigError("lr must be finite and >= 0");
  if (!(config.refresh_threshold > 0.0 && config.refresh_threshold < 1.0))
    throw ConfigError("refresh_threshold must be in (0,1)");
  if (config.refresh_start_epoch && *config.refresh_start_epoch < 0)
    throw ConfigError("refresh_start_epoch must be >= 0");
  if (config.hidden_dim < 1 || config.skp_hidden_dim < 1)
    throw ConfigError("encoder dimensions must be positive");
  if (config.vocab_k < 1) throw ConfigError("vocab_k must be >= 1");
  if (!(config.holdout_fraction >= 0.0 && config.holdout_fraction < 1.0))
    throw ConfigError("holdout_fraction must be in [0,1)");
  validate(config.loss);
  validate(config.sampler);
}

TrainConfig train_config_from_toml(TomlLite toml) {
  TrainConfig c;
  c.epochs = static_cast<int>(toml.get_int("epochs", c.epochs));
  c.lr = toml.get_double("lr", c.lr);
  c.eval_every = static_cast<int>(toml.get_int("eval_every", c.eval_every));
  c.seed = static_cast<uint64_t>(toml.get_int("seed", 0));
  c.mode = train_mode_from_string(toml.get_string("mode", to_string(c.mode)));
  if (toml.has("refresh_start_epoch"))
    c.refresh_start_epoch = static_cast<int>(toml.get_int("refresh_start_epoch", 0));
  c.refresh_threshold = toml.get_double("refresh_threshold", c.refresh_threshold);
  c.hidden_dim = static_cast<int>(toml.get_int("hidden_dim", c.hidden_dim));
  c.skp_hidden_dim = static_cast<int>(toml.get_int("skp_hidden_dim", c.skp_hidden_dim));
  c.vocab_k = static_cast<int>(toml.get_int("vocab_k", c.vocab_k));
  c.holdout_fraction = toml.get_double("holdout_fraction", c.holdout_fraction);

  c.loss.margin_delta = toml.get_double("loss.margin_delta", c.loss.margin_delta);
  c.loss.skp_weight = toml.get_double("loss.skp_weight", c.loss.skp_weight);
  c.loss.kcl_weight = toml.get_double("loss.kcl_weight", c.loss.kcl_weight);
  c.loss.random_task_switch = toml.get_bool("loss.random_task_switch", c.loss.random_task_switch);

  c.sampler.batch_size = static_cast<int>(toml.get_int("sampler.batch_size", c.sampler.batch_size));
  c.sampler.num_hard_batches =
      static_cast<int>(toml.get_int("sampler.num_hard_batches", c.sampler.num_hard_batches));
  c.sampler.knn_k = static_cast<int>(toml.get_int("sampler.knn_k", c.sampler.knn_k));
  c.sampler.action_weight = toml.get_double("sampler.action_weight", c.sampler.action_weight);
  c.sampler.base_weight = toml.get_double("sampler.base_weight", c.sampler.base_weight);
  for (const auto& key : toml.get_string_array("sampler.desired_concepts"))
    c.sampler.desired_concepts.insert(key);

  toml.reject_unconsumed();
  validate(c);
  return c;
}

CorpusConfig corpus_config_from_toml(TomlLite toml) {
  CorpusConfig c;
  c.num_samples = toml.get_int("num_samples", c.num_samples);
  c.num_topics = static_cast<int>(toml.get_int("num_topics", c.num_topics));
  c.feat_dim = static_cast<int>(toml.get_int("feat_dim", c.feat_dim));
  c.vocab_tokens = static_cast<int>(toml.get_int("vocab_tokens", c.vocab_tokens));
  c.noise_sigma = toml.get_double("noise_sigma", c.noise_sigma);
  c.action_topic_fraction = toml.get_double("action_topic_fraction", c.action_topic_fraction);
  c.seed = static_cast<uint64_t>(toml.get_int("seed", 0));
  toml.reject_unconsumed();
  validate(c);
  return c;
}

std::string to_toml(const TrainConfig& c) {
  std::ostringstream out;
  out << "epochs = " << c.epochs << "\n";
  out << "lr = " << c.lr << "\n";
  out << "eval_every = " << c.eval_every << "\n";
  out << "seed = " << c.seed << "\n";
  out << "mode = \"" << to_string(c.mode) << "\"\n";
  if (c.refresh_start_epoch) out << "refresh_start_epoch = " << *c.refresh_start_epoch << "\n";
  out << "refresh_threshold = " << c.refresh_threshold << "\n";
  out << "hidden_dim = " << c.hidden_dim << "\n";
  out << "skp_hidden_dim = " << c.skp_hidden_dim << "\n";
  out << "vocab_k = " << c.vocab_k << "\n";
  out << "holdout_fraction = " << c.holdout_fraction << "\n";
  out << "\n[loss]\n";
  out << "margin_delta = " << c.loss.margin_delta << "\n";
  out << "skp_weight = " << c.loss.skp_weight << "\n";
  out << "kcl_weight = " << c.loss.kcl_weight << "\n";
  out << "random_task_switch = " << (c.loss.random_task_switch ? "true" : "false") << "\n";
  out << "\n[sampler]\n";
  out << "batch_size = " << c.sampler.batch_size << "\n";
  out << "num_hard_batches = " << c.sampler.num_hard_batches << "\n";
  out << "knn_k = " << c.sampler.knn_k << "\n";
  out << "action_weight = " << c.sampler.action_weight << "\n";
  out << "base_weight = " << c.sampler.base_weight << "\n";
  out << "desired_concepts = [";
  bool first = true;
  for (const auto& k : c.sampler.desired_concepts) {
    if (!first) out << ", ";
    out << '"' << k << '"';
    first = false;
  }
  out << "]\n";
  return out.str();
}

HoldoutSplit split_corpus(const std::vector<Sample>& corpus, double holdout_fraction,
                          uint64_t seed) {
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0))
    throw ConfigError("holdout_fraction must be in [0,1)");
  std::vector<size_t> order(corpus.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(seed, "holdout"));
  rng.shuffle(order);
  const size_t n_held = static_cast<size_t>(std::floor(holdout_fraction * corpus.size()));
  HoldoutSplit split;
  split.heldout.reserve(n_held);
  split.train.reserve(corpus.size() - n_held);
  for (size_t i = 0; i < order.size(); ++i)
    (i < n_held ? split.heldout : split.train).push_back(corpus[order[i]]);
  // keep corpus order within each part
  auto by_id = [](const Sample& a, const Sample& b) { return a.id < b.id; };
  std::sort(split.train.begin(), split.train.end(), by_id);
  std::sort(split.heldout.begin(), split.heldout.end(), by_id);
  return split;
}

EvalResult evaluate(const std::vector<Sample>& samples, const EncoderParams& params) {
  if (samples.empty()) throw ValidationError("evaluate: empty split");
  const int H = params.dims.hidden;
  Matrix z_t(static_cast<int>(samples.size()), H);
  Matrix z_v(static_cast<int>(samples.size()), H);
  for (size_t i = 0; i < samples.size(); ++i) {
    const Vector zv = encode_video(params, samples[i].video_feat);
    const Vector zt = encode_text(params, samples[i].caption);
    std::copy(zv.begin(), zv.end(), z_v.row(static_cast<int>(i)).begin());
    std::copy(zt.begin(), zt.end(), z_t.row(static_cast<int>(i)).begin());
  }
  EvalResult res;
  res.t2v = retrieval_eval(z_t, z_v, Direction::t2v);
  res.v2t = retrieval_eval(z_t, z_v, Direction::v2t);
  res.space = space_report(z_t, z_v);
  return res;
}

namespace {

struct BatchWork {
  std::vector<const Sample*> samples;
  std::vector<VideoCache> v_caches;
  std::vector<TextCache> t_caches;
  Matrix z_v;
  Matrix z_t;
};

BatchWork forward_batch(const EncoderParams& params,
                        const std::unordered_map<int64_t, const Sample*>& by_id,
                        const std::vector<int64_t>& ids) {
  BatchWork work;
  const int n = static_cast<int>(ids.size());
  const int H = params.dims.hidden;
  work.samples.resize(ids.size());
  work.v_caches.resize(ids.size());
  work.t_caches.resize(ids.size());
  work.z_v = Matrix(n, H);
  work.z_t = Matrix(n, H);
  for (int i = 0; i < n; ++i) {
    const Sample* s = by_id.at(ids[static_cast<size_t>(i)]);
    work.samples[static_cast<size_t>(i)] = s;
    const Vector zv = encode_video(params, s->video_feat, &work.v_caches[static_cast<size_t>(i)]);
    const Vector zt = encode_text(params, s->caption, &work.t_caches[static_cast<size_t>(i)]);
    std::copy(zv.begin(), zv.end(), work.z_v.row(i).begin());
    std::copy(zt.begin(), zt.end(), work.z_t.row(i).begin());
  }
  return work;
}

}  // namespace

TrainOutput train(const std::vector<Sample>& corpus, const TrainConfig& config) {
  validate(config);
  validate_corpus(corpus);
  if (corpus.empty()) throw ConfigError("empty corpus");

  const bool use_alg1 = config.mode == TrainMode::kcl_only || config.mode == TrainMode::full;
  const bool use_skp = config.mode == TrainMode::skp_only || config.mode == TrainMode::full;
  const bool knowledge_guided = config.mode == TrainMode::full;

  HoldoutSplit split = split_corpus(corpus, config.holdout_fraction, config.seed);
  if (split.train.size() < static_cast<size_t>(config.sampler.batch_size))
    throw ConfigError("train split smaller than batch_size");
  const std::vector<Sample>& eval_set = split.heldout.empty() ? split.train : split.heldout;

  // knowledge pipeline over the train split
  KnowledgeVocab vocab = build_vocab(split.train, config.vocab_k);
  std::vector<PseudoLabelVector> labels = label_vectors(split.train, vocab);

  // encoder dimensions derived from the data
  int max_token = 0;
  for (const Sample& s : corpus)
    for (int tok : s.caption) max_token = std::max(max_token, tok);
  EncoderDims dims;
  dims.feat_dim = static_cast<int>(corpus.front().video_feat.size());
  dims.hidden = config.hidden_dim;
  dims.skp_hidden = config.skp_hidden_dim;
  dims.vocab_tokens = max_token + 1;
  dims.num_concepts = std::max<int>(1, static_cast<int>(vocab.size()));
  EncoderParams params = init_params(dims, config.seed);

  SamplerConfig sampler_cfg = config.sampler;
  sampler_cfg.seed = derive_seed(config.seed, "sampler");
  if (!knowledge_guided) sampler_cfg.desired_concepts.clear();

  std::unordered_map<int64_t, const Sample*> by_id;
  by_id.reserve(split.train.size());
  for (const Sample& s : split.train) by_id.emplace(s.id, &s);
  std::unordered_map<int64_t, size_t> label_index;
  for (size_t i = 0; i < labels.size(); ++i) label_index.emplace(labels[i].sample_id, i);

  std::vector<int64_t> train_ids;
  train_ids.reserve(split.train.size());
  for (const Sample& s : split.train) train_ids.push_back(s.id);

  Rng task_rng(derive_seed(config.seed, "task_switch"));
  EmbeddingMemory memory;
  TrainOutput out;
  out.log.config_snapshot = to_toml(config);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    BatchPlan plan;
    if (use_alg1) {
      plan = build_epoch_plan(split.train, memory, labels, vocab, sampler_cfg, epoch);
    } else {
      Rng plan_rng(derive_seed(sampler_cfg.seed, "epoch_plan", static_cast<uint64_t>(epoch)));
      plan.batches = build_random_plan(train_ids, sampler_cfg.batch_size, plan_rng);
    }

    int step = 0;
    for (const Batch& batch : plan.batches) {
      BatchWork work = forward_batch(params, by_id, batch.sample_ids);
      const int n = work.z_v.rows;

      bool do_skp = use_skp;
      bool do_kcl = true;
      if (config.loss.random_task_switch && use_skp) {
        // one task per batch, as a fidelity option
        if (task_rng.uniform() < 0.5) do_kcl = false;
        else do_skp = false;
      }

      LossReport report;
      EncoderParams grads = zeros_like(params);
      Matrix grad_zv(n, params.dims.hidden);
      Matrix grad_zt(n, params.dims.hidden);
      bool have_zt_grad = false;

      if (do_kcl && config.loss.kcl_weight > 0.0) {
        TripletLossResult trip = kcl_triplet_loss(work.z_t, work.z_v, config.loss.margin_delta);
        report.kcl_loss = trip.loss;
        report.t2v_terms = trip.t2v_active;
        report.v2t_terms = trip.v2t_active;
        const double w = config.loss.kcl_weight;
        for (size_t i = 0; i < trip.grad_zv.data.size(); ++i) {
          grad_zv.data[i] = w * trip.grad_zv.data[i];
          grad_zt.data[i] = w * trip.grad_zt.data[i];
        }
        have_zt_grad = true;
      }

      if (do_skp && config.loss.skp_weight > 0.0 && vocab.size() > 0) {
        Matrix logits(n, params.dims.num_concepts);
        Matrix batch_labels(n, params.dims.num_concepts);
        std::vector<SkpCache> skp_caches(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
          Vector zv(work.z_v.row(i).begin(), work.z_v.row(i).end());
          Vector l = skp_head(params, zv, &skp_caches[static_cast<size_t>(i)]);
          std::copy(l.begin(), l.end(), logits.row(i).begin());
          const auto& bits = labels[label_index.at(work.samples[static_cast<size_t>(i)]->id)].bits;
          for (size_t k = 0; k < bits.size(); ++k)
            batch_labels(i, static_cast<int>(k)) = bits[k] ? 1.0 : 0.0;
        }
        SkpLossResult skp = skp_loss(logits, batch_labels);
        report.skp_loss = skp.loss;
        const double w = config.loss.skp_weight;
        for (int i = 0; i < n; ++i) {
          Vector gl(static_cast<size_t>(params.dims.num_concepts));
          for (int k = 0; k < params.dims.num_concepts; ++k) gl[static_cast<size_t>(k)] = w * skp.grad_logits(i, k);
          Vector gz = skp_head_backward(params, skp_caches[static_cast<size_t>(i)], gl, grads);
          for (int d = 0; d < params.dims.hidden; ++d) grad_zv(i, d) += gz[static_cast<size_t>(d)];
        }
      }

      for (int i = 0; i < n; ++i) {
        Vector gzv(grad_zv.row(i).begin(), grad_zv.row(i).end());
        encode_video_backward(params, work.v_caches[static_cast<size_t>(i)], gzv, grads);
        if (have_zt_grad) {
          Vector gzt(grad_zt.row(i).begin(), grad_zt.row(i).end());
          encode_text_backward(params, work.t_caches[static_cast<size_t>(i)], gzt, grads);
        }
      }
      apply_gradients(params, grads, config.lr);

      // memory update happens on every batch, from this batch's embeddings
      std::vector<BatchEmbedding> embeds;
      embeds.reserve(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i) {
        BatchEmbedding e;
        e.sample_id = work.samples[static_cast<size_t>(i)]->id;
        e.z_v.assign(work.z_v.row(i).begin(), work.z_v.row(i).end());
        e.z_t.assign(work.z_t.row(i).begin(), work.z_t.row(i).end());
        embeds.push_back(std::move(e));
      }
      update_memory(memory, embeds, epoch);

      StepRow row;
      row.epoch = epoch;
      row.step = step++;
      row.batch_kind = batch.kind;
      row.loss = report;
      out.log.steps.push_back(row);
    }

    // pseudo-label refresh from the concept head's sigmoid outputs
    if (use_skp && config.refresh_start_epoch && epoch >= *config.refresh_start_epoch &&
        vocab.size() > 0) {
      std::unordered_map<int64_t, Vector> probs;
      probs.reserve(split.train.size());
      for (const Sample& s : split.train) {
        const Vector zv = encode_video(params, s.video_feat);
        Vector logits = skp_head(params, zv);
        for (double& v : logits) v = 1.0 / (1.0 + std::exp(-v));
        probs.emplace(s.id, std::move(logits));
      }
      labels = refresh_pseudo_labels(probs, vocab, config.refresh_threshold, labels);
    }

    if ((epoch + 1) % config.eval_every == 0 || epoch + 1 == config.epochs) {
      EvalResult ev = evaluate(eval_set, params);
      EvalRow row;
      row.epoch = epoch;
      row.t2v = ev.t2v;
      row.v2t = ev.v2t;
      row.space = ev.space;
      out.log.evals.push_back(row);
    }
  }

  out.params = std::move(params);
  out.vocab = std::move(vocab);
  out.labels = std::move(labels);
  return out;
}

}  // namespace kcl
