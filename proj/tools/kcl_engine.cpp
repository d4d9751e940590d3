// kcl-engine: corpus generation, training, evaluation and batch-plan
// inspection for the two-tower contrastive engine.
//
// Exit codes: 0 success, 2 configuration error, 3 data error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>

#include <CLI11.hpp>

#include "kcl/corpus.hpp"
#include "kcl/encoder.hpp"
#include "kcl/errors.hpp"
#include "kcl/knowledge.hpp"
#include "kcl/metrics.hpp"
#include "kcl/run_log.hpp"
#include "kcl/sampler.hpp"
#include "kcl/toml_lite.hpp"
#include "kcl/trainer.hpp"

namespace {

using nlohmann::ordered_json;

int run_gen(const std::string& config_path, const std::string& out_path) {
  const kcl::CorpusConfig config =
      kcl::corpus_config_from_toml(kcl::TomlLite::parse_file(config_path));
  const auto corpus = kcl::generate_synthetic(config);
  kcl::save_jsonl(corpus, out_path);
  std::cout << "wrote " << corpus.size() << " samples to " << out_path << "\n";
  return 0;
}

int run_train(const std::string& corpus_path, const std::string& config_path,
              const std::string& log_path, const std::string& ckpt_path,
              const std::string& vocab_path) {
  const auto corpus = kcl::load_jsonl(corpus_path);
  const kcl::TrainConfig config =
      kcl::train_config_from_toml(kcl::TomlLite::parse_file(config_path));
  kcl::TrainOutput out = kcl::train(corpus, config);
  if (!ckpt_path.empty()) {
    kcl::save_checkpoint(out.params, ckpt_path);
    out.log.checkpoint_path = ckpt_path;
  }
  if (!vocab_path.empty()) kcl::save_vocab(out.vocab, vocab_path);
  if (!log_path.empty()) kcl::write_run_log(out.log, log_path);

  if (!out.log.evals.empty()) {
    const kcl::EvalRow& last = out.log.evals.back();
    std::cout << "final heldout t2v: R@1 " << last.t2v.r_at.at(1) << "  R@5 "
              << last.t2v.r_at.at(5) << "  R@10 " << last.t2v.r_at.at(10) << "  AveR "
              << last.t2v.aver << "  MedR " << last.t2v.med_r << "\n";
    std::cout << "space: align " << last.space.align << "  unif_txt " << last.space.unif_txt
              << "  unif_vis " << last.space.unif_vis << "\n";
  }
  return 0;
}

int run_eval(const std::string& corpus_path, const std::string& ckpt_path) {
  const auto corpus = kcl::load_jsonl(corpus_path);
  const kcl::EncoderParams params = kcl::load_checkpoint(ckpt_path);
  if (corpus.empty()) throw kcl::DataError("empty corpus: " + corpus_path);
  if (static_cast<int>(corpus.front().video_feat.size()) != params.dims.feat_dim)
    throw kcl::DataError("corpus feature dimension does not match checkpoint");
  const kcl::EvalResult res = kcl::evaluate(corpus, params);
  auto print = [](const char* name, const kcl::RetrievalReport& r) {
    std::cout << name << ": R@1 " << r.r_at.at(1) << "  R@5 " << r.r_at.at(5) << "  R@10 "
              << r.r_at.at(10) << "  AveR " << r.aver << "  MedR " << r.med_r << "\n";
  };
  print("t2v", res.t2v);
  print("v2t", res.v2t);
  std::cout << "align " << res.space.align << "  unif_txt " << res.space.unif_txt
            << "  unif_vis " << res.space.unif_vis << "\n";
  return 0;
}

int run_inspect(const std::string& corpus_path, const std::string& ckpt_path,
                const std::string& config_path, int epoch, const std::string& out_path) {
  const auto corpus = kcl::load_jsonl(corpus_path);
  const kcl::EncoderParams params = kcl::load_checkpoint(ckpt_path);
  const kcl::TrainConfig config =
      kcl::train_config_from_toml(kcl::TomlLite::parse_file(config_path));
  if (corpus.empty()) throw kcl::DataError("empty corpus: " + corpus_path);
  if (static_cast<int>(corpus.front().video_feat.size()) != params.dims.feat_dim)
    throw kcl::DataError("corpus feature dimension does not match checkpoint");

  // Rebuild the knowledge side and a fused-embedding memory from the
  // checkpoint, then plan epoch `epoch` the way training would. Epoch 0
  // plans from an empty memory by definition.
  kcl::HoldoutSplit split = kcl::split_corpus(corpus, config.holdout_fraction, config.seed);
  kcl::KnowledgeVocab vocab = kcl::build_vocab(split.train, config.vocab_k);
  const auto labels = kcl::label_vectors(split.train, vocab);

  kcl::SamplerConfig sampler_cfg = config.sampler;
  sampler_cfg.seed = kcl::derive_seed(config.seed, "sampler");
  if (config.mode != kcl::TrainMode::full) sampler_cfg.desired_concepts.clear();

  kcl::EmbeddingMemory memory;
  std::unordered_map<int64_t, kcl::Vector> fused;
  for (const kcl::Sample& s : split.train) {
    const kcl::Vector zv = kcl::encode_video(params, s.video_feat);
    const kcl::Vector zt = kcl::encode_text(params, s.caption);
    kcl::update_memory(memory, {{s.id, zv, zt}}, epoch > 0 ? epoch - 1 : 0);
  }
  fused = memory.entries;

  const bool random_only =
      epoch == 0 || (config.mode != kcl::TrainMode::kcl_only && config.mode != kcl::TrainMode::full);
  kcl::BatchPlan plan;
  if (random_only) {
    kcl::Rng rng(kcl::derive_seed(sampler_cfg.seed, "epoch_plan", static_cast<uint64_t>(epoch)));
    std::vector<int64_t> ids;
    for (const kcl::Sample& s : split.train) ids.push_back(s.id);
    plan.batches = kcl::build_random_plan(ids, sampler_cfg.batch_size, rng);
  } else {
    plan = kcl::build_epoch_plan(split.train, memory, labels, vocab, sampler_cfg, epoch);
  }

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!out_path.empty() && out_path != "-") {
    file.open(out_path);
    if (!file) throw kcl::IoError("cannot open for writing: " + out_path);
    out = &file;
  }
  for (size_t index = 0; index < plan.batches.size(); ++index) {
    const kcl::Batch& b = plan.batches[index];
    double dist_sum = 0.0;
    int64_t pairs = 0;
    for (size_t i = 0; i < b.sample_ids.size(); ++i)
      for (size_t j = i + 1; j < b.sample_ids.size(); ++j) {
        dist_sum += std::sqrt(kcl::squared_distance(fused.at(b.sample_ids[i]),
                                                    fused.at(b.sample_ids[j])));
        ++pairs;
      }
    ordered_json j;
    j["epoch"] = epoch;
    j["index"] = index;
    j["kind"] = b.kind == kcl::BatchKind::hard ? "hard" : "random";
    if (b.anchor_id) j["anchor_id"] = *b.anchor_id;
    else j["anchor_id"] = nullptr;
    j["sample_ids"] = b.sample_ids;
    j["mean_pairwise_distance"] = pairs > 0 ? dist_sum / static_cast<double>(pairs) : 0.0;
    (*out) << j.dump() << "\n";
  }
  return 0;
}

int run_diagnose(const std::string& log_path, const std::string& out_path) {
  const kcl::RunLog log = kcl::read_run_log(log_path);
  const auto rows = kcl::diagnostics_series(log);
  if (!out_path.empty() && out_path != "-") {
    std::ofstream file(out_path);
    if (!file) throw kcl::IoError("cannot open for writing: " + out_path);
    kcl::write_diagnostics_csv(rows, file);
  } else {
    kcl::write_diagnostics_csv(rows, std::cout);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-tower contrastive training engine with knowledge-guided sampling"};
  app.require_subcommand(1);

  std::string corpus_path, config_path, log_path, ckpt_path, vocab_path, out_path;
  int epoch = 0;

  auto* gen = app.add_subcommand("gen", "generate a synthetic corpus");
  gen->add_option("--config", config_path, "corpus config TOML")->required();
  gen->add_option("--out", out_path, "output corpus JSONL")->required();

  auto* train = app.add_subcommand("train", "train on a corpus");
  train->add_option("--corpus", corpus_path, "corpus JSONL")->required();
  train->add_option("--config", config_path, "run config TOML")->required();
  train->add_option("--log", log_path, "run log CSV to write");
  train->add_option("--ckpt", ckpt_path, "checkpoint file to write");
  train->add_option("--vocab", vocab_path, "concept vocabulary dump to write");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a corpus");
  eval->add_option("--corpus", corpus_path, "corpus JSONL")->required();
  eval->add_option("--ckpt", ckpt_path, "checkpoint file")->required();

  auto* inspect = app.add_subcommand("inspect-batches", "emit one epoch's batch plan as JSONL");
  inspect->add_option("--corpus", corpus_path, "corpus JSONL")->required();
  inspect->add_option("--ckpt", ckpt_path, "checkpoint file")->required();
  inspect->add_option("--config", config_path, "run config TOML")->required();
  inspect->add_option("--epoch", epoch, "epoch index to plan")->required();
  inspect->add_option("--out", out_path, "output path ('-' for stdout)");

  auto* diagnose = app.add_subcommand("diagnose", "aggregate a run log into a per-epoch CSV");
  diagnose->add_option("--log", log_path, "run log CSV")->required();
  diagnose->add_option("--out", out_path, "output path ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return run_gen(config_path, out_path);
    if (train->parsed()) return run_train(corpus_path, config_path, log_path, ckpt_path, vocab_path);
    if (eval->parsed()) return run_eval(corpus_path, ckpt_path);
    if (inspect->parsed()) return run_inspect(corpus_path, ckpt_path, config_path, epoch, out_path);
    if (diagnose->parsed()) return run_diagnose(log_path, out_path);
  } catch (const kcl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
