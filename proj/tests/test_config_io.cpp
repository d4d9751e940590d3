#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <sstream>

#include "kcl/errors.hpp"
#include "kcl/run_log.hpp"
#include "kcl/toml_lite.hpp"
#include "kcl/trainer.hpp"

using namespace kcl;

TEST_CASE("toml parsing covers the config surface") {
  const std::string text = R"(
# run configuration
epochs = 12
lr = 5e-2
mode = "full"          # trailing comment
flag = true

[sampler]
batch_size = 32
desired_concepts = ["man#run", "verb0_1"]
weights = [1.5, 2.0]
counts = [1, 2, 3]
)";
  auto toml = TomlLite::parse_string(text);
  CHECK(toml.get_int("epochs", 0) == 12);
  CHECK(toml.get_double("lr", 0.0) == doctest::Approx(0.05));
  CHECK(toml.get_string("mode", "") == "full");
  CHECK(toml.get_bool("flag", false));
  CHECK(toml.get_int("sampler.batch_size", 0) == 32);
  CHECK(toml.get_string_array("sampler.desired_concepts") ==
        std::vector<std::string>{"man#run", "verb0_1"});
  CHECK(toml.get_double("missing", 1.25) == 1.25);
  // weights/counts untouched so far
  CHECK(toml.unconsumed_keys().size() == 2);
  CHECK_THROWS_AS(toml.get_double("sampler.weights", 0.0), ConfigError);  // wrong type
}

TEST_CASE("toml type and syntax errors") {
  CHECK_THROWS_AS(TomlLite::parse_string("epochs 12"), ConfigError);
  CHECK_THROWS_AS(TomlLite::parse_string("[unterminated"), ConfigError);
  CHECK_THROWS_AS(TomlLite::parse_string("a = \"unclosed"), ConfigError);
  CHECK_THROWS_AS(TomlLite::parse_string("a = 1\na = 2"), ConfigError);
  CHECK_THROWS_AS(TomlLite::parse_string("a = [1, 2"), ConfigError);
  CHECK_THROWS_AS(TomlLite::parse_string("a = zebra"), ConfigError);

  auto toml = TomlLite::parse_string("a = \"text\"");
  CHECK_THROWS_AS(toml.get_int("a", 0), ConfigError);
  CHECK_THROWS_AS(TomlLite::parse_file("missing.toml"), ConfigError);
}

TEST_CASE("unknown config keys are rejected") {
  auto toml = TomlLite::parse_string("epochs = 3\ntypo_key = 1");
  toml.get_int("epochs", 0);
  CHECK_THROWS_AS(toml.reject_unconsumed(), ConfigError);
}

TEST_CASE("train config round trips through its toml snapshot") {
  TrainConfig c;
  c.epochs = 17;
  c.lr = 0.025;
  c.eval_every = 5;
  c.seed = 99;
  c.mode = TrainMode::kcl_only;
  c.refresh_start_epoch = 4;
  c.refresh_threshold = 0.7;
  c.hidden_dim = 24;
  c.skp_hidden_dim = 12;
  c.vocab_k = 64;
  c.holdout_fraction = 0.2;
  c.loss.margin_delta = 0.3;
  c.loss.skp_weight = 0.5;
  c.loss.kcl_weight = 2.0;
  c.loss.random_task_switch = true;
  c.sampler.batch_size = 8;
  c.sampler.num_hard_batches = 6;
  c.sampler.knn_k = 20;
  c.sampler.action_weight = 4.0;
  c.sampler.base_weight = 1.0;
  c.sampler.desired_concepts = {"verb0_0", "noun1_2#verb1_0"};

  const TrainConfig parsed = train_config_from_toml(TomlLite::parse_string(to_toml(c)));
  CHECK(parsed.epochs == c.epochs);
  CHECK(parsed.lr == doctest::Approx(c.lr));
  CHECK(parsed.eval_every == c.eval_every);
  CHECK(parsed.seed == c.seed);
  CHECK(parsed.mode == c.mode);
  REQUIRE(parsed.refresh_start_epoch.has_value());
  CHECK(*parsed.refresh_start_epoch == 4);
  CHECK(parsed.refresh_threshold == doctest::Approx(c.refresh_threshold));
  CHECK(parsed.hidden_dim == c.hidden_dim);
  CHECK(parsed.vocab_k == c.vocab_k);
  CHECK(parsed.holdout_fraction == doctest::Approx(c.holdout_fraction));
  CHECK(parsed.loss.margin_delta == doctest::Approx(c.loss.margin_delta));
  CHECK(parsed.loss.random_task_switch == c.loss.random_task_switch);
  CHECK(parsed.sampler.batch_size == c.sampler.batch_size);
  CHECK(parsed.sampler.num_hard_batches == c.sampler.num_hard_batches);
  CHECK(parsed.sampler.desired_concepts == c.sampler.desired_concepts);
}

TEST_CASE("train config validation failures") {
  CHECK_THROWS_AS(train_config_from_toml(TomlLite::parse_string("epochs = 0")), ConfigError);
  CHECK_THROWS_AS(train_config_from_toml(TomlLite::parse_string("mode = \"nope\"")), ConfigError);
  CHECK_THROWS_AS(train_config_from_toml(TomlLite::parse_string("holdout_fraction = 1.0")),
                  ConfigError);
  CHECK_THROWS_AS(train_config_from_toml(TomlLite::parse_string("unknown_option = 1")),
                  ConfigError);
}

TEST_CASE("corpus config parses from toml") {
  const auto c = corpus_config_from_toml(TomlLite::parse_string(R"(
num_samples = 100
num_topics = 5
feat_dim = 16
vocab_tokens = 96
noise_sigma = 0.07
action_topic_fraction = 0.2
seed = 11
)"));
  CHECK(c.num_samples == 100);
  CHECK(c.num_topics == 5);
  CHECK(c.feat_dim == 16);
  CHECK(c.vocab_tokens == 96);
  CHECK(c.noise_sigma == doctest::Approx(0.07));
  CHECK(c.action_topic_fraction == doctest::Approx(0.2));
  CHECK(c.seed == 11);
  CHECK_THROWS_AS(corpus_config_from_toml(TomlLite::parse_string("num_samples = -5")),
                  ConfigError);
}

TEST_CASE("run log round trips through csv") {
  RunLog log;
  log.config_snapshot = "epochs = 2\nlr = 0.05\n";
  log.checkpoint_path = "model.bin";
  for (int e = 0; e < 2; ++e)
    for (int s = 0; s < 3; ++s) {
      StepRow row;
      row.epoch = e;
      row.step = s;
      row.batch_kind = s % 2 == 0 ? BatchKind::random : BatchKind::hard;
      row.loss.skp_loss = 0.5 * e + 0.125 * s;
      row.loss.kcl_loss = 1.0 / (1 + s);
      row.loss.t2v_terms = 10 * s;
      row.loss.v2t_terms = 5 * s;
      log.steps.push_back(row);
    }
  EvalRow ev;
  ev.epoch = 1;
  ev.t2v.r_at = {{1, 0.25}, {5, 0.5}, {10, 0.75}};
  ev.t2v.aver = 0.5;
  ev.t2v.med_r = 6;
  ev.v2t.r_at = {{1, 0.2}, {5, 0.4}, {10, 0.8}};
  ev.v2t.aver = 0.4666666666666667;
  ev.v2t.med_r = 7;
  ev.space.align = 0.321;
  ev.space.unif_txt = -2.25;
  ev.space.unif_vis = -2.5;
  log.evals.push_back(ev);

  const std::string path = "runlog_test.csv";
  write_run_log(log, path);
  const RunLog back = read_run_log(path);
  CHECK(back.config_snapshot == log.config_snapshot);
  CHECK(back.checkpoint_path == log.checkpoint_path);
  REQUIRE(back.steps.size() == log.steps.size());
  for (size_t i = 0; i < log.steps.size(); ++i) {
    CHECK(back.steps[i].epoch == log.steps[i].epoch);
    CHECK(back.steps[i].step == log.steps[i].step);
    CHECK(back.steps[i].batch_kind == log.steps[i].batch_kind);
    CHECK(back.steps[i].loss.skp_loss == log.steps[i].loss.skp_loss);
    CHECK(back.steps[i].loss.kcl_loss == log.steps[i].loss.kcl_loss);
    CHECK(back.steps[i].loss.t2v_terms == log.steps[i].loss.t2v_terms);
  }
  REQUIRE(back.evals.size() == 1);
  CHECK(back.evals[0].t2v.r_at.at(5) == 0.5);
  CHECK(back.evals[0].space.unif_vis == -2.5);
  std::remove(path.c_str());
}

TEST_CASE("diagnostics aggregate per-epoch means joined with evals") {
  RunLog log;
  for (int s = 0; s < 4; ++s) {
    StepRow row;
    row.epoch = 0;
    row.step = s;
    row.loss.skp_loss = 1.0 + s;  // mean 2.5
    row.loss.kcl_loss = 2.0 * s;  // mean 3.0
    log.steps.push_back(row);
  }
  EvalRow ev;
  ev.epoch = 0;
  ev.t2v.r_at = {{1, 0.1}, {5, 0.3}, {10, 0.6}};
  ev.t2v.med_r = 9;
  ev.space.align = 0.5;
  ev.space.unif_txt = -1.0;
  ev.space.unif_vis = -1.5;
  log.evals.push_back(ev);

  const auto rows = diagnostics_series(log);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].epoch == 0);
  CHECK(rows[0].skp_loss == doctest::Approx(2.5));
  CHECK(rows[0].kcl_loss == doctest::Approx(3.0));
  CHECK(rows[0].r1 == doctest::Approx(0.1));
  CHECK(rows[0].medr == doctest::Approx(9));

  std::ostringstream out;
  write_diagnostics_csv(rows, out);
  CHECK(out.str().find("epoch,skp_loss,kcl_loss,align,unif_txt,unif_vis,r1,r5,r10,medr") == 0);
}
