#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "mdml/dataset.hpp"
#include "mdml/errors.hpp"
#include "mdml/training.hpp"

using namespace mdml;

namespace {

Dataset tiny_dataset(int n_sources, std::uint64_t seed, double spread = 0.4) {
  std::vector<SourceSpec> specs;
  for (int s = 0; s < n_sources; ++s) {
    specs.push_back(SourceSpec{s, 6, 20, spread, 1.5, 0.0});
  }
  Dataset ds = generate_synthetic(specs, 8, seed);
  split(ds, {2, 1, 1}, seed);
  return ds;
}

TrainConfig tiny_config(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.iterations = 100;
  cfg.checkpoint_every = 25;
  cfg.lr = 3e-3;
  cfg.batch = BatchSpec{3, 3};
  cfg.seed = seed;
  cfg.encoder.input_dim = 8;
  cfg.encoder.hidden_dims = {16};
  cfg.encoder.embed_dim = 16;
  return cfg;
}

}  // namespace

TEST_CASE("identical config and seed give identical logs and params") {
  const Dataset ds = tiny_dataset(2, 1);
  const TrainConfig cfg = tiny_config(5);
  const TrainResult a = train_fused(ds, cfg);
  const TrainResult b = train_fused(ds, cfg);
  CHECK(a.log == b.log);
  CHECK(a.params.values == b.params.values);
  CHECK(a.selected_iteration == b.selected_iteration);
}

TEST_CASE("zero iterations returns the seeded initialization unchanged") {
  const Dataset ds = tiny_dataset(1, 2);
  TrainConfig cfg = tiny_config(6);
  cfg.iterations = 0;
  const TrainResult result = train_specialist(ds, 0, cfg);
  CHECK(result.log.rows.empty());
  Rng rng(cfg.seed);
  const EncoderParams expected = init_params(cfg.encoder, rng.next_u64());
  CHECK(result.params.values == expected.values);
}

TEST_CASE("specialist training solves a separable source") {
  std::vector<SourceSpec> specs = {SourceSpec{0, 6, 20, 0.01, 2.0, 0.0}};
  Dataset ds = generate_synthetic(specs, 8, 3);
  split(ds, {2, 1, 1}, 3);
  TrainConfig cfg = tiny_config(7);
  cfg.iterations = 300;
  cfg.checkpoint_every = 50;
  const TrainResult result = train_specialist(ds, 0, cfg);
  double best = 0.0;
  for (const TrainLogRow& row : result.log.rows) best = std::max(best, row.val_recall1);
  CHECK(best >= 0.99);
}

TEST_CASE("train_fused on a single-source registry equals train_specialist") {
  const Dataset ds = tiny_dataset(1, 4);
  const TrainConfig cfg = tiny_config(8);
  const TrainResult spec = train_specialist(ds, 0, cfg);
  const TrainResult fused = train_fused(ds, cfg);
  CHECK(spec.log == fused.log);
  CHECK(spec.params.values == fused.params.values);
}

TEST_CASE("train log has one row per source per checkpoint") {
  const Dataset ds = tiny_dataset(3, 5);
  TrainConfig cfg = tiny_config(9);
  cfg.policy = SamplingPolicy::naive();
  const TrainResult result = train_fused(ds, cfg);
  CHECK(result.log.rows.size() == 4 * 3);  // 100/25 checkpoints x 3 sources
  std::uint64_t prev_iter = 0;
  for (const TrainLogRow& row : result.log.rows) {
    CHECK(row.iteration >= prev_iter);
    prev_iter = row.iteration;
    CHECK(std::isfinite(row.loss_avg));
    CHECK(row.loss_avg >= 0.0);
  }
}

TEST_CASE("distillation keeps teachers frozen and routes them by batch source") {
  const Dataset ds = tiny_dataset(2, 6);
  TrainConfig cfg = tiny_config(10);
  cfg.iterations = 50;
  cfg.checkpoint_every = 25;

  SpecialistSet specialists;
  specialists.emplace(0, init_params(cfg.encoder, 100));
  specialists.emplace(1, init_params(cfg.encoder, 101));
  const std::vector<double> teacher0_before = specialists.at(0).values;
  const std::vector<double> teacher1_before = specialists.at(1).values;

  int routed = 0;
  TrainHooks hooks;
  hooks.on_iteration = [&](std::uint64_t, int batch_source, int teacher_source) {
    CHECK(teacher_source == batch_source);
    ++routed;
  };
  const TrainResult result = distill(ds, specialists, cfg, "", hooks);
  CHECK(routed == 50);
  CHECK(specialists.at(0).values == teacher0_before);
  CHECK(specialists.at(1).values == teacher1_before);
  CHECK(result.log.rows.size() == 2 * 2);
}

TEST_CASE("a student initialized to its single teacher stays at zero loss") {
  const Dataset ds = tiny_dataset(1, 7);
  TrainConfig cfg = tiny_config(11);
  cfg.iterations = 25;
  cfg.checkpoint_every = 25;
  SpecialistSet specialists;
  specialists.emplace(0, init_params(cfg.encoder, 200));

  TrainHooks hooks;
  hooks.student_init = &specialists.at(0);
  const TrainResult result = distill(ds, specialists, cfg, "", hooks);
  for (const TrainLogRow& row : result.log.rows) CHECK(row.loss_avg == 0.0);
  CHECK(result.params.values == specialists.at(0).values);
}

TEST_CASE("distill requires a specialist for every non-direct source") {
  const Dataset ds = tiny_dataset(2, 8);
  TrainConfig cfg = tiny_config(12);
  SpecialistSet specialists;
  specialists.emplace(0, init_params(cfg.encoder, 300));
  try {
    distill(ds, specialists, cfg);
    FAIL("expected missing-specialist error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingSpecialist);
    CHECK(std::string(e.what()).find("source 1") != std::string::npos);
  }
  // the same run goes through once source 1 is routed to the direct loss
  cfg.mixed_direct_sources = {1};
  const TrainResult result = distill(ds, specialists, cfg);
  CHECK(result.log.rows.size() == 4 * 2);
}

TEST_CASE("mixed direct sources use the direct loss inside distillation") {
  const Dataset ds = tiny_dataset(2, 9);
  TrainConfig cfg = tiny_config(13);
  cfg.iterations = 60;
  cfg.checkpoint_every = 30;
  cfg.mixed_direct_sources = {1};
  SpecialistSet specialists;
  specialists.emplace(0, init_params(cfg.encoder, 400));

  int direct_iters = 0, distilled_iters = 0;
  TrainHooks hooks;
  hooks.on_iteration = [&](std::uint64_t, int batch_source, int teacher_source) {
    if (batch_source == 1) {
      CHECK(teacher_source == -1);
      ++direct_iters;
    } else {
      CHECK(teacher_source == 0);
      ++distilled_iters;
    }
  };
  distill(ds, specialists, cfg, "", hooks);
  CHECK(direct_iters + distilled_iters == 60);
  CHECK(direct_iters > 0);
  CHECK(distilled_iters > 0);
}

TEST_CASE("divergence aborts with a diagnostic") {
  const Dataset ds = tiny_dataset(1, 10);
  TrainConfig cfg = tiny_config(14);
  cfg.multi_similarity.beta = 1e6;
  cfg.multi_similarity.lambda = -1e6;  // exp overflows on the first batch
  try {
    train_specialist(ds, 0, cfg);
    FAIL("expected divergence error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Diverged);
    CHECK(std::string(e.what()).find("iteration") != std::string::npos);
  }
}

TEST_CASE("training writes checkpoints, log.csv, and selected.ckpt") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "mdml_test_run";
  fs::remove_all(dir);
  const Dataset ds = tiny_dataset(1, 11);
  const TrainConfig cfg = tiny_config(15);
  const TrainResult result = train_specialist(ds, 0, cfg, dir.string());
  for (int iter = 25; iter <= 100; iter += 25) {
    CHECK(fs::exists(dir / ("ckpt_" + std::to_string(iter))));
  }
  CHECK(fs::exists(dir / "log.csv"));
  const Checkpoint selected = load_checkpoint((dir / "selected.ckpt").string());
  CHECK(selected.params.values == result.params.values);
  CHECK(selected.step == result.selected_iteration);
  const TrainLog loaded = load_train_log_csv((dir / "log.csv").string());
  CHECK(loaded == result.log);
  fs::remove_all(dir);
}

TEST_CASE("specialist selection picks the best validation checkpoint") {
  const Dataset ds = tiny_dataset(1, 12);
  TrainConfig cfg = tiny_config(16);
  cfg.iterations = 200;
  cfg.checkpoint_every = 25;
  const TrainResult result = train_specialist(ds, 0, cfg);
  double best = -1.0;
  std::uint64_t best_iter = 0;
  for (const TrainLogRow& row : result.log.rows) {
    if (row.val_recall1 > best) {
      best = row.val_recall1;
      best_iter = row.iteration;
    }
  }
  CHECK(result.selected_iteration == best_iter);
}

TEST_CASE("train config validation") {
  TrainConfig cfg = tiny_config(17);
  cfg.iterations = 101;  // not a multiple of checkpoint_every
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = tiny_config(18);
  cfg.lr = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = tiny_config(19);
  cfg.policy = SamplingPolicy::naive();
  const Dataset ds = tiny_dataset(1, 13);
  SpecialistSet specialists;
  specialists.emplace(0, init_params(cfg.encoder, 500));
  CHECK_THROWS_AS(distill(ds, specialists, cfg), Error);
}
