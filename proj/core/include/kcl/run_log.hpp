#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "kcl/losses.hpp"
#include "kcl/metrics.hpp"
#include "kcl/sampler.hpp"

namespace kcl {

struct StepRow {
  int epoch = 0;
  int step = 0;  // batch index within the epoch
  BatchKind batch_kind = BatchKind::random;
  LossReport loss;
};

struct EvalRow {
  int epoch = 0;
  RetrievalReport t2v;
  RetrievalReport v2t;
  SpaceReport space;
};

// Full run record: step rows in execution order, eval rows at epoch
// boundaries, the config snapshot and the final checkpoint path.
struct RunLog {
  std::vector<StepRow> steps;
  std::vector<EvalRow> evals;
  std::string config_snapshot;
  std::string checkpoint_path;
};

// CSV round trip. Step and eval rows share one file, discriminated by the
// leading `kind` column; snapshot and checkpoint path ride in '#' comments.
void write_run_log(const RunLog& log, const std::string& path);
RunLog read_run_log(const std::string& path);

// Plot-ready per-epoch series: epoch-mean losses joined with that epoch's
// evaluation, emitted only for epochs that carry an eval row.
struct DiagnosticsRow {
  int epoch = 0;
  double skp_loss = 0.0;
  double kcl_loss = 0.0;
  double align = 0.0;
  double unif_txt = 0.0;
  double unif_vis = 0.0;
  double r1 = 0.0;
  double r5 = 0.0;
  double r10 = 0.0;
  double medr = 0.0;
};

std::vector<DiagnosticsRow> diagnostics_series(const RunLog& log);
void write_diagnostics_csv(const std::vector<DiagnosticsRow>& rows, std::ostream& out);

}  // namespace kcl
