#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mdml {

// One row per (checkpoint, source): validation Recall@1 at that iteration and
// the training-loss average over the window since the previous checkpoint.
struct TrainLogRow {
  std::uint64_t iteration = 0;
  int source_id = 0;
  double val_recall1 = 0.0;
  double loss_avg = 0.0;

  bool operator==(const TrainLogRow&) const = default;
};

struct TrainLog {
  std::vector<TrainLogRow> rows;

  bool operator==(const TrainLog&) const = default;
};

// CSV with header iteration,source_id,val_recall1,loss_avg. Doubles are
// written with 17 significant digits so the file reproduces exactly.
void save_train_log_csv(const TrainLog& log, const std::string& path);
std::string train_log_to_csv(const TrainLog& log);
TrainLog load_train_log_csv(const std::string& path);

}  // namespace mdml
