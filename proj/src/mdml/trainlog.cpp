#include "mdml/trainlog.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mdml/errors.hpp"

namespace mdml {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string train_log_to_csv(const TrainLog& log) {
  std::string out = "iteration,source_id,val_recall1,loss_avg\n";
  for (const TrainLogRow& row : log.rows) {
    out += std::to_string(row.iteration);
    out += ',';
    out += std::to_string(row.source_id);
    out += ',';
    out += format_double(row.val_recall1);
    out += ',';
    out += format_double(row.loss_avg);
    out += '\n';
  }
  return out;
}

void save_train_log_csv(const TrainLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::Io, "save_train_log_csv: cannot open " + path);
  out << train_log_to_csv(log);
  require(out.good(), ErrorCode::Io, "save_train_log_csv: write failed for " + path);
}

TrainLog load_train_log_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::Io, "load_train_log_csv: cannot open " + path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::Format,
          "load_train_log_csv: empty file " + path);
  require(line == "iteration,source_id,val_recall1,loss_avg", ErrorCode::Format,
          "load_train_log_csv: unexpected header in " + path);
  TrainLog log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    TrainLogRow row;
    try {
      require(static_cast<bool>(std::getline(ss, field, ',')), ErrorCode::Format, "missing iteration");
      row.iteration = std::stoull(field);
      require(static_cast<bool>(std::getline(ss, field, ',')), ErrorCode::Format, "missing source_id");
      row.source_id = std::stoi(field);
      require(static_cast<bool>(std::getline(ss, field, ',')), ErrorCode::Format, "missing val_recall1");
      row.val_recall1 = std::stod(field);
      require(static_cast<bool>(std::getline(ss, field, ',')), ErrorCode::Format, "missing loss_avg");
      row.loss_avg = std::stod(field);
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      fail(ErrorCode::Format, "load_train_log_csv: malformed row in " + path);
    }
    log.rows.push_back(row);
  }
  return log;
}

}  // namespace mdml
