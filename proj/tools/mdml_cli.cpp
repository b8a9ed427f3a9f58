// mdml command line: generate data, train specialists and fused baselines,
// distill, evaluate, and assemble report tables. All core work goes through
// the C API in mdml.h; this file only handles arguments, config files, and
// output layout.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mdml.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliError {
  mdml_status status;
  std::string message;
};

[[noreturn]] void bail(mdml_status status, const std::string& message) {
  throw CliError{status, message};
}

void check(mdml_status status) {
  if (status != MDML_OK) throw CliError{status, mdml_last_error()};
}

// RAII wrappers over the C handles.
using DatasetPtr = std::unique_ptr<mdml_dataset, decltype(&mdml_dataset_free)>;
using ModelPtr = std::unique_ptr<mdml_model, decltype(&mdml_model_free)>;

DatasetPtr load_dataset(const std::string& path) {
  mdml_dataset* raw = nullptr;
  check(mdml_dataset_load(path.c_str(), &raw));
  return DatasetPtr(raw, &mdml_dataset_free);
}

ModelPtr load_model(const std::string& path) {
  mdml_model* raw = nullptr;
  check(mdml_model_load(path.c_str(), &raw));
  return ModelPtr(raw, &mdml_model_free);
}

std::string take_string(char* s) {
  std::string out = s == nullptr ? "" : s;
  mdml_string_free(s);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) bail(MDML_ERR_IO, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  if (const fs::path parent = fs::path(path).parent_path(); !parent.empty()) {
    fs::create_directories(parent);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out.good()) bail(MDML_ERR_IO, "cannot open " + path + " for writing");
  out << content;
  if (!out.good()) bail(MDML_ERR_IO, "write failed for " + path);
}

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  const json doc = json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    bail(MDML_ERR_INVALID_ARGUMENT, "config file " + path + " is not a JSON object");
  }
  return doc;
}

std::string output_root() {
  const char* env = std::getenv("MDML_OUT");
  return env != nullptr && env[0] != '\0' ? env : "runs";
}

// (source id, checkpoint path) pairs given as "--specialist 2=path".
std::pair<std::vector<int32_t>, std::vector<ModelPtr>> load_specialists(
    const std::vector<std::string>& args) {
  std::vector<int32_t> sources;
  std::vector<ModelPtr> models;
  for (const std::string& arg : args) {
    const std::size_t eq = arg.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size()) {
      bail(MDML_ERR_INVALID_ARGUMENT,
           "--specialist expects <source_id>=<checkpoint>, got '" + arg + "'");
    }
    try {
      sources.push_back(std::stoi(arg.substr(0, eq)));
    } catch (const std::exception&) {
      bail(MDML_ERR_INVALID_ARGUMENT, "bad source id in '" + arg + "'");
    }
    models.push_back(load_model(arg.substr(eq + 1)));
  }
  return {std::move(sources), std::move(models)};
}

std::vector<const mdml_model*> raw_pointers(const std::vector<ModelPtr>& models) {
  std::vector<const mdml_model*> out;
  out.reserve(models.size());
  for (const ModelPtr& m : models) out.push_back(m.get());
  return out;
}

// ---- gen-data -------------------------------------------------------------

struct GenDataArgs {
  std::string config_path;
  std::string out_path = "dataset.bin";
  std::int64_t seed = -1;
};

int cmd_gen_data(const GenDataArgs& args) {
  json cfg = load_config_file(args.config_path);
  if (args.seed >= 0) cfg["seed"] = static_cast<std::uint64_t>(args.seed);

  mdml_dataset* raw = nullptr;
  check(mdml_dataset_generate(cfg.dump().c_str(), &raw));
  DatasetPtr dataset(raw, &mdml_dataset_free);
  check(mdml_dataset_save(dataset.get(), args.out_path.c_str()));

  char* summary = nullptr;
  check(mdml_dataset_summary(dataset.get(), &summary));
  const json doc = json::parse(take_string(summary));
  std::cout << "wrote " << args.out_path << "\n";
  std::cout << "input_dim " << doc.at("input_dim") << ", samples "
            << doc.at("n_samples") << "\n";
  for (const json& src : doc.at("sources")) {
    std::cout << "source " << src.at("source_id") << ": " << src.at("n_classes")
              << " classes x " << src.at("samples_per_class") << " samples"
              << ", split " << src.at("train") << "/" << src.at("val") << "/"
              << src.at("test") << "\n";
  }
  return 0;
}

// ---- training commands ------------------------------------------------------

struct TrainArgs {
  std::string dataset_path;
  std::string config_path;
  std::string run_id;
  std::int64_t source_id = -1;            // train-specialist
  std::string policy;                     // train-fused
  std::vector<std::string> specialists;   // distill
  std::vector<int> direct_sources;        // distill
  double boost = 0.0;
  std::vector<int> boost_sources;
  std::int64_t seed = -1;
  std::int64_t iterations = -1;
  double lr = 0.0;
};

json merged_train_config(const TrainArgs& args) {
  json cfg = load_config_file(args.config_path);
  if (args.seed >= 0) cfg["seed"] = static_cast<std::uint64_t>(args.seed);
  if (args.iterations >= 0) cfg["iterations"] = static_cast<std::uint64_t>(args.iterations);
  if (args.lr > 0.0) cfg["lr"] = args.lr;
  if (!args.policy.empty()) cfg["policy"] = args.policy;
  if (!args.direct_sources.empty()) cfg["direct_sources"] = args.direct_sources;
  if (args.boost > 0.0) {
    cfg["boost_factor"] = args.boost;
    if (!args.boost_sources.empty()) cfg["boosted_sources"] = args.boost_sources;
    if (!cfg.contains("policy") || cfg.at("policy") == "ss") cfg["policy"] = "boosted";
  }
  return cfg;
}

std::string run_dir_for(const std::string& run_id) {
  if (run_id.empty()) bail(MDML_ERR_INVALID_ARGUMENT, "--run-id must not be empty");
  return (fs::path(output_root()) / run_id).string();
}

void print_run_summary(const std::string& run_dir) {
  std::cout << "run directory: " << run_dir << "\n";
  char* summary = nullptr;
  if (mdml_overfit_summary((fs::path(run_dir) / "log.csv").string().c_str(), &summary) ==
      MDML_OK) {
    const json doc = json::parse(take_string(summary));
    for (const json& src : doc.at("sources")) {
      std::cout << "source " << src.at("source_id") << ": peak val R1 "
                << src.at("peak_recall1") << " at iteration "
                << src.at("peak_iteration") << ", final " << src.at("final_recall1")
                << "\n";
    }
  }
}

int cmd_train_specialist(const TrainArgs& args) {
  const DatasetPtr dataset = load_dataset(args.dataset_path);
  const json cfg = merged_train_config(args);
  const std::string run_dir = run_dir_for(args.run_id);
  mdml_model* raw = nullptr;
  check(mdml_train_specialist(dataset.get(), static_cast<int32_t>(args.source_id),
                              cfg.dump().c_str(), run_dir.c_str(), &raw));
  mdml_model_free(raw);
  print_run_summary(run_dir);
  return 0;
}

int cmd_train_fused(const TrainArgs& args) {
  const DatasetPtr dataset = load_dataset(args.dataset_path);
  const json cfg = merged_train_config(args);
  const std::string run_dir = run_dir_for(args.run_id);
  mdml_model* raw = nullptr;
  check(mdml_train_fused(dataset.get(), cfg.dump().c_str(), run_dir.c_str(), &raw));
  mdml_model_free(raw);
  print_run_summary(run_dir);
  return 0;
}

int cmd_distill(const TrainArgs& args) {
  const DatasetPtr dataset = load_dataset(args.dataset_path);
  auto [sources, models] = load_specialists(args.specialists);
  // By default, boosting targets the sources that have specialists.
  TrainArgs adjusted = args;
  if (args.boost > 0.0 && args.boost_sources.empty()) {
    adjusted.boost_sources.assign(sources.begin(), sources.end());
  }
  const json cfg = merged_train_config(adjusted);
  const std::string run_dir = run_dir_for(args.run_id);
  const std::vector<const mdml_model*> raw_models = raw_pointers(models);
  mdml_model* raw = nullptr;
  check(mdml_distill(dataset.get(), sources.data(), raw_models.data(),
                     static_cast<int32_t>(sources.size()), cfg.dump().c_str(),
                     run_dir.c_str(), &raw));
  mdml_model_free(raw);
  print_run_summary(run_dir);
  return 0;
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string dataset_path;
  std::string checkpoint_path;
  std::vector<std::string> specialists;
  std::string split = "test";
  std::vector<int> ks = {1, 2, 4};
  std::string log_path;
  std::string out_dir = ".";
};

int cmd_eval(const EvalArgs& args) {
  const DatasetPtr dataset = load_dataset(args.dataset_path);
  const ModelPtr model = load_model(args.checkpoint_path);
  std::vector<int32_t> ks(args.ks.begin(), args.ks.end());

  char* report = nullptr;
  check(mdml_evaluate(model.get(), dataset.get(), args.split.c_str(), ks.data(),
                      static_cast<int32_t>(ks.size()), &report));
  const std::string report_json = take_string(report);
  const std::string report_path = (fs::path(args.out_dir) / "recall_report.json").string();
  write_file(report_path, report_json + "\n");
  std::cout << "wrote " << report_path << "\n";
  const json doc = json::parse(report_json);
  for (const json& src : doc.at("sources")) {
    std::cout << "source " << src.at("source_id") << ":";
    for (int k : args.ks) {
      std::cout << " R" << k << "=" << src.at("recall").at(std::to_string(k));
    }
    std::cout << "\n";
  }
  std::cout << "average:";
  for (int k : args.ks) {
    std::cout << " R" << k << "=" << doc.at("average").at(std::to_string(k));
  }
  std::cout << "\n";

  if (!args.specialists.empty()) {
    auto [sources, models] = load_specialists(args.specialists);
    const std::vector<const mdml_model*> raw_models = raw_pointers(models);
    char* stats = nullptr;
    check(mdml_distance_ratios(model.get(), sources.data(), raw_models.data(),
                               static_cast<int32_t>(sources.size()), dataset.get(),
                               args.split.c_str(), &stats));
    const std::string stats_path = (fs::path(args.out_dir) / "ratio_stats.json").string();
    write_file(stats_path, take_string(stats) + "\n");
    std::cout << "wrote " << stats_path << "\n";
  }

  if (!args.log_path.empty()) {
    char* curves = nullptr;
    check(mdml_curves_csv(args.log_path.c_str(), &curves));
    const std::string curves_path = (fs::path(args.out_dir) / "curves.csv").string();
    write_file(curves_path, take_string(curves));
    std::cout << "wrote " << curves_path << "\n";
  }
  return 0;
}

// ---- report -------------------------------------------------------------------

struct ReportArgs {
  std::vector<std::string> runs;
  std::string out_path = "report.json";
};

int cmd_report(const ReportArgs& args) {
  json table;
  table["schema_version"] = 1;
  json rows = json::array();
  std::vector<int> ks;
  std::vector<int> source_ids;

  for (const std::string& run : args.runs) {
    const fs::path report_path = fs::path(run) / "recall_report.json";
    const json report = json::parse(read_file(report_path.string()), nullptr, false);
    if (report.is_discarded()) {
      bail(MDML_ERR_FORMAT, "malformed report in " + report_path.string());
    }
    if (ks.empty()) {
      ks = report.at("ks").get<std::vector<int>>();
      for (const json& src : report.at("sources")) {
        source_ids.push_back(src.at("source_id").get<int>());
      }
      json columns = json::array();
      for (int source : source_ids) {
        for (int k : ks) {
          columns.push_back("source" + std::to_string(source) + ":R" + std::to_string(k));
        }
      }
      for (int k : ks) columns.push_back("average:R" + std::to_string(k));
      table["ks"] = ks;
      table["source_ids"] = source_ids;
      table["columns"] = columns;
    } else if (report.at("ks").get<std::vector<int>>() != ks) {
      bail(MDML_ERR_INVALID_ARGUMENT, "run " + run + " was evaluated with different ks");
    }

    json row;
    row["run"] = fs::path(run).filename().string();
    json values = json::array();
    for (const json& src : report.at("sources")) {
      for (int k : ks) values.push_back(src.at("recall").at(std::to_string(k)));
    }
    for (int k : ks) values.push_back(report.at("average").at(std::to_string(k)));
    row["values"] = values;

    char* summary = nullptr;
    if (mdml_overfit_summary((fs::path(run) / "log.csv").string().c_str(), &summary) ==
        MDML_OK) {
      row["overfit"] = json::parse(take_string(summary)).at("sources");
    }
    rows.push_back(std::move(row));
  }
  table["rows"] = rows;
  write_file(args.out_path, table.dump(2) + "\n");

  // aligned text table
  std::printf("%-24s", "run");
  for (const json& col : table.at("columns")) {
    std::printf(" %14s", col.get<std::string>().c_str());
  }
  std::printf("\n");
  for (const json& row : rows) {
    std::printf("%-24s", row.at("run").get<std::string>().c_str());
    for (const json& v : row.at("values")) std::printf(" %14.4f", v.get<double>());
    std::printf("\n");
  }
  std::cout << "wrote " << args.out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-domain metric learning toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mdml_version()));

  GenDataArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic multi-source dataset");
  gen->add_option("--config", gen_args.config_path, "generation config (JSON)")->required();
  gen->add_option("--out", gen_args.out_path, "output dataset path");
  gen->add_option("--seed", gen_args.seed, "override the config seed");

  TrainArgs spec_args;
  CLI::App* spec = app.add_subcommand("train-specialist", "train one per-source specialist");
  spec->add_option("--dataset", spec_args.dataset_path, "dataset file")->required();
  spec->add_option("--source", spec_args.source_id, "source id to train on")->required();
  spec->add_option("--config", spec_args.config_path, "train config (JSON)");
  spec->add_option("--run-id", spec_args.run_id, "run directory name")->required();
  spec->add_option("--seed", spec_args.seed, "override the config seed");
  spec->add_option("--iterations", spec_args.iterations, "override iteration count");
  spec->add_option("--lr", spec_args.lr, "override learning rate");

  TrainArgs fused_args;
  CLI::App* fused = app.add_subcommand("train-fused", "train one model on fused sources");
  fused->add_option("--dataset", fused_args.dataset_path, "dataset file")->required();
  fused->add_option("--policy", fused_args.policy, "naive|ss|bal|boosted")->required();
  fused->add_option("--config", fused_args.config_path, "train config (JSON)");
  fused->add_option("--run-id", fused_args.run_id, "run directory name")->required();
  fused->add_option("--seed", fused_args.seed, "override the config seed");
  fused->add_option("--iterations", fused_args.iterations, "override iteration count");
  fused->add_option("--lr", fused_args.lr, "override learning rate");
  fused->add_option("--boost", fused_args.boost, "boost factor for --boost-source ids");
  fused->add_option("--boost-source", fused_args.boost_sources, "sources to boost");

  TrainArgs distill_args;
  CLI::App* dist = app.add_subcommand("distill", "distill specialists into one model");
  dist->add_option("--dataset", distill_args.dataset_path, "dataset file")->required();
  dist->add_option("--specialist", distill_args.specialists,
                   "<source_id>=<checkpoint>, repeatable");
  dist->add_option("--direct-source", distill_args.direct_sources,
                   "sources trained with the direct loss instead of distillation");
  dist->add_option("--boost", distill_args.boost, "boost factor");
  dist->add_option("--boost-source", distill_args.boost_sources,
                   "sources to boost (defaults to the specialist sources)");
  dist->add_option("--config", distill_args.config_path, "train config (JSON)");
  dist->add_option("--run-id", distill_args.run_id, "run directory name")->required();
  dist->add_option("--seed", distill_args.seed, "override the config seed");
  dist->add_option("--iterations", distill_args.iterations, "override iteration count");
  dist->add_option("--lr", distill_args.lr, "override learning rate");

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--dataset", eval_args.dataset_path, "dataset file")->required();
  eval->add_option("--checkpoint", eval_args.checkpoint_path, "model checkpoint")->required();
  eval->add_option("--specialist,--specialists", eval_args.specialists,
                   "<source_id>=<checkpoint> for distance-ratio stats, repeatable");
  eval->add_option("--split", eval_args.split, "train|val|test (default test)");
  eval->add_option("--ks", eval_args.ks, "recall cutoffs (default 1 2 4)")->delimiter(',');
  eval->add_option("--log", eval_args.log_path, "training log.csv to convert to curves.csv");
  eval->add_option("--out", eval_args.out_dir, "output directory (default .)");

  ReportArgs report_args;
  CLI::App* report = app.add_subcommand("report", "assemble a table across evaluated runs");
  report->add_option("--runs", report_args.runs, "run directories containing recall_report.json")
      ->required();
  report->add_option("--out", report_args.out_path, "output JSON path (default report.json)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_data(gen_args);
    if (spec->parsed()) return cmd_train_specialist(spec_args);
    if (fused->parsed()) return cmd_train_fused(fused_args);
    if (dist->parsed()) return cmd_distill(distill_args);
    if (eval->parsed()) return cmd_eval(eval_args);
    if (report->parsed()) return cmd_report(report_args);
  } catch (const CliError& e) {
    std::cerr << "error: " << mdml_status_name(e.status) << ": " << e.message << "\n";
    return static_cast<int>(e.status);
  } catch (const std::exception& e) {
    std::cerr << "error: internal_error: " << e.what() << "\n";
    return MDML_ERR_INTERNAL;
  }
  return 0;
}
