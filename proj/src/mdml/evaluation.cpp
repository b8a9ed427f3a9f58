#include "mdml/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "mdml/errors.hpp"
#include "mdml/pca.hpp"

namespace mdml {

namespace {

using nlohmann::json;

json bucket_to_json(const RatioBucket& bucket) {
  return json{{"count", bucket.count},
              {"mean", bucket.mean},
              {"variance", bucket.variance},
              {"histogram", json{{"lo", 0.0},
                                 {"hi", kRatioHi},
                                 {"bins", bucket.histogram}}}};
}

void accumulate_ratio(RatioBucket& bucket, std::vector<double>& values, double ratio) {
  values.push_back(ratio);
  bucket.count += 1;
  const double clamped = std::min(ratio, std::nextafter(kRatioHi, 0.0));
  const std::size_t bin = static_cast<std::size_t>(
      clamped / kRatioHi * static_cast<double>(kRatioBins));
  bucket.histogram[std::min(bin, kRatioBins - 1)] += 1;
}

void finalize_ratio(RatioBucket& bucket, const std::vector<double>& values) {
  if (values.empty()) return;
  double sum = 0.0;
  for (double v : values) sum += v;
  bucket.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) {
      const double d = v - bucket.mean;
      ss += d * d;
    }
    bucket.variance = ss / static_cast<double>(values.size() - 1);
  }
}

// Split sample indices of one source, in registry order.
const std::vector<std::size_t>& split_indices(const Dataset& dataset, std::size_t src_index,
                                              Split split) {
  return dataset.registry.splits[src_index].of(split);
}

}  // namespace

std::vector<double> RecallReport::average() const {
  std::vector<double> avg(ks.size(), 0.0);
  if (sources.empty()) return avg;
  for (const SourceRecall& s : sources) {
    for (std::size_t i = 0; i < ks.size(); ++i) avg[i] += s.recalls[i];
  }
  for (double& v : avg) v /= static_cast<double>(sources.size());
  return avg;
}

std::string RecallReport::to_json() const {
  json doc;
  doc["schema_version"] = 1;
  doc["split"] = split;
  doc["ks"] = ks;
  json src_list = json::array();
  for (const SourceRecall& s : sources) {
    json recalls;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      recalls[std::to_string(ks[i])] = s.recalls[i];
    }
    src_list.push_back(json{{"source_id", s.source_id},
                            {"queries", s.queries},
                            {"gallery", s.gallery},
                            {"recall", recalls}});
  }
  doc["sources"] = src_list;
  json avg;
  const std::vector<double> mean = average();
  for (std::size_t i = 0; i < ks.size(); ++i) avg[std::to_string(ks[i])] = mean[i];
  doc["average"] = avg;
  return doc.dump(2);
}

std::vector<double> recall_at_k(const std::vector<Vec>& embeddings,
                                const std::vector<int>& labels,
                                const std::vector<int>& ks) {
  const std::size_t n = embeddings.size();
  require(n >= 2, ErrorCode::InvalidArgument, "recall_at_k: need at least 2 samples");
  require(labels.size() == n, ErrorCode::Dimension, "recall_at_k: labels size mismatch");
  require(!ks.empty(), ErrorCode::InvalidArgument, "recall_at_k: no k values");
  int max_k = 0;
  for (int k : ks) {
    require(k >= 1, ErrorCode::InvalidArgument, "recall_at_k: k must be >= 1");
    require(static_cast<std::size_t>(k) < n, ErrorCode::InvalidArgument,
            "recall_at_k: k must be smaller than the evaluation set");
    max_k = std::max(max_k, k);
  }

  const Mat dist = pairwise_distances(embeddings);
  std::vector<std::size_t> successes(ks.size(), 0);
  std::vector<std::pair<double, std::size_t>> best;
  best.reserve(static_cast<std::size_t>(max_k) + 1);
  for (std::size_t q = 0; q < n; ++q) {
    best.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == q) continue;
      const std::pair<double, std::size_t> cand{dist.at(q, j), j};
      if (best.size() == static_cast<std::size_t>(max_k) && !(cand < best.back())) continue;
      const auto pos = std::lower_bound(best.begin(), best.end(), cand);
      best.insert(pos, cand);
      if (best.size() > static_cast<std::size_t>(max_k)) best.pop_back();
    }
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      const std::size_t k = static_cast<std::size_t>(ks[ki]);
      for (std::size_t r = 0; r < k; ++r) {
        if (labels[best[r].second] == labels[q]) {
          successes[ki] += 1;
          break;
        }
      }
    }
  }
  std::vector<double> recalls(ks.size());
  for (std::size_t ki = 0; ki < ks.size(); ++ki) {
    recalls[ki] = static_cast<double>(successes[ki]) / static_cast<double>(n);
  }
  return recalls;
}

namespace {

RecallReport evaluate_embedded(const Dataset& dataset, Split split,
                               const std::vector<int>& ks,
                               const std::vector<std::vector<Vec>>& per_source_embeddings,
                               const std::vector<std::vector<int>>& per_source_labels) {
  RecallReport report;
  report.split = split_name(split);
  report.ks = ks;
  for (std::size_t si = 0; si < dataset.registry.n_sources(); ++si) {
    require(!per_source_embeddings[si].empty(), ErrorCode::InvalidArgument,
            "evaluate_model: empty split for source " +
                std::to_string(dataset.registry.sources[si].source_id));
    SourceRecall sr;
    sr.source_id = dataset.registry.sources[si].source_id;
    sr.queries = per_source_embeddings[si].size();
    sr.gallery = per_source_embeddings[si].size() - 1;
    sr.recalls = recall_at_k(per_source_embeddings[si], per_source_labels[si], ks);
    report.sources.push_back(std::move(sr));
  }
  return report;
}

}  // namespace

RecallReport evaluate_model(const EncoderParams& params, const Dataset& dataset,
                            Split split, const std::vector<int>& ks) {
  require(params.config.input_dim == dataset.input_dim, ErrorCode::Dimension,
          "evaluate_model: encoder input_dim does not match dataset");
  RecallReport report;
  report.split = split_name(split);
  report.ks = ks;
  for (std::size_t si = 0; si < dataset.registry.n_sources(); ++si) {
    const std::vector<std::size_t>& indices = split_indices(dataset, si, split);
    require(!indices.empty(), ErrorCode::InvalidArgument,
            "evaluate_model: empty split for source " +
                std::to_string(dataset.registry.sources[si].source_id));
    std::vector<Vec> embeddings;
    std::vector<int> labels;
    embeddings.reserve(indices.size());
    labels.reserve(indices.size());
    for (std::size_t idx : indices) {
      embeddings.push_back(forward(params, dataset.samples[idx].features));
      labels.push_back(dataset.samples[idx].class_id);
    }
    SourceRecall sr;
    sr.source_id = dataset.registry.sources[si].source_id;
    sr.queries = embeddings.size();
    sr.gallery = embeddings.size() - 1;
    sr.recalls = recall_at_k(embeddings, labels, ks);
    report.sources.push_back(std::move(sr));
  }
  return report;
}

RecallReport concat_pca_baseline(const SpecialistSet& specialists, const Dataset& dataset,
                                 std::size_t out_dim, Split split,
                                 const std::vector<int>& ks) {
  require(!specialists.empty(), ErrorCode::InvalidArgument,
          "concat_pca_baseline: no specialists");
  for (const auto& [source_id, params] : specialists) {
    require(params.config.input_dim == dataset.input_dim, ErrorCode::Dimension,
            "concat_pca_baseline: specialist input_dim does not match dataset for source " +
                std::to_string(source_id));
  }

  const auto concat_embed = [&](const Sample& sample) {
    Vec out;
    for (const auto& [source_id, params] : specialists) {
      (void)source_id;
      const Vec e = forward(params, sample.features);
      out.insert(out.end(), e.begin(), e.end());
    }
    return out;
  };

  // PCA basis comes from the fused train split.
  std::vector<Vec> train_concat;
  for (std::size_t si = 0; si < dataset.registry.n_sources(); ++si) {
    for (std::size_t idx : split_indices(dataset, si, Split::Train)) {
      train_concat.push_back(concat_embed(dataset.samples[idx]));
    }
  }
  const PcaModel pca = pca_fit(train_concat, out_dim);

  std::vector<std::vector<Vec>> per_source_embeddings(dataset.registry.n_sources());
  std::vector<std::vector<int>> per_source_labels(dataset.registry.n_sources());
  for (std::size_t si = 0; si < dataset.registry.n_sources(); ++si) {
    for (std::size_t idx : split_indices(dataset, si, split)) {
      per_source_embeddings[si].push_back(pca_project(pca, concat_embed(dataset.samples[idx])));
      per_source_labels[si].push_back(dataset.samples[idx].class_id);
    }
  }
  return evaluate_embedded(dataset, split, ks, per_source_embeddings, per_source_labels);
}

RatioStats distance_ratio_stats(const EncoderParams& universal,
                                const SpecialistSet& specialists,
                                const Dataset& dataset, Split split) {
  RatioStats stats;
  stats.split = split_name(split);
  for (const auto& [source_id, specialist] : specialists) {
    const int src_index = dataset.registry.index_of(source_id);
    require(src_index >= 0, ErrorCode::InvalidArgument,
            "distance_ratio_stats: source " + std::to_string(source_id) +
                " not in dataset");
    const std::vector<std::size_t>& indices =
        split_indices(dataset, static_cast<std::size_t>(src_index), split);
    require(indices.size() >= 2, ErrorCode::InvalidArgument,
            "distance_ratio_stats: split too small for source " +
                std::to_string(source_id));

    std::vector<Vec> u_emb, s_emb;
    std::vector<int> labels;
    for (std::size_t idx : indices) {
      u_emb.push_back(forward(universal, dataset.samples[idx].features));
      s_emb.push_back(forward(specialist, dataset.samples[idx].features));
      labels.push_back(dataset.samples[idx].class_id);
    }

    SourceRatioStats src;
    src.source_id = source_id;
    src.intra.histogram.assign(kRatioBins, 0);
    src.inter.histogram.assign(kRatioBins, 0);
    std::vector<double> intra_values, inter_values;
    for (std::size_t i = 0; i < indices.size(); ++i) {
      for (std::size_t j = i + 1; j < indices.size(); ++j) {
        const double ds = l2_distance(s_emb[i], s_emb[j]);
        if (ds <= 1e-9) {
          src.excluded_near_zero += 1;
          continue;
        }
        const double ratio = l2_distance(u_emb[i], u_emb[j]) / ds;
        if (labels[i] == labels[j]) {
          accumulate_ratio(src.intra, intra_values, ratio);
        } else {
          accumulate_ratio(src.inter, inter_values, ratio);
        }
      }
    }
    finalize_ratio(src.intra, intra_values);
    finalize_ratio(src.inter, inter_values);
    stats.sources.push_back(std::move(src));
  }
  return stats;
}

std::string RatioStats::to_json() const {
  json doc;
  doc["schema_version"] = 1;
  doc["split"] = split;
  json src_list = json::array();
  for (const SourceRatioStats& s : sources) {
    src_list.push_back(json{{"source_id", s.source_id},
                            {"intra_class", bucket_to_json(s.intra)},
                            {"inter_class", bucket_to_json(s.inter)},
                            {"excluded_near_zero", s.excluded_near_zero}});
  }
  doc["sources"] = src_list;
  return doc.dump(2);
}

std::vector<OverfitPoint> overfit_curves(const TrainLog& log) {
  require(!log.rows.empty(), ErrorCode::InvalidArgument, "overfit_curves: empty log");
  std::map<int, std::vector<const TrainLogRow*>> by_source;
  for (const TrainLogRow& row : log.rows) by_source[row.source_id].push_back(&row);

  std::vector<OverfitPoint> points;
  for (const auto& [source_id, rows] : by_source) {
    require(rows.size() >= 2, ErrorCode::InvalidArgument,
            "overfit_curves: need at least 2 checkpoints per source");
    OverfitPoint p;
    p.source_id = source_id;
    p.peak_recall1 = rows[0]->val_recall1;
    p.peak_iteration = rows[0]->iteration;
    for (const TrainLogRow* row : rows) {
      if (row->val_recall1 > p.peak_recall1) {
        p.peak_recall1 = row->val_recall1;
        p.peak_iteration = row->iteration;
      }
    }
    p.final_recall1 = rows.back()->val_recall1;
    points.push_back(p);
  }
  return points;
}

std::string curves_to_csv(const TrainLog& log) {
  std::string out = "iteration,source_id,metric,value\n";
  char buf[64];
  for (const TrainLogRow& row : log.rows) {
    std::snprintf(buf, sizeof(buf), "%llu,%d,val_recall1,%.17g\n",
                  static_cast<unsigned long long>(row.iteration), row.source_id,
                  row.val_recall1);
    out += buf;
  }
  for (const TrainLogRow& row : log.rows) {
    std::snprintf(buf, sizeof(buf), "%llu,%d,loss_avg,%.17g\n",
                  static_cast<unsigned long long>(row.iteration), row.source_id,
                  row.loss_avg);
    out += buf;
  }
  return out;
}

void save_curves_csv(const TrainLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::Io, "save_curves_csv: cannot open " + path);
  out << curves_to_csv(log);
  require(out.good(), ErrorCode::Io, "save_curves_csv: write failed for " + path);
}

}  // namespace mdml
