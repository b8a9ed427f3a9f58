#pragma once

#include <map>
#include <string>
#include <vector>

#include "mdml/dataset.hpp"
#include "mdml/encoder.hpp"
#include "mdml/trainlog.hpp"
#include "mdml/vecmat.hpp"

namespace mdml {

// One frozen teacher per source id; std::map keeps source order fixed.
using SpecialistSet = std::map<int, EncoderParams>;

struct SourceRecall {
  int source_id = 0;
  std::size_t queries = 0;
  std::size_t gallery = 0;               // per-query gallery size (queries - 1)
  std::vector<double> recalls;           // aligned with RecallReport::ks
};

struct RecallReport {
  std::string split;
  std::vector<int> ks;
  std::vector<SourceRecall> sources;

  std::vector<double> average() const;   // unweighted mean over sources
  std::string to_json() const;
};

// Leave-one-out Recall@k: a query succeeds iff any of its k nearest other
// samples (Euclidean, ties broken by lowest index) shares its label.
std::vector<double> recall_at_k(const std::vector<Vec>& embeddings,
                                const std::vector<int>& labels,
                                const std::vector<int>& ks);

// Embeds every sample of the split and evaluates each source in isolation.
RecallReport evaluate_model(const EncoderParams& params, const Dataset& dataset,
                            Split split, const std::vector<int>& ks);

// Ensemble baseline: concatenate all specialists' embeddings (in source-id
// order), fit PCA on the fused train split, project, then evaluate.
RecallReport concat_pca_baseline(const SpecialistSet& specialists, const Dataset& dataset,
                                 std::size_t out_dim, Split split,
                                 const std::vector<int>& ks);

struct RatioBucket {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;                 // sample variance
  std::vector<std::size_t> histogram;    // kRatioBins bins over [0, kRatioHi)
};

struct SourceRatioStats {
  int source_id = 0;
  RatioBucket intra;                     // same-class pairs
  RatioBucket inter;                     // different-class pairs
  std::size_t excluded_near_zero = 0;    // specialist distance <= 1e-9
};

struct RatioStats {
  std::string split;
  std::vector<SourceRatioStats> sources;

  std::string to_json() const;
};

inline constexpr std::size_t kRatioBins = 50;
inline constexpr double kRatioHi = 5.0;  // last bin absorbs larger ratios

// Distribution of d_universal / d_specialist over within-source pairs.
RatioStats distance_ratio_stats(const EncoderParams& universal,
                                const SpecialistSet& specialists,
                                const Dataset& dataset, Split split);

struct OverfitPoint {
  int source_id = 0;
  std::uint64_t peak_iteration = 0;
  double peak_recall1 = 0.0;
  double final_recall1 = 0.0;
};

// Peak (first occurrence) and final validation Recall@1 per source.
std::vector<OverfitPoint> overfit_curves(const TrainLog& log);

// Long-form curve rows: iteration,source_id,metric,value.
std::string curves_to_csv(const TrainLog& log);
void save_curves_csv(const TrainLog& log, const std::string& path);

}  // namespace mdml
