#include "mdml/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "mdml/binio.hpp"
#include "mdml/errors.hpp"
#include "mdml/rng.hpp"

namespace mdml {

namespace {

constexpr char kDatasetMagic[8] = {'M', 'D', 'M', 'L', 'D', 'A', 'T', 'A'};
constexpr std::uint32_t kDatasetVersion = 1;
constexpr std::uint8_t kSplitNone = 3;

}  // namespace

void SourceSpec::validate() const {
  require(source_id >= 0, ErrorCode::InvalidArgument, "SourceSpec: source_id must be >= 0");
  require(n_classes >= 2, ErrorCode::InvalidArgument, "SourceSpec: n_classes must be >= 2");
  require(samples_per_class >= 2, ErrorCode::InvalidArgument,
          "SourceSpec: samples_per_class must be >= 2");
  require(cluster_spread > 0.0, ErrorCode::InvalidArgument,
          "SourceSpec: cluster_spread must be positive");
  require(inter_class_separation > 0.0, ErrorCode::InvalidArgument,
          "SourceSpec: inter_class_separation must be positive");
  require(difficulty_drift >= 0.0, ErrorCode::InvalidArgument,
          "SourceSpec: difficulty_drift must be >= 0");
}

int SourceRegistry::index_of(int source_id) const {
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (sources[i].source_id == source_id) return static_cast<int>(i);
  }
  return -1;
}

Dataset generate_synthetic(const std::vector<SourceSpec>& specs, int input_dim,
                           std::uint64_t seed) {
  require(!specs.empty(), ErrorCode::InvalidArgument, "generate_synthetic: no sources");
  require(input_dim >= 1, ErrorCode::InvalidArgument,
          "generate_synthetic: input_dim must be >= 1");
  for (const SourceSpec& spec : specs) spec.validate();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    for (std::size_t j = i + 1; j < specs.size(); ++j) {
      require(specs[i].source_id != specs[j].source_id, ErrorCode::InvalidArgument,
              "generate_synthetic: duplicate source_id");
    }
  }

  Dataset ds;
  ds.input_dim = input_dim;
  ds.registry.sources = specs;
  ds.registry.splits.assign(specs.size(), SourceSplits{});

  Rng rng(seed);
  const std::size_t d = static_cast<std::size_t>(input_dim);
  for (const SourceSpec& spec : specs) {
    // Each source sits around its own center. The offset scale keeps sources
    // distinguishable while leaving their class clouds partially entangled,
    // so cross-source pairs range from easy to genuinely confusable.
    Vec center(d);
    rng.fill_normal(center, 0.0, 0.5 * spec.inter_class_separation);

    std::vector<Vec> means(static_cast<std::size_t>(spec.n_classes));
    for (Vec& mean : means) {
      mean.resize(d);
      rng.fill_normal(mean, 0.0, spec.inter_class_separation);
      for (std::size_t k = 0; k < d; ++k) mean[k] += center[k];
    }
    // Collapse odd class means toward their even partner: pair (2j, 2j+1)
    // overlaps more the larger difficulty_drift is.
    const double pull = std::min(spec.difficulty_drift, 1.0);
    for (std::size_t c = 1; c < means.size(); c += 2) {
      for (std::size_t k = 0; k < d; ++k) {
        means[c][k] = means[c - 1][k] + (1.0 - pull) * (means[c][k] - means[c - 1][k]);
      }
    }

    for (int c = 0; c < spec.n_classes; ++c) {
      for (int s = 0; s < spec.samples_per_class; ++s) {
        Sample sample;
        sample.source_id = spec.source_id;
        sample.class_id = c;
        sample.features.resize(d);
        for (std::size_t k = 0; k < d; ++k) {
          sample.features[k] = means[static_cast<std::size_t>(c)][k] +
                               rng.normal(0.0, spec.cluster_spread);
        }
        ds.samples.push_back(std::move(sample));
      }
    }
  }
  return ds;
}

void split(Dataset& dataset, const std::array<double, 3>& ratios, std::uint64_t seed) {
  double total = 0.0;
  for (double r : ratios) {
    require(r > 0.0, ErrorCode::Sampling,
            "split: stratification error, every ratio must be positive");
    total += r;
  }

  Rng rng(seed);
  for (std::size_t si = 0; si < dataset.registry.sources.size(); ++si) {
    const SourceSpec& spec = dataset.registry.sources[si];
    SourceSplits out;
    for (int c = 0; c < spec.n_classes; ++c) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        if (dataset.samples[i].source_id == spec.source_id &&
            dataset.samples[i].class_id == c) {
          members.push_back(i);
        }
      }
      require(!members.empty(), ErrorCode::Sampling,
              "split: stratification error, empty class");
      rng.shuffle(members);

      const double n = static_cast<double>(members.size());
      std::array<std::size_t, 3> counts{};
      std::array<double, 3> remainders{};
      std::size_t assigned = 0;
      for (int k = 0; k < 3; ++k) {
        const double exact = n * ratios[static_cast<std::size_t>(k)] / total;
        counts[static_cast<std::size_t>(k)] = static_cast<std::size_t>(exact);
        remainders[static_cast<std::size_t>(k)] = exact - std::floor(exact);
        assigned += counts[static_cast<std::size_t>(k)];
      }
      while (assigned < members.size()) {
        int best = 0;
        for (int k = 1; k < 3; ++k) {
          if (remainders[static_cast<std::size_t>(k)] >
              remainders[static_cast<std::size_t>(best)]) {
            best = k;
          }
        }
        counts[static_cast<std::size_t>(best)] += 1;
        remainders[static_cast<std::size_t>(best)] = -1.0;
        ++assigned;
      }
      for (int k = 0; k < 3; ++k) {
        require(counts[static_cast<std::size_t>(k)] >= 1, ErrorCode::Sampling,
                "split: stratification error, class too small to appear in every split");
      }

      std::size_t pos = 0;
      for (std::size_t i = 0; i < counts[0]; ++i) out.train.push_back(members[pos++]);
      for (std::size_t i = 0; i < counts[1]; ++i) out.val.push_back(members[pos++]);
      for (std::size_t i = 0; i < counts[2]; ++i) out.test.push_back(members[pos++]);
    }
    // Canonical ascending order; keeps persisted datasets bit-reproducible.
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.val.begin(), out.val.end());
    std::sort(out.test.begin(), out.test.end());
    dataset.registry.splits[si] = std::move(out);
  }
}

void save_dataset(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::Io, "save_dataset: cannot open " + path);

  std::vector<std::uint8_t> tags(dataset.samples.size(), kSplitNone);
  for (const SourceSplits& splits : dataset.registry.splits) {
    for (std::size_t i : splits.train) tags[i] = static_cast<std::uint8_t>(Split::Train);
    for (std::size_t i : splits.val) tags[i] = static_cast<std::uint8_t>(Split::Val);
    for (std::size_t i : splits.test) tags[i] = static_cast<std::uint8_t>(Split::Test);
  }

  out.write(kDatasetMagic, 8);
  binio::write_u32(out, kDatasetVersion);
  binio::write_u32(out, static_cast<std::uint32_t>(dataset.input_dim));
  binio::write_u32(out, static_cast<std::uint32_t>(dataset.registry.sources.size()));
  binio::write_u64(out, dataset.samples.size());
  for (const SourceSpec& spec : dataset.registry.sources) {
    binio::write_u32(out, static_cast<std::uint32_t>(spec.source_id));
    binio::write_u32(out, static_cast<std::uint32_t>(spec.n_classes));
    binio::write_u32(out, static_cast<std::uint32_t>(spec.samples_per_class));
    binio::write_f64(out, spec.cluster_spread);
    binio::write_f64(out, spec.inter_class_separation);
    binio::write_f64(out, spec.difficulty_drift);
  }
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const Sample& s = dataset.samples[i];
    binio::write_u32(out, static_cast<std::uint32_t>(s.source_id));
    binio::write_u32(out, static_cast<std::uint32_t>(s.class_id));
    binio::write_u8(out, tags[i]);
    require(s.features.size() == static_cast<std::size_t>(dataset.input_dim),
            ErrorCode::Dimension, "save_dataset: sample feature length mismatch");
    for (double v : s.features) binio::write_f64(out, v);
  }
  require(out.good(), ErrorCode::Io, "save_dataset: write failed for " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::Io, "load_dataset: cannot open " + path);
  char magic[8];
  binio::read_exact(in, magic, 8, "dataset magic");
  require(std::memcmp(magic, kDatasetMagic, 8) == 0, ErrorCode::Format,
          "load_dataset: bad magic in " + path);
  const std::uint32_t version = binio::read_u32(in, "dataset version");
  require(version == kDatasetVersion, ErrorCode::Format,
          "load_dataset: unsupported version in " + path);

  Dataset ds;
  ds.input_dim = static_cast<int>(binio::read_u32(in, "input_dim"));
  require(ds.input_dim >= 1, ErrorCode::Format, "load_dataset: invalid input_dim");
  const std::uint32_t n_sources = binio::read_u32(in, "source count");
  const std::uint64_t n_samples = binio::read_u64(in, "sample count");

  ds.registry.sources.resize(n_sources);
  ds.registry.splits.assign(n_sources, SourceSplits{});
  for (std::uint32_t i = 0; i < n_sources; ++i) {
    SourceSpec& spec = ds.registry.sources[i];
    spec.source_id = static_cast<int>(binio::read_u32(in, "source_id"));
    spec.n_classes = static_cast<int>(binio::read_u32(in, "n_classes"));
    spec.samples_per_class = static_cast<int>(binio::read_u32(in, "samples_per_class"));
    spec.cluster_spread = binio::read_f64(in, "cluster_spread");
    spec.inter_class_separation = binio::read_f64(in, "inter_class_separation");
    spec.difficulty_drift = binio::read_f64(in, "difficulty_drift");
    spec.validate();
  }

  ds.samples.resize(n_samples);
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    Sample& s = ds.samples[i];
    s.source_id = static_cast<int>(binio::read_u32(in, "sample source_id"));
    s.class_id = static_cast<int>(binio::read_u32(in, "sample class_id"));
    const std::uint8_t tag = binio::read_u8(in, "sample split tag");
    require(tag <= kSplitNone, ErrorCode::Format, "load_dataset: invalid split tag");
    s.features.resize(static_cast<std::size_t>(ds.input_dim));
    for (double& v : s.features) v = binio::read_f64(in, "sample feature");
    const int src_index = ds.registry.index_of(s.source_id);
    require(src_index >= 0, ErrorCode::Format,
            "load_dataset: sample references unknown source");
    SourceSplits& splits = ds.registry.splits[static_cast<std::size_t>(src_index)];
    switch (tag) {
      case 0: splits.train.push_back(i); break;
      case 1: splits.val.push_back(i); break;
      case 2: splits.test.push_back(i); break;
      default: break;
    }
  }
  // The header's sample count must account for the entire body.
  in.peek();
  require(in.eof(), ErrorCode::Format,
          "load_dataset: trailing bytes after declared records in " + path);
  return ds;
}

const char* split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    default: return "test";
  }
}

Split split_from_name(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "val") return Split::Val;
  if (name == "test") return Split::Test;
  fail(ErrorCode::InvalidArgument, "unknown split: " + name);
}

}  // namespace mdml
