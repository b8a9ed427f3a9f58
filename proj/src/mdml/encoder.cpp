#include "mdml/encoder.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "mdml/binio.hpp"
#include "mdml/errors.hpp"

namespace mdml {

namespace {

constexpr char kCheckpointMagic[8] = {'M', 'D', 'M', 'L', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCheckpointVersion = 1;

double activate(Activation a, double x) {
  return a == Activation::Relu ? (x > 0.0 ? x : 0.0) : std::tanh(x);
}

double activate_grad(Activation a, double pre, double post) {
  if (a == Activation::Relu) return pre > 0.0 ? 1.0 : 0.0;
  return 1.0 - post * post;
}

struct LayerOffsets {
  std::size_t w = 0;
  std::size_t b = 0;
  std::size_t in = 0;
  std::size_t out = 0;
};

LayerOffsets layer_offsets(const EncoderConfig& config, int layer) {
  const std::vector<int> dims = config.layer_dims();
  LayerOffsets off;
  std::size_t pos = 0;
  for (int l = 0; l <= layer; ++l) {
    off.in = static_cast<std::size_t>(dims[l]);
    off.out = static_cast<std::size_t>(dims[l + 1]);
    off.w = pos;
    off.b = pos + off.in * off.out;
    pos = off.b + off.out;
  }
  return off;
}

}  // namespace

std::vector<int> EncoderConfig::layer_dims() const {
  std::vector<int> dims;
  dims.reserve(hidden_dims.size() + 2);
  dims.push_back(input_dim);
  dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
  dims.push_back(embed_dim);
  return dims;
}

std::size_t EncoderConfig::n_params() const {
  const std::vector<int> dims = layer_dims();
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    n += static_cast<std::size_t>(dims[l]) * static_cast<std::size_t>(dims[l + 1]);
    n += static_cast<std::size_t>(dims[l + 1]);
  }
  return n;
}

void EncoderConfig::validate() const {
  require(input_dim >= 1, ErrorCode::InvalidArgument, "EncoderConfig: input_dim must be >= 1");
  require(embed_dim >= 2, ErrorCode::InvalidArgument, "EncoderConfig: embed_dim must be >= 2");
  for (int h : hidden_dims) {
    require(h >= 1, ErrorCode::InvalidArgument, "EncoderConfig: hidden dims must be >= 1");
  }
}

std::span<double> EncoderParams::weight(int layer) {
  const LayerOffsets off = layer_offsets(config, layer);
  return {values.data() + off.w, off.in * off.out};
}

std::span<const double> EncoderParams::weight(int layer) const {
  const LayerOffsets off = layer_offsets(config, layer);
  return {values.data() + off.w, off.in * off.out};
}

std::span<double> EncoderParams::bias(int layer) {
  const LayerOffsets off = layer_offsets(config, layer);
  return {values.data() + off.b, off.out};
}

std::span<const double> EncoderParams::bias(int layer) const {
  const LayerOffsets off = layer_offsets(config, layer);
  return {values.data() + off.b, off.out};
}

EncoderParams init_params(const EncoderConfig& config, std::uint64_t seed) {
  config.validate();
  EncoderParams params;
  params.config = config;
  params.values.assign(config.n_params(), 0.0);
  Rng rng(seed);
  const std::vector<int> dims = config.layer_dims();
  for (int l = 0; l < config.n_layers(); ++l) {
    const double std_dev = std::sqrt(2.0 / static_cast<double>(dims[l]));
    for (double& w : params.weight(l)) w = rng.normal(0.0, std_dev);
    // biases stay zero
  }
  return params;
}

namespace {

// Per-sample forward pass keeping pre- and post-activation values for backprop.
struct Trace {
  std::vector<Vec> pre;    // one per layer
  std::vector<Vec> post;   // activations per layer (post[last] is the raw output)
};

Trace run_forward(const EncoderParams& params, const Vec& x) {
  const EncoderConfig& cfg = params.config;
  require(static_cast<int>(x.size()) == cfg.input_dim, ErrorCode::Dimension,
          "forward: input length does not match input_dim");
  const std::vector<int> dims = cfg.layer_dims();
  Trace trace;
  trace.pre.resize(cfg.n_layers());
  trace.post.resize(cfg.n_layers());
  const Vec* in = &x;
  for (int l = 0; l < cfg.n_layers(); ++l) {
    const std::size_t n_in = static_cast<std::size_t>(dims[l]);
    const std::size_t n_out = static_cast<std::size_t>(dims[l + 1]);
    const std::span<const double> w = params.weight(l);
    const std::span<const double> b = params.bias(l);
    Vec pre(n_out);
    for (std::size_t r = 0; r < n_out; ++r) {
      double s = b[r];
      const double* row = w.data() + r * n_in;
      for (std::size_t c = 0; c < n_in; ++c) s += row[c] * (*in)[c];
      pre[r] = s;
    }
    const bool last = l == cfg.n_layers() - 1;
    Vec post(n_out);
    if (last) {
      post = pre;
    } else {
      for (std::size_t r = 0; r < n_out; ++r) post[r] = activate(cfg.activation, pre[r]);
    }
    trace.pre[l] = std::move(pre);
    trace.post[l] = std::move(post);
    in = &trace.post[l];
  }
  return trace;
}

}  // namespace

Vec forward_raw(const EncoderParams& params, const Vec& x) {
  Trace trace = run_forward(params, x);
  return std::move(trace.post.back());
}

Vec forward(const EncoderParams& params, const Vec& x) {
  return l2_normalize(forward_raw(params, x));
}

std::vector<Vec> forward_batch(const EncoderParams& params, const std::vector<Vec>& xs) {
  std::vector<Vec> out;
  out.reserve(xs.size());
  for (const Vec& x : xs) out.push_back(forward(params, x));
  return out;
}

std::vector<double> backward(const EncoderParams& params, const std::vector<Vec>& xs,
                             const std::vector<Vec>& upstream) {
  const EncoderConfig& cfg = params.config;
  require(xs.size() == upstream.size(), ErrorCode::Dimension,
          "backward: batch size mismatch between inputs and upstream gradients");
  const std::vector<int> dims = cfg.layer_dims();
  std::vector<double> grads(params.values.size(), 0.0);
  EncoderParams grad_view;
  grad_view.config = cfg;

  for (std::size_t s = 0; s < xs.size(); ++s) {
    require(static_cast<int>(upstream[s].size()) == cfg.embed_dim, ErrorCode::Dimension,
            "backward: upstream gradient length does not match embed_dim");
    const Trace trace = run_forward(params, xs[s]);
    const Vec& raw = trace.post.back();
    const double raw_norm = norm(raw);
    require(raw_norm > 0.0, ErrorCode::DegenerateInput,
            "backward: zero pre-normalization output");

    // d/d raw of <g, raw/||raw||> = (g - <g, e> e) / ||raw||  with e = raw/||raw||.
    const std::size_t embed = static_cast<std::size_t>(cfg.embed_dim);
    Vec delta(embed);
    double g_dot_e = 0.0;
    for (std::size_t i = 0; i < embed; ++i) g_dot_e += upstream[s][i] * raw[i] / raw_norm;
    for (std::size_t i = 0; i < embed; ++i) {
      delta[i] = (upstream[s][i] - g_dot_e * raw[i] / raw_norm) / raw_norm;
    }

    for (int l = cfg.n_layers() - 1; l >= 0; --l) {
      const std::size_t n_in = static_cast<std::size_t>(dims[l]);
      const std::size_t n_out = static_cast<std::size_t>(dims[l + 1]);
      const Vec& layer_in = l == 0 ? xs[s] : trace.post[l - 1];
      const LayerOffsets off = layer_offsets(cfg, l);
      for (std::size_t r = 0; r < n_out; ++r) {
        const double d = delta[r];
        double* wgrad_row = grads.data() + off.w + r * n_in;
        for (std::size_t c = 0; c < n_in; ++c) wgrad_row[c] += d * layer_in[c];
        grads[off.b + r] += d;
      }
      if (l == 0) break;
      const std::span<const double> w = params.weight(l);
      Vec next(n_in, 0.0);
      for (std::size_t r = 0; r < n_out; ++r) {
        const double d = delta[r];
        const double* row = w.data() + r * n_in;
        for (std::size_t c = 0; c < n_in; ++c) next[c] += d * row[c];
      }
      for (std::size_t c = 0; c < n_in; ++c) {
        next[c] *= activate_grad(cfg.activation, trace.pre[l - 1][c], trace.post[l - 1][c]);
      }
      delta = std::move(next);
    }
  }
  return grads;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::Io, "save_checkpoint: cannot open " + path);
  out.write(kCheckpointMagic, 8);
  binio::write_u32(out, kCheckpointVersion);
  const EncoderConfig& cfg = ckpt.params.config;
  binio::write_u32(out, static_cast<std::uint32_t>(cfg.input_dim));
  binio::write_u32(out, static_cast<std::uint32_t>(cfg.hidden_dims.size()));
  for (int h : cfg.hidden_dims) binio::write_u32(out, static_cast<std::uint32_t>(h));
  binio::write_u32(out, static_cast<std::uint32_t>(cfg.embed_dim));
  binio::write_u8(out, cfg.activation == Activation::Relu ? 0 : 1);
  binio::write_u64(out, ckpt.step);
  binio::write_u64(out, ckpt.seed);
  binio::write_u64(out, ckpt.params.values.size());
  for (double v : ckpt.params.values) binio::write_f64(out, v);
  require(out.good(), ErrorCode::Io, "save_checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::Io, "load_checkpoint: cannot open " + path);
  char magic[8];
  binio::read_exact(in, magic, 8, "checkpoint magic");
  require(std::memcmp(magic, kCheckpointMagic, 8) == 0, ErrorCode::Format,
          "load_checkpoint: bad magic in " + path);
  const std::uint32_t version = binio::read_u32(in, "checkpoint version");
  require(version == kCheckpointVersion, ErrorCode::Format,
          "load_checkpoint: unsupported version in " + path);
  Checkpoint ckpt;
  EncoderConfig cfg;
  cfg.input_dim = static_cast<int>(binio::read_u32(in, "input_dim"));
  const std::uint32_t n_hidden = binio::read_u32(in, "hidden layer count");
  cfg.hidden_dims.resize(n_hidden);
  for (std::uint32_t i = 0; i < n_hidden; ++i) {
    cfg.hidden_dims[i] = static_cast<int>(binio::read_u32(in, "hidden dim"));
  }
  cfg.embed_dim = static_cast<int>(binio::read_u32(in, "embed_dim"));
  cfg.activation = binio::read_u8(in, "activation") == 0 ? Activation::Relu : Activation::Tanh;
  cfg.validate();
  ckpt.step = binio::read_u64(in, "step");
  ckpt.seed = binio::read_u64(in, "seed");
  const std::uint64_t n_values = binio::read_u64(in, "parameter count");
  require(n_values == cfg.n_params(), ErrorCode::Format,
          "load_checkpoint: parameter count does not match config in " + path);
  ckpt.params.config = cfg;
  ckpt.params.values.resize(n_values);
  for (std::uint64_t i = 0; i < n_values; ++i) {
    ckpt.params.values[i] = binio::read_f64(in, "parameter value");
  }
  return ckpt;
}

const char* activation_name(Activation a) {
  return a == Activation::Relu ? "relu" : "tanh";
}

Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  fail(ErrorCode::InvalidArgument, "unknown activation: " + name);
}

}  // namespace mdml
