#include "kcl/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "kcl/errors.hpp"
#include "kcl/rng.hpp"

namespace kcl {

namespace {

constexpr double kNormEps = 1e-12;

void fill_xavier(Matrix& w, Rng& rng) {
  const double s = std::sqrt(6.0 / (w.rows + w.cols));
  for (double& v : w.data) v = rng.uniform(-s, s);
}

// z = h / (||h|| + eps)
Vector normalize(const Vector& h, double* out_norm) {
  const double n = norm2(h);
  if (out_norm) *out_norm = n;
  Vector z(h.size());
  const double inv = 1.0 / (n + kNormEps);
  for (size_t i = 0; i < h.size(); ++i) z[i] = h[i] * inv;
  return z;
}

// Chain rule through z = h / (||h|| + eps):
//   dL/dh = g/(n+eps) - h * (g.h) / (n * (n+eps)^2)
Vector normalize_backward(const Vector& h, double n, const Vector& grad_z) {
  Vector grad_h(h.size());
  const double inv = 1.0 / (n + kNormEps);
  double proj = 0.0;
  if (n > 0.0) proj = dot(grad_z, h) / (n * (n + kNormEps) * (n + kNormEps));
  for (size_t i = 0; i < h.size(); ++i) grad_h[i] = grad_z[i] * inv - h[i] * proj;
  return grad_h;
}

void check_shapes(const EncoderParams& p, const EncoderParams& g) {
  if (!(p.w_v.same_shape(g.w_v) && p.token_table.same_shape(g.token_table) &&
        p.w_t.same_shape(g.w_t) && p.w_skp1.same_shape(g.w_skp1) &&
        p.w_skp2.same_shape(g.w_skp2) && p.b_v.size() == g.b_v.size() &&
        p.b_t.size() == g.b_t.size() && p.b_skp1.size() == g.b_skp1.size() &&
        p.b_skp2.size() == g.b_skp2.size()))
    throw ValidationError("parameter/gradient shape mismatch");
}

}  // namespace

EncoderParams init_params(const EncoderDims& dims, uint64_t seed) {
  if (dims.feat_dim < 1 || dims.hidden < 1 || dims.skp_hidden < 1 || dims.vocab_tokens < 1 ||
      dims.num_concepts < 1)
    throw ValidationError("encoder dimensions must be positive");
  Rng rng(derive_seed(seed, "init"));
  EncoderParams p;
  p.dims = dims;
  p.w_v = Matrix(dims.feat_dim, dims.hidden);
  p.b_v.assign(static_cast<size_t>(dims.hidden), 0.0);
  p.token_table = Matrix(dims.vocab_tokens, dims.hidden);
  p.w_t = Matrix(dims.hidden, dims.hidden);
  p.b_t.assign(static_cast<size_t>(dims.hidden), 0.0);
  p.w_skp1 = Matrix(dims.hidden, dims.skp_hidden);
  p.b_skp1.assign(static_cast<size_t>(dims.skp_hidden), 0.0);
  p.w_skp2 = Matrix(dims.skp_hidden, dims.num_concepts);
  p.b_skp2.assign(static_cast<size_t>(dims.num_concepts), 0.0);
  fill_xavier(p.w_v, rng);
  fill_xavier(p.token_table, rng);
  fill_xavier(p.w_t, rng);
  fill_xavier(p.w_skp1, rng);
  fill_xavier(p.w_skp2, rng);
  return p;
}

EncoderParams zeros_like(const EncoderParams& params) {
  EncoderParams g;
  g.dims = params.dims;
  g.w_v = Matrix(params.w_v.rows, params.w_v.cols);
  g.b_v.assign(params.b_v.size(), 0.0);
  g.token_table = Matrix(params.token_table.rows, params.token_table.cols);
  g.w_t = Matrix(params.w_t.rows, params.w_t.cols);
  g.b_t.assign(params.b_t.size(), 0.0);
  g.w_skp1 = Matrix(params.w_skp1.rows, params.w_skp1.cols);
  g.b_skp1.assign(params.b_skp1.size(), 0.0);
  g.w_skp2 = Matrix(params.w_skp2.rows, params.w_skp2.cols);
  g.b_skp2.assign(params.b_skp2.size(), 0.0);
  return g;
}

Vector encode_video(const EncoderParams& params, std::span<const double> video_feat,
                    VideoCache* cache) {
  if (static_cast<int>(video_feat.size()) != params.dims.feat_dim)
    throw ValidationError("video_feat dimension mismatch");
  Vector h = affine(video_feat, params.w_v, params.b_v);
  for (double& v : h) v = std::tanh(v);
  double n = 0.0;
  Vector z = normalize(h, &n);
  if (cache) {
    cache->input.assign(video_feat.begin(), video_feat.end());
    cache->h = std::move(h);
    cache->h_norm = n;
  }
  return z;
}

Vector encode_text(const EncoderParams& params, std::span<const int> caption, TextCache* cache) {
  if (caption.empty()) throw ValidationError("caption must be non-empty");
  const int H = params.dims.hidden;

  // canonical bag of tokens: sorted unique ids weighted by count/len
  std::vector<int> sorted(caption.begin(), caption.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() < 0 || sorted.back() >= params.dims.vocab_tokens)
    throw ValidationError("caption token id out of range");
  std::vector<std::pair<int, double>> token_weights;
  const double inv_len = 1.0 / static_cast<double>(sorted.size());
  for (size_t i = 0; i < sorted.size();) {
    size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    token_weights.emplace_back(sorted[i], static_cast<double>(j - i) * inv_len);
    i = j;
  }

  Vector mean(static_cast<size_t>(H), 0.0);
  for (const auto& [tok, w] : token_weights) {
    auto row = params.token_table.row(tok);
    for (int j = 0; j < H; ++j) mean[static_cast<size_t>(j)] += w * row[static_cast<size_t>(j)];
  }

  Vector h = affine(mean, params.w_t, params.b_t);
  for (double& v : h) v = std::tanh(v);
  double n = 0.0;
  Vector z = normalize(h, &n);
  if (cache) {
    cache->token_weights = std::move(token_weights);
    cache->mean_embed = std::move(mean);
    cache->h = std::move(h);
    cache->h_norm = n;
  }
  return z;
}

Vector skp_head(const EncoderParams& params, const Vector& z_v, SkpCache* cache) {
  if (static_cast<int>(z_v.size()) != params.dims.hidden)
    throw ValidationError("skp_head input dimension mismatch");
  Vector u = affine(z_v, params.w_skp1, params.b_skp1);
  for (double& v : u) v = std::tanh(v);
  Vector logits = affine(u, params.w_skp2, params.b_skp2);
  if (cache) {
    cache->z_v = z_v;
    cache->u = std::move(u);
  }
  return logits;
}

void encode_video_backward(const EncoderParams& params, const VideoCache& cache,
                           const Vector& grad_z, EncoderParams& grads) {
  Vector grad_h = normalize_backward(cache.h, cache.h_norm, grad_z);
  // through tanh: dpre = dh * (1 - h^2)
  for (size_t i = 0; i < grad_h.size(); ++i) grad_h[i] *= 1.0 - cache.h[i] * cache.h[i];
  const int D = params.dims.feat_dim, H = params.dims.hidden;
  for (int i = 0; i < D; ++i) {
    const double xi = cache.input[static_cast<size_t>(i)];
    if (xi == 0.0) continue;
    double* grow = grads.w_v.data.data() + static_cast<size_t>(i) * H;
    for (int j = 0; j < H; ++j) grow[j] += xi * grad_h[static_cast<size_t>(j)];
  }
  for (int j = 0; j < H; ++j) grads.b_v[static_cast<size_t>(j)] += grad_h[static_cast<size_t>(j)];
}

void encode_text_backward(const EncoderParams& params, const TextCache& cache,
                          const Vector& grad_z, EncoderParams& grads) {
  Vector grad_h = normalize_backward(cache.h, cache.h_norm, grad_z);
  for (size_t i = 0; i < grad_h.size(); ++i) grad_h[i] *= 1.0 - cache.h[i] * cache.h[i];
  const int H = params.dims.hidden;

  // W_t and b_t
  for (int i = 0; i < H; ++i) {
    const double mi = cache.mean_embed[static_cast<size_t>(i)];
    double* grow = grads.w_t.data.data() + static_cast<size_t>(i) * H;
    for (int j = 0; j < H; ++j) grow[j] += mi * grad_h[static_cast<size_t>(j)];
  }
  for (int j = 0; j < H; ++j) grads.b_t[static_cast<size_t>(j)] += grad_h[static_cast<size_t>(j)];

  // grad wrt the mean embedding, scattered back over caption token rows
  Vector grad_mean(static_cast<size_t>(H), 0.0);
  for (int i = 0; i < H; ++i) {
    const double* wrow = params.w_t.data.data() + static_cast<size_t>(i) * H;
    double s = 0.0;
    for (int j = 0; j < H; ++j) s += wrow[j] * grad_h[static_cast<size_t>(j)];
    grad_mean[static_cast<size_t>(i)] = s;
  }
  for (const auto& [tok, w] : cache.token_weights) {
    double* trow = grads.token_table.data.data() + static_cast<size_t>(tok) * H;
    for (int j = 0; j < H; ++j) trow[j] += w * grad_mean[static_cast<size_t>(j)];
  }
}

Vector skp_head_backward(const EncoderParams& params, const SkpCache& cache,
                         const Vector& grad_logits, EncoderParams& grads) {
  const int H = params.dims.hidden;
  const int Hs = params.dims.skp_hidden;
  const int K = params.dims.num_concepts;

  // logits = u^T W_skp2 + b_skp2
  Vector grad_u(static_cast<size_t>(Hs), 0.0);
  for (int i = 0; i < Hs; ++i) {
    const double ui = cache.u[static_cast<size_t>(i)];
    const double* wrow = params.w_skp2.data.data() + static_cast<size_t>(i) * K;
    double* grow = grads.w_skp2.data.data() + static_cast<size_t>(i) * K;
    double s = 0.0;
    for (int k = 0; k < K; ++k) {
      const double g = grad_logits[static_cast<size_t>(k)];
      grow[k] += ui * g;
      s += wrow[k] * g;
    }
    grad_u[static_cast<size_t>(i)] = s;
  }
  for (int k = 0; k < K; ++k) grads.b_skp2[static_cast<size_t>(k)] += grad_logits[static_cast<size_t>(k)];

  // through tanh
  for (int i = 0; i < Hs; ++i)
    grad_u[static_cast<size_t>(i)] *= 1.0 - cache.u[static_cast<size_t>(i)] * cache.u[static_cast<size_t>(i)];

  // u_pre = z^T W_skp1 + b_skp1
  Vector grad_z(static_cast<size_t>(H), 0.0);
  for (int i = 0; i < H; ++i) {
    const double zi = cache.z_v[static_cast<size_t>(i)];
    const double* wrow = params.w_skp1.data.data() + static_cast<size_t>(i) * Hs;
    double* grow = grads.w_skp1.data.data() + static_cast<size_t>(i) * Hs;
    double s = 0.0;
    for (int j = 0; j < Hs; ++j) {
      const double g = grad_u[static_cast<size_t>(j)];
      grow[j] += zi * g;
      s += wrow[j] * g;
    }
    grad_z[static_cast<size_t>(i)] = s;
  }
  for (int j = 0; j < Hs; ++j) grads.b_skp1[static_cast<size_t>(j)] += grad_u[static_cast<size_t>(j)];
  return grad_z;
}

void apply_gradients(EncoderParams& params, const EncoderParams& grads, double lr) {
  check_shapes(params, grads);
  auto step_m = [lr](Matrix& p, const Matrix& g) {
    for (size_t i = 0; i < p.data.size(); ++i) p.data[i] -= lr * g.data[i];
  };
  auto step_v = [lr](Vector& p, const Vector& g) {
    for (size_t i = 0; i < p.size(); ++i) p[i] -= lr * g[i];
  };
  step_m(params.w_v, grads.w_v);
  step_v(params.b_v, grads.b_v);
  step_m(params.token_table, grads.token_table);
  step_m(params.w_t, grads.w_t);
  step_v(params.b_t, grads.b_t);
  step_m(params.w_skp1, grads.w_skp1);
  step_v(params.b_skp1, grads.b_skp1);
  step_m(params.w_skp2, grads.w_skp2);
  step_v(params.b_skp2, grads.b_skp2);
}

namespace {

constexpr char kCkptMagic[8] = {'K', 'C', 'L', 'C', 'K', 'P', 'T', '1'};

void write_block(std::ofstream& out, const double* p, size_t n) {
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

void read_block(std::ifstream& in, double* p, size_t n, const std::string& path) {
  in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw DataError("truncated checkpoint: " + path);
}

}  // namespace

void save_checkpoint(const EncoderParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(kCkptMagic, sizeof(kCkptMagic));
  const int64_t header[5] = {params.dims.feat_dim, params.dims.hidden, params.dims.skp_hidden,
                             params.dims.vocab_tokens, params.dims.num_concepts};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  write_block(out, params.w_v.data.data(), params.w_v.data.size());
  write_block(out, params.b_v.data(), params.b_v.size());
  write_block(out, params.token_table.data.data(), params.token_table.data.size());
  write_block(out, params.w_t.data.data(), params.w_t.data.size());
  write_block(out, params.b_t.data(), params.b_t.size());
  write_block(out, params.w_skp1.data.data(), params.w_skp1.data.size());
  write_block(out, params.b_skp1.data(), params.b_skp1.size());
  write_block(out, params.w_skp2.data.data(), params.w_skp2.data.size());
  write_block(out, params.b_skp2.data(), params.b_skp2.size());
  if (!out) throw IoError("write failed: " + path);
}

EncoderParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCkptMagic, sizeof(magic)) != 0)
    throw DataError("not a checkpoint file: " + path);
  int64_t header[5];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in) throw DataError("truncated checkpoint: " + path);
  for (int64_t d : header)
    if (d < 1 || d > (1 << 24)) throw DataError("implausible dimension in checkpoint header: " + path);

  EncoderDims dims{static_cast<int>(header[0]), static_cast<int>(header[1]),
                   static_cast<int>(header[2]), static_cast<int>(header[3]),
                   static_cast<int>(header[4])};
  EncoderParams p;
  p.dims = dims;
  p.w_v = Matrix(dims.feat_dim, dims.hidden);
  p.b_v.assign(static_cast<size_t>(dims.hidden), 0.0);
  p.token_table = Matrix(dims.vocab_tokens, dims.hidden);
  p.w_t = Matrix(dims.hidden, dims.hidden);
  p.b_t.assign(static_cast<size_t>(dims.hidden), 0.0);
  p.w_skp1 = Matrix(dims.hidden, dims.skp_hidden);
  p.b_skp1.assign(static_cast<size_t>(dims.skp_hidden), 0.0);
  p.w_skp2 = Matrix(dims.skp_hidden, dims.num_concepts);
  p.b_skp2.assign(static_cast<size_t>(dims.num_concepts), 0.0);
  read_block(in, p.w_v.data.data(), p.w_v.data.size(), path);
  read_block(in, p.b_v.data(), p.b_v.size(), path);
  read_block(in, p.token_table.data.data(), p.token_table.data.size(), path);
  read_block(in, p.w_t.data.data(), p.w_t.data.size(), path);
  read_block(in, p.b_t.data(), p.b_t.size(), path);
  read_block(in, p.w_skp1.data.data(), p.w_skp1.data.size(), path);
  read_block(in, p.b_skp1.data(), p.b_skp1.size(), path);
  read_block(in, p.w_skp2.data.data(), p.w_skp2.data.size(), path);
  read_block(in, p.b_skp2.data(), p.b_skp2.size(), path);
  // reject files with trailing garbage
  char extra;
  in.read(&extra, 1);
  if (!in.eof()) throw DataError("checkpoint larger than its header declares: " + path);
  return p;
}

}  // namespace kcl
