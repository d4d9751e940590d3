#include "kcl/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kcl/errors.hpp"

namespace kcl {

void validate(const LossConfig& config) {
  if (!(config.margin_delta > 0.0 && config.margin_delta <= 2.0))
    throw ConfigError("margin_delta must be in (0, 2] for cosine similarities");
  if (!(config.skp_weight >= 0.0)) throw ConfigError("skp_weight must be >= 0");
  if (!(config.kcl_weight >= 0.0)) throw ConfigError("kcl_weight must be >= 0");
}

SkpLossResult skp_loss(const Matrix& logits, const Matrix& labels) {
  if (!logits.same_shape(labels)) throw ValidationError("skp_loss: shape mismatch");
  if (logits.rows < 1) throw ValidationError("skp_loss: empty batch");
  const int N = logits.rows, K = logits.cols;

  SkpLossResult res;
  res.grad_logits = Matrix(N, K);
  double total = 0.0;
  const double inv_n = 1.0 / static_cast<double>(N);
  for (int i = 0; i < N; ++i) {
    for (int k = 0; k < K; ++k) {
      const double y = labels(i, k);
      if (y != 0.0 && y != 1.0)
        throw ValidationError("skp_loss: labels must be binary (got " + std::to_string(y) + ")");
      const double l = logits(i, k);
      // bce(l, y) = max(l,0) - l*y + log(1 + exp(-|l|))
      total += std::max(l, 0.0) - l * y + std::log1p(std::exp(-std::abs(l)));
      const double sig = 1.0 / (1.0 + std::exp(-l));
      res.grad_logits(i, k) = (sig - y) * inv_n;
    }
  }
  res.loss = total * inv_n;
  return res;
}

TripletLossResult kcl_triplet_loss(const Matrix& z_t, const Matrix& z_v, double delta) {
  if (!z_t.same_shape(z_v)) throw ValidationError("kcl_triplet_loss: shape mismatch");
  const int N = z_t.rows, H = z_t.cols;
  if (N < 2) throw ValidationError("kcl_triplet_loss: batch size must be >= 2");
  for (int i = 0; i < N; ++i) {
    if (std::abs(norm2(z_t.row(i)) - 1.0) > 1e-4 || std::abs(norm2(z_v.row(i)) - 1.0) > 1e-4)
      throw ValidationError("kcl_triplet_loss: embeddings must be unit-norm");
  }

  // sim_tv(i,j) = zt_i . zv_j; cosine since rows are unit vectors
  Matrix sim(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) sim(i, j) = dot(z_t.row(i), z_v.row(j));

  TripletLossResult res;
  res.grad_zv = Matrix(N, H);
  res.grad_zt = Matrix(N, H);
  double total = 0.0;
  const double inv_n = 1.0 / static_cast<double>(N);

  auto axpy = [H](double a, std::span<const double> x, std::span<double> y) {
    for (int d = 0; d < H; ++d) y[static_cast<size_t>(d)] += a * x[static_cast<size_t>(d)];
  };

  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      if (j == i) continue;
      // text anchor i against video j
      const double u_t2v = delta + sim(i, j) - sim(i, i);
      if (u_t2v > 0.0) {
        total += u_t2v;
        ++res.t2v_active;
        axpy(inv_n, z_v.row(j), res.grad_zt.row(i));
        axpy(-inv_n, z_v.row(i), res.grad_zt.row(i));
        axpy(inv_n, z_t.row(i), res.grad_zv.row(j));
        axpy(-inv_n, z_t.row(i), res.grad_zv.row(i));
      }
      // video anchor i against text j; sim(zv_i, zt_j) = sim_tv(j, i)
      const double u_v2t = delta + sim(j, i) - sim(i, i);
      if (u_v2t > 0.0) {
        total += u_v2t;
        ++res.v2t_active;
        axpy(inv_n, z_t.row(j), res.grad_zv.row(i));
        axpy(-inv_n, z_t.row(i), res.grad_zv.row(i));
        axpy(inv_n, z_v.row(i), res.grad_zt.row(j));
        axpy(-inv_n, z_v.row(i), res.grad_zt.row(i));
      }
    }
  }
  res.loss = total * inv_n;
  return res;
}

TripletLossResult kcl_triplet_loss(std::span<const PairEmbedding> batch, double delta) {
  if (batch.empty()) throw ValidationError("kcl_triplet_loss: empty batch");
  const int n = static_cast<int>(batch.size());
  const int dim = static_cast<int>(batch.front().z_t.size());
  Matrix z_t(n, dim), z_v(n, dim);
  for (int i = 0; i < n; ++i) {
    const auto& pair = batch[static_cast<size_t>(i)];
    if (static_cast<int>(pair.z_t.size()) != dim || static_cast<int>(pair.z_v.size()) != dim)
      throw ValidationError("kcl_triplet_loss: inconsistent embedding dimensions");
    std::copy(pair.z_t.begin(), pair.z_t.end(), z_t.row(i).begin());
    std::copy(pair.z_v.begin(), pair.z_v.end(), z_v.row(i).begin());
  }
  return kcl_triplet_loss(z_t, z_v, delta);
}

}  // namespace kcl
