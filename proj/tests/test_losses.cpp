#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kcl/errors.hpp"
#include "kcl/losses.hpp"
#include "kcl/rng.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

using namespace kcl;

namespace {

// Draw a random triplet batch whose hinge arguments all sit away from the
// kink, so central differences are trustworthy.
struct TripletInstance {
  Matrix z_t;
  Matrix z_v;
};

bool near_kink(const Matrix& z_t, const Matrix& z_v, double delta, double margin) {
  const int n = z_t.rows;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double t2v =
          delta + dot(z_t.row(i), z_v.row(j)) - dot(z_t.row(i), z_v.row(i));
      const double v2t =
          delta + dot(z_v.row(i), z_t.row(j)) - dot(z_v.row(i), z_t.row(i));
      if (std::abs(t2v) < margin || std::abs(v2t) < margin) return true;
    }
  return false;
}

TripletInstance draw_triplet_instance(int n, int dim, double delta, Rng& rng) {
  for (;;) {
    TripletInstance inst{oracle::random_unit_rows(n, dim, rng),
                         oracle::random_unit_rows(n, dim, rng)};
    if (!near_kink(inst.z_t, inst.z_v, delta, 1e-3)) return inst;
  }
}

}  // namespace

TEST_CASE("loss config validation") {
  LossConfig c;
  c.margin_delta = 0.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.margin_delta = 2.5;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = LossConfig{};
  c.skp_weight = -1.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("skp loss at zero logits is K ln 2 per sample") {
  const int N = 3, K = 4;
  Matrix logits(N, K);
  Matrix labels(N, K);
  Rng rng(5);
  for (auto& y : labels.data) y = rng.uniform() < 0.5 ? 1.0 : 0.0;
  const auto res = skp_loss(logits, labels);
  CHECK(res.loss == doctest::Approx(K * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("skp loss term vanishes as the logit saturates toward its label") {
  Matrix logits(1, 1);
  Matrix labels(1, 1);
  labels(0, 0) = 1.0;
  logits(0, 0) = 40.0;
  CHECK(skp_loss(logits, labels).loss < 1e-15);
  labels(0, 0) = 0.0;
  logits(0, 0) = -40.0;
  CHECK(skp_loss(logits, labels).loss < 1e-15);
  // and stays finite even at extreme magnitudes
  logits(0, 0) = 5000.0;
  labels(0, 0) = 0.0;
  CHECK(std::isfinite(skp_loss(logits, labels).loss));
}

TEST_CASE("skp loss rejects non-binary labels") {
  Matrix logits(1, 2);
  Matrix labels(1, 2);
  labels(0, 1) = 0.5;
  CHECK_THROWS_AS(skp_loss(logits, labels), ValidationError);
  Matrix wrong(2, 2);
  CHECK_THROWS_AS(skp_loss(logits, wrong), ValidationError);
}

TEST_CASE("skp loss matches the direct-formula oracle") {
  Rng rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const int N = 1 + static_cast<int>(rng.uniform_int(6));
    const int K = 1 + static_cast<int>(rng.uniform_int(8));
    Matrix logits(N, K);
    Matrix labels(N, K);
    for (auto& l : logits.data) l = 2.0 * rng.normal();
    for (auto& y : labels.data) y = rng.uniform() < 0.5 ? 1.0 : 0.0;
    const auto res = skp_loss(logits, labels);
    CHECK(std::abs(res.loss - oracle::skp_direct(logits, labels)) < 1e-6);
  }
}

TEST_CASE("skp loss gradients match central differences") {
  Rng rng(32);
  for (int trial = 0; trial < 25; ++trial) {
    const int N = 2 + static_cast<int>(rng.uniform_int(4));
    const int K = 1 + static_cast<int>(rng.uniform_int(6));
    Matrix logits(N, K);
    Matrix labels(N, K);
    for (auto& l : logits.data) l = 2.0 * rng.normal();
    for (auto& y : labels.data) y = rng.uniform() < 0.5 ? 1.0 : 0.0;

    const auto res = skp_loss(logits, labels);
    auto loss = [&]() { return skp_loss(logits, labels).loss; };
    double max_rel = 0.0;
    for (size_t i = 0; i < logits.data.size(); ++i) {
      const double fd = gradcheck::central_diff(loss, logits.data[i]);
      max_rel = std::max(max_rel, gradcheck::rel_error(res.grad_logits.data[i], fd));
    }
    CHECK(max_rel < 1e-4);
  }
}

TEST_CASE("perfectly separated batch has zero loss and zero gradients") {
  // z_t_i = z_v_i = e_i: positives at similarity 1, negatives orthogonal
  const int N = 4;
  Matrix z(N, N);
  for (int i = 0; i < N; ++i) z(i, i) = 1.0;
  const auto res = kcl_triplet_loss(z, z, 0.2);
  CHECK(res.loss == 0.0);
  CHECK(res.t2v_active == 0);
  CHECK(res.v2t_active == 0);
  for (double g : res.grad_zv.data) CHECK(g == 0.0);
  for (double g : res.grad_zt.data) CHECK(g == 0.0);
}

TEST_CASE("equal-similarity batch forces every hinge to the margin") {
  // All four embeddings identical: every sim equals 1, each active term is
  // exactly delta. N=2: loss = (1/2) * (2 pairs * 2 directions * delta).
  Matrix z(2, 3);
  for (int i = 0; i < 2; ++i) z(i, 0) = 1.0;
  const auto res = kcl_triplet_loss(z, z, 0.2);
  CHECK(res.loss == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(res.t2v_active == 2);
  CHECK(res.v2t_active == 2);
}

TEST_CASE("triplet loss validation") {
  Matrix one(1, 3);
  one(0, 0) = 1.0;
  CHECK_THROWS_AS(kcl_triplet_loss(one, one, 0.2), ValidationError);

  Matrix bad(2, 3);
  bad(0, 0) = 1.0;
  bad(1, 0) = 0.9;  // not unit norm
  CHECK_THROWS_AS(kcl_triplet_loss(bad, bad, 0.2), ValidationError);
}

TEST_CASE("triplet loss matches the double-loop oracle") {
  Rng rng(33);
  for (int trial = 0; trial < 60; ++trial) {
    const int N = 2 + static_cast<int>(rng.uniform_int(15));
    const int dim = 2 + static_cast<int>(rng.uniform_int(7));
    const Matrix z_t = oracle::random_unit_rows(N, dim, rng);
    const Matrix z_v = oracle::random_unit_rows(N, dim, rng);
    const double delta = 0.05 + 0.4 * rng.uniform();
    const auto res = kcl_triplet_loss(z_t, z_v, delta);
    CHECK(std::abs(res.loss - oracle::triplet_double_loop(z_t, z_v, delta)) < 1e-9);
  }
}

TEST_CASE("triplet gradients match central differences on the embeddings") {
  Rng rng(34);
  for (int trial = 0; trial < 20; ++trial) {
    const int N = 2 + static_cast<int>(rng.uniform_int(4));
    const int dim = 3 + static_cast<int>(rng.uniform_int(4));
    const double delta = 0.2;
    auto inst = draw_triplet_instance(N, dim, delta, rng);
    const auto res = kcl_triplet_loss(inst.z_t, inst.z_v, delta);

    auto loss = [&]() { return oracle::triplet_double_loop(inst.z_t, inst.z_v, delta); };
    double max_rel = 0.0;
    for (size_t i = 0; i < inst.z_v.data.size(); ++i) {
      const double fd = gradcheck::central_diff(loss, inst.z_v.data[i]);
      max_rel = std::max(max_rel, gradcheck::rel_error(res.grad_zv.data[i], fd));
    }
    for (size_t i = 0; i < inst.z_t.data.size(); ++i) {
      const double fd = gradcheck::central_diff(loss, inst.z_t.data[i]);
      max_rel = std::max(max_rel, gradcheck::rel_error(res.grad_zt.data[i], fd));
    }
    CHECK(max_rel < 1e-4);
  }
}

TEST_CASE("triplet loss is invariant to a common rotation") {
  Rng rng(35);
  const int N = 6, dim = 4;
  const Matrix z_t = oracle::random_unit_rows(N, dim, rng);
  const Matrix z_v = oracle::random_unit_rows(N, dim, rng);

  // Givens rotation in coordinates (0, 2)
  const double theta = 0.83;
  auto rotate = [&](const Matrix& m) {
    Matrix out = m;
    for (int i = 0; i < m.rows; ++i) {
      const double a = m(i, 0), b = m(i, 2);
      out(i, 0) = std::cos(theta) * a - std::sin(theta) * b;
      out(i, 2) = std::sin(theta) * a + std::cos(theta) * b;
    }
    return out;
  };
  const auto base = kcl_triplet_loss(z_t, z_v, 0.2);
  const auto rotated = kcl_triplet_loss(rotate(z_t), rotate(z_v), 0.2);
  CHECK(rotated.loss == doctest::Approx(base.loss).epsilon(1e-9));
}

TEST_CASE("pair-embedding overload matches the matrix form") {
  Rng rng(37);
  const int N = 4, dim = 5;
  const Matrix z_t = oracle::random_unit_rows(N, dim, rng);
  const Matrix z_v = oracle::random_unit_rows(N, dim, rng);
  std::vector<PairEmbedding> batch(static_cast<size_t>(N));
  for (int i = 0; i < N; ++i) {
    batch[static_cast<size_t>(i)].z_t.assign(z_t.row(i).begin(), z_t.row(i).end());
    batch[static_cast<size_t>(i)].z_v.assign(z_v.row(i).begin(), z_v.row(i).end());
  }
  const auto a = kcl_triplet_loss(z_t, z_v, 0.2);
  const auto b = kcl_triplet_loss(std::span<const PairEmbedding>(batch), 0.2);
  CHECK(a.loss == b.loss);
  CHECK(a.grad_zv.data == b.grad_zv.data);
  CHECK(a.grad_zt.data == b.grad_zt.data);
}

TEST_CASE("triplet loss is invariant to relabeling the batch") {
  Rng rng(36);
  const int N = 5, dim = 4;
  const Matrix z_t = oracle::random_unit_rows(N, dim, rng);
  const Matrix z_v = oracle::random_unit_rows(N, dim, rng);
  const std::vector<int> perm{3, 0, 4, 1, 2};
  Matrix pt(N, dim), pv(N, dim);
  for (int i = 0; i < N; ++i) {
    std::copy(z_t.row(perm[static_cast<size_t>(i)]).begin(),
              z_t.row(perm[static_cast<size_t>(i)]).end(), pt.row(i).begin());
    std::copy(z_v.row(perm[static_cast<size_t>(i)]).begin(),
              z_v.row(perm[static_cast<size_t>(i)]).end(), pv.row(i).begin());
  }
  CHECK(kcl_triplet_loss(pt, pv, 0.2).loss ==
        doctest::Approx(kcl_triplet_loss(z_t, z_v, 0.2).loss).epsilon(1e-12));
}
