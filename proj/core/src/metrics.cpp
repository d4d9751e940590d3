#include "kcl/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "kcl/errors.hpp"

namespace kcl {

namespace {

// Rank of the true item i within the gallery: 1 + better + earlier ties.
int rank_of(const Matrix& queries, const Matrix& gallery, int i) {
  const double s_true = dot(queries.row(i), gallery.row(i));
  int rank = 1;
  for (int j = 0; j < gallery.rows; ++j) {
    if (j == i) continue;
    const double s = dot(queries.row(i), gallery.row(j));
    if (s > s_true || (s == s_true && j < i)) ++rank;
  }
  return rank;
}

}  // namespace

RetrievalReport retrieval_eval(const Matrix& z_t, const Matrix& z_v, Direction direction) {
  if (!z_t.same_shape(z_v)) throw ValidationError("retrieval_eval: shape mismatch");
  if (z_t.rows < 1) throw ValidationError("retrieval_eval: empty input");
  const Matrix& queries = direction == Direction::t2v ? z_t : z_v;
  const Matrix& gallery = direction == Direction::t2v ? z_v : z_t;

  const int M = queries.rows;
  std::vector<int> ranks(static_cast<size_t>(M));
  for (int i = 0; i < M; ++i) ranks[static_cast<size_t>(i)] = rank_of(queries, gallery, i);

  RetrievalReport rep;
  for (int k : {1, 5, 10}) {
    int hits = 0;
    for (int r : ranks)
      if (r <= k) ++hits;
    rep.r_at[k] = static_cast<double>(hits) / M;
  }
  rep.aver = (rep.r_at[1] + rep.r_at[5] + rep.r_at[10]) / 3.0;
  std::sort(ranks.begin(), ranks.end());
  rep.med_r = ranks[static_cast<size_t>((M - 1) / 2)];  // lower middle for even M
  return rep;
}

bool multichoice_eval(const Vector& z_v, const Matrix& candidates, int answer_index) {
  if (candidates.rows != 5) throw ValidationError("multichoice_eval: expected 5 candidates");
  if (answer_index < 0 || answer_index >= 5)
    throw ValidationError("multichoice_eval: answer_index out of range");
  if (static_cast<int>(z_v.size()) != candidates.cols)
    throw ValidationError("multichoice_eval: dimension mismatch");
  int best = 0;
  double best_sim = dot(z_v, candidates.row(0));
  for (int c = 1; c < 5; ++c) {
    const double s = dot(z_v, candidates.row(c));
    if (s > best_sim) {
      best_sim = s;
      best = c;
    }
  }
  return best == answer_index;
}

double alignment(const Matrix& z_t, const Matrix& z_v, double alpha) {
  if (!z_t.same_shape(z_v)) throw ValidationError("alignment: shape mismatch");
  if (z_t.rows < 1) throw ValidationError("alignment: empty input");
  if (!(alpha > 0.0)) throw ValidationError("alignment: alpha must be > 0");
  double total = 0.0;
  for (int i = 0; i < z_t.rows; ++i)
    total += std::pow(std::sqrt(squared_distance(z_v.row(i), z_t.row(i))), alpha);
  return total / z_t.rows;
}

double uniformity(const Matrix& z, double beta) {
  if (z.rows < 2) throw ValidationError("uniformity: need at least 2 points");
  if (!(beta > 0.0)) throw ValidationError("uniformity: beta must be > 0");
  double total = 0.0;
  int64_t pairs = 0;
  for (int i = 0; i < z.rows; ++i)
    for (int j = 0; j < z.rows; ++j) {
      if (i == j) continue;
      total += std::exp(-beta * squared_distance(z.row(i), z.row(j)));
      ++pairs;
    }
  return std::log(total / static_cast<double>(pairs));
}

SpaceReport space_report(const Matrix& z_t, const Matrix& z_v, double alpha, double beta) {
  SpaceReport rep;
  rep.alpha = alpha;
  rep.beta = beta;
  rep.align = alignment(z_t, z_v, alpha);
  rep.unif_txt = uniformity(z_t, beta);
  rep.unif_vis = uniformity(z_v, beta);
  return rep;
}

}  // namespace kcl
