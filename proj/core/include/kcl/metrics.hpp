#pragma once

#include <map>

#include "kcl/linalg.hpp"

namespace kcl {

enum class Direction { t2v, v2t };

struct RetrievalReport {
  std::map<int, double> r_at;  // K in {1, 5, 10} -> recall
  double aver = 0.0;           // mean of the three recalls
  double med_r = 0.0;          // median rank, >= 1
};

struct SpaceReport {
  double align = 0.0;  // >= 0
  double alpha = 2.0;
  double unif_txt = 0.0;  // <= 0
  double unif_vis = 0.0;  // <= 0
  double beta = 2.0;
};

// Ranks the true item of each query by descending cosine similarity (ties by
// ascending index). Row i of z_t pairs with row i of z_v; rows unit-norm.
// direction t2v queries with text rows against the video gallery.
// MedR takes the lower middle value for even sizes.
RetrievalReport retrieval_eval(const Matrix& z_t, const Matrix& z_v, Direction direction);

// Picks argmax cosine(z_v, candidate) among exactly 5 candidates, ties by
// ascending candidate index; true when the winner is answer_index.
bool multichoice_eval(const Vector& z_v, const Matrix& candidates, int answer_index);

// Mean over pairs of ||z_v_i - z_t_i||^alpha.
double alignment(const Matrix& z_t, const Matrix& z_v, double alpha);

// log of the mean over ordered pairs i != j of exp(-beta * ||z_i - z_j||^2).
// Self-pairs are excluded. Always <= 0; equals 0 iff all points coincide.
double uniformity(const Matrix& z, double beta);

SpaceReport space_report(const Matrix& z_t, const Matrix& z_v, double alpha = 2.0,
                         double beta = 2.0);

}  // namespace kcl
