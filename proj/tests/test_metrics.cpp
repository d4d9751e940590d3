#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kcl/errors.hpp"
#include "kcl/metrics.hpp"
#include "kcl/rng.hpp"
#include "support/oracles.hpp"

using namespace kcl;

TEST_CASE("self-retrieval ranks everything first") {
  Rng rng(1);
  const Matrix z = oracle::random_unit_rows(12, 6, rng);
  for (Direction dir : {Direction::t2v, Direction::v2t}) {
    const auto rep = retrieval_eval(z, z, dir);
    CHECK(rep.r_at.at(1) == 1.0);
    CHECK(rep.r_at.at(5) == 1.0);
    CHECK(rep.r_at.at(10) == 1.0);
    CHECK(rep.aver == 1.0);
    CHECK(rep.med_r == 1.0);
  }
}

TEST_CASE("identical gallery items rank by tie-break index") {
  // all videos identical: every similarity ties, so query i has rank i+1
  const int M = 8;
  Matrix z_t(M, 3), z_v(M, 3);
  Rng rng(2);
  const Matrix distinct = oracle::random_unit_rows(M, 3, rng);
  for (int i = 0; i < M; ++i) {
    std::copy(distinct.row(i).begin(), distinct.row(i).end(), z_t.row(i).begin());
    z_v(i, 0) = 1.0;
  }
  const auto rep = retrieval_eval(z_t, z_v, Direction::t2v);
  CHECK(rep.r_at.at(1) == doctest::Approx(1.0 / M));
  CHECK(rep.r_at.at(5) == doctest::Approx(5.0 / M));
  // ranks are 1..M; lower-middle median of {1..8} is 4
  CHECK(rep.med_r == 4.0);
}

TEST_CASE("retrieval matches the enumeration oracle on random inputs") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const int M = 20;
    const Matrix z_t = oracle::random_unit_rows(M, 8, rng);
    const Matrix z_v = oracle::random_unit_rows(M, 8, rng);
    for (Direction dir : {Direction::t2v, Direction::v2t}) {
      const Matrix& q = dir == Direction::t2v ? z_t : z_v;
      const Matrix& g = dir == Direction::t2v ? z_v : z_t;
      std::vector<int> ranks;
      for (int i = 0; i < M; ++i) ranks.push_back(oracle::retrieval_rank(q, g, i));
      const auto rep = retrieval_eval(z_t, z_v, dir);
      for (int k : {1, 5, 10}) {
        int hits = 0;
        for (int r : ranks)
          if (r <= k) ++hits;
        CHECK(rep.r_at.at(k) == doctest::Approx(static_cast<double>(hits) / M));
      }
      std::sort(ranks.begin(), ranks.end());
      CHECK(rep.med_r == ranks[(M - 1) / 2]);
      CHECK(rep.aver ==
            doctest::Approx((rep.r_at.at(1) + rep.r_at.at(5) + rep.r_at.at(10)) / 3.0));
    }
  }
}

TEST_CASE("recall is monotone in K and MedR stays in range") {
  Rng rng(4);
  const Matrix z_t = oracle::random_unit_rows(30, 5, rng);
  const Matrix z_v = oracle::random_unit_rows(30, 5, rng);
  const auto rep = retrieval_eval(z_t, z_v, Direction::t2v);
  CHECK(rep.r_at.at(1) <= rep.r_at.at(5));
  CHECK(rep.r_at.at(5) <= rep.r_at.at(10));
  CHECK(rep.med_r >= 1.0);
  CHECK(rep.med_r <= 30.0);
}

TEST_CASE("retrieval is invariant under a common rotation") {
  Rng rng(5);
  const int M = 15, dim = 6;
  const Matrix z_t = oracle::random_unit_rows(M, dim, rng);
  const Matrix z_v = oracle::random_unit_rows(M, dim, rng);
  const double theta = 1.1;
  auto rotate = [&](const Matrix& m) {
    Matrix out = m;
    for (int i = 0; i < m.rows; ++i) {
      const double a = m(i, 1), b = m(i, 4);
      out(i, 1) = std::cos(theta) * a - std::sin(theta) * b;
      out(i, 4) = std::sin(theta) * a + std::cos(theta) * b;
    }
    return out;
  };
  const auto base = retrieval_eval(z_t, z_v, Direction::t2v);
  const auto rot = retrieval_eval(rotate(z_t), rotate(z_v), Direction::t2v);
  CHECK(base.r_at.at(1) == rot.r_at.at(1));
  CHECK(base.r_at.at(5) == rot.r_at.at(5));
  CHECK(base.r_at.at(10) == rot.r_at.at(10));
  CHECK(base.med_r == rot.med_r);
}

TEST_CASE("retrieval rejects empty input") {
  Matrix empty(0, 4);
  CHECK_THROWS_AS(retrieval_eval(empty, empty, Direction::t2v), ValidationError);
}

TEST_CASE("multichoice picks the aligned candidate") {
  Matrix candidates(5, 4);
  candidates(0, 1) = 1.0;
  candidates(1, 2) = 1.0;
  candidates(2, 0) = 1.0;  // the answer
  candidates(3, 3) = 1.0;
  candidates(4, 1) = -1.0;
  Vector z{1.0, 0.0, 0.0, 0.0};
  CHECK(multichoice_eval(z, candidates, 2));
  CHECK(!multichoice_eval(z, candidates, 0));
}

TEST_CASE("multichoice ties resolve to the lowest index") {
  Matrix candidates(5, 2);
  for (int c = 0; c < 5; ++c) candidates(c, 0) = 1.0;
  Vector z{1.0, 0.0};
  CHECK(multichoice_eval(z, candidates, 0));
  CHECK(!multichoice_eval(z, candidates, 1));
}

TEST_CASE("multichoice batch accuracy equals per-item enumeration") {
  Rng rng(6);
  int correct_direct = 0;
  const int trials = 50;
  for (int t = 0; t < trials; ++t) {
    const Matrix candidates = oracle::random_unit_rows(5, 4, rng);
    const Vector z = oracle::random_unit_vector(4, rng);
    int best = 0;
    double best_sim = -2.0;
    for (int c = 0; c < 5; ++c) {
      double s = 0.0;
      for (int d = 0; d < 4; ++d) s += z[static_cast<size_t>(d)] * candidates(c, d);
      if (s > best_sim) {
        best_sim = s;
        best = c;
      }
    }
    const int answer = static_cast<int>(rng.uniform_int(5));
    if (multichoice_eval(z, candidates, answer)) ++correct_direct;
    CHECK(multichoice_eval(z, candidates, answer) == (best == answer));
  }
  CHECK(correct_direct > 0);  // sanity: some hits over 50 draws
}

TEST_CASE("multichoice validates the candidate count") {
  Matrix four(4, 3);
  CHECK_THROWS_AS(multichoice_eval(Vector{1.0, 0.0, 0.0}, four, 0), ValidationError);
}

TEST_CASE("alignment trivial values") {
  Rng rng(7);
  const Matrix z = oracle::random_unit_rows(9, 5, rng);
  CHECK(alignment(z, z, 2.0) == 0.0);

  Matrix a(1, 2), b(1, 2);
  a(0, 0) = 1.0;
  b(0, 1) = 1.0;  // distance sqrt(2); alpha = 2 -> 2.0
  CHECK(alignment(a, b, 2.0) == doctest::Approx(2.0));

  Matrix u(1, 3), v(1, 3);
  u(0, 2) = 1.0;
  v(0, 2) = -1.0;  // antipodal unit pair
  CHECK(alignment(u, v, 2.0) == doctest::Approx(4.0));
  CHECK_THROWS_AS(alignment(Matrix(0, 3), Matrix(0, 3), 2.0), ValidationError);
}

TEST_CASE("uniformity trivial values") {
  Matrix same(2, 3);
  same(0, 0) = same(1, 0) = 1.0;
  CHECK(uniformity(same, 2.0) == doctest::Approx(0.0));

  Matrix anti(2, 3);
  anti(0, 0) = 1.0;
  anti(1, 0) = -1.0;
  CHECK(uniformity(anti, 2.0) == doctest::Approx(-8.0));

  Matrix single(1, 3);
  CHECK_THROWS_AS(uniformity(single, 2.0), ValidationError);
}

TEST_CASE("uniformity matches the double-loop oracle and stays non-positive") {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix z = oracle::random_unit_rows(30, 8, rng);
    const double u = uniformity(z, 2.0);
    CHECK(std::abs(u - oracle::uniformity_double_loop(z, 2.0)) < 1e-12);
    CHECK(u <= 0.0);
  }
}

TEST_CASE("space report records its exponents") {
  Rng rng(9);
  const Matrix z_t = oracle::random_unit_rows(6, 4, rng);
  const Matrix z_v = oracle::random_unit_rows(6, 4, rng);
  const auto rep = space_report(z_t, z_v);
  CHECK(rep.alpha == 2.0);
  CHECK(rep.beta == 2.0);
  CHECK(rep.align >= 0.0);
  CHECK(rep.unif_txt <= 0.0);
  CHECK(rep.unif_vis <= 0.0);
}
