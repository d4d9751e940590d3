#pragma once

// Central finite-difference gradient checking (h = 1e-5, f64). The
// comparison uses |analytic - fd| <= tol * max(1, |analytic|, |fd|), i.e.
// relative error on large gradients with an absolute floor where both
// sides vanish.

#include <algorithm>
#include <cmath>
#include <functional>

#include "kcl/encoder.hpp"
#include "kcl/linalg.hpp"

namespace gradcheck {

constexpr double kStep = 1e-5;

inline double rel_error(double analytic, double fd) {
  return std::abs(analytic - fd) / std::max({1.0, std::abs(analytic), std::abs(fd)});
}

// Central difference of f at x (x is restored afterwards).
template <typename F>
double central_diff(F&& f, double& x, double h = kStep) {
  const double saved = x;
  x = saved + h;
  const double up = f();
  x = saved - h;
  const double down = f();
  x = saved;
  return (up - down) / (2.0 * h);
}

struct CheckResult {
  double max_rel = 0.0;
  int coords = 0;
};

// FD over every coordinate of a parameter tensor against its analytic
// gradient.
template <typename F>
void check_tensor(F&& loss, std::vector<double>& values, const std::vector<double>& analytic,
                  CheckResult& result) {
  for (size_t i = 0; i < values.size(); ++i) {
    const double fd = central_diff(loss, values[i]);
    result.max_rel = std::max(result.max_rel, rel_error(analytic[i], fd));
    ++result.coords;
  }
}

// One instance of the video-tower check: scalar loss c . encode_video(x).
inline CheckResult check_video_tower(kcl::EncoderParams& params, const kcl::Vector& x,
                                     const kcl::Vector& c) {
  auto loss = [&]() { return kcl::dot(kcl::encode_video(params, x), c); };
  kcl::VideoCache cache;
  kcl::encode_video(params, x, &cache);
  kcl::EncoderParams grads = kcl::zeros_like(params);
  kcl::encode_video_backward(params, cache, c, grads);

  CheckResult res;
  check_tensor(loss, params.w_v.data, grads.w_v.data, res);
  check_tensor(loss, params.b_v, grads.b_v, res);
  return res;
}

inline CheckResult check_text_tower(kcl::EncoderParams& params, const std::vector<int>& caption,
                                    const kcl::Vector& c) {
  auto loss = [&]() { return kcl::dot(kcl::encode_text(params, caption), c); };
  kcl::TextCache cache;
  kcl::encode_text(params, caption, &cache);
  kcl::EncoderParams grads = kcl::zeros_like(params);
  kcl::encode_text_backward(params, cache, c, grads);

  CheckResult res;
  check_tensor(loss, params.w_t.data, grads.w_t.data, res);
  check_tensor(loss, params.b_t, grads.b_t, res);
  check_tensor(loss, params.token_table.data, grads.token_table.data, res);
  return res;
}

inline CheckResult check_skp_head(kcl::EncoderParams& params, const kcl::Vector& z,
                                  const kcl::Vector& c) {
  auto loss = [&]() { return kcl::dot(kcl::skp_head(params, z), c); };
  kcl::SkpCache cache;
  kcl::skp_head(params, z, &cache);
  kcl::EncoderParams grads = kcl::zeros_like(params);
  kcl::skp_head_backward(params, cache, c, grads);

  CheckResult res;
  check_tensor(loss, params.w_skp1.data, grads.w_skp1.data, res);
  check_tensor(loss, params.b_skp1, grads.b_skp1, res);
  check_tensor(loss, params.w_skp2.data, grads.w_skp2.data, res);
  check_tensor(loss, params.b_skp2, grads.b_skp2, res);
  return res;
}

}  // namespace gradcheck
