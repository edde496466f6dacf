#pragma once

// Central finite-difference verification of the analytic loss gradients
// over random instances.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "styletalk/objectives.hpp"

namespace styletalk {

struct GradcheckOptions {
  std::size_t trials = 50;
  std::uint64_t seed = 0;
  double epsilon = 1e-5;  // style loss
  double text_epsilon = 3e-4;
  double kink_margin = 1e-6;
  double style_tolerance = 1e-4;
  double text_tolerance = 1e-6;
  bool flip_style_sign = false;  // negative control
  bool flip_text_sign = false;
};

struct GradcheckReport {
  double style_max_rel = 0.0;
  double text_max_rel = 0.0;
  std::size_t style_coords = 0;
  std::size_t style_skipped = 0;  // near a kink of |x|
  std::size_t text_coords = 0;
  bool style_ok = false;
  bool text_ok = false;
};

// |a - b| / max(|a|, |b|, 1e-8).
inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

inline GradcheckReport run_gradcheck(const GradcheckOptions& o) {
  if (o.trials == 0) throw ArgumentError("gradcheck: trials must be >= 1");
  GradcheckReport r;
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const double eps = o.epsilon;
  for (std::size_t trial = 0; trial < o.trials; ++trial) {
    const std::size_t d = kStyleDim;
    const std::size_t h = std::uniform_int_distribution<std::size_t>(2, 12)(rng);
    Eigen::MatrixXd w(d, h);
    Eigen::VectorXd b(d), hv(h);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = g(rng);
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = g(rng);
    for (Eigen::Index i = 0; i < hv.size(); ++i) hv(i) = g(rng);
    std::vector<double> tv(d);
    for (double& x : tv) x = g(rng);
    const StyleVector target(tv, StyleKind::prosodic);
    const ProjectionOut proj(w, b);
    const StyleVector pred = project_out(hv, proj);
    StyleGrad grad = grad_style_loss(pred, target, hv, proj);
    if (o.flip_style_sign) {
      grad.weights = -grad.weights;
      grad.bias = -grad.bias;
    }
    auto loss_at = [&](const Eigen::MatrixXd& ww, const Eigen::VectorXd& bb) {
      return style_loss(project_out(hv, ProjectionOut(ww, bb)), target);
    };
    for (std::size_t i = 0; i < d; ++i) {
      const double gap = std::abs(pred[i] - target[i]);
      for (std::size_t j = 0; j <= h; ++j) {
        const bool is_bias = j == h;
        const double step = is_bias ? eps : eps * std::abs(hv(static_cast<Eigen::Index>(j)));
        if (gap <= o.kink_margin + step) {
          ++r.style_skipped;
          continue;
        }
        Eigen::MatrixXd wp = w, wm = w;
        Eigen::VectorXd bp = b, bm = b;
        const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
        if (is_bias) {
          bp(ii) += eps;
          bm(ii) -= eps;
        } else {
          wp(ii, jj) += eps;
          wm(ii, jj) -= eps;
        }
        const double fd = (loss_at(wp, bp) - loss_at(wm, bm)) / (2.0 * eps);
        const double an = is_bias ? grad.bias(ii) : grad.weights(ii, jj);
        r.style_max_rel = std::max(r.style_max_rel, relative_error(an, fd));
        ++r.style_coords;
      }
    }

    const auto t = static_cast<Eigen::Index>(std::uniform_int_distribution<int>(2, 8)(rng));
    const auto v = static_cast<Eigen::Index>(std::uniform_int_distribution<int>(2, 10)(rng));
    Eigen::MatrixXd logits(t, v);
    for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = 2.0 * g(rng);
    std::vector<std::size_t> targets(static_cast<std::size_t>(t));
    for (auto& id : targets) id = std::uniform_int_distribution<std::size_t>(0, static_cast<std::size_t>(v) - 1)(rng);
    Eigen::MatrixXd tg = grad_text_loss(logits, targets);
    if (o.flip_text_sign) tg = -tg;
    for (Eigen::Index a = 0; a < t; ++a) {
      for (Eigen::Index c = 0; c < v; ++c) {
        Eigen::MatrixXd lp = logits, lm = logits;
        lp(a, c) += o.text_epsilon;
        lm(a, c) -= o.text_epsilon;
        const double fd = (text_loss(lp, targets) - text_loss(lm, targets)) / (2.0 * o.text_epsilon);
        r.text_max_rel = std::max(r.text_max_rel, relative_error(tg(a, c), fd));
        ++r.text_coords;
      }
    }
  }
  r.style_ok = r.style_max_rel < o.style_tolerance;
  r.text_ok = r.text_max_rel < o.text_tolerance;
  return r;
}

}  // namespace styletalk
