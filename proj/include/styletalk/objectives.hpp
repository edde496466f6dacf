#pragma once

// Training objective over linear style projections: L1 style loss,
// next-token cross-entropy and their weighted sum, with analytic gradients.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "styletalk/dialog.hpp"
#include "styletalk/error.hpp"

namespace styletalk {

inline constexpr std::size_t kDefaultHiddenWidth = 32;

namespace detail {

inline void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw ArgumentError(std::string(what) + ": entries must be finite");
}

inline Eigen::VectorXd to_eigen(const StyleVector& s) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(s.dim()));
  for (std::size_t i = 0; i < s.dim(); ++i) v(static_cast<Eigen::Index>(i)) = s[i];
  return v;
}

}  // namespace detail

// Style (D) to hidden (H).
struct ProjectionIn {
  Eigen::MatrixXd weights;  // H x D
  Eigen::VectorXd bias;     // H

  ProjectionIn(Eigen::MatrixXd w, Eigen::VectorXd b) : weights(std::move(w)), bias(std::move(b)) {
    if (bias.size() != weights.rows()) throw DimensionError("ProjectionIn: bias must have H entries");
    detail::require_finite(weights, "ProjectionIn");
    detail::require_finite(bias, "ProjectionIn");
  }

  Eigen::VectorXd operator()(const StyleVector& s) const {
    if (static_cast<Eigen::Index>(s.dim()) != weights.cols())
      throw DimensionError("ProjectionIn: style has " + std::to_string(s.dim()) + " entries, expected " +
                           std::to_string(weights.cols()));
    return weights * detail::to_eigen(s) + bias;
  }
};

// Hidden (H) to style (D).
struct ProjectionOut {
  Eigen::MatrixXd weights;  // D x H
  Eigen::VectorXd bias;     // D

  ProjectionOut(Eigen::MatrixXd w, Eigen::VectorXd b) : weights(std::move(w)), bias(std::move(b)) {
    if (bias.size() != weights.rows()) throw DimensionError("ProjectionOut: bias must have D entries");
    detail::require_finite(weights, "ProjectionOut");
    detail::require_finite(bias, "ProjectionOut");
  }

  std::size_t hidden() const { return static_cast<std::size_t>(weights.cols()); }
  std::size_t style_dim() const { return static_cast<std::size_t>(weights.rows()); }
};

inline StyleVector project_out(const Eigen::VectorXd& h, const ProjectionOut& proj) {
  if (h.size() != proj.weights.cols())
    throw DimensionError("project_out: hidden vector has " + std::to_string(h.size()) + " entries, expected " +
                         std::to_string(proj.weights.cols()));
  const Eigen::VectorXd s = proj.weights * h + proj.bias;
  return StyleVector(std::vector<double>(s.data(), s.data() + s.size()), StyleKind::prosodic);
}

enum class Reduction { mean, sum };

namespace detail {

inline void check_style_pair(const StyleVector& pred, const StyleVector& target, const char* what) {
  require_kind(pred, StyleKind::prosodic, what);
  require_kind(target, StyleKind::prosodic, what);
  if (pred.dim() != target.dim())
    throw DimensionError(std::string(what) + ": dimensions differ (" + std::to_string(pred.dim()) + " vs " +
                         std::to_string(target.dim()) + ")");
}

inline double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

inline void check_text_inputs(const Eigen::MatrixXd& logits, const std::vector<std::size_t>& targets,
                              const char* what) {
  if (logits.rows() < 2) throw ArgumentError(std::string(what) + ": at least two positions are required");
  if (logits.cols() < 1) throw ArgumentError(std::string(what) + ": vocabulary must be non-empty");
  if (static_cast<Eigen::Index>(targets.size()) != logits.rows())
    throw DimensionError(std::string(what) + ": one target per position is required");
  for (std::size_t id : targets)
    if (static_cast<Eigen::Index>(id) >= logits.cols())
      throw RangeError(std::string(what) + ": target id " + std::to_string(id) + " outside vocabulary of " +
                       std::to_string(logits.cols()));
  require_finite(logits, what);
}

inline Eigen::RowVectorXd log_softmax(const Eigen::RowVectorXd& row) {
  const double m = row.maxCoeff();
  const double lse = m + std::log((row.array() - m).exp().sum());
  return row.array() - lse;
}

}  // namespace detail

inline double style_loss(const StyleVector& pred, const StyleVector& target, Reduction r = Reduction::mean) {
  detail::check_style_pair(pred, target, "style_loss");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.dim(); ++i) acc += std::abs(pred[i] - target[i]);
  return r == Reduction::mean ? acc / static_cast<double>(pred.dim()) : acc;
}

// Rows are positions, columns vocabulary entries; targets are 0-based ids.
// The first position is never scored.
inline double text_loss(const Eigen::MatrixXd& logits, const std::vector<std::size_t>& targets) {
  detail::check_text_inputs(logits, targets, "text_loss");
  double acc = 0.0;
  for (Eigen::Index t = 1; t < logits.rows(); ++t)
    acc -= detail::log_softmax(logits.row(t))(static_cast<Eigen::Index>(targets[static_cast<std::size_t>(t)]));
  return acc / static_cast<double>(logits.rows() - 1);
}

struct LossBreakdown {
  double style_loss = 0.0;
  double text_loss = 0.0;
  double total = 0.0;
  double lambda = 0.0;
};

inline LossBreakdown total_loss(double style, double text, double lambda) {
  if (!(lambda >= 0.0)) throw ArgumentError("total_loss: lambda must be >= 0");
  if (!(style >= 0.0) || !(text >= 0.0)) throw ArgumentError("total_loss: losses must be >= 0");
  return {style, text, text + lambda * style, lambda};
}

struct StyleGrad {
  Eigen::MatrixXd weights;  // D x H
  Eigen::VectorXd bias;     // D
};

// Subgradient with sign(0) = 0.
inline StyleGrad grad_style_loss(const StyleVector& pred, const StyleVector& target, const Eigen::VectorXd& h,
                                 const ProjectionOut& proj, Reduction r = Reduction::mean) {
  detail::check_style_pair(pred, target, "grad_style_loss");
  if (pred.dim() != proj.style_dim()) throw DimensionError("grad_style_loss: projection output dimension differs");
  if (h.size() != proj.weights.cols()) throw DimensionError("grad_style_loss: hidden vector dimension differs");
  const double scale = r == Reduction::mean ? 1.0 / static_cast<double>(pred.dim()) : 1.0;
  Eigen::VectorXd g(static_cast<Eigen::Index>(pred.dim()));
  for (std::size_t i = 0; i < pred.dim(); ++i) g(static_cast<Eigen::Index>(i)) = scale * detail::sign(pred[i] - target[i]);
  return {g * h.transpose(), g};
}

inline Eigen::MatrixXd grad_text_loss(const Eigen::MatrixXd& logits, const std::vector<std::size_t>& targets) {
  detail::check_text_inputs(logits, targets, "grad_text_loss");
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(logits.rows(), logits.cols());
  const double scale = 1.0 / static_cast<double>(logits.rows() - 1);
  for (Eigen::Index t = 1; t < logits.rows(); ++t) {
    Eigen::RowVectorXd p = detail::log_softmax(logits.row(t)).array().exp();
    p(static_cast<Eigen::Index>(targets[static_cast<std::size_t>(t)])) -= 1.0;
    g.row(t) = scale * p;
  }
  return g;
}

}  // namespace styletalk
