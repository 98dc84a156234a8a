#pragma once

// Online multinomial logistic regression trained by single-instance SGD.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "olcais/types.hpp"

namespace olcais::learn {

struct ProbabilityEstimate {
  std::vector<double> probs;
  double p_hat = 0.0;
  std::size_t predicted = 0;
};

/// Confidence threshold K(n) = 1/n + 0.5 * 10^-(floor(log10 n) + 1).
inline double confidence_threshold(int n_classes) {
  if (n_classes <= 1) throw DomainError("confidence threshold needs more than one class");
  const double n = static_cast<double>(n_classes);
  const double digits = std::floor(std::log10(n)) + 1.0;
  return 1.0 / n + 0.5 * std::pow(10.0, -digits);
}

/// Default SGD step. Larger steps saturate the bias after a single human
/// label, after which no input can fall below K and the scenario never
/// degrades; 0.08 is the largest step that still shows forgetting.
inline constexpr double kDefaultLearningRate = 0.08;
inline constexpr double kDefaultL2Penalty = 1e-4;

class LinearModel {
 public:
  LinearModel(std::size_t n_classes, std::size_t n_features, double learning_rate = kDefaultLearningRate,
              double l2_penalty = kDefaultL2Penalty)
      : n_classes_(n_classes),
        n_features_(n_features),
        weights_(n_classes * n_features, 0.0),
        bias_(n_classes, 0.0),
        learning_rate_(learning_rate),
        l2_penalty_(l2_penalty) {
    if (n_classes < 2) throw DomainError("model needs at least two classes");
    if (!(learning_rate >= 0.0)) throw DomainError("learning rate must be nonnegative");
    if (!(l2_penalty >= 0.0)) throw DomainError("l2 penalty must be nonnegative");
  }

  std::size_t n_classes() const { return n_classes_; }
  std::size_t n_features() const { return n_features_; }
  std::size_t update_count() const { return update_count_; }
  double learning_rate() const { return learning_rate_; }
  double l2_penalty() const { return l2_penalty_; }

  double& weight(std::size_t cls, std::size_t feat) { return weights_[cls * n_features_ + feat]; }
  double weight(std::size_t cls, std::size_t feat) const { return weights_[cls * n_features_ + feat]; }
  double& bias(std::size_t cls) { return bias_[cls]; }
  double bias(std::size_t cls) const { return bias_[cls]; }

  std::vector<double> logits(std::span<const double> x) const {
    check_dim(x);
    std::vector<double> z(bias_);
    for (std::size_t c = 0; c < n_classes_; ++c)
      for (std::size_t f = 0; f < n_features_; ++f) z[c] += weight(c, f) * x[f];
    return z;
  }

  ProbabilityEstimate predict_proba(std::span<const double> x) const {
    ProbabilityEstimate est;
    est.probs = logits(x);
    const double zmax = *std::max_element(est.probs.begin(), est.probs.end());
    double total = 0.0;
    for (auto& z : est.probs) total += (z = std::exp(z - zmax));
    for (auto& p : est.probs) p /= total;
    // max_element returns the first maximum, i.e. the lowest index on ties
    const auto best = std::max_element(est.probs.begin(), est.probs.end());
    est.p_hat = *best;
    est.predicted = static_cast<std::size_t>(best - est.probs.begin());
    return est;
  }

  /// Gradient of the per-instance objective
  ///   -log p_label + (l2/2) * ||W||^2
  /// laid out as [W row-major | bias].
  std::vector<double> gradient(std::span<const double> x, std::size_t label) const {
    check_label(label);
    const auto est = predict_proba(x);
    std::vector<double> grad(weights_.size() + bias_.size());
    for (std::size_t c = 0; c < n_classes_; ++c) {
      const double residual = est.probs[c] - (c == label ? 1.0 : 0.0);
      for (std::size_t f = 0; f < n_features_; ++f)
        grad[c * n_features_ + f] = residual * x[f] + l2_penalty_ * weight(c, f);
      grad[weights_.size() + c] = residual;
    }
    return grad;
  }

  /// Objective matching gradient(); used by finite-difference checks.
  double loss(std::span<const double> x, std::size_t label) const {
    check_label(label);
    const auto est = predict_proba(x);
    double sq = 0.0;
    for (double w : weights_) sq += w * w;
    return -std::log(est.probs[label]) + 0.5 * l2_penalty_ * sq;
  }

  /// One SGD step on the labelled instance.
  void update(std::span<const double> x, std::size_t label) {
    const auto grad = gradient(x, label);
    for (std::size_t i = 0; i < weights_.size(); ++i) weights_[i] -= learning_rate_ * grad[i];
    for (std::size_t c = 0; c < n_classes_; ++c)
      bias_[c] -= learning_rate_ * grad[weights_.size() + c];
    ++update_count_;
  }

  /// Flat parameter vector [W row-major | bias], mirrors gradient() layout.
  std::vector<double> parameters() const {
    std::vector<double> p(weights_);
    p.insert(p.end(), bias_.begin(), bias_.end());
    return p;
  }

  void set_parameters(std::span<const double> p) {
    if (p.size() != weights_.size() + bias_.size())
      throw DimensionMismatch("parameter vector has wrong length");
    std::copy(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(weights_.size()), weights_.begin());
    std::copy(p.begin() + static_cast<std::ptrdiff_t>(weights_.size()), p.end(), bias_.begin());
  }

  /// Debug snapshot: one row per class, bias then weights.
  void write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.precision(17);
    for (std::size_t c = 0; c < n_classes_; ++c) {
      out << bias_[c];
      for (std::size_t f = 0; f < n_features_; ++f) out << ',' << weight(c, f);
      out << '\n';
    }
  }

 private:
  void check_dim(std::span<const double> x) const {
    if (x.size() != n_features_)
      throw DimensionMismatch("expected " + std::to_string(n_features_) + " features, got " +
                              std::to_string(x.size()));
  }
  void check_label(std::size_t label) const {
    if (label >= n_classes_) throw DomainError("label out of range");
  }

  std::size_t n_classes_;
  std::size_t n_features_;
  std::vector<double> weights_;
  std::vector<double> bias_;
  double learning_rate_;
  double l2_penalty_;
  std::size_t update_count_ = 0;
};

}  // namespace olcais::learn
