#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "mlp.hpp"
#include "rng.hpp"
#include "vec.hpp"

namespace attacklab {

// Label-only access to a classifier's difference function S: callers learn
// nothing but sgn(S(x)). A tie S(x) = 0 reports +1 so that points placed on
// the decision boundary by binary search still count as adversarial.
class DifferenceOracle {
 public:
  virtual ~DifferenceOracle() = default;

  int query_sign(const Vec& x) {
    require_dim(x, dim_, "oracle query");
    count_.fetch_add(1, std::memory_order_relaxed);
    return sign_at(x);
  }

  std::uint64_t query_count() const { return count_.load(std::memory_order_relaxed); }
  // Queries that hit S(x) = 0 exactly (reported as +1). Measurement metadata
  // for local victims only; the wire protocol does not carry it, and nothing
  // on the attack's decision path may read it.
  std::uint64_t tie_count() const { return ties_.load(std::memory_order_relaxed); }
  std::size_t dim() const { return dim_; }
  std::size_t y_ben() const { return y_ben_; }
  std::size_t y_mal() const { return y_mal_; }

 protected:
  DifferenceOracle(std::size_t dim, std::size_t y_ben, std::size_t y_mal)
      : dim_(dim), y_ben_(y_ben), y_mal_(y_mal) {}
  // Non-const so transport-backed oracles can do I/O; local oracles are pure.
  virtual int sign_at(const Vec& x) = 0;
  void note_tie() { ties_.fetch_add(1, std::memory_order_relaxed); }

 private:
  std::size_t dim_;
  std::size_t y_ben_;
  std::size_t y_mal_;
  std::atomic<std::uint64_t> count_{0};
  std::atomic<std::uint64_t> ties_{0};
};

inline int sign_of_score(double s) { return s >= 0.0 ? +1 : -1; }

struct LocalConstants {
  double L_S = 0.0;
  double beta_S = 0.0;
};

// Analytic side of a victim, for measurement only -- the attack never sees it.
class GroundTruth {
 public:
  virtual ~GroundTruth() = default;

  virtual double value(const Vec& x) const = 0;
  virtual Vec gradient(const Vec& x) const = 0;
  // Lipschitz / smoothness constants valid in a ball of radius r around x.
  virtual LocalConstants local_constants(const Vec& x, double r, Rng& rng) const = 0;

  LocalConstants local_constants(const Vec& x, double r) const {
    Rng rng(0x5ca1ab1eULL);
    return local_constants(x, r, rng);
  }
};

struct Victim {
  std::unique_ptr<DifferenceOracle> oracle;
  std::unique_ptr<GroundTruth> truth;  // null for remote victims
};

// S(x) = w . (x - b)
Victim make_linear_victim(const Vec& w, const Vec& b);

// S(x) = w . (x - b) + 1/2 (x - b)^T H (x - b), H symmetric
Victim make_quadratic_victim(const Vec& w, const Vec& b, const Mat& H);

// Feed-forward net with tanh hidden layers and identity output; S is the
// difference of the y_mal and y_ben logits.
Victim make_mlp_victim(const std::vector<Mat>& weights, const std::vector<Vec>& biases,
                       std::size_t y_ben, std::size_t y_mal);

}  // namespace attacklab
