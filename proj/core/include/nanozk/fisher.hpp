#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nanozk/grad.hpp"
#include "nanozk/sha256.hpp"

namespace nanozk::fisher {

// Per-block importance: empirical Fisher trace (mean squared gradient norm
// of log-likelihood) normalized by parameter count.
struct FisherScores {
  std::vector<double> scores;        // length L, nonnegative
  std::vector<size_t> param_counts;  // |theta_l| per block
  uint64_t sample_count = 0;
  Digest model_digest{};

  std::string to_json() const;
  static FisherScores from_json(const std::string& s);
};

struct FisherOptions {
  uint32_t samples = 16;
  uint32_t window = 32;
  uint64_t seed = 1;
  // true Fisher samples labels from the model's own predictive
  // distribution; false scores against the dataset's next tokens.
  bool model_labels = true;
};

FisherScores fisher_scores(const nn::Weights& w, const std::vector<uint32_t>& corpus,
                           const FisherOptions& opts);

enum class StrategyKind : uint8_t {
  FISHER_TOPK = 0,
  RANDOM = 1,
  UNIFORM_EVERY_OTHER = 2,
  HYBRID = 3,
};

struct SelectionStrategy {
  StrategyKind kind = StrategyKind::FISHER_TOPK;
  uint64_t seed = 0;      // RANDOM / HYBRID
  uint32_t k_det = 0;     // HYBRID deterministic part
  uint32_t k_rand = 0;    // HYBRID random part
  std::string name() const;
};

// Budget-k selection. Ties break toward the lower layer index. The
// every-other strategy takes even indices first, then fills from the
// smallest unused odd index.
std::vector<uint32_t> select(const FisherScores& scores, uint32_t k,
                             const SelectionStrategy& strategy);

// Fraction of total score mass captured by the selection.
double coverage(const FisherScores& scores, const std::vector<uint32_t>& selected);

struct CoverageReport {
  std::string strategy;
  std::vector<uint32_t> selected;  // representative selection (first seed)
  double coverage = 0.0;           // averaged over seeds for RANDOM
  std::vector<uint64_t> seeds;
};

// One report per strategy: Fisher top-k, Random averaged over n_seeds,
// UniformEveryOther.
std::vector<CoverageReport> compare_strategies(const FisherScores& scores, uint32_t budget,
                                               uint32_t n_seeds, uint64_t seed_base = 1);

}  // namespace nanozk::fisher
