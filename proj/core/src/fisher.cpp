#include "nanozk/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "nanozk/rng.hpp"

namespace nanozk::fisher {

using json = nlohmann::json;

FisherScores fisher_scores(const nn::Weights& w, const std::vector<uint32_t>& corpus,
                           const FisherOptions& opts) {
  const nn::ModelConfig& cfg = w.cfg;
  uint32_t window = std::min(opts.window, cfg.max_seq);
  if (corpus.size() < window + 2) throw std::invalid_argument("corpus too small");
  if (opts.samples < 1) throw std::invalid_argument("need at least one sample");

  SeededRng rng(opts.seed, "fisher-scores");
  FisherScores out;
  out.scores.assign(cfg.num_layers, 0.0);
  out.param_counts.resize(cfg.num_layers);
  for (uint32_t l = 0; l < cfg.num_layers; l++)
    out.param_counts[l] = w.layers[l].param_count();
  out.sample_count = opts.samples;
  out.model_digest = nn::model_digest(w, nn::TableSet::build(fx::FixedParams{cfg.frac_bits}));

  for (uint32_t sIdx = 0; sIdx < opts.samples; sIdx++) {
    size_t start = rng.below(corpus.size() - window - 1);
    std::vector<uint32_t> tokens(corpus.begin() + start, corpus.begin() + start + window);
    std::vector<uint32_t> targets;
    if (opts.model_labels) {
      // draw y ~ p(.|x) from the model's own predictive distribution
      nn::ExactTrace tr = nn::forward_exact(w, tokens);
      targets.resize(tokens.size());
      for (uint32_t t = 0; t < tokens.size(); t++) {
        double maxv = -1e300;
        for (uint32_t j = 0; j < cfg.vocab; j++) maxv = std::max(maxv, tr.logits.at(t, j));
        double denom = 0.0;
        for (uint32_t j = 0; j < cfg.vocab; j++)
          denom += std::exp(tr.logits.at(t, j) - maxv);
        double u = rng.uniform() * denom;
        double acc = 0.0;
        uint32_t pick = cfg.vocab - 1;
        for (uint32_t j = 0; j < cfg.vocab; j++) {
          acc += std::exp(tr.logits.at(t, j) - maxv);
          if (acc >= u) {
            pick = j;
            break;
          }
        }
        targets[t] = pick;
      }
    } else {
      targets.assign(corpus.begin() + start + 1, corpus.begin() + start + window + 1);
    }
    nn::Grads g = nn::loglike_grad(w, tokens, targets);
    for (uint32_t l = 0; l < cfg.num_layers; l++) out.scores[l] += g.layers[l].sq_norm();
  }
  for (uint32_t l = 0; l < cfg.num_layers; l++)
    out.scores[l] /= static_cast<double>(opts.samples) * static_cast<double>(out.param_counts[l]);
  return out;
}

std::string SelectionStrategy::name() const {
  switch (kind) {
    case StrategyKind::FISHER_TOPK: return "fisher_topk";
    case StrategyKind::RANDOM: return "random";
    case StrategyKind::UNIFORM_EVERY_OTHER: return "uniform_every_other";
    case StrategyKind::HYBRID: return "hybrid";
  }
  return "?";
}

namespace {

std::vector<uint32_t> topk_indices(const std::vector<double>& scores, uint32_t k) {
  std::vector<uint32_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0u);
  std::stable_sort(idx.begin(), idx.end(), [&](uint32_t a, uint32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<uint32_t> random_subset(uint32_t n, uint32_t k, uint64_t seed,
                                    const std::vector<uint32_t>& pool_in = {}) {
  std::vector<uint32_t> pool = pool_in;
  if (pool.empty()) {
    pool.resize(n);
    std::iota(pool.begin(), pool.end(), 0u);
  }
  SeededRng rng(seed, "random-select");
  for (uint32_t i = 0; i < k && i + 1 < pool.size(); i++) {
    uint32_t j = i + static_cast<uint32_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(std::min<size_t>(k, pool.size()));
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

std::vector<uint32_t> select(const FisherScores& scores, uint32_t k,
                             const SelectionStrategy& strategy) {
  uint32_t L = static_cast<uint32_t>(scores.scores.size());
  if (k > L) throw std::invalid_argument("selection budget exceeds layer count");
  switch (strategy.kind) {
    case StrategyKind::FISHER_TOPK:
      return topk_indices(scores.scores, k);
    case StrategyKind::RANDOM:
      return random_subset(L, k, strategy.seed);
    case StrategyKind::UNIFORM_EVERY_OTHER: {
      std::vector<uint32_t> out;
      for (uint32_t i = 0; i < L && out.size() < k; i += 2) out.push_back(i);
      for (uint32_t i = 1; i < L && out.size() < k; i += 2) out.push_back(i);
      std::sort(out.begin(), out.end());
      return out;
    }
    case StrategyKind::HYBRID: {
      if (strategy.k_det + strategy.k_rand > L)
        throw std::invalid_argument("hybrid budget exceeds layer count");
      std::vector<uint32_t> det = topk_indices(scores.scores, strategy.k_det);
      std::vector<uint32_t> rest;
      for (uint32_t i = 0; i < L; i++)
        if (std::find(det.begin(), det.end(), i) == det.end()) rest.push_back(i);
      std::vector<uint32_t> rnd =
          random_subset(0, strategy.k_rand, strategy.seed, rest);
      det.insert(det.end(), rnd.begin(), rnd.end());
      std::sort(det.begin(), det.end());
      return det;
    }
  }
  throw std::invalid_argument("bad strategy");
}

double coverage(const FisherScores& scores, const std::vector<uint32_t>& selected) {
  double total = 0.0;
  for (double s : scores.scores) {
    if (s < 0) throw std::domain_error("negative fisher score");
    total += s;
  }
  if (total <= 0.0) throw std::domain_error("coverage undefined for all-zero scores");
  double got = 0.0;
  for (uint32_t i : selected) {
    if (i >= scores.scores.size()) throw std::invalid_argument("selected index out of range");
    got += scores.scores[i];
  }
  return got / total;
}

std::vector<CoverageReport> compare_strategies(const FisherScores& scores, uint32_t budget,
                                               uint32_t n_seeds, uint64_t seed_base) {
  if (n_seeds < 1) throw std::invalid_argument("need at least one seed");
  std::vector<CoverageReport> out;

  CoverageReport fisher;
  fisher.strategy = "fisher_topk";
  fisher.selected = select(scores, budget, {StrategyKind::FISHER_TOPK, 0, 0, 0});
  fisher.coverage = coverage(scores, fisher.selected);
  out.push_back(fisher);

  CoverageReport random;
  random.strategy = "random";
  double acc = 0.0;
  for (uint32_t i = 0; i < n_seeds; i++) {
    uint64_t seed = seed_base + i;
    auto sel = select(scores, budget, {StrategyKind::RANDOM, seed, 0, 0});
    if (i == 0) random.selected = sel;
    random.seeds.push_back(seed);
    acc += coverage(scores, sel);
  }
  random.coverage = acc / n_seeds;
  out.push_back(random);

  CoverageReport uniform;
  uniform.strategy = "uniform_every_other";
  uniform.selected = select(scores, budget, {StrategyKind::UNIFORM_EVERY_OTHER, 0, 0, 0});
  uniform.coverage = coverage(scores, uniform.selected);
  out.push_back(uniform);
  return out;
}

std::string FisherScores::to_json() const {
  json j;
  j["scores"] = scores;
  j["param_counts"] = param_counts;
  j["sample_count"] = sample_count;
  j["model_digest"] = digest_hex(model_digest);
  return j.dump(2);
}

FisherScores FisherScores::from_json(const std::string& s) {
  json j = json::parse(s);
  FisherScores f;
  f.scores = j.at("scores").get<std::vector<double>>();
  f.param_counts = j.at("param_counts").get<std::vector<size_t>>();
  f.sample_count = j.at("sample_count").get<uint64_t>();
  f.model_digest = digest_from_hex(j.at("model_digest").get<std::string>());
  return f;
}

}  // namespace nanozk::fisher
