#include "postforge/selection.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

#include "postforge/metrics.hpp"
#include "postforge/tree.hpp"

namespace postforge {

std::string_view to_string(SelectionMethod m) {
  switch (m) {
    case SelectionMethod::rfe: return "rfe";
    case SelectionMethod::ga: return "ga";
    case SelectionMethod::sa: return "sa";
  }
  return "?";
}

SelectionMethod selection_method_from_string(std::string_view s) {
  if (s == "rfe") return SelectionMethod::rfe;
  if (s == "ga") return SelectionMethod::ga;
  if (s == "sa") return SelectionMethod::sa;
  throw std::invalid_argument("unknown selection method '" + std::string(s) + "'");
}

std::vector<Feature> features_of(FeatureMask mask) {
  std::vector<Feature> out;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (mask & (1u << i)) out.push_back(static_cast<Feature>(i));
  }
  return out;
}

FeatureMask mask_of(std::span<const Feature> features) {
  FeatureMask m = 0;
  for (Feature f : features) m |= static_cast<FeatureMask>(1u << index_of(f));
  return m;
}

namespace {

constexpr int kSelectionFolds = 10;

struct Evaluation {
  std::optional<double> f1;
  FeatureArray importance{};
};

// Scores subsets on a fixed fold assignment, memoized by mask.
class SubsetScorer {
 public:
  SubsetScorer(std::span<const LabeledExample> data, const TrainingConfig& cfg)
      : data_(data), cfg_(cfg), fold_(stratified_folds(data, kSelectionFolds, cfg.rng_seed)) {
    fold_count_ = *std::max_element(fold_.begin(), fold_.end()) + 1;
  }

  const Evaluation& evaluate(FeatureMask mask) {
    if (auto it = memo_.find(mask); it != memo_.end()) return it->second;
    const auto subset = features_of(mask);
    auto run = [&](int f) {
      Dataset fit;
      std::vector<std::size_t> held;
      for (std::size_t i = 0; i < data_.size(); ++i) {
        if (fold_[i] == f) held.push_back(i);
        else fit.push_back(data_[i]);
      }
      std::pair<Confusion, FeatureArray> out{};
      if (held.empty() || fit.empty()) return out;
      const auto tree = train_tree(fit, cfg_.selection_cp, cfg_.tree, subset);
      for (std::size_t i : held) out.first.add(tree.predict(data_[i].features).label, data_[i].label);
      out.second = tree.importances();
      return out;
    };
    Evaluation ev;
    Confusion total;
    for (const auto& [c, imp] : map_folds(fold_count_, run)) {
      total += c;
      for (std::size_t i = 0; i < kFeatureCount; ++i) ev.importance[i] += imp[i];
    }
    ev.f1 = metrics_from_confusion(total).f1;
    return memo_.emplace(mask, ev).first->second;
  }

  std::size_t evaluated() const { return memo_.size(); }

 private:
  std::span<const LabeledExample> data_;
  const TrainingConfig& cfg_;
  std::vector<int> fold_;
  int fold_count_ = 0;
  std::map<FeatureMask, Evaluation> memo_;
};

double score_of(const Evaluation& e) { return e.f1.value_or(-1.0); }

// Better score, then fewer features, then lower mask.
bool better(FeatureMask a, double sa, FeatureMask b, double sb) {
  if (sa != sb) return sa > sb;
  if (std::popcount(a) != std::popcount(b)) return std::popcount(a) < std::popcount(b);
  return a < b;
}

struct Best {
  FeatureMask mask = 0;
  double score = -2.0;
  void offer(FeatureMask m, double s) {
    if (mask == 0 || better(m, s, mask, score)) {
      mask = m;
      score = s;
    }
  }
};

FeatureMask run_rfe(SubsetScorer& scorer, FeatureMask all) {
  Best best;
  FeatureMask current = all;
  while (true) {
    const Evaluation& ev = scorer.evaluate(current);
    best.offer(current, score_of(ev));
    if (std::popcount(current) <= 1) break;
    // Least important feature; among equals drop the later one.
    int drop = -1;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      if (!(current & (1u << i))) continue;
      if (drop < 0 || ev.importance[i] <= ev.importance[static_cast<std::size_t>(drop)]) drop = static_cast<int>(i);
    }
    current = static_cast<FeatureMask>(current & ~(1u << drop));
  }
  return best.mask;
}

FeatureMask random_mask(std::mt19937_64& rng, FeatureMask all) {
  std::bernoulli_distribution coin(0.5);
  FeatureMask m = 0;
  do {
    m = 0;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      if ((all & (1u << i)) && coin(rng)) m |= static_cast<FeatureMask>(1u << i);
    }
  } while (m == 0);
  return m;
}

FeatureMask run_ga(SubsetScorer& scorer, FeatureMask all, const TrainingConfig& cfg, std::mt19937_64& rng) {
  const auto pop_size = static_cast<std::size_t>(std::max(cfg.ga_population, 2));
  std::vector<FeatureMask> population;
  population.push_back(all);
  while (population.size() < pop_size) population.push_back(random_mask(rng, all));

  Best best;
  auto fitness = [&](FeatureMask m) {
    const double s = score_of(scorer.evaluate(m));
    best.offer(m, s);
    return s;
  };
  std::uniform_int_distribution<std::size_t> pick(0, pop_size - 1);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution mutate(cfg.ga_mutation_rate);

  for (int gen = 0; gen <= cfg.ga_generations; ++gen) {
    std::vector<std::pair<double, FeatureMask>> ranked;
    for (FeatureMask m : population) ranked.emplace_back(fitness(m), m);
    if (gen == cfg.ga_generations) break;
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return better(a.second, a.first, b.second, b.first);
    });
    auto tournament = [&]() {
      std::size_t w = pick(rng);
      for (int t = 1; t < 3; ++t) {
        const std::size_t c = pick(rng);
        if (better(ranked[c].second, ranked[c].first, ranked[w].second, ranked[w].first)) w = c;
      }
      return ranked[w].second;
    };
    std::vector<FeatureMask> next{ranked[0].second, ranked[1].second};
    while (next.size() < pop_size) {
      const FeatureMask a = tournament();
      const FeatureMask b = tournament();
      FeatureMask child = 0;
      for (std::size_t i = 0; i < kFeatureCount; ++i) {
        if (!(all & (1u << i))) continue;
        bool bit = (coin(rng) ? a : b) & (1u << i);
        if (mutate(rng)) bit = !bit;
        if (bit) child |= static_cast<FeatureMask>(1u << i);
      }
      if (child == 0) child = random_mask(rng, all);
      next.push_back(child);
    }
    population = std::move(next);
  }
  return best.mask;
}

FeatureMask run_sa(SubsetScorer& scorer, FeatureMask all, const TrainingConfig& cfg, std::mt19937_64& rng) {
  std::vector<std::size_t> bits;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (all & (1u << i)) bits.push_back(i);
  }
  std::uniform_int_distribution<std::size_t> pick(0, bits.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Best best;
  FeatureMask current = all;
  double current_score = score_of(scorer.evaluate(current));
  best.offer(current, current_score);
  double temperature = cfg.sa_initial_temperature;
  for (int step = 0; step < cfg.sa_steps; ++step, temperature *= cfg.sa_cooling) {
    const FeatureMask candidate = static_cast<FeatureMask>(current ^ (1u << bits[pick(rng)]));
    if (candidate == 0) continue;
    const double s = score_of(scorer.evaluate(candidate));
    best.offer(candidate, s);
    const double delta = s - current_score;
    if (delta >= 0 || (temperature > 0 && unit(rng) < std::exp(delta / temperature))) {
      current = candidate;
      current_score = s;
    }
  }
  return best.mask;
}

}  // namespace

FeatureSubset select_features(std::span<const LabeledExample> train, SelectionMethod method,
                              const TrainingConfig& cfg, std::span<const Feature> candidates) {
  const FeatureMask all = candidates.empty() ? mask_of(all_features()) : mask_of(candidates);
  if (std::popcount(all) < 2) throw std::invalid_argument("feature selection needs at least 2 features");
  if (train.size() < static_cast<std::size_t>(kSelectionFolds)) {
    throw std::invalid_argument("feature selection needs at least 10 examples");
  }
  SubsetScorer scorer(train, cfg);
  std::mt19937_64 rng(cfg.rng_seed);
  FeatureMask chosen = 0;
  switch (method) {
    case SelectionMethod::rfe: chosen = run_rfe(scorer, all); break;
    case SelectionMethod::ga: chosen = run_ga(scorer, all, cfg, rng); break;
    case SelectionMethod::sa: chosen = run_sa(scorer, all, cfg, rng); break;
  }
  FeatureSubset out;
  out.selected = features_of(chosen);
  out.method = method;
  out.cv_score = scorer.evaluate(chosen).f1;
  out.subsets_evaluated = scorer.evaluated();
  return out;
}

}  // namespace postforge
