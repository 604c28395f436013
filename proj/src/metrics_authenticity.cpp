#include "usp/metrics_authenticity.hpp"

#include <algorithm>
#include <cmath>

#include "usp/errors.hpp"
#include "usp/numeric/kernels.hpp"
#include "usp/numeric/pca.hpp"
#include "usp/text.hpp"

namespace usp {

using numeric::Matrix;

namespace {

SimilarityScore pairwise_similarity(const std::string& a, const std::string& b,
                                    Channel channel, const Gateway& gateway) {
  if (a.empty() || b.empty()) {
    throw PreconditionError("similarity inputs must be non-empty");
  }
  auto vectors = gateway.embed({a, b}, channel);
  double value =
      numeric::cosine_similarity(vectors[0].values, vectors[1].values);
  return {value, channel};
}

}  // namespace

SimilarityScore sem_sim(const std::string& a, const std::string& b,
                        const Gateway& gateway) {
  return pairwise_similarity(a, b, Channel::Semantic, gateway);
}

SimilarityScore style_sim(const std::string& a, const std::string& b,
                          const Gateway& gateway) {
  return pairwise_similarity(a, b, Channel::Style, gateway);
}

namespace {

std::vector<double> style_similarities(const std::vector<AuthorPair>& pairs,
                                       const Gateway& gateway) {
  std::vector<std::string> texts;
  texts.reserve(pairs.size() * 2);
  for (const auto& p : pairs) {
    texts.push_back(p.a);
    texts.push_back(p.b);
  }
  auto vectors = gateway.embed(texts, Channel::Style);
  std::vector<double> sims(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    sims[i] = numeric::cosine_similarity(vectors[2 * i].values,
                                         vectors[2 * i + 1].values);
  }
  return sims;
}

}  // namespace

double ava(const std::vector<AuthorPair>& pairs, double threshold,
           const Gateway& gateway) {
  if (pairs.empty()) throw PreconditionError("ava: empty pair list");
  auto sims = style_similarities(pairs, gateway);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    bool predicted_same = sims[i] >= threshold;
    if (predicted_same == pairs[i].same_author) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

AvaCalibration ava_calibrate(const std::vector<AuthorPair>& pairs,
                             const Gateway& gateway) {
  if (pairs.empty()) throw PreconditionError("ava_calibrate: empty pair list");
  auto sims = style_similarities(pairs, gateway);

  auto balanced_accuracy = [&](double threshold) {
    std::size_t tp = 0, fn = 0, tn = 0, fp = 0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      bool predicted_same = sims[i] >= threshold;
      if (pairs[i].same_author) {
        predicted_same ? ++tp : ++fn;
      } else {
        predicted_same ? ++fp : ++tn;
      }
    }
    double tpr = tp + fn == 0 ? 1.0 : static_cast<double>(tp) / (tp + fn);
    double tnr = tn + fp == 0 ? 1.0 : static_cast<double>(tn) / (tn + fp);
    return 0.5 * (tpr + tnr);
  };

  // Candidate thresholds: every observed similarity, its midpoints, and the
  // degenerate bounds.
  std::vector<double> candidates(sims);
  std::sort(candidates.begin(), candidates.end());
  std::vector<double> sweep = {-1.0, 1.0 + 1e-9};
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    sweep.push_back(candidates[i]);
    if (i + 1 < candidates.size()) {
      sweep.push_back(0.5 * (candidates[i] + candidates[i + 1]));
    }
  }

  AvaCalibration best{sweep.front(), -1.0};
  for (double threshold : sweep) {
    double score = balanced_accuracy(threshold);
    if (score > best.balanced_accuracy) {
      best = {threshold, score};
    }
  }
  return best;
}

nlohmann::json AdvReport::to_json() const {
  nlohmann::json j;
  j["distances"] = distances;
  j["pca_dims"] = pca_dims;
  nlohmann::json table = nlohmann::json::object();
  for (const auto& [pct, value] : percentiles) {
    table[std::to_string(pct)] = value;
  }
  j["percentiles"] = table;
  return j;
}

std::string concat_user_utterances(const Dialogue& d) {
  std::string out;
  for (const auto& t : d.turns) {
    if (t.role != Role::User) continue;
    if (!out.empty()) out += '\n';
    out += t.text;
  }
  return out;
}

AdvReport adv(const std::vector<Dialogue>& generated,
              const std::vector<Dialogue>& targets, std::size_t dims,
              const Gateway& gateway) {
  if (generated.size() != targets.size()) {
    throw PreconditionError("adv: generated and target lists differ in length");
  }
  if (generated.size() < 2) {
    throw PreconditionError("adv: need at least 2 dialogue pairs");
  }

  std::vector<std::string> texts;
  texts.reserve(generated.size() * 2);
  for (const auto& d : generated) texts.push_back(concat_user_utterances(d));
  for (const auto& d : targets) texts.push_back(concat_user_utterances(d));
  auto vectors = gateway.embed(texts, Channel::Semantic);

  const std::size_t dim = vectors.front().values.size();
  if (dims > dim) {
    throw PreconditionError("adv: dims exceeds embedding dimension");
  }

  Matrix all(vectors.size(), dim);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    std::copy(vectors[i].values.begin(), vectors[i].values.end(),
              all.row(i).begin());
  }

  auto model = numeric::fit_pca(all, dims);  // throws DegenerateCovarianceError
  Matrix reduced = numeric::pca_transform(model, all);

  AdvReport report;
  report.pca_dims = dims;
  const std::size_t n = generated.size();
  report.distances.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    report.distances[i] =
        numeric::euclidean_distance(reduced.row(i), reduced.row(n + i));
  }

  std::vector<double> sorted(report.distances);
  std::sort(sorted.begin(), sorted.end());
  for (int pct = 5; pct <= 95; pct += 5) {
    double rank = pct / 100.0 * static_cast<double>(sorted.size() - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(rank));
    std::size_t hi = static_cast<std::size_t>(std::ceil(rank));
    double frac = rank - static_cast<double>(lo);
    report.percentiles[pct] = sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
  }
  return report;
}

bool is_gratitude_turn(const std::string& turn_text,
                       const std::vector<std::string>& lexicon) {
  std::string lowered = text::lowercase(text::trim(turn_text));
  for (const auto& phrase : lexicon) {
    if (lowered.find(phrase) != std::string::npos) return true;
  }
  return false;
}

EarlyStopDetector::EarlyStopDetector(EsrConfig config)
    : config_(std::move(config)) {}

void EarlyStopDetector::reset() {
  recent_.clear();
  flagged_ = false;
}

bool EarlyStopDetector::push_user_turn(const std::string& turn_text) {
  if (flagged_) return true;
  recent_.push_back(turn_text);
  if (recent_.size() > static_cast<std::size_t>(config_.window)) {
    recent_.pop_front();
  }
  if (recent_.size() < static_cast<std::size_t>(config_.window)) return false;

  bool all_gratitude = true;
  for (const auto& turn : recent_) {
    if (!is_gratitude_turn(turn, config_.gratitude_lexicon)) {
      all_gratitude = false;
      break;
    }
  }

  bool all_repetitive = true;
  for (std::size_t i = 1; i < recent_.size(); ++i) {
    double sim = numeric::normalized_edit_similarity(
        text::lowercase(recent_[i - 1]), text::lowercase(recent_[i]));
    if (sim < config_.similarity_threshold) {
      all_repetitive = false;
      break;
    }
  }

  flagged_ = all_gratitude || all_repetitive;
  return flagged_;
}

nlohmann::json EsrReport::to_json() const {
  return {{"flagged_ids", flagged_ids},
          {"rate", rate},
          {"evaluated", evaluated}};
}

EsrReport esr(const std::vector<Dialogue>& dialogues, const EsrConfig& config) {
  if (dialogues.empty()) throw PreconditionError("esr: empty dialogue list");

  EsrReport report;
  report.evaluated = dialogues.size();
  std::vector<char> flags(dialogues.size(), 0);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(dialogues.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    EarlyStopDetector detector(config);
    for (const auto& t : dialogues[static_cast<std::size_t>(i)].turns) {
      if (t.role != Role::User) continue;
      if (detector.push_user_turn(t.text)) break;
    }
    flags[static_cast<std::size_t>(i)] = detector.flagged() ? 1 : 0;
  }
  for (std::size_t i = 0; i < dialogues.size(); ++i) {
    if (flags[i]) report.flagged_ids.push_back(dialogues[i].id);
  }
  report.rate = 100.0 * static_cast<double>(report.flagged_ids.size()) /
                static_cast<double>(dialogues.size());
  return report;
}

}  // namespace usp
