#pragma once

#include <deque>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "usp/corpus.hpp"
#include "usp/gateway.hpp"

namespace usp {

struct SimilarityScore {
  double value = 0.0;  // cosine in [-1, 1]
  Channel channel = Channel::Semantic;
};

/// Cosine similarity of the semantic embeddings of two texts.
SimilarityScore sem_sim(const std::string& a, const std::string& b,
                        const Gateway& gateway);

/// Cosine similarity on the style channel.
SimilarityScore style_sim(const std::string& a, const std::string& b,
                          const Gateway& gateway);

struct AuthorPair {
  std::string a;
  std::string b;
  bool same_author = false;
};

/// Author verification accuracy: predict same-author iff style similarity is
/// at or above the threshold; returns the fraction of correct predictions.
double ava(const std::vector<AuthorPair>& pairs, double threshold,
           const Gateway& gateway);

struct AvaCalibration {
  double threshold = 0.0;
  double balanced_accuracy = 0.0;
};

/// Sweeps candidate thresholds over a labeled set and returns the
/// balanced-accuracy-maximizing one.
AvaCalibration ava_calibrate(const std::vector<AuthorPair>& pairs,
                             const Gateway& gateway);

struct AdvReport {
  std::vector<double> distances;        // one per (generated, target) pair
  std::map<int, double> percentiles;    // 5, 10, ..., 95 -> distance
  std::size_t pca_dims = 2;

  nlohmann::json to_json() const;
};

/// Absolute difference value: embeds each dialogue's concatenated user
/// utterances, fits PCA on the union of both sets, reduces to `dims`, and
/// reports the per-pair Euclidean distances plus their percentile table.
AdvReport adv(const std::vector<Dialogue>& generated,
              const std::vector<Dialogue>& targets, std::size_t dims,
              const Gateway& gateway);

struct EsrConfig {
  double similarity_threshold = 0.9;  // consecutive near-duplicate user turns
  int window = 3;
  std::vector<std::string> gratitude_lexicon = {
      "thank", "thanks", "thank you", "appreciate it", "much appreciated"};
};

struct EsrReport {
  std::vector<std::string> flagged_ids;
  double rate = 0.0;  // percentage of evaluated dialogues flagged
  std::size_t evaluated = 0;

  nlohmann::json to_json() const;
};

/// Streaming premature-ending detector: fires when `window` consecutive user
/// turns all match the gratitude lexicon, or when the pairwise-consecutive
/// normalized edit similarity inside the window stays at or above the
/// threshold. Used both for corpus-level ESR and, during simulation, as the
/// early-stop rule.
class EarlyStopDetector {
 public:
  explicit EarlyStopDetector(EsrConfig config = {});

  /// Feed the next user turn; returns true when the dialogue is flagged.
  bool push_user_turn(const std::string& turn_text);
  bool flagged() const { return flagged_; }
  void reset();

 private:
  EsrConfig config_;
  std::deque<std::string> recent_;
  bool flagged_ = false;
};

bool is_gratitude_turn(const std::string& turn_text,
                       const std::vector<std::string>& lexicon);

/// Early stop rate over a corpus of dialogues.
EsrReport esr(const std::vector<Dialogue>& dialogues, const EsrConfig& config = {});

/// User utterances joined by newlines; the unit embedded for dialogue-level
/// similarity.
std::string concat_user_utterances(const Dialogue& d);

}  // namespace usp
