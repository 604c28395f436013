#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "usp/extractor.hpp"
#include "usp/gateway.hpp"
#include "usp/simulator.hpp"

namespace usp {

inline constexpr double kDefaultLambda = 0.8;

/// Reward orientation for the AI-detection component. HumanRewarding (the
/// default) pays 1 - P(AI): the reward grows as the utterance looks more
/// human, which is what the training objective needs. DetectorRaw passes the
/// detector probability through unchanged for experiments that want the
/// literal detector output.
enum class AiRewardOrientation { HumanRewarding, DetectorRaw };

struct RewardRecord {
  std::string dialogue_id;
  int turn_index = 0;  // j-th user turn, 0-based
  double r_cc = 0.0;
  double r_ai = 0.0;
  double r = 0.0;
  double lambda = kDefaultLambda;
};

struct RolloutResult {
  UserProfile target_profile;
  SimulatedDialogue simulated;
  UserProfile reflected_profile;
  std::vector<RewardRecord> records;
  bool complete = false;  // false when the dialogue ended on a backend error
};

/// Re-extracts a profile from a dialogue; bound by the caller to the
/// extractor pipeline (gateway, prompts, seed).
using ProfileExtractorFn = std::function<UserProfile(const Dialogue&)>;

/// Cycle-consistency reward: cosine similarity (semantic channel) between the
/// full narratives of the target profile and the profile re-extracted from
/// the simulated dialogue. One value per dialogue, shared by every user turn.
double cycle_reward(const UserProfile& target, const Dialogue& simulated,
                    const ProfileExtractorFn& extractor, const Gateway& gateway);

/// AI-detection reward for one utterance.
double ai_reward(const std::string& utterance, const Gateway& gateway,
                 AiRewardOrientation orientation = AiRewardOrientation::HumanRewarding);

/// lambda * r_cc + (1 - lambda) * r_ai. Throws PreconditionError when lambda
/// is outside [0, 1].
double combine(double r_cc, double r_ai, double lambda);

/// Simulate from the profile, reflect a profile back out of the dialogue, and
/// attribute the shared cycle reward plus per-turn AI rewards to every user
/// utterance. A partial dialogue still yields records up to the failure point,
/// flagged via complete = false.
RolloutResult rollout(const UserProfile& profile, const SimulationConfig& config,
                      const SimulationBackends& backends, const Gateway& gateway,
                      const ProfileExtractorFn& extractor,
                      double lambda = kDefaultLambda,
                      AiRewardOrientation orientation = AiRewardOrientation::HumanRewarding);

/// Writes one JSONL line per RewardRecord with the dialogue context attached:
/// {"dialogue_id", "turn", "context": [...], "utterance", "r_cc", "r_ai",
///  "r", "lambda"}. Returns the record count.
std::size_t emit_dataset(const std::vector<RolloutResult>& results,
                         const std::filesystem::path& path,
                         const nlohmann::json* header = nullptr);

}  // namespace usp
