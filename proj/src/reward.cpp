#include "usp/reward.hpp"

#include <fstream>

#include "usp/errors.hpp"
#include "usp/numeric/kernels.hpp"

namespace usp {

using nlohmann::json;

double cycle_reward(const UserProfile& target, const Dialogue& simulated,
                    const ProfileExtractorFn& extractor, const Gateway& gateway) {
  if (simulated.user_turn_count() == 0) {
    throw PreconditionError("cycle_reward: simulated dialogue has no user turn");
  }
  UserProfile reflected;
  try {
    reflected = extractor(simulated);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ExtractionError(std::string("reflected-profile extraction failed: ") +
                          e.what());
  }
  auto vectors = gateway.embed(
      {full_narrative(target), full_narrative(reflected)}, Channel::Semantic);
  return numeric::cosine_similarity(vectors[0].values, vectors[1].values);
}

double ai_reward(const std::string& utterance, const Gateway& gateway,
                 AiRewardOrientation orientation) {
  if (utterance.empty()) {
    throw PreconditionError("ai_reward: empty utterance");
  }
  double detected = gateway.ai_detect(utterance);
  return orientation == AiRewardOrientation::HumanRewarding ? 1.0 - detected
                                                            : detected;
}

double combine(double r_cc, double r_ai, double lambda) {
  if (lambda < 0.0 || lambda > 1.0) {
    throw PreconditionError("lambda must be in [0, 1]");
  }
  return lambda * r_cc + (1.0 - lambda) * r_ai;
}

RolloutResult rollout(const UserProfile& profile, const SimulationConfig& config,
                      const SimulationBackends& backends, const Gateway& gateway,
                      const ProfileExtractorFn& extractor, double lambda,
                      AiRewardOrientation orientation) {
  if (lambda < 0.0 || lambda > 1.0) {
    throw PreconditionError("lambda must be in [0, 1]");
  }
  if (profile.narrative_of.empty() && profile.narrative_sc.empty()) {
    throw PreconditionError("rollout: profile narratives are empty");
  }

  SimulationConfig item_config = config;
  item_config.seed_mode = ProfileSeeded{profile};

  RolloutResult result;
  result.target_profile = profile;
  result.simulated =
      simulate(item_config, *backends.user, *backends.assistant);
  result.complete = result.simulated.stop_reason != StopReason::BackendError;

  if (result.simulated.dialogue.user_turn_count() == 0) {
    // Nothing to reward; a dialogue that died before its first user turn.
    return result;
  }

  UserProfile reflected;
  try {
    reflected = extractor(result.simulated.dialogue);
  } catch (const std::exception& e) {
    throw ExtractionError(std::string("reflected-profile extraction failed: ") +
                          e.what());
  }
  result.reflected_profile = reflected;

  auto vectors = gateway.embed(
      {full_narrative(profile), full_narrative(reflected)}, Channel::Semantic);
  // Dialogue-level reward, attributed uniformly to every user turn.
  const double r_cc =
      numeric::cosine_similarity(vectors[0].values, vectors[1].values);

  int user_index = 0;
  for (const auto& turn : result.simulated.dialogue.turns) {
    if (turn.role != Role::User) continue;
    RewardRecord record;
    record.dialogue_id = result.simulated.dialogue.id;
    record.turn_index = user_index++;
    record.r_cc = r_cc;
    record.r_ai = ai_reward(turn.text, gateway, orientation);
    record.lambda = lambda;
    record.r = combine(record.r_cc, record.r_ai, lambda);
    result.records.push_back(std::move(record));
  }
  return result;
}

std::size_t emit_dataset(const std::vector<RolloutResult>& results,
                         const std::filesystem::path& path,
                         const nlohmann::json* header) {
  if (results.empty()) {
    throw PreconditionError("emit_dataset: empty result list");
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  if (header != nullptr) {
    out << json{{"_header", *header}}.dump() << "\n";
  }

  std::size_t count = 0;
  for (const auto& result : results) {
    // Per-record context: the turns preceding the rewarded utterance.
    std::vector<std::pair<int, std::size_t>> user_turn_positions;
    for (std::size_t i = 0; i < result.simulated.dialogue.turns.size(); ++i) {
      if (result.simulated.dialogue.turns[i].role == Role::User) {
        user_turn_positions.emplace_back(
            static_cast<int>(user_turn_positions.size()), i);
      }
    }
    for (const auto& record : result.records) {
      std::size_t position = user_turn_positions[record.turn_index].second;
      json context = json::array();
      for (std::size_t i = 0; i < position; ++i) {
        const auto& t = result.simulated.dialogue.turns[i];
        context.push_back(
            {{"role", role_name(t.role)}, {"content", t.text}});
      }
      json line;
      line["dialogue_id"] = record.dialogue_id;
      line["turn"] = record.turn_index;
      line["context"] = std::move(context);
      line["utterance"] = result.simulated.dialogue.turns[position].text;
      line["r_cc"] = record.r_cc;
      line["r_ai"] = record.r_ai;
      line["r"] = record.r;
      line["lambda"] = record.lambda;
      out << line.dump() << "\n";
      ++count;
    }
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
  return count;
}

}  // namespace usp
