#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "usp/corpus.hpp"
#include "usp/extractor.hpp"
#include "usp/gateway.hpp"
#include "usp/metrics_authenticity.hpp"

namespace usp {

/// Role-play seeding: the profile goes into the user simulator's system
/// prompt and the opening query is elicited with a fixed bootstrap question.
struct ProfileSeeded {
  UserProfile profile;
};

/// Continuation seeding: the golden first user turn opens the dialogue and the
/// simulator continues from it.
struct ContextSeeded {
  std::string opening_user_turn;
};

struct SimulationConfig {
  int turn_limit = 10;
  int token_budget = 4096;
  std::variant<ProfileSeeded, ContextSeeded> seed_mode;
  bool early_stop_enabled = true;
  std::uint64_t rng_seed = 0;
  TokenCounter token_counter;  // default_token_counter() when unset
  EsrConfig early_stop;
};

enum class StopReason { TurnLimit, TokenBudget, EarlyStop, BackendError };

std::string stop_reason_name(StopReason reason);

struct SimulatedDialogue {
  Dialogue dialogue;
  StopReason stop_reason = StopReason::TurnLimit;
  std::vector<double> turn_latencies_ms;
  std::string error;  // non-empty when stop_reason == BackendError
};

/// Drives one user<->assistant dialogue as a state machine. Stop conditions
/// are checked in the fixed order EarlyStop, TokenBudget, TurnLimit; the turn
/// that would exceed the token budget is not emitted. Backend failures return
/// the dialogue built so far with stop_reason BackendError.
SimulatedDialogue simulate(const SimulationConfig& config, Backend& user_backend,
                           Backend& assistant_backend);

struct SimulationBackends {
  std::shared_ptr<Backend> user;
  std::shared_ptr<Backend> assistant;
};

/// One simulation per profile, order-aligned; failures are isolated per item.
std::vector<SimulatedDialogue> run_batch(const std::vector<UserProfile>& profiles,
                                         const SimulationConfig& config,
                                         const SimulationBackends& backends,
                                         std::size_t parallelism = 4);

/// System prompt placed on the role-play user backend: the profile narrative
/// followed by the standing permission to improvise.
std::string profile_system_prompt(const UserProfile& profile);

/// Verbatim bootstrap question that elicits the opening user utterance.
inline constexpr const char* kBootstrapQuestion =
    "What will you say to start the conversation?";

/// System prompt used in context-seeded mode.
inline constexpr const char* kContextSeededSystemPrompt =
    "A chat between a curious human and an artificial intelligence assistant. "
    "The human can ask follow-up or new questions without prior context.";

}  // namespace usp
