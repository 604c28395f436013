#include "usp/simulator.hpp"

#include <chrono>
#include <iomanip>
#include <sstream>
#include <thread>

#include "usp/errors.hpp"
#include "usp/text.hpp"

namespace usp {

std::string stop_reason_name(StopReason reason) {
  switch (reason) {
    case StopReason::TurnLimit: return "turn_limit";
    case StopReason::TokenBudget: return "token_budget";
    case StopReason::EarlyStop: return "early_stop";
    case StopReason::BackendError: return "backend_error";
  }
  return "unknown";
}

std::string profile_system_prompt(const UserProfile& profile) {
  return "You are engaging in a conversation with an AI assistant. Your "
         "profile is:\n\n" +
         profile.narrative_of + "\n\n" + profile.narrative_sc +
         " You can say anything you want, either based on the profile or "
         "something brand new.";
}

namespace {

class StopwatchMs {
 public:
  StopwatchMs() : start_(std::chrono::steady_clock::now()) {}
  double elapsed() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::string short_hash(const std::string& s) {
  std::ostringstream out;
  out << std::hex << std::setw(8) << std::setfill('0')
      << static_cast<std::uint32_t>(text::fnv1a64(s) & 0xffffffffu);
  return out.str();
}

struct Transcript {
  std::vector<ChatMessage> as_is;     // user/assistant roles as recorded
  std::vector<ChatMessage> flipped;   // the user simulator's point of view

  void push_user(const std::string& text) {
    as_is.push_back({"user", text});
    flipped.push_back({"assistant", text});
  }
  void push_assistant(const std::string& text) {
    as_is.push_back({"assistant", text});
    flipped.push_back({"user", text});
  }
};

}  // namespace

SimulatedDialogue simulate(const SimulationConfig& config, Backend& user_backend,
                           Backend& assistant_backend) {
  if (config.turn_limit < 1) {
    throw PreconditionError("turn_limit must be >= 1");
  }
  if (config.token_budget < 1) {
    throw PreconditionError("token_budget must be >= 1");
  }
  TokenCounter counter =
      config.token_counter ? config.token_counter : default_token_counter();

  SimulatedDialogue result;
  Transcript transcript;
  EarlyStopDetector detector(config.early_stop);
  std::optional<std::string> system_prompt;

  if (const auto* seeded = std::get_if<ProfileSeeded>(&config.seed_mode)) {
    if (seeded->profile.narrative_of.empty() ||
        seeded->profile.narrative_sc.empty()) {
      throw PreconditionError("profile narratives must be non-empty");
    }
    system_prompt = profile_system_prompt(seeded->profile);
    result.dialogue.id = "sim-" + seeded->profile.id;
    result.dialogue.meta["profile_id"] = seeded->profile.id;
    if (seeded->profile.source_dialogue_id) {
      result.dialogue.meta["target_id"] = *seeded->profile.source_dialogue_id;
    }
    transcript.flipped.push_back({"user", kBootstrapQuestion});
  } else {
    const auto& seeded = std::get<ContextSeeded>(config.seed_mode);
    if (text::trim(seeded.opening_user_turn).empty()) {
      throw PreconditionError("context seed turn must be non-empty");
    }
    system_prompt = kContextSeededSystemPrompt;
    result.dialogue.id = "sim-ctx-" + short_hash(seeded.opening_user_turn);
    result.dialogue.meta["seed_mode"] = "context";
  }
  result.dialogue.meta["rng_seed"] = std::to_string(config.rng_seed);

  int total_tokens = 0;
  int user_turns = 0;
  int turn_index = 0;

  auto emit = [&](Role role, const std::string& text) {
    result.dialogue.turns.push_back(Turn{role, text, turn_index++});
    if (role == Role::User) {
      transcript.push_user(text);
      ++user_turns;
    } else {
      transcript.push_assistant(text);
    }
    total_tokens += counter(text);
  };

  auto call_user = [&]() {
    ChatRequest request;
    request.system = system_prompt;
    request.messages = transcript.flipped;
    request.seed = config.rng_seed;
    StopwatchMs watch;
    std::string text = user_backend.complete(request);
    result.turn_latencies_ms.push_back(watch.elapsed());
    return text;
  };
  auto call_assistant = [&]() {
    ChatRequest request;
    request.messages = transcript.as_is;
    request.seed = config.rng_seed;
    StopwatchMs watch;
    std::string text = assistant_backend.complete(request);
    result.turn_latencies_ms.push_back(watch.elapsed());
    return text;
  };

  try {
    std::string pending_user;
    if (const auto* seeded = std::get_if<ContextSeeded>(&config.seed_mode)) {
      pending_user = seeded->opening_user_turn;
    } else {
      pending_user = call_user();
    }

    for (;;) {
      // Stop checks run in fixed precedence: EarlyStop, TokenBudget, TurnLimit.
      if (total_tokens + counter(pending_user) > config.token_budget) {
        result.stop_reason = StopReason::TokenBudget;
        break;
      }
      emit(Role::User, pending_user);
      if (config.early_stop_enabled && detector.push_user_turn(pending_user)) {
        result.stop_reason = StopReason::EarlyStop;
        break;
      }

      std::string assistant_text = call_assistant();
      if (total_tokens + counter(assistant_text) > config.token_budget) {
        result.stop_reason = StopReason::TokenBudget;
        break;
      }
      emit(Role::Assistant, assistant_text);

      if (user_turns >= config.turn_limit) {
        result.stop_reason = StopReason::TurnLimit;
        break;
      }
      pending_user = call_user();
    }
  } catch (const PreconditionError&) {
    throw;
  } catch (const Error& e) {
    result.stop_reason = StopReason::BackendError;
    result.error = e.what();
  }

  result.dialogue.meta["stop_reason"] = stop_reason_name(result.stop_reason);
  return result;
}

std::vector<SimulatedDialogue> run_batch(const std::vector<UserProfile>& profiles,
                                         const SimulationConfig& config,
                                         const SimulationBackends& backends,
                                         std::size_t parallelism) {
  if (profiles.empty()) {
    throw PreconditionError("run_batch: empty profile list");
  }
  if (!backends.user || !backends.assistant) {
    throw PreconditionError("run_batch: backends must be set");
  }

  std::vector<SimulatedDialogue> results(profiles.size());
  const std::size_t workers = std::max<std::size_t>(
      1, std::min(parallelism, profiles.size()));

  auto work = [&](std::size_t worker) {
    for (std::size_t i = worker; i < profiles.size(); i += workers) {
      SimulationConfig item_config = config;
      item_config.seed_mode = ProfileSeeded{profiles[i]};
      try {
        results[i] = simulate(item_config, *backends.user, *backends.assistant);
      } catch (const std::exception& e) {
        results[i].stop_reason = StopReason::BackendError;
        results[i].error = e.what();
        results[i].dialogue.id = "sim-" + profiles[i].id;
        results[i].dialogue.meta["profile_id"] = profiles[i].id;
        results[i].dialogue.meta["stop_reason"] =
            stop_reason_name(StopReason::BackendError);
      }
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }
  return results;
}

}  // namespace usp
