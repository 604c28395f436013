#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace usp {

enum class Role { User, Assistant };

std::string role_name(Role role);
std::optional<Role> role_from_name(const std::string& name);

struct Turn {
  Role role = Role::User;
  std::string text;
  int index = 0;
};

/// One conversation. Roles strictly alternate and a full dialogue starts with
/// a user turn; a truncated segment produced by segment_dialogue may instead
/// start with the assistant turn that answered the previous segment.
struct Dialogue {
  std::string id;
  std::vector<Turn> turns;
  std::map<std::string, std::string> meta;

  std::size_t user_turn_count() const;
  std::vector<std::string> user_texts() const;
};

struct Corpus {
  std::vector<Dialogue> dialogues;
  int token_budget = 4096;
};

/// Pluggable token counting. The default is a cheap deterministic proxy:
/// whitespace-delimited word count times 1.3, rounded up.
using TokenCounter = std::function<int(const std::string&)>;
TokenCounter default_token_counter();
int count_dialogue_tokens(const Dialogue& d, const TokenCounter& counter);

enum class CorpusFormat { Jsonl };

struct ParseIssue {
  std::size_t line = 0;
  std::string message;
};

struct LoadReport {
  std::vector<ParseIssue> errors;
  bool ok() const { return errors.empty(); }
};

/// Reads one conversation per line:
///   {"id": str, "messages": [{"role": "user"|"assistant", "content": str}], "meta": {...}}
/// Malformed lines are recorded in `report` instead of being silently dropped.
/// Throws IoError when the file cannot be read and EmptyCorpusError when no
/// valid dialogue was found.
Corpus load_dialogues(const std::filesystem::path& path, CorpusFormat format,
                      LoadReport* report = nullptr);

nlohmann::json dialogue_to_json(const Dialogue& d);
Dialogue dialogue_from_json(const nlohmann::json& record);

/// Writes the corpus in the JSONL format accepted by load_dialogues. When
/// `header` is non-null it is emitted first as {"_header": ...}; readers skip
/// that record.
void save_dialogues(const Corpus& corpus, const std::filesystem::path& path,
                    const nlohmann::json* header = nullptr);

/// Keeps the first of every group of dialogues whose (role, text) sequence is
/// byte-identical; order otherwise preserved. Idempotent.
Corpus dedup_exact(const Corpus& corpus);

/// Greedy left-to-right packing of whole turns into segments of at most
/// token_budget tokens. Whenever a budget boundary would start a segment with
/// a user turn, the previous assistant turn is moved to the new segment head,
/// so every non-first segment begins with an assistant turn and concatenating
/// the segments reproduces the original turn sequence exactly.
/// Throws TurnTooLongError when a single turn exceeds the budget.
std::vector<Dialogue> segment_dialogue(const Dialogue& d, int token_budget,
                                       const TokenCounter& counter);

struct FilterHook {
  std::string name;
  std::function<bool(const Dialogue&)> keep;
};

/// Dialogues surviving all hooks, order preserved. The default hook list is
/// empty (pass-through); language and toxicity classifiers plug in here.
Corpus apply_filters(const Corpus& corpus, const std::vector<FilterHook>& hooks);

}  // namespace usp
