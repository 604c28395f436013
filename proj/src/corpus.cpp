#include "usp/corpus.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "usp/errors.hpp"

namespace usp {

namespace {

std::string trim(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r\n\f\v");
  if (begin == std::string::npos) return "";
  auto end = s.find_last_not_of(" \t\r\n\f\v");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

std::string role_name(Role role) {
  return role == Role::User ? "user" : "assistant";
}

std::optional<Role> role_from_name(const std::string& name) {
  if (name == "user") return Role::User;
  if (name == "assistant") return Role::Assistant;
  return std::nullopt;
}

std::size_t Dialogue::user_turn_count() const {
  std::size_t n = 0;
  for (const auto& t : turns) {
    if (t.role == Role::User) ++n;
  }
  return n;
}

std::vector<std::string> Dialogue::user_texts() const {
  std::vector<std::string> out;
  for (const auto& t : turns) {
    if (t.role == Role::User) out.push_back(t.text);
  }
  return out;
}

TokenCounter default_token_counter() {
  return [](const std::string& text) {
    std::istringstream in(text);
    std::string word;
    int words = 0;
    while (in >> word) ++words;
    return static_cast<int>(std::ceil(words * 1.3));
  };
}

int count_dialogue_tokens(const Dialogue& d, const TokenCounter& counter) {
  int total = 0;
  for (const auto& t : d.turns) total += counter(t.text);
  return total;
}

nlohmann::json dialogue_to_json(const Dialogue& d) {
  nlohmann::json record;
  record["id"] = d.id;
  auto messages = nlohmann::json::array();
  for (const auto& t : d.turns) {
    messages.push_back({{"role", role_name(t.role)}, {"content", t.text}});
  }
  record["messages"] = std::move(messages);
  record["meta"] = d.meta;
  return record;
}

Dialogue dialogue_from_json(const nlohmann::json& record) {
  if (!record.is_object()) throw Error("record is not a JSON object");
  if (!record.contains("id") || !record.at("id").is_string()) {
    throw Error("record is missing a string 'id'");
  }
  if (!record.contains("messages") || !record.at("messages").is_array()) {
    throw Error("record is missing a 'messages' array");
  }

  Dialogue d;
  d.id = record.at("id").get<std::string>();
  if (record.contains("meta") && record.at("meta").is_object()) {
    for (const auto& [key, value] : record.at("meta").items()) {
      d.meta[key] = value.is_string() ? value.get<std::string>() : value.dump();
    }
  }

  int index = 0;
  for (const auto& msg : record.at("messages")) {
    if (!msg.is_object() || !msg.contains("role") || !msg.contains("content") ||
        !msg.at("role").is_string() || !msg.at("content").is_string()) {
      throw Error("malformed message in dialogue '" + d.id + "'");
    }
    auto role = role_from_name(msg.at("role").get<std::string>());
    if (!role) {
      throw Error("unknown role '" + msg.at("role").get<std::string>() +
                  "' in dialogue '" + d.id + "'");
    }
    std::string text = trim(msg.at("content").get<std::string>());
    if (text.empty()) {
      throw Error("empty turn text in dialogue '" + d.id + "'");
    }
    d.turns.push_back(Turn{*role, std::move(text), index++});
  }

  if (d.turns.empty()) throw Error("dialogue '" + d.id + "' has no turns");
  for (std::size_t i = 1; i < d.turns.size(); ++i) {
    if (d.turns[i].role == d.turns[i - 1].role) {
      throw Error("roles do not alternate in dialogue '" + d.id + "'");
    }
  }
  if (d.user_turn_count() == 0) {
    throw Error("dialogue '" + d.id + "' has no user turn");
  }
  if (d.turns.front().role != Role::User) {
    throw Error("dialogue '" + d.id + "' does not start with a user turn");
  }
  return d;
}

Corpus load_dialogues(const std::filesystem::path& path, CorpusFormat format,
                      LoadReport* report) {
  (void)format;  // jsonl is the only format
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");

  Corpus corpus;
  LoadReport local;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto record = nlohmann::json::parse(line);
      if (record.is_object() && record.contains("_header")) continue;
      Dialogue d = dialogue_from_json(record);
      if (!seen_ids.insert(d.id).second) {
        throw Error("duplicate dialogue id '" + d.id + "'");
      }
      corpus.dialogues.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      local.errors.push_back({line_no, std::string("invalid JSON: ") + e.what()});
    } catch (const Error& e) {
      local.errors.push_back({line_no, e.what()});
    }
  }

  if (report != nullptr) *report = local;
  if (corpus.dialogues.empty()) {
    throw EmptyCorpusError("no valid dialogue in '" + path.string() + "'");
  }
  return corpus;
}

void save_dialogues(const Corpus& corpus, const std::filesystem::path& path,
                    const nlohmann::json* header) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  if (header != nullptr) {
    out << nlohmann::json{{"_header", *header}}.dump() << "\n";
  }
  for (const auto& d : corpus.dialogues) {
    out << dialogue_to_json(d).dump() << "\n";
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Corpus dedup_exact(const Corpus& corpus) {
  Corpus out;
  out.token_budget = corpus.token_budget;
  std::unordered_set<std::string> seen;
  for (const auto& d : corpus.dialogues) {
    std::string key;
    for (const auto& t : d.turns) {
      key += role_name(t.role);
      key += '\x1f';
      key += t.text;
      key += '\x1e';
    }
    if (seen.insert(key).second) out.dialogues.push_back(d);
  }
  return out;
}

std::vector<Dialogue> segment_dialogue(const Dialogue& d, int token_budget,
                                       const TokenCounter& counter) {
  std::vector<int> costs(d.turns.size());
  for (std::size_t i = 0; i < d.turns.size(); ++i) {
    costs[i] = counter(d.turns[i].text);
    if (costs[i] > token_budget) {
      throw TurnTooLongError(i, "turn " + std::to_string(i) + " (" +
                                    std::to_string(costs[i]) +
                                    " tokens) exceeds budget " +
                                    std::to_string(token_budget));
    }
  }

  std::vector<std::vector<Turn>> segments;
  std::vector<Turn> current;
  int current_tokens = 0;
  for (std::size_t i = 0; i < d.turns.size(); ++i) {
    if (!current.empty() && current_tokens + costs[i] > token_budget) {
      if (d.turns[i].role == Role::User && current.size() >= 2 &&
          current.back().role == Role::Assistant &&
          costs[i - 1] + costs[i] <= token_budget) {
        // Boundary would start the next segment with a user turn: move the
        // assistant answer that precedes it to the new segment head.
        Turn carried = current.back();
        current.pop_back();
        segments.push_back(std::move(current));
        current = {std::move(carried)};
        current_tokens = costs[i - 1];
      } else {
        segments.push_back(std::move(current));
        current.clear();
        current_tokens = 0;
      }
    }
    current.push_back(d.turns[i]);
    current_tokens += costs[i];
  }
  if (!current.empty()) segments.push_back(std::move(current));

  std::vector<Dialogue> out;
  out.reserve(segments.size());
  for (std::size_t s = 0; s < segments.size(); ++s) {
    Dialogue seg;
    seg.id = segments.size() == 1 ? d.id : d.id + "#seg" + std::to_string(s);
    seg.meta = d.meta;
    if (segments.size() > 1) seg.meta["segment"] = std::to_string(s);
    seg.turns = std::move(segments[s]);
    for (std::size_t i = 0; i < seg.turns.size(); ++i) {
      seg.turns[i].index = static_cast<int>(i);
    }
    out.push_back(std::move(seg));
  }
  return out;
}

Corpus apply_filters(const Corpus& corpus, const std::vector<FilterHook>& hooks) {
  Corpus out;
  out.token_budget = corpus.token_budget;
  for (const auto& d : corpus.dialogues) {
    bool keep = true;
    for (const auto& hook : hooks) {
      try {
        if (!hook.keep(d)) {
          keep = false;
          break;
        }
      } catch (const std::exception& e) {
        throw HookFailureError(hook.name, d.id, e.what());
      }
    }
    if (keep) out.dialogues.push_back(d);
  }
  return out;
}

}  // namespace usp
