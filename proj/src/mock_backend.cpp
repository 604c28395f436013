#include "usp/mock_backend.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "usp/errors.hpp"
#include "usp/text.hpp"

namespace usp {

using nlohmann::json;

namespace {

constexpr std::uint64_t kSemanticChannelSalt = 0x53454d414e544943ull;
constexpr std::uint64_t kStyleChannelSalt = 0x5354594c45000000ull;

std::string prompt_text(const ChatRequest& request) {
  std::string all;
  if (request.system) {
    all += *request.system;
    all += '\n';
  }
  for (const auto& m : request.messages) {
    all += m.text;
    all += '\n';
  }
  return all;
}

/// Text of the "### name" section of a rendered prompt, up to the next
/// section header (or the end).
std::string section(const std::string& prompt, const std::string& name) {
  const std::string marker = "### " + name;
  auto pos = prompt.find(marker);
  if (pos == std::string::npos) return "";
  pos += marker.size();
  auto end = prompt.find("\n### ", pos);
  std::string body = end == std::string::npos ? prompt.substr(pos)
                                              : prompt.substr(pos, end - pos);
  return text::trim(body);
}

std::vector<std::string> keywords_of(const std::string& s) {
  auto words = text::content_words(s);
  if (words.empty()) words = {"general", "topics"};
  // unique, first occurrence wins
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (auto& w : words) {
    if (seen.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

std::string pick(const std::vector<std::string>& items, std::uint64_t h) {
  return items[h % items.size()];
}

std::vector<std::string> split_sentences(const std::string& body) {
  std::vector<std::string> sentences;
  std::string current;
  for (char ch : body) {
    current.push_back(ch);
    if (ch == '.' || ch == '!' || ch == '?') {
      auto s = text::trim(current);
      if (!s.empty()) sentences.push_back(s);
      current.clear();
    }
  }
  auto tail = text::trim(current);
  if (!tail.empty()) sentences.push_back(tail);
  return sentences;
}

std::string scene_consistent_reply(const std::string& dialogue,
                                   std::uint64_t seed) {
  auto kws = keywords_of(dialogue);
  std::uint64_t h = text::fnv1a64(dialogue) ^ seed;
  json reply = {
      {"gender", json::array()},
      {"age", json::array()},
      {"location", json::array()},
      {"occupation",
       {"Works or studies in an area involving " + pick(kws, h) + "."}},
      {"education", json::array()},
      {"family_relationships", json::array()},
      {"routines_or_habits",
       {"Regularly spends time on " + pick(kws, h >> 7) + "."}},
      {"social_relationships", json::array()},
      {"language_style", {"Concise and task-oriented"}},
      {"other_experiences", json::array()},
  };
  return reply.dump();
}

std::string scene_related_reply(const std::string& dialogue,
                                std::uint64_t seed) {
  auto kws = keywords_of(dialogue);
  std::uint64_t h = text::fnv1a64(dialogue) ^ seed;
  json reply = {
      {"scenarios",
       {{{"goals_or_plans",
          "Wants practical help with " + pick(kws, h) + "."},
         {"task_details",
          {"Asked specific questions about " + pick(kws, h >> 11) + "."}}}}},
  };
  return reply.dump();
}

std::string personality_reply(const std::string& dialogue, std::uint64_t seed) {
  static const std::array<const char*, 5> kTraits = {
      "Openness", "Conscientiousness", "Extraversion", "Agreeableness",
      "Neuroticism"};
  static const std::array<const char*, 5> kDescriptors = {
      "curious", "methodical", "outgoing", "considerate", "easily stressed"};
  auto kws = keywords_of(dialogue);
  json reply = json::object();
  for (std::size_t i = 0; i < kTraits.size(); ++i) {
    std::uint64_t h = text::fnv1a64(dialogue + kTraits[i]) ^ seed;
    const char* score = (h % 4 <= 1) ? "High" : (h % 4 == 2 ? "Low" : "Inconclusive");
    json entry = {{"score", score}};
    if (std::string(score) != "Inconclusive") {
      entry["conclusion"] = std::string("The user is a ") + kDescriptors[i] +
                            " person in how they approach " + pick(kws, h >> 3) +
                            ".";
      entry["reason"] = "Inferred from how the user discusses " +
                        pick(kws, h >> 9) + " across the dialogue.";
    }
    reply[kTraits[i]] = std::move(entry);
  }
  return reply.dump();
}

std::string polish_reply(const std::string& attributes) {
  std::vector<std::string> facts;
  std::vector<std::string> traits;
  json attrs;
  try {
    attrs = json::parse(attributes);
  } catch (const json::exception&) {
    attrs = json::object();
  }
  if (attrs.contains("scene_consistent")) {
    for (const auto& [key, values] : attrs.at("scene_consistent").items()) {
      for (const auto& v : values) {
        if (key == "language_style") {
          traits.push_back(v.get<std::string>());
        } else {
          facts.push_back(v.get<std::string>());
        }
      }
    }
  }
  if (attrs.contains("scene_related")) {
    for (const auto& scenario : attrs.at("scene_related")) {
      if (scenario.contains("goals_or_plans")) {
        facts.push_back(scenario.at("goals_or_plans").get<std::string>());
      }
      for (const auto& task : scenario.value("task_details", json::array())) {
        facts.push_back(task.get<std::string>());
      }
    }
  }
  if (attrs.contains("big_five")) {
    for (const auto& [trait, entry] : attrs.at("big_five").items()) {
      if (entry.contains("conclusion")) {
        traits.push_back(entry.at("conclusion").get<std::string>());
      }
    }
  }

  std::string first = "You are someone seeking practical help.";
  if (!facts.empty()) {
    first = "You are described as follows.";
    for (const auto& f : facts) {
      first += " ";
      first += f;
      if (first.back() != '.') first += '.';
    }
  }
  std::string second = "You communicate in a direct, friendly way.";
  if (!traits.empty()) {
    second = "Your manner comes through clearly.";
    for (const auto& t : traits) {
      second += " ";
      second += t;
      if (second.back() != '.') second += '.';
    }
  }
  return first + "\n\n" + second;
}

std::string nli_reply(const std::string& prompt) {
  std::string source = text::normalize_ws(section(prompt, "Source"));
  std::string target = text::normalize_ws(section(prompt, "Target"));
  bool consistent =
      !target.empty() && source.find(target) != std::string::npos;
  json reply = {
      {"score", consistent ? 1 : 0},
      {"reason", consistent ? "The target text occurs verbatim in the source."
                            : "The target text does not occur in the source."},
  };
  return reply.dump();
}

std::string decomposition_reply(const std::string& prompt) {
  auto sentences = split_sentences(section(prompt, "Text"));
  return json(sentences).dump();
}

std::string judge_reply(const std::string& prompt) {
  auto source_words = text::content_words(section(prompt, "Source"));
  auto target_words = text::content_words(section(prompt, "Target"));
  std::unordered_set<std::string> source_set(source_words.begin(),
                                             source_words.end());
  double hits = 0.0;
  for (const auto& w : target_words) {
    if (source_set.count(w)) hits += 1.0;
  }
  double frac = target_words.empty() ? 0.0 : hits / target_words.size();
  int score = 1 + static_cast<int>(frac * 4.0 + 0.5);
  score = std::clamp(score, 1, 5);
  json reply = {{"score", score},
                {"reason", "Scored by lexical overlap between target and source."}};
  return reply.dump();
}

const std::array<const char*, 6> kUserTemplates = {
    "hi, i could use some help with %1 today.",
    "can you explain more about %1? i'm not sure i follow.",
    "what would you suggest for someone dealing with %1 and %2?",
    "ok. how does that interact with %2 in practice?",
    "could you walk me through a concrete example involving %1?",
    "one more thing before we wrap up: is there a quicker way to handle %2?",
};

const std::array<const char*, 4> kAssistantTemplates = {
    "Here's a practical way to approach %1: start with the basics of %2, then "
    "iterate on what works for you.",
    "Good question. The key point about %1 is that it interacts with %2, so "
    "plan for both.",
    "There are a few options for %1. A common route is to lean on %2 and "
    "review the outcome as you go.",
    "To summarize %1: focus on %2 first, measure the result, and adjust.",
};

std::string fill(std::string tpl, const std::string& a, const std::string& b) {
  auto replace_all = [](std::string& s, const std::string& from,
                        const std::string& to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
      s.replace(pos, from.size(), to);
      pos += to.size();
    }
  };
  replace_all(tpl, "%1", a);
  replace_all(tpl, "%2", b);
  return tpl;
}

std::string user_turn_reply(const ChatRequest& request, std::uint64_t seed) {
  // The user simulator sees its own past utterances as "assistant" turns;
  // their count tells us which user turn to produce next.
  std::size_t produced = 0;
  for (const auto& m : request.messages) {
    if (m.role == "assistant") ++produced;
  }
  std::string profile = request.system.value_or("");
  auto kws = keywords_of(profile);
  std::uint64_t h =
      text::fnv1a64(profile) ^ seed ^ (0x9e37ull * (produced + 1));
  std::string a = pick(kws, h);
  std::string b = pick(kws, h >> 17);
  return fill(kUserTemplates[produced % kUserTemplates.size()], a, b);
}

std::string assistant_reply(const ChatRequest& request, std::uint64_t seed) {
  std::string last_user;
  for (const auto& m : request.messages) {
    if (m.role == "user") last_user = m.text;
  }
  auto kws = keywords_of(last_user);
  std::uint64_t h = text::fnv1a64(last_user) ^ seed;
  std::string a = pick(kws, h);
  std::string b = pick(kws, h >> 13);
  std::size_t turn = request.messages.size() / 2;
  return fill(kAssistantTemplates[turn % kAssistantTemplates.size()], a, b);
}

}  // namespace

MockBackend::MockBackend(std::uint64_t seed, std::size_t dim)
    : seed_(seed), dim_(dim) {
  if (dim_ == 0) throw PreconditionError("mock embedding dim must be positive");
}

MockBackend MockBackend::from_endpoint(const std::string& endpoint) {
  std::uint64_t seed = 0;
  std::size_t dim = 64;
  auto params = endpoint.substr(std::string("mock:").size());
  std::stringstream ss(params);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) continue;
    auto key = item.substr(0, eq);
    auto value = item.substr(eq + 1);
    if (key == "seed") seed = std::stoull(value);
    if (key == "dim") dim = std::stoul(value);
  }
  return MockBackend(seed, dim);
}

std::string MockBackend::complete(const ChatRequest& request) {
  if (request.messages.empty()) {
    throw PreconditionError("chat request has no messages");
  }
  const std::string prompt = prompt_text(request);
  const std::uint64_t seed = request.seed.value_or(seed_);

  if (prompt.find("User Persona Analysis Task") != std::string::npos &&
      prompt.find("\"gender\"") != std::string::npos) {
    return scene_consistent_reply(section(prompt, "Dialogue"), seed);
  }
  if (prompt.find("\"scenarios\"") != std::string::npos) {
    return scene_related_reply(section(prompt, "Dialogue"), seed);
  }
  if (prompt.find("5 personality dimensions") != std::string::npos) {
    return personality_reply(section(prompt, "Dialogue"), seed);
  }
  if (prompt.find("Narrative Generation Objective") != std::string::npos) {
    return polish_reply(section(prompt, "Attributes"));
  }
  if (prompt.find("Score 1: The Target is consistent with the Source") !=
      std::string::npos) {
    return nli_reply(prompt);
  }
  if (prompt.find("Decompose the following text into atomic facts") !=
      std::string::npos) {
    return decomposition_reply(prompt);
  }
  if (prompt.find("Human-Likeness") != std::string::npos ||
      prompt.find("rate this consistency on a scale from 1 to 5") !=
          std::string::npos) {
    return judge_reply(prompt);
  }

  const std::string system = request.system.value_or("");
  bool simulating_user =
      system.find("You are engaging in a conversation with an AI assistant") !=
          std::string::npos ||
      system.find("A chat between a curious human") != std::string::npos ||
      prompt.find("What will you say to start the conversation?") !=
          std::string::npos;
  if (simulating_user) return user_turn_reply(request, seed);
  return assistant_reply(request, seed);
}

EmbeddingVector MockBackend::embed_one(const std::string& input,
                                       Channel channel) const {
  std::uint64_t channel_salt =
      channel == Channel::Semantic ? kSemanticChannelSalt : kStyleChannelSalt;
  std::vector<double> acc(dim_, 0.0);

  auto add_gram = [&](std::string_view gram, double weight) {
    text::SplitMix64 rng((text::fnv1a64(gram) ^ seed_) + channel_salt);
    for (std::size_t j = 0; j < dim_; ++j) {
      acc[j] += weight * (rng.next_double() * 2.0 - 1.0);
    }
  };

  if (input.size() < 3) {
    add_gram(input, 1.0);
  } else {
    for (std::size_t i = 0; i + 3 <= input.size(); ++i) {
      add_gram(std::string_view(input).substr(i, 3), 1.0);
    }
  }

  double norm = 0.0;
  for (double v : acc) norm += v * v;
  norm = std::sqrt(norm);
  if (norm > 0.0) {
    for (auto& v : acc) v /= norm;
  }
  return EmbeddingVector{std::move(acc), channel, true};
}

std::vector<EmbeddingVector> MockBackend::embed(
    const std::vector<std::string>& texts, Channel channel) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_one(t, channel));
  return out;
}

double MockBackend::ai_detect(const std::string& input) {
  return input.find("AI_STYLE") != std::string::npos ? 0.9 : 0.1;
}

ScriptedBackend::ScriptedBackend(std::vector<std::string> replies, bool cycle,
                                 std::uint64_t seed, std::size_t dim)
    : replies_(std::move(replies)), cycle_(cycle), fallback_(seed, dim) {}

std::string ScriptedBackend::complete(const ChatRequest& request) {
  if (request.messages.empty()) {
    throw PreconditionError("chat request has no messages");
  }
  if (replies_.empty()) throw BackendError("scripted backend has no replies");
  if (next_ >= replies_.size()) {
    if (!cycle_) throw BackendError("scripted backend exhausted");
    next_ = 0;
  }
  return replies_[next_++];
}

std::vector<EmbeddingVector> ScriptedBackend::embed(
    const std::vector<std::string>& texts, Channel channel) {
  return fallback_.embed(texts, channel);
}

double ScriptedBackend::ai_detect(const std::string& input) {
  return fallback_.ai_detect(input);
}

}  // namespace usp
