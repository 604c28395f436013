#include "usp/metrics_consistency.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "usp/errors.hpp"
#include "usp/prompts.hpp"
#include "usp/text.hpp"

namespace usp {

using nlohmann::json;

namespace {

const char* kFactDecompositionTemplate = R"(Decompose the following text into atomic facts. Each atomic fact is a single, self-contained declarative sentence stating exactly one piece of information about the user.

Output Format:
Return a JSON array of strings, one atomic fact per element.

### Text
{{text}}
)";

// Shared scoring criteria, output format, and guidelines for both NLI judges.
const char* kNliCommon = R"(
Task Instructions:
For each Source-Target pair, determine the relationship using the following scoring criteria:
- Score 1: The Target is consistent with the Source (the interpretation can be inferred from the Source).
- Score -1: The Target conflicts with the Source (the interpretation contradicts the Source).
- Score 0: The relationship is unclear or ambiguous (insufficient evidence to infer consistency or contradiction).

Output Format:
Provide your result in the following JSON format:
{
  "score": <score>,
  "reason": "<concise explanation of the reasoning>"
}

Guidelines:
1. Contextual Inference: Do not evaluate the Target in isolation. Instead, determine its logical relationship to the Source, considering both explicit statements and reasonable implications.
2. Concise & Precise Justification: The reasoning should be clear, objective, and free from unnecessary elaboration.

### Source
{{source}}

### Target
{{target}}
)";

std::string nli_profile_fact_text() {
  return std::string(
             "Role\n"
             "You are an expert in evaluating consistency between a given "
             "dialogue history (Source) and a corresponding user profile "
             "description (Target). Your task is to determine whether the "
             "Target aligns with, contradicts, or is ambiguous in relation to "
             "the Source.\n") +
         kNliCommon;
}

std::string nli_utterance_fact_text() {
  return std::string(
             "Role\n"
             "You are an expert in evaluating the consistency between a given "
             "user profile (Source) and the user's utterance (Target). Your "
             "task is to assess whether the Target aligns with, contradicts, "
             "or is ambiguous in relation to the Source.\n") +
         kNliCommon;
}

const char* kScJudgeTemplate = R"(Task Description
You are tasked with evaluating the quality of user responses in real human-LLM interactions. Specifically, you will assess the degree to which a given response (Target) aligns with a predefined personality profile, tone, and linguistic characteristics (Source). Additionally, you must consider the naturalness and authenticity of the Target, ensuring it reflects genuine human conversational patterns.

Evaluation Criteria
Your assessment will focus on two primary dimensions:
1. Human-Likeness: The extent to which Target exhibits natural human language, characterized by appropriate syntax, tone, and conversational flow.
2. Alignment with Source: The degree to which the Target adheres to the personality traits, tone, and linguistic features specified in the Source.

Scoring Guidelines
Assign a score from 1 to 5 based on the following criteria:
- Score 5: The Target fully aligns with the Source and demonstrates exceptional human-likeness.
- Score 3: The relationship between the Target and Source is ambiguous or unclear, lacking sufficient evidence for alignment or contradiction.
- Score 1: The Target significantly deviates from the Source or lacks human-likeness, rendering it unnatural or inconsistent.

Output Requirements
Provide your evaluation in the following JSON format:
{
  "score": <score>,
  "reason": "<concise reason>"
}

Key Considerations
1. Contextual Inference: Analyze both explicit content and implicit nuances in the Target to determine its alignment with the Source.
2. Conciseness and Precision: Ensure that your reasoning is clear, objective, and free of superfluous elaboration.
3. Human-Likeness Emphasis: A lack of human-likeness, even if the Target aligns with the Source, will result in a lower score.

### Source
{{source}}

### Target
{{target}}
)";

const char* kValJudgeTemplate = R"(Role
As an expert in evaluating the consistency between user utterances in a dialogue (Source) and a provided subjective description (Target), your task is to assess whether the Target accurately reflects the characteristics described in the Source, including personality traits, tone, and other relevant attributes. You will then rate this consistency on a scale from 1 to 5.

Task Instructions
For each pair of Source-Target, apply the following scoring criteria to determine their relationship:
- Score 5: The Target completely aligns with the Source, with no discrepancies. The profile perfectly represents the characteristics observed in the user's utterance.
- Score 3: Ambiguity or insufficient evidence exists, making it difficult to ascertain the relationship definitively.
- Score 1: A clear discrepancy exists, with the Target significantly deviating from the Source, indicating a mismatch in the represented characteristics.

Output Format
Your assessment should adhere to the following structured JSON format:
{
  "score": "<numerical score>",
  "reason": "<a succinct explanation providing justification for assigned score>"
}

Guidelines:
1. Contextual Inference: Determine the target's logical relationship to the Source, considering both explicit statements and reasonable implications.
2. Concise & Precise Justification: The reasoning should be clear, objective, and free from unnecessary elaboration.

### Source
{{source}}

### Target
{{target}}
)";

std::string read_file_or(const std::filesystem::path& path,
                         const std::string& fallback) {
  std::ifstream in(path);
  if (!in) return fallback;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string render_two(std::string tpl, const std::string& source,
                       const std::string& target) {
  tpl = render_template(tpl, "source", source);
  tpl = render_template(tpl, "target", target);
  return tpl;
}

}  // namespace

EvalPrompts EvalPrompts::defaults() {
  EvalPrompts p;
  p.fact_decomposition_template = kFactDecompositionTemplate;
  p.nli_profile_fact_template = nli_profile_fact_text();
  p.nli_utterance_fact_template = nli_utterance_fact_text();
  p.sc_judge_template = kScJudgeTemplate;
  p.val_judge_template = kValJudgeTemplate;
  return p;
}

EvalPrompts EvalPrompts::load_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("prompt directory '" + dir.string() + "' does not exist");
  }
  EvalPrompts p = defaults();
  p.fact_decomposition_template =
      read_file_or(dir / "fact_decomposition.txt", p.fact_decomposition_template);
  p.nli_profile_fact_template =
      read_file_or(dir / "nli_profile_fact.txt", p.nli_profile_fact_template);
  p.nli_utterance_fact_template =
      read_file_or(dir / "nli_utterance_fact.txt", p.nli_utterance_fact_template);
  p.sc_judge_template = read_file_or(dir / "sc_judge.txt", p.sc_judge_template);
  p.val_judge_template = read_file_or(dir / "val_judge.txt", p.val_judge_template);
  return p;
}

json ConsistencyReport::to_json() const {
  json j;
  j["dp_p"] = dp_p;
  j["dp_r"] = dp_r;
  j["dpc"] = dpc;
  j["precision_fact_count"] = precision_fact_count;
  j["recall_fact_count"] = recall_fact_count;
  auto dump_audit = [](const std::vector<FactAudit>& audit) {
    json arr = json::array();
    for (const auto& a : audit) {
      int score = a.verdict.raw == Verdict::Consistent
                      ? 1
                      : (a.verdict.raw == Verdict::Conflict ? -1 : 0);
      arr.push_back({{"fact", a.fact.text},
                     {"score", score},
                     {"reason", a.verdict.reason},
                     {"parse_warning", a.verdict.parse_warning}});
    }
    return arr;
  };
  j["precision_audit"] = dump_audit(precision_audit);
  j["recall_audit"] = dump_audit(recall_audit);
  return j;
}

double harmonic_mean(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  return 2.0 * a * b / (a + b);
}

std::vector<AtomicFact> decompose_facts(const std::string& profile_text,
                                        const Gateway& gateway,
                                        const EvalPrompts& prompts,
                                        std::string* raw_reply) {
  if (text::trim(profile_text).empty()) {
    throw PreconditionError("decompose_facts: empty profile text");
  }
  ChatRequest request;
  request.messages.push_back(
      {"user",
       render_template(prompts.fact_decomposition_template, "text", profile_text)});
  std::string raw = gateway.complete(request);
  if (raw_reply != nullptr) *raw_reply = raw;

  std::vector<AtomicFact> facts;
  auto push = [&facts](const std::string& s) {
    auto t = text::trim(s);
    if (!t.empty()) {
      facts.push_back(
          {t, FactOrigin::ProfileDecomposition, static_cast<int>(facts.size())});
    }
  };

  bool parsed = false;
  try {
    auto reply = json::parse(raw);
    if (reply.is_array()) {
      for (const auto& item : reply) {
        if (item.is_string()) push(item.get<std::string>());
      }
      parsed = true;
    }
  } catch (const json::exception&) {
    parsed = false;
  }
  if (!parsed) {
    // Fall back to one fact per non-empty line.
    std::istringstream in(raw);
    std::string line;
    while (std::getline(in, line)) push(line);
  }

  if (facts.empty()) {
    throw EmptyDecompositionError("no atomic facts parsed from decomposition reply");
  }
  return facts;
}

namespace {

NliVerdict parse_nli_reply(const std::string& raw) {
  NliVerdict verdict;
  verdict.raw = Verdict::Ambiguous;
  try {
    auto reply = json::parse(raw);
    verdict.reason = reply.value("reason", "");
    if (!reply.contains("score")) {
      verdict.parse_warning = true;
      return verdict;
    }
    const auto& score = reply.at("score");
    int value = 0;
    if (score.is_number_integer()) {
      value = score.get<int>();
    } else if (score.is_number_float()) {
      value = static_cast<int>(std::llround(score.get<double>()));
    } else if (score.is_string()) {
      try {
        value = std::stoi(score.get<std::string>());
      } catch (const std::exception&) {
        verdict.parse_warning = true;
        return verdict;
      }
    } else {
      verdict.parse_warning = true;
      return verdict;
    }
    switch (value) {
      case 1: verdict.raw = Verdict::Consistent; break;
      case 0: verdict.raw = Verdict::Ambiguous; break;
      case -1: verdict.raw = Verdict::Conflict; break;
      default:
        verdict.raw = Verdict::Ambiguous;
        verdict.parse_warning = true;  // out-of-range score
        break;
    }
  } catch (const json::exception&) {
    verdict.parse_warning = true;
  }
  return verdict;
}

}  // namespace

NliVerdict nli_score(const std::string& source, const AtomicFact& fact,
                     NliDirection direction, const Gateway& gateway,
                     const EvalPrompts& prompts) {
  if (text::trim(source).empty()) {
    throw PreconditionError("nli_score: empty source");
  }
  const std::string& tpl = direction == NliDirection::ProfileGivenDialogue
                               ? prompts.nli_profile_fact_template
                               : prompts.nli_utterance_fact_template;
  ChatRequest request;
  request.messages.push_back({"user", render_two(tpl, source, fact.text)});
  return parse_nli_reply(gateway.complete(request));
}

double fact_con(const std::string& source, const std::vector<AtomicFact>& facts,
                const VerdictMapping& mapping, const Gateway& gateway,
                const EvalPrompts& prompts, std::vector<FactAudit>* audit) {
  if (facts.empty()) throw PreconditionError("fact_con: empty fact list");
  NliDirection direction = facts.front().origin == FactOrigin::ProfileDecomposition
                               ? NliDirection::ProfileGivenDialogue
                               : NliDirection::DialogueGivenProfile;
  double sum = 0.0;
  for (const auto& fact : facts) {
    NliVerdict verdict = nli_score(source, fact, direction, gateway, prompts);
    sum += mapping(verdict.raw);
    if (audit != nullptr) audit->push_back({fact, verdict});
  }
  double mean = sum / static_cast<double>(facts.size());
  if (mapping.floor_at_zero && mean < 0.0) mean = 0.0;
  return mean;
}

namespace {

std::vector<AtomicFact> utterance_facts(const Dialogue& d) {
  std::vector<AtomicFact> facts;
  for (const auto& t : d.turns) {
    if (t.role != Role::User) continue;
    facts.push_back(
        {t.text, FactOrigin::UserUtterance, static_cast<int>(facts.size())});
  }
  return facts;
}

ConsistencyReport consistency_pair(const std::string& dialogue_source,
                                   const std::vector<AtomicFact>& profile_facts,
                                   const std::string& profile_source,
                                   const std::vector<AtomicFact>& utterances,
                                   bool profile_role_is_precision,
                                   const Gateway& gateway,
                                   const EvalPrompts& prompts,
                                   const VerdictMapping& mapping) {
  ConsistencyReport report;
  std::vector<FactAudit> profile_audit, utterance_audit;
  double profile_side =
      fact_con(dialogue_source, profile_facts, mapping, gateway, prompts,
               &profile_audit);
  double utterance_side =
      fact_con(profile_source, utterances, mapping, gateway, prompts,
               &utterance_audit);

  if (profile_role_is_precision) {
    report.dp_p = profile_side;
    report.dp_r = utterance_side;
    report.precision_audit = std::move(profile_audit);
    report.recall_audit = std::move(utterance_audit);
  } else {
    report.dp_p = utterance_side;
    report.dp_r = profile_side;
    report.precision_audit = std::move(utterance_audit);
    report.recall_audit = std::move(profile_audit);
  }
  report.precision_fact_count = report.precision_audit.size();
  report.recall_fact_count = report.recall_audit.size();
  report.dpc = harmonic_mean(report.dp_p, report.dp_r);
  return report;
}

}  // namespace

ConsistencyReport dpc(const Dialogue& d, const UserProfile& p,
                      const Gateway& gateway, const EvalPrompts& prompts,
                      const VerdictMapping& mapping) {
  if (d.user_turn_count() == 0) {
    throw PreconditionError("dpc: dialogue has no user turn");
  }
  auto profile_facts = decompose_facts(full_narrative(p), gateway, prompts);
  auto utterances = utterance_facts(d);
  std::string dialogue_source = format_user_turns_for_prompt(d);
  // Precision judges how accurate the profile facts are given the dialogue.
  return consistency_pair(dialogue_source, profile_facts, full_narrative(p),
                          utterances, /*profile_role_is_precision=*/true,
                          gateway, prompts, mapping);
}

ConsistencyReport r_dpc(const UserProfile& p, const Dialogue& simulated,
                        const Gateway& gateway, const EvalPrompts& prompts,
                        const VerdictMapping& mapping) {
  auto utterances = utterance_facts(simulated);
  if (utterances.empty()) {
    throw PreconditionError("r_dpc: simulated dialogue has no user turn");
  }
  for (const auto& f : utterances) {
    if (text::trim(f.text).empty()) {
      throw PreconditionError("r_dpc: empty simulated user turn");
    }
  }
  auto profile_facts = decompose_facts(full_narrative(p), gateway, prompts);
  std::string dialogue_source = format_user_turns_for_prompt(simulated);
  // With the profile as ground truth, precision judges the simulated
  // utterances against the profile.
  return consistency_pair(dialogue_source, profile_facts, full_narrative(p),
                          utterances, /*profile_role_is_precision=*/false,
                          gateway, prompts, mapping);
}

IdfTable IdfTable::from_corpus(const Corpus& corpus) {
  IdfTable table;
  std::unordered_map<std::string, std::size_t> doc_freq;
  for (const auto& d : corpus.dialogues) {
    std::unordered_set<std::string> seen;
    for (const auto& t : d.turns) {
      for (auto& w : text::tokenize_words(t.text)) seen.insert(std::move(w));
    }
    for (const auto& w : seen) ++doc_freq[w];
  }
  const double n = static_cast<double>(corpus.dialogues.size());
  for (const auto& [word, df] : doc_freq) {
    table.values[word] =
        std::log((1.0 + n) / (1.0 + static_cast<double>(df))) + 1.0;
  }
  return table;
}

double persona_coverage(const UserProfile& p, const Dialogue& d,
                        const IdfTable* idf) {
  std::string narrative = full_narrative(p);
  if (text::trim(narrative).empty()) {
    throw PreconditionError("persona_coverage: profile narrative is empty");
  }
  std::set<std::string> keywords;
  for (auto& w : text::content_words(narrative)) keywords.insert(std::move(w));
  if (keywords.empty()) {
    throw EmptyKeywordSetError("profile narrative has no content words");
  }

  std::unordered_set<std::string> dialogue_words;
  for (const auto& t : d.turns) {
    if (t.role != Role::User) continue;
    for (auto& w : text::tokenize_words(t.text)) dialogue_words.insert(std::move(w));
  }

  double covered = 0.0;
  double total = 0.0;
  for (const auto& w : keywords) {
    double weight = idf != nullptr ? (*idf)(w) : 1.0;
    total += weight;
    if (dialogue_words.count(w)) covered += weight;
  }
  return covered / total;
}

namespace {

int judge_score(const std::string& source, const std::string& target,
                const std::string& tpl, const Gateway& gateway,
                std::vector<std::string>* warnings) {
  ChatRequest request;
  request.messages.push_back({"user", render_two(tpl, source, target)});
  std::string raw = gateway.complete(request);

  double value = 0.0;
  try {
    auto reply = json::parse(raw);
    const auto& score = reply.at("score");
    if (score.is_number()) {
      value = score.get<double>();
    } else if (score.is_string()) {
      value = std::stod(score.get<std::string>());
    } else {
      throw SchemaParseError("judge score is neither number nor string", raw);
    }
  } catch (const SchemaParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaParseError(std::string("unparseable judge reply: ") + e.what(), raw);
  }

  int rounded = static_cast<int>(std::floor(value + 0.5));
  if (rounded < 1 || rounded > 5) {
    if (warnings != nullptr) {
      warnings->push_back("judge score " + std::to_string(rounded) +
                          " outside [1,5], clamped");
    }
    rounded = std::clamp(rounded, 1, 5);
  }
  return rounded;
}

}  // namespace

int sc_score(const UserProfile& p, const Dialogue& d, const Gateway& gateway,
             const EvalPrompts& prompts, std::vector<std::string>* warnings) {
  return judge_score(p.narrative_sc, format_user_turns_for_prompt(d),
                     prompts.sc_judge_template, gateway, warnings);
}

int val_score(const Dialogue& d, const UserProfile& p, const Gateway& gateway,
              const EvalPrompts& prompts, std::vector<std::string>* warnings) {
  return judge_score(format_user_turns_for_prompt(d), p.narrative_sc,
                     prompts.val_judge_template, gateway, warnings);
}

}  // namespace usp
