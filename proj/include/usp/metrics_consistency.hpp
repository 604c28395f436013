#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "usp/corpus.hpp"
#include "usp/extractor.hpp"
#include "usp/gateway.hpp"

namespace usp {

enum class FactOrigin { ProfileDecomposition, UserUtterance };

struct AtomicFact {
  std::string text;
  FactOrigin origin = FactOrigin::ProfileDecomposition;
  int index = 0;
};

enum class Verdict { Consistent, Ambiguous, Conflict };

struct NliVerdict {
  Verdict raw = Verdict::Ambiguous;
  std::string reason;
  bool parse_warning = false;  // set when the judge reply was unusable
};

/// mapping(verdict) -> contribution to the Fact.Con mean. The default counts
/// only Consistent (strict entailment fraction); alternatives give Ambiguous
/// half credit or let Conflict subtract with a zero floor on the mean.
struct VerdictMapping {
  double consistent = 1.0;
  double ambiguous = 0.0;
  double conflict = 0.0;
  bool floor_at_zero = false;

  double operator()(Verdict v) const {
    switch (v) {
      case Verdict::Consistent: return consistent;
      case Verdict::Ambiguous: return ambiguous;
      case Verdict::Conflict: return conflict;
    }
    return 0.0;
  }

  static VerdictMapping strict() { return {1.0, 0.0, 0.0, false}; }
  static VerdictMapping half_credit() { return {1.0, 0.5, 0.0, false}; }
  static VerdictMapping signed_floor() { return {1.0, 0.0, -1.0, true}; }
};

/// Which way a fact is judged: a fact decomposed from the profile against the
/// dialogue as source, or a user utterance against the profile as source.
enum class NliDirection { ProfileGivenDialogue, DialogueGivenProfile };

/// Prompt templates for fact decomposition and the consistency judges; all
/// use {{source}} / {{target}} (or {{text}}) slots and can be overridden from
/// files like the extraction prompts.
struct EvalPrompts {
  std::string fact_decomposition_template;
  std::string nli_profile_fact_template;    // source: dialogue, target: profile fact
  std::string nli_utterance_fact_template;  // source: profile, target: utterance
  std::string sc_judge_template;
  std::string val_judge_template;

  static EvalPrompts defaults();
  static EvalPrompts load_dir(const std::filesystem::path& dir);
};

struct FactAudit {
  AtomicFact fact;
  NliVerdict verdict;
};

struct ConsistencyReport {
  double dp_p = 0.0;
  double dp_r = 0.0;
  double dpc = 0.0;
  std::size_t precision_fact_count = 0;
  std::size_t recall_fact_count = 0;
  std::vector<FactAudit> precision_audit;
  std::vector<FactAudit> recall_audit;

  nlohmann::json to_json() const;
};

/// 2ab/(a+b); zero whenever either component is zero.
double harmonic_mean(double a, double b);

/// Splits a profile text into atomic facts via the decomposition prompt. The
/// raw reply is retained in `raw_reply` when requested. Throws
/// EmptyDecompositionError when nothing parseable comes back.
std::vector<AtomicFact> decompose_facts(const std::string& profile_text,
                                        const Gateway& gateway,
                                        const EvalPrompts& prompts = EvalPrompts::defaults(),
                                        std::string* raw_reply = nullptr);

/// One NLI verdict for a fact against a source. Unparseable or out-of-range
/// replies become Ambiguous with parse_warning set.
NliVerdict nli_score(const std::string& source, const AtomicFact& fact,
                     NliDirection direction, const Gateway& gateway,
                     const EvalPrompts& prompts = EvalPrompts::defaults());

/// Mean mapped verdict over the facts. Direction is inferred from the facts'
/// origin. Bounded in [0,1] under the default mapping and permutation
/// invariant over facts.
double fact_con(const std::string& source, const std::vector<AtomicFact>& facts,
                const VerdictMapping& mapping, const Gateway& gateway,
                const EvalPrompts& prompts = EvalPrompts::defaults(),
                std::vector<FactAudit>* audit = nullptr);

/// Profile quality against its source dialogue: precision uses decomposed
/// profile facts judged against the dialogue, recall uses the user utterances
/// judged against the profile, and dpc is their harmonic mean.
ConsistencyReport dpc(const Dialogue& d, const UserProfile& p,
                      const Gateway& gateway,
                      const EvalPrompts& prompts = EvalPrompts::defaults(),
                      const VerdictMapping& mapping = VerdictMapping::strict());

/// Mirror of dpc with the profile as ground truth for a simulated dialogue:
/// precision judges the simulated user utterances against the profile, recall
/// judges decomposed profile facts against the simulated dialogue.
ConsistencyReport r_dpc(const UserProfile& p, const Dialogue& simulated,
                        const Gateway& gateway,
                        const EvalPrompts& prompts = EvalPrompts::defaults(),
                        const VerdictMapping& mapping = VerdictMapping::strict());

/// Inverse document frequencies over an evaluation corpus; words outside the
/// table (or when no corpus was supplied) count as 1.
struct IdfTable {
  std::unordered_map<std::string, double> values;

  double operator()(const std::string& word) const {
    auto it = values.find(word);
    return it == values.end() ? 1.0 : it->second;
  }

  static IdfTable from_corpus(const Corpus& corpus);
};

/// Idf-weighted fraction of profile keywords that surface in the user turns.
/// Keywords are the content words of both narrative paragraphs minus
/// stopwords. Throws EmptyKeywordSetError when no keyword survives.
double persona_coverage(const UserProfile& p, const Dialogue& d,
                        const IdfTable* idf = nullptr);

/// 1-5 judge score for how well the user turns express the profile's
/// subjective characteristics. Non-integer replies round half-up; values are
/// clamped to [1,5] with a warning. Unparseable replies throw SchemaParseError
/// so aggregates can skip the sample.
int sc_score(const UserProfile& p, const Dialogue& d, const Gateway& gateway,
             const EvalPrompts& prompts = EvalPrompts::defaults(),
             std::vector<std::string>* warnings = nullptr);

/// 1-5 judge score for subjective-description quality given the dialogue.
int val_score(const Dialogue& d, const UserProfile& p, const Gateway& gateway,
              const EvalPrompts& prompts = EvalPrompts::defaults(),
              std::vector<std::string>* warnings = nullptr);

}  // namespace usp
