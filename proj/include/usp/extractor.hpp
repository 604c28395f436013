#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "usp/corpus.hpp"
#include "usp/gateway.hpp"
#include "usp/prompts.hpp"

namespace usp {

enum class AttributeCategory { SceneConsistent, SceneRelated, Personality };

std::string attribute_category_name(AttributeCategory c);

enum class TraitScore { High, Low, Inconclusive };

std::string trait_score_name(TraitScore s);
std::optional<TraitScore> trait_score_from_name(const std::string& name);

inline constexpr std::array<std::string_view, 10> kSceneConsistentFields = {
    "age",
    "gender",
    "location",
    "occupation",
    "education",
    "family_relationships",
    "routines_or_habits",
    "social_relationships",
    "other_experiences",
    "language_style",
};

inline constexpr std::array<std::string_view, 5> kBigFiveTraits = {
    "Openness", "Conscientiousness", "Extraversion", "Agreeableness",
    "Neuroticism",
};

struct BigFiveAssessment {
  TraitScore score = TraitScore::Inconclusive;
  std::string conclusion;
  std::string reason;
};

struct Scenario {
  std::string goals_or_plans;
  std::vector<std::string> task_details;
};

struct AttributeSet {
  std::map<std::string, std::vector<std::string>> scene_consistent;
  std::vector<Scenario> scene_related;
  std::map<std::string, BigFiveAssessment> big_five;

  bool empty() const;
};

struct AttributePart {
  AttributeCategory category = AttributeCategory::SceneConsistent;
  AttributeSet values;
  std::vector<std::string> warnings;
};

struct UserProfile {
  std::string id;
  AttributeSet attributes;
  std::string narrative_of;  // objective-facts paragraph
  std::string narrative_sc;  // subjective-characteristics paragraph
  std::optional<std::string> source_dialogue_id;
  std::vector<std::string> warnings;
  std::map<std::string, std::string> meta;
};

/// OF and SC paragraphs joined by a blank line; the text embedded for
/// similarity scoring.
std::string full_narrative(const UserProfile& p);

/// Runs one category's extraction prompt over the dialogue and parses the
/// JSON reply. Fields that fail to parse come back empty with a recorded
/// warning; a reply that is not JSON at all raises SchemaParseError with the
/// raw text retained.
AttributePart extract_attributes(const Dialogue& d, AttributeCategory category,
                                 const Gateway& gateway,
                                 const ExtractionPrompts& prompts);

/// Union of per-category parts. Removes invalid entries (empty, whitespace, or
/// placeholder literals), deterministically shuffles list order by seed, and
/// drops Big Five traits judged Inconclusive. Throws DuplicateCategoryError
/// when two parts cover the same category.
AttributeSet merge_and_filter(const std::vector<AttributePart>& parts,
                              std::uint64_t seed);

struct Narratives {
  std::string objective_facts;
  std::string subjective_characteristics;
  std::vector<std::string> warnings;
};

/// Rephrases merged attributes into the two-paragraph second-person narrative.
/// The reply splits on its first blank line; a missing second paragraph raises
/// EmptyNarrativeError, and replies not written in second person get a
/// validation warning attached.
Narratives polish(const AttributeSet& attrs, const Gateway& gateway,
                  const ExtractionPrompts& prompts);

/// Full two-stage extraction for one dialogue.
UserProfile extract_profile(const Dialogue& d, const Gateway& gateway,
                            const ExtractionPrompts& prompts,
                            std::uint64_t seed);

// --- profile store ----------------------------------------------------------

nlohmann::json attribute_set_to_json(const AttributeSet& attrs);
AttributeSet attribute_set_from_json(const nlohmann::json& j);
nlohmann::json profile_to_json(const UserProfile& p);
UserProfile profile_from_json(const nlohmann::json& j);

/// One profile per line, mirroring the corpus JSONL convention.
void save_profiles(const std::vector<UserProfile>& profiles,
                   const std::filesystem::path& path,
                   const nlohmann::json* header = nullptr);
std::vector<UserProfile> load_profiles(const std::filesystem::path& path);

}  // namespace usp
