#include "usp/extractor.hpp"

#include <algorithm>
#include <fstream>

#include "usp/errors.hpp"
#include "usp/text.hpp"

namespace usp {

using nlohmann::json;

std::string attribute_category_name(AttributeCategory c) {
  switch (c) {
    case AttributeCategory::SceneConsistent: return "scene_consistent";
    case AttributeCategory::SceneRelated: return "scene_related";
    case AttributeCategory::Personality: return "personality";
  }
  return "unknown";
}

std::string trait_score_name(TraitScore s) {
  switch (s) {
    case TraitScore::High: return "High";
    case TraitScore::Low: return "Low";
    case TraitScore::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

std::optional<TraitScore> trait_score_from_name(const std::string& name) {
  if (name == "High") return TraitScore::High;
  if (name == "Low") return TraitScore::Low;
  if (name == "Inconclusive") return TraitScore::Inconclusive;
  return std::nullopt;
}

bool AttributeSet::empty() const {
  for (const auto& [key, values] : scene_consistent) {
    if (!values.empty()) return false;
  }
  return scene_related.empty() && big_five.empty();
}

std::string full_narrative(const UserProfile& p) {
  if (p.narrative_sc.empty()) return p.narrative_of;
  if (p.narrative_of.empty()) return p.narrative_sc;
  return p.narrative_of + "\n\n" + p.narrative_sc;
}

namespace {

bool is_invalid_entry(const std::string& raw) {
  static const std::array<std::string_view, 5> kPlaceholders = {
      "", "n/a", "unknown", "[]", "none"};
  std::string s = text::lowercase(text::trim(raw));
  return std::find(kPlaceholders.begin(), kPlaceholders.end(), s) !=
         kPlaceholders.end();
}

std::vector<std::string> string_list(const json& value,
                                     std::vector<std::string>* warnings,
                                     const std::string& field) {
  std::vector<std::string> out;
  if (value.is_string()) {
    out.push_back(value.get<std::string>());
    return out;
  }
  if (!value.is_array()) {
    if (warnings) warnings->push_back("field '" + field + "' is not a list");
    return out;
  }
  for (const auto& item : value) {
    if (item.is_string()) {
      out.push_back(item.get<std::string>());
    } else if (warnings) {
      warnings->push_back("non-string entry in field '" + field + "'");
    }
  }
  return out;
}

AttributeSet parse_scene_consistent(const json& reply,
                                    std::vector<std::string>* warnings) {
  AttributeSet out;
  for (auto field : kSceneConsistentFields) {
    std::string key(field);
    if (!reply.contains(key)) {
      out.scene_consistent[key] = {};
      continue;
    }
    out.scene_consistent[key] = string_list(reply.at(key), warnings, key);
  }
  return out;
}

AttributeSet parse_scene_related(const json& reply,
                                 std::vector<std::string>* warnings) {
  AttributeSet out;
  if (!reply.contains("scenarios") || !reply.at("scenarios").is_array()) {
    if (!reply.empty() && warnings) {
      warnings->push_back("reply has no 'scenarios' list");
    }
    return out;
  }
  for (const auto& item : reply.at("scenarios")) {
    if (!item.is_object()) {
      if (warnings) warnings->push_back("non-object scenario entry");
      continue;
    }
    Scenario s;
    if (item.contains("goals_or_plans") && item.at("goals_or_plans").is_string()) {
      s.goals_or_plans = item.at("goals_or_plans").get<std::string>();
    }
    if (item.contains("task_details")) {
      s.task_details = string_list(item.at("task_details"), warnings, "task_details");
    }
    out.scene_related.push_back(std::move(s));
  }
  return out;
}

AttributeSet parse_personality(const json& reply,
                               std::vector<std::string>* warnings) {
  AttributeSet out;
  for (auto trait : kBigFiveTraits) {
    std::string key(trait);
    if (!reply.contains(key) || !reply.at(key).is_object()) continue;
    const auto& entry = reply.at(key);
    BigFiveAssessment assessment;
    std::string score = entry.value("score", "Inconclusive");
    auto parsed = trait_score_from_name(score);
    if (!parsed) {
      if (warnings) {
        warnings->push_back("trait '" + key + "' has unknown score '" + score +
                            "', treated as Inconclusive");
      }
      parsed = TraitScore::Inconclusive;
    }
    assessment.score = *parsed;
    assessment.conclusion = entry.value("conclusion", "");
    assessment.reason = entry.value("reason", "");
    out.big_five[key] = std::move(assessment);
  }
  if (out.big_five.empty() && !reply.empty() && warnings) {
    warnings->push_back("reply contains none of the five trait keys");
  }
  return out;
}

}  // namespace

AttributePart extract_attributes(const Dialogue& d, AttributeCategory category,
                                 const Gateway& gateway,
                                 const ExtractionPrompts& prompts) {
  if (d.user_turn_count() == 0) {
    throw PreconditionError("dialogue '" + d.id + "' has no user turn");
  }

  const std::string* tpl = nullptr;
  switch (category) {
    case AttributeCategory::SceneConsistent:
      tpl = &prompts.scene_consistent_template;
      break;
    case AttributeCategory::SceneRelated:
      tpl = &prompts.scene_related_template;
      break;
    case AttributeCategory::Personality:
      tpl = &prompts.personality_template;
      break;
  }

  ChatRequest request;
  request.messages.push_back(
      {"user", render_template(*tpl, "dialogue", format_dialogue_for_prompt(d))});
  std::string raw = gateway.complete(request);

  json reply;
  try {
    reply = json::parse(raw);
  } catch (const json::exception& e) {
    throw SchemaParseError(
        "attribute reply for dialogue '" + d.id + "' is not valid JSON: " + e.what(),
        raw);
  }
  if (!reply.is_object()) {
    throw SchemaParseError("attribute reply for dialogue '" + d.id +
                               "' is not a JSON object",
                           raw);
  }

  AttributePart part;
  part.category = category;
  switch (category) {
    case AttributeCategory::SceneConsistent:
      part.values = parse_scene_consistent(reply, &part.warnings);
      break;
    case AttributeCategory::SceneRelated:
      part.values = parse_scene_related(reply, &part.warnings);
      break;
    case AttributeCategory::Personality:
      part.values = parse_personality(reply, &part.warnings);
      break;
  }
  return part;
}

AttributeSet merge_and_filter(const std::vector<AttributePart>& parts,
                              std::uint64_t seed) {
  std::array<bool, 3> seen = {false, false, false};
  for (const auto& part : parts) {
    auto idx = static_cast<std::size_t>(part.category);
    if (seen[idx]) {
      throw DuplicateCategoryError("category '" +
                                   attribute_category_name(part.category) +
                                   "' appears more than once");
    }
    seen[idx] = true;
  }

  AttributeSet merged;
  for (const auto& part : parts) {
    switch (part.category) {
      case AttributeCategory::SceneConsistent:
        merged.scene_consistent = part.values.scene_consistent;
        break;
      case AttributeCategory::SceneRelated:
        merged.scene_related = part.values.scene_related;
        break;
      case AttributeCategory::Personality:
        merged.big_five = part.values.big_five;
        break;
    }
  }

  // Drop invalid entries.
  for (auto& [key, values] : merged.scene_consistent) {
    std::erase_if(values, is_invalid_entry);
  }
  std::erase_if(merged.scene_related, [](const Scenario& s) {
    return is_invalid_entry(s.goals_or_plans) && s.task_details.empty();
  });
  for (auto& s : merged.scene_related) {
    std::erase_if(s.task_details, is_invalid_entry);
    if (is_invalid_entry(s.goals_or_plans)) s.goals_or_plans.clear();
  }

  // Moderate trait scores reflect average behaviour and are excluded from the
  // polished profile.
  std::erase_if(merged.big_five, [](const auto& kv) {
    return kv.second.score == TraitScore::Inconclusive;
  });

  // Shuffle list order to prevent positional bias; deterministic by seed.
  for (auto& [key, values] : merged.scene_consistent) {
    text::det_shuffle(values, seed ^ text::fnv1a64(key));
  }
  text::det_shuffle(merged.scene_related, seed ^ text::fnv1a64("scene_related"));
  for (auto& s : merged.scene_related) {
    text::det_shuffle(s.task_details, seed ^ text::fnv1a64(s.goals_or_plans));
  }

  return merged;
}

Narratives polish(const AttributeSet& attrs, const Gateway& gateway,
                  const ExtractionPrompts& prompts) {
  ChatRequest request;
  request.messages.push_back(
      {"user", render_template(prompts.polish_template, "attributes",
                               attribute_set_to_json(attrs).dump(2))});
  std::string raw = gateway.complete(request);

  // Two paragraphs, split on the first blank line.
  std::string normalized = raw;
  std::string::size_type split = normalized.find("\n\n");
  Narratives out;
  if (split == std::string::npos) {
    out.objective_facts = text::trim(normalized);
    out.subjective_characteristics.clear();
  } else {
    out.objective_facts = text::trim(normalized.substr(0, split));
    out.subjective_characteristics = text::trim(normalized.substr(split + 2));
  }
  if (out.objective_facts.empty() || out.subjective_characteristics.empty()) {
    throw EmptyNarrativeError("polish reply does not contain two paragraphs");
  }

  std::string lowered = text::lowercase(raw);
  if (lowered.find("you") == std::string::npos) {
    out.warnings.push_back("narrative is not written in second person");
  }
  return out;
}

UserProfile extract_profile(const Dialogue& d, const Gateway& gateway,
                            const ExtractionPrompts& prompts,
                            std::uint64_t seed) {
  if (d.user_turn_count() == 0) {
    throw PreconditionError("dialogue '" + d.id + "' has no user turn");
  }

  std::vector<AttributePart> parts;
  parts.push_back(
      extract_attributes(d, AttributeCategory::SceneConsistent, gateway, prompts));
  parts.push_back(
      extract_attributes(d, AttributeCategory::SceneRelated, gateway, prompts));
  parts.push_back(
      extract_attributes(d, AttributeCategory::Personality, gateway, prompts));

  UserProfile profile;
  profile.id = "profile-" + d.id;
  profile.source_dialogue_id = d.id;
  for (const auto& part : parts) {
    profile.warnings.insert(profile.warnings.end(), part.warnings.begin(),
                            part.warnings.end());
  }
  profile.attributes = merge_and_filter(parts, seed);

  Narratives narratives = polish(profile.attributes, gateway, prompts);
  profile.narrative_of = narratives.objective_facts;
  profile.narrative_sc = narratives.subjective_characteristics;
  profile.warnings.insert(profile.warnings.end(), narratives.warnings.begin(),
                          narratives.warnings.end());
  return profile;
}

json attribute_set_to_json(const AttributeSet& attrs) {
  json j;
  j["scene_consistent"] = json::object();
  for (const auto& [key, values] : attrs.scene_consistent) {
    j["scene_consistent"][key] = values;
  }
  j["scene_related"] = json::array();
  for (const auto& s : attrs.scene_related) {
    j["scene_related"].push_back(
        {{"goals_or_plans", s.goals_or_plans}, {"task_details", s.task_details}});
  }
  j["big_five"] = json::object();
  for (const auto& [trait, a] : attrs.big_five) {
    j["big_five"][trait] = {{"score", trait_score_name(a.score)},
                            {"conclusion", a.conclusion},
                            {"reason", a.reason}};
  }
  return j;
}

AttributeSet attribute_set_from_json(const json& j) {
  AttributeSet attrs;
  if (j.contains("scene_consistent")) {
    for (const auto& [key, values] : j.at("scene_consistent").items()) {
      attrs.scene_consistent[key] = values.get<std::vector<std::string>>();
    }
  }
  if (j.contains("scene_related")) {
    for (const auto& item : j.at("scene_related")) {
      Scenario s;
      s.goals_or_plans = item.value("goals_or_plans", "");
      if (item.contains("task_details")) {
        s.task_details = item.at("task_details").get<std::vector<std::string>>();
      }
      attrs.scene_related.push_back(std::move(s));
    }
  }
  if (j.contains("big_five")) {
    for (const auto& [trait, entry] : j.at("big_five").items()) {
      BigFiveAssessment a;
      a.score = trait_score_from_name(entry.value("score", "Inconclusive"))
                    .value_or(TraitScore::Inconclusive);
      a.conclusion = entry.value("conclusion", "");
      a.reason = entry.value("reason", "");
      attrs.big_five[trait] = std::move(a);
    }
  }
  return attrs;
}

json profile_to_json(const UserProfile& p) {
  json j;
  j["id"] = p.id;
  j["attributes"] = attribute_set_to_json(p.attributes);
  j["narrative_of"] = p.narrative_of;
  j["narrative_sc"] = p.narrative_sc;
  if (p.source_dialogue_id) {
    j["source_dialogue_id"] = *p.source_dialogue_id;
  } else {
    j["source_dialogue_id"] = nullptr;
  }
  if (!p.warnings.empty()) j["warnings"] = p.warnings;
  j["meta"] = p.meta;
  return j;
}

UserProfile profile_from_json(const json& j) {
  UserProfile p;
  p.id = j.at("id").get<std::string>();
  if (j.contains("attributes")) {
    p.attributes = attribute_set_from_json(j.at("attributes"));
  }
  p.narrative_of = j.value("narrative_of", "");
  p.narrative_sc = j.value("narrative_sc", "");
  if (j.contains("source_dialogue_id") && j.at("source_dialogue_id").is_string()) {
    p.source_dialogue_id = j.at("source_dialogue_id").get<std::string>();
  }
  if (j.contains("warnings")) {
    p.warnings = j.at("warnings").get<std::vector<std::string>>();
  }
  if (j.contains("meta") && j.at("meta").is_object()) {
    for (const auto& [key, value] : j.at("meta").items()) {
      p.meta[key] = value.is_string() ? value.get<std::string>() : value.dump();
    }
  }
  return p;
}

void save_profiles(const std::vector<UserProfile>& profiles,
                   const std::filesystem::path& path, const json* header) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  if (header != nullptr) {
    out << json{{"_header", *header}}.dump() << "\n";
  }
  for (const auto& p : profiles) {
    out << profile_to_json(p).dump() << "\n";
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<UserProfile> load_profiles(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<UserProfile> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      auto record = json::parse(line);
      if (record.is_object() && record.contains("_header")) continue;
      out.push_back(profile_from_json(record));
    } catch (const json::exception& e) {
      throw ParseError(line_no, std::string("invalid profile record: ") + e.what());
    }
  }
  return out;
}

}  // namespace usp
