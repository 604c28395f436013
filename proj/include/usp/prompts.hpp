#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "usp/corpus.hpp"

namespace usp {

/// Prompt templates for the two-stage profile extraction. Each extraction
/// template carries exactly one {{dialogue}} slot; the polish template carries
/// exactly one {{attributes}} slot. Templates can be overridden from plain
/// text files so deployments may swap in their own wording.
struct ExtractionPrompts {
  std::string scene_consistent_template;
  std::string scene_related_template;
  std::string personality_template;
  std::string polish_template;

  static ExtractionPrompts defaults();

  /// Loads overrides from dir/{scene_consistent,scene_related,personality,polish}.txt;
  /// files that are absent keep the default text.
  static ExtractionPrompts load_dir(const std::filesystem::path& dir);

  /// Throws PreconditionError when a template is missing its placeholder or
  /// carries it more than once.
  void validate() const;
};

/// Replaces the single {{placeholder}} slot in a template.
std::string render_template(std::string_view tpl, std::string_view placeholder,
                            std::string_view value);

std::size_t count_placeholder(std::string_view tpl, std::string_view placeholder);

/// "[User]: ... / [Assistant]: ..." rendering used inside prompts.
std::string format_dialogue_for_prompt(const Dialogue& d, bool user_only = false);

/// User turns rendered as "[User](Turn-j): ..." lines, the source format for
/// consistency judging.
std::string format_user_turns_for_prompt(const Dialogue& d);

}  // namespace usp
