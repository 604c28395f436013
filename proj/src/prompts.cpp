#include "usp/prompts.hpp"

#include <fstream>
#include <sstream>

#include "usp/errors.hpp"

namespace usp {

namespace {

const char* kSceneConsistentTemplate = R"(User Persona Analysis Task

Objective
The primary goal of this task is to analyze user utterances in-depth and accurately extract key persona attributes based on both direct and implicit cues. These attributes should be categorized into distinct fields, with any missing or unclear details left blank.

Field Descriptions:
gender: The user's gender, if stated or strongly implied.
age: The user's age or age range.
location: Where the user lives or is otherwise located.
occupation: The user's job, profession, or working status.
education: The user's educational background or current studies.
family_relationships: Family members and family situations the user mentions.
routines_or_habits: Recurring behaviors, routines, or habits.
social_relationships: Friends, colleagues, or other social connections.
language_style: Distinctive communication patterns such as tone, wording, and formality.
other_experiences: Notable past experiences or background details not covered above.

Guidelines
1. Carefully examine each user utterance to extract relevant persona traits. Consider both direct statements and implicit clues.
2. Ensure that the extracted attributes are specific and directly relevant to the user's utterances. Avoid vague or generalized descriptions unless explicitly supported by the text.
3. Pay attention to distinctive communication styles (e.g., formal or casual tone, frequent use of specific words or phrases) to capture the user's unique way of communicating.

Output Format
Return a JSON object with exactly these keys, each mapping to a list of strings:
"gender", "age", "location", "occupation", "education", "family_relationships", "routines_or_habits", "social_relationships", "language_style", "other_experiences"

### Dialogue
{{dialogue}}
)";

const char* kSceneRelatedTemplate = R"(User Persona Analysis Task

Objective
The goal of this task is to analyze multi-turn user utterances within a conversation with an assistant and extract key elements such as the primary goals and specific task descriptions. Each extracted detail should be as specific as possible, reflecting the user's context, objectives, and scenario.

Output Format
The extraction should be presented in a structured JSON format, as shown below:
{
    "scenarios": [
        {
            "goals_or_plans": "<User's goals or plans>",
            "task_details": ["<specific task summaries made by the user>"]
        }
    ]
}

Field Descriptions:
- goals_or_plans: User's short-term or long-term objectives, derived from explicit statements or inferred from the overall conversation. If no explicit goals are stated, infer them from the main topics discussed.
- task_details: Specific tasks, actions, or requests made by the user. Each task should be concisely summarized with specifics. If there are multiple tasks, list each separately.

### Dialogue
{{dialogue}}
)";

const char* kPersonalityTemplate = R"(Task:
Analyze the provided dialogue to assess the user's personality traits across 5 personality dimensions. Focus exclusively on the user's characteristics, disregarding any information related to other individuals, unless it directly impacts the user.

For each personality trait:
1. Assign each dimension independently with score: "High", "Low", or "Inconclusive".
2. Provide conclusion: A high-level description, with concise supporting details.
3. Provide reason: Justify the assigned score with specific evidence from the dialogue.
4. Mark traits as Inconclusive only when no clear evidence exists.

Personality Trait Definition:
Openness: Curiosity and receptiveness to new ideas, experiences, and ways of thinking.
Conscientiousness: Organization, diligence, and attention to detail in pursuing goals.
Extraversion: Sociability and the tendency to draw energy from interaction.
Agreeableness: Warmth, empathy, and cooperativeness toward others.
Neuroticism: Tendency toward negative emotions such as anxiety or frustration.

Format:
{
    "Trait Name": {
        "score": "High/Low/Inconclusive",
        "conclusion": "The user is a [trait descriptor] person...",
        "reason": "Explanation referencing specific dialogue evidence."
    }
}

### Dialogue
{{dialogue}}
)";

const char* kPolishTemplate = R"(Narrative Generation Objective
Rephrase the provided key-value pairs into a natural, coherent second-person description.

Core Requirements
1. Perspective: Use second-person perspective ("you", "your").
2. Structure: Two paragraphs:
   - First paragraph: Present objective facts.
   - Second paragraph: Describe subjective characteristics.
3. Key Principles
   - Accurately represent all provided details.
   - Ensure the language flows naturally, remains engaging, and avoids redundancy.
   - Focus on clear and seamless transitions between ideas.

Output Expectations
- Objective Facts:
  - Convert the key-value pairs into a clear and natural description without over-explaining or adding unnecessary details.
  - Ensure each scenario is logically connected and key information is presented effectively.
- Subjective Characteristics:
  - Avoid vague terms like "high perfectionism" or "moderate emotional stability." Use vivid, descriptive language to bring these traits to life.

### Attributes
{{attributes}}
)";

std::string read_file_or(const std::filesystem::path& path,
                         const std::string& fallback) {
  std::ifstream in(path);
  if (!in) return fallback;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

ExtractionPrompts ExtractionPrompts::defaults() {
  ExtractionPrompts p;
  p.scene_consistent_template = kSceneConsistentTemplate;
  p.scene_related_template = kSceneRelatedTemplate;
  p.personality_template = kPersonalityTemplate;
  p.polish_template = kPolishTemplate;
  return p;
}

ExtractionPrompts ExtractionPrompts::load_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("prompt directory '" + dir.string() + "' does not exist");
  }
  ExtractionPrompts p = defaults();
  p.scene_consistent_template =
      read_file_or(dir / "scene_consistent.txt", p.scene_consistent_template);
  p.scene_related_template =
      read_file_or(dir / "scene_related.txt", p.scene_related_template);
  p.personality_template =
      read_file_or(dir / "personality.txt", p.personality_template);
  p.polish_template = read_file_or(dir / "polish.txt", p.polish_template);
  p.validate();
  return p;
}

void ExtractionPrompts::validate() const {
  auto check = [](std::string_view tpl, std::string_view slot,
                  const char* name) {
    if (count_placeholder(tpl, slot) != 1) {
      throw PreconditionError(std::string("template '") + name +
                              "' must contain exactly one {{" +
                              std::string(slot) + "}} placeholder");
    }
  };
  check(scene_consistent_template, "dialogue", "scene_consistent");
  check(scene_related_template, "dialogue", "scene_related");
  check(personality_template, "dialogue", "personality");
  check(polish_template, "attributes", "polish");
}

std::size_t count_placeholder(std::string_view tpl, std::string_view placeholder) {
  std::string token = "{{" + std::string(placeholder) + "}}";
  std::size_t count = 0;
  std::size_t pos = 0;
  while ((pos = tpl.find(token, pos)) != std::string_view::npos) {
    ++count;
    pos += token.size();
  }
  return count;
}

std::string render_template(std::string_view tpl, std::string_view placeholder,
                            std::string_view value) {
  std::string token = "{{" + std::string(placeholder) + "}}";
  auto pos = tpl.find(token);
  if (pos == std::string_view::npos) {
    throw PreconditionError("template is missing the {{" +
                            std::string(placeholder) + "}} placeholder");
  }
  std::string out(tpl);
  out.replace(pos, token.size(), value);
  return out;
}

std::string format_dialogue_for_prompt(const Dialogue& d, bool user_only) {
  std::string out;
  for (const auto& t : d.turns) {
    if (user_only && t.role != Role::User) continue;
    out += t.role == Role::User ? "[User]: " : "[Assistant]: ";
    out += t.text;
    out += '\n';
  }
  return out;
}

std::string format_user_turns_for_prompt(const Dialogue& d) {
  std::string out;
  int j = 0;
  for (const auto& t : d.turns) {
    if (t.role != Role::User) continue;
    ++j;
    out += "[User](Turn-" + std::to_string(j) + "): " + t.text + "\n";
  }
  return out;
}

}  // namespace usp
