#pragma once

#include <array>
#include <cstddef>
#include <set>
#include <string>
#include <string_view>

#include "evoforge/core.hpp"
#include "evoforge/provider.hpp"

namespace evoforge {

enum class TemplateKind { ga, de, de_no_prompt3, de_mutate_all, resample };
std::string_view to_string(TemplateKind k);

/// Final prompts are wrapped in these tags by the model.
inline constexpr std::string_view kPromptOpen = "<prompt>";
inline constexpr std::string_view kPromptClose = "</prompt>";
/// Extracted prompts longer than this are rejected and re-drawn.
inline constexpr std::size_t kMaxPromptChars = 2000;

/// Placeholders a template body of `kind` must contain, each exactly once.
const std::set<std::string>& required_placeholders(TemplateKind kind);

struct OperatorTemplate {
  TemplateKind kind = TemplateKind::ga;
  std::string body;             // `{{NAME}}` placeholders
  std::string oneshot_example;  // worked example, prepended verbatim

  /// Throws ConfigError unless the body carries exactly the required
  /// placeholders once each and mentions the marker tags.
  void validate() const;
};

/// The five operator templates. Built-ins are compiled from templates/;
/// load() overrides any of `<kind>.txt` / `<kind>_oneshot.txt` found in a directory.
class TemplateSet {
 public:
  static const TemplateSet& builtin();
  static TemplateSet load(const std::string& directory);

  const OperatorTemplate& get(TemplateKind kind) const {
    return templates_[static_cast<std::size_t>(kind)];
  }

 private:
  std::array<OperatorTemplate, 5> templates_;
};

/// Template kind a DE variant renders with.
TemplateKind de_template_kind(const DeVariant& variant);

/// Replaces marker tags inside prompt text so parent prompts cannot inject them.
std::string escape_markers(std::string_view text);

std::string render_ga_instruction(const Prompt& parent1, const Prompt& parent2,
                                  const TemplateSet& templates = TemplateSet::builtin());

/// `prompt3` must be present exactly when the variant does not eliminate it.
std::string render_de_instruction(const Prompt& basic, const Prompt& donor1, const Prompt& donor2,
                                  const Prompt* prompt3, const DeVariant& variant,
                                  const TemplateSet& templates = TemplateSet::builtin());

std::string render_resample_instruction(const Prompt& seed,
                                        const TemplateSet& templates = TemplateSet::builtin());

struct OperatorResponse {
  std::string raw;
  std::string extracted;
  std::string step_trace;
};

/// Takes the last <prompt>…</prompt> span, or the last non-empty line when no
/// span exists. The result is trimmed and single-spaced. Throws OperatorError
/// when it is empty or longer than kMaxPromptChars.
OperatorResponse parse_new_prompt(std::string_view raw);

struct OperatorSampling {
  std::string model;
  double temperature = kOperatorTemperature;
  double top_p = kOperatorTopP;
  int max_tokens = 512;
  int max_attempts = 3;  // re-draws when a response cannot be parsed
};

/// Evolution operator that asks a chat model to execute the GA/DE steps.
class LlmOperator final : public EvolutionOperator {
 public:
  LlmOperator(ChatClient& client, OperatorSampling sampling,
              const TemplateSet& templates = TemplateSet::builtin());

  std::string ga_offspring(const Prompt& parent1, const Prompt& parent2, Rng& rng) override;
  std::string de_offspring(const DeParents& parents, Rng& rng) override;
  std::string resample(const Prompt& seed, Rng& rng) override;

  /// Sends one rendered instruction, re-drawing on unparseable responses.
  OperatorResponse run(const std::string& instruction);

 private:
  ChatClient& client_;
  OperatorSampling sampling_;
  TemplateSet templates_;
};

}  // namespace evoforge
