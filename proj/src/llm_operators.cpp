#include "evoforge/llm_operators.hpp"

#include <filesystem>
#include <map>

#include "evoforge/text.hpp"

namespace evoforge {

namespace detail {
const std::map<std::string, std::string>& embedded_templates();
}  // namespace detail

namespace {

constexpr std::array<TemplateKind, 5> kAllKinds = {TemplateKind::ga, TemplateKind::de,
                                                   TemplateKind::de_no_prompt3,
                                                   TemplateKind::de_mutate_all,
                                                   TemplateKind::resample};

std::string require_text(const Prompt& p, std::string_view role) {
  auto t = trim(p.text);
  if (t.empty()) throw Error(std::string(role) + " prompt is empty");
  return escape_markers(t);
}

std::string render(const OperatorTemplate& tpl, const std::map<std::string, std::string>& values) {
  std::string out = trim(tpl.oneshot_example);
  if (!out.empty()) out += "\n\n";
  out += trim(substitute(tpl.body, values));
  return out;
}

}  // namespace

std::string_view to_string(TemplateKind k) {
  switch (k) {
    case TemplateKind::ga: return "ga";
    case TemplateKind::de: return "de";
    case TemplateKind::de_no_prompt3: return "de_no_prompt3";
    case TemplateKind::de_mutate_all: return "de_mutate_all";
    case TemplateKind::resample: return "resample";
  }
  return "?";
}

const std::set<std::string>& required_placeholders(TemplateKind kind) {
  static const std::set<std::string> ga{"PROMPT1", "PROMPT2"};
  static const std::set<std::string> de{"PROMPT1", "PROMPT2", "PROMPT3", "BASIC_PROMPT"};
  static const std::set<std::string> de_no3{"PROMPT1", "PROMPT2", "BASIC_PROMPT"};
  static const std::set<std::string> resample{"INPUT_PROMPT"};
  switch (kind) {
    case TemplateKind::ga: return ga;
    case TemplateKind::de: return de;
    case TemplateKind::de_no_prompt3: return de_no3;
    case TemplateKind::de_mutate_all: return de;
    case TemplateKind::resample: return resample;
  }
  return ga;
}

void OperatorTemplate::validate() const {
  const auto& required = required_placeholders(kind);
  std::map<std::string, int> seen;
  for (const auto& name : placeholders_in(body)) ++seen[name];
  const std::string where = "template " + std::string(to_string(kind));
  for (const auto& name : required) {
    if (seen[name] != 1) {
      throw ConfigError(where + ": placeholder {{" + name + "}} must appear exactly once");
    }
  }
  for (const auto& [name, count] : seen) {
    if (!required.contains(name)) {
      throw ConfigError(where + ": unexpected placeholder {{" + name + "}}");
    }
  }
  if (body.find(kPromptOpen) == std::string::npos || body.find(kPromptClose) == std::string::npos) {
    throw ConfigError(where + ": body must tell the model to use <prompt></prompt> tags");
  }
  if (!placeholders_in(oneshot_example).empty()) {
    throw ConfigError(where + ": one-shot example must not contain placeholders");
  }
}

const TemplateSet& TemplateSet::builtin() {
  static const TemplateSet set = [] {
    TemplateSet s;
    const auto& files = detail::embedded_templates();
    for (auto kind : kAllKinds) {
      auto& t = s.templates_[static_cast<std::size_t>(kind)];
      const std::string base(to_string(kind));
      t.kind = kind;
      t.body = files.at(base + ".txt");
      t.oneshot_example = files.at(base + "_oneshot.txt");
      t.validate();
    }
    return s;
  }();
  return set;
}

TemplateSet TemplateSet::load(const std::string& directory) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(directory)) throw ConfigError("templates directory not found: " + directory);
  TemplateSet s = builtin();
  for (auto kind : kAllKinds) {
    auto& t = s.templates_[static_cast<std::size_t>(kind)];
    const std::string base(to_string(kind));
    const auto body_path = fs::path(directory) / (base + ".txt");
    const auto shot_path = fs::path(directory) / (base + "_oneshot.txt");
    if (fs::exists(body_path)) t.body = read_file(body_path.string());
    if (fs::exists(shot_path)) t.oneshot_example = read_file(shot_path.string());
    t.validate();
  }
  return s;
}

TemplateKind de_template_kind(const DeVariant& variant) {
  const bool all = variant.mutate_scope == MutateScope::all;
  const bool no3 = variant.prompt3_source == Prompt3Source::eliminate;
  if (all && no3) throw ConfigError("DE variant all+eliminate has no operator template");
  if (no3) return TemplateKind::de_no_prompt3;
  if (all) return TemplateKind::de_mutate_all;
  return TemplateKind::de;
}

std::string escape_markers(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text.substr(i, kPromptOpen.size()) == kPromptOpen) {
      out += "&lt;prompt&gt;";
      i += kPromptOpen.size();
    } else if (text.substr(i, kPromptClose.size()) == kPromptClose) {
      out += "&lt;/prompt&gt;";
      i += kPromptClose.size();
    } else {
      out.push_back(text[i++]);
    }
  }
  return out;
}

std::string render_ga_instruction(const Prompt& parent1, const Prompt& parent2,
                                  const TemplateSet& templates) {
  return render(templates.get(TemplateKind::ga),
                {{"PROMPT1", require_text(parent1, "parent 1")},
                 {"PROMPT2", require_text(parent2, "parent 2")}});
}

std::string render_de_instruction(const Prompt& basic, const Prompt& donor1, const Prompt& donor2,
                                  const Prompt* prompt3, const DeVariant& variant,
                                  const TemplateSet& templates) {
  const bool wants3 = variant.prompt3_source != Prompt3Source::eliminate;
  if (wants3 != (prompt3 != nullptr)) {
    throw Error(wants3 ? "DE variant needs Prompt 3 but none was given"
                       : "DE variant eliminates Prompt 3 but one was given");
  }
  std::map<std::string, std::string> values{{"BASIC_PROMPT", require_text(basic, "basic")},
                                            {"PROMPT1", require_text(donor1, "donor 1")},
                                            {"PROMPT2", require_text(donor2, "donor 2")}};
  if (prompt3) values["PROMPT3"] = require_text(*prompt3, "prompt 3");
  return render(templates.get(de_template_kind(variant)), values);
}

std::string render_resample_instruction(const Prompt& seed, const TemplateSet& templates) {
  return render(templates.get(TemplateKind::resample),
                {{"INPUT_PROMPT", require_text(seed, "seed")}});
}

OperatorResponse parse_new_prompt(std::string_view raw) {
  if (trim(raw).empty()) throw OperatorError("operator response is empty");
  OperatorResponse r;
  r.raw = std::string(raw);

  std::string_view chosen;
  std::size_t chosen_start = std::string_view::npos;
  const auto close = raw.rfind(kPromptClose);
  if (close != std::string_view::npos) {
    const auto open = raw.rfind(kPromptOpen, close);
    if (open != std::string_view::npos) {
      chosen_start = open;
      chosen = raw.substr(open + kPromptOpen.size(), close - open - kPromptOpen.size());
    }
  }
  if (chosen_start == std::string_view::npos) {
    // No complete marker span: fall back to the last non-empty line.
    std::size_t end = raw.size();
    while (true) {
      const auto nl = end == 0 ? std::string_view::npos : raw.rfind('\n', end - 1);
      const auto start = nl == std::string_view::npos ? 0 : nl + 1;
      auto line = raw.substr(start, end - start);
      if (!trim(line).empty()) {
        chosen = line;
        chosen_start = start;
        break;
      }
      if (nl == std::string_view::npos) break;
      end = nl;
    }
  }
  r.extracted = collapse_spaces(chosen);
  r.step_trace = trim(raw.substr(0, chosen_start == std::string_view::npos ? 0 : chosen_start));
  if (r.extracted.empty()) throw OperatorError("operator response has no prompt text");
  if (r.extracted.size() > kMaxPromptChars) {
    throw OperatorError("extracted prompt exceeds " + std::to_string(kMaxPromptChars) +
                        " characters");
  }
  return r;
}

LlmOperator::LlmOperator(ChatClient& client, OperatorSampling sampling,
                         const TemplateSet& templates)
    : client_(client), sampling_(std::move(sampling)), templates_(templates) {
  if (sampling_.max_attempts < 1) throw ConfigError("operator.max_attempts must be >= 1");
}

OperatorResponse LlmOperator::run(const std::string& instruction) {
  std::string last_error;
  for (int attempt = 0; attempt < sampling_.max_attempts; ++attempt) {
    CompletionRequest req;
    req.model = sampling_.model;
    req.messages = {{"user", instruction}};
    req.temperature = sampling_.temperature;
    req.top_p = sampling_.top_p;
    req.max_tokens = sampling_.max_tokens;
    req.purpose = Purpose::operator_call;
    req.sample_index = attempt;
    const auto raw = client_.complete(req);
    try {
      return parse_new_prompt(raw);
    } catch (const OperatorError& e) {
      last_error = e.what();
    }
  }
  throw OperatorError("no usable prompt after " + std::to_string(sampling_.max_attempts) +
                      " attempts: " + last_error);
}

std::string LlmOperator::ga_offspring(const Prompt& parent1, const Prompt& parent2, Rng&) {
  return run(render_ga_instruction(parent1, parent2, templates_)).extracted;
}

std::string LlmOperator::de_offspring(const DeParents& p, Rng&) {
  return run(render_de_instruction(p.basic, p.donor1, p.donor2, p.prompt3, p.variant, templates_))
      .extracted;
}

std::string LlmOperator::resample(const Prompt& seed, Rng&) {
  return run(render_resample_instruction(seed, templates_)).extracted;
}

}  // namespace evoforge
