// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 ICH Forge Contributors

#include <algorithm>
#include <cctype>
#include <random>
#include <unordered_set>

#include "forge/error.hpp"
#include "forge/hash.hpp"
#include "forge/instruct.hpp"
#include "forge/jsonl.hpp"

namespace forge::instruct {

using Json = nlohmann::json;

namespace {

constexpr std::string_view kTaskNames[] = {"KnowledgeQA", "ContextQA", "TermInterpretation"};
constexpr std::string_view kTaskTitles[] = {"Knowledge Q&A", "Context-aware Knowledge Q&A",
                                            "Terminology Interpretation"};
constexpr std::string_view kProvenanceNames[] = {"Template", "Synthetic", "Manual"};
constexpr std::string_view kStateNames[] = {"Pending", "Accepted", "Edited", "Rejected"};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
           return std::tolower(x) == std::tolower(y);
         });
}

template <typename Enum, std::size_t N>
std::optional<Enum> parse_enum(const std::string_view (&names)[N], std::string_view name) {
  for (std::size_t i = 0; i < N; ++i)
    if (iequals(names[i], name)) return static_cast<Enum>(i);
  return std::nullopt;
}

struct FrameSet {
  InstructionFrames frames;
  std::string joiner;
};

const FrameSet& frame_set(FrameLanguage language) {
  static const FrameSet english{
      {"<Reference Material>",
       "Using the provided content, answer the following question and ensure the output "
       "strictly derives from the given material:",
       "As a professional scholar in Intangible Cultural Heritage (ICH), provide a concise "
       "introduction to the following Chinese ICH item:"},
      " "};
  static const FrameSet chinese{
      {"<参考材料>", "请根据所提供的内容回答以下问题，并确保输出严格来源于所给材料：",
       "作为非物质文化遗产（非遗）领域的专业学者，请简要介绍以下中国非遗项目："},
      ""};
  return language == FrameLanguage::Chinese ? chinese : english;
}

void require(const std::string& value, const char* what) {
  if (value.empty()) throw InvalidArgument(std::string(what) + " must not be empty");
}

std::optional<std::string> optional_string(const Json& row, const char* key) {
  if (!row.contains(key) || row[key].is_null()) return std::nullopt;
  return row[key].get<std::string>();
}

// Unbiased draw in [0, bound) from the 64-bit engine; std distributions are
// implementation-defined and would make splits differ across standard libraries.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

}  // namespace

std::string_view to_string(TaskKind task) { return kTaskNames[static_cast<std::size_t>(task)]; }
std::string_view to_string(Provenance p) { return kProvenanceNames[static_cast<std::size_t>(p)]; }
std::string_view to_string(ReviewState s) { return kStateNames[static_cast<std::size_t>(s)]; }
std::string_view display_name(TaskKind task) {
  return kTaskTitles[static_cast<std::size_t>(task)];
}

std::optional<TaskKind> parse_task(std::string_view name) {
  return parse_enum<TaskKind>(kTaskNames, name);
}
std::optional<Provenance> parse_provenance(std::string_view name) {
  return parse_enum<Provenance>(kProvenanceNames, name);
}
std::optional<ReviewState> parse_review_state(std::string_view name) {
  return parse_enum<ReviewState>(kStateNames, name);
}

std::set<ReviewState> parse_state_list(std::string_view list) {
  std::set<ReviewState> out;
  while (!list.empty()) {
    const auto comma = list.find(',');
    std::string_view item = list.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) {
      auto state = parse_review_state(item);
      if (!state) throw InvalidArgument("unknown review state: " + std::string(item));
      out.insert(*state);
    }
    if (comma == std::string_view::npos) break;
    list.remove_prefix(comma + 1);
  }
  return out;
}

const std::string& InstructionSample::effective_output() const {
  return review_state == ReviewState::Edited && edited_output ? *edited_output : output;
}

std::vector<std::string> validate_sample(const InstructionSample& s) {
  std::vector<std::string> problems;
  if (s.id.empty()) problems.emplace_back("id is empty");
  if (s.instruction.empty()) problems.emplace_back("instruction is empty");
  if (s.output.empty()) problems.emplace_back("output is empty");
  if (s.task == TaskKind::ContextQA) {
    if (!s.context || s.context->empty()) problems.emplace_back("ContextQA sample has no context");
  } else if (s.context) {
    problems.emplace_back(std::string(to_string(s.task)) + " sample must not carry a context");
  }
  if (s.review_state == ReviewState::Edited) {
    if (!s.edited_output || s.edited_output->empty())
      problems.emplace_back("Edited sample has no edited_output");
    else if (*s.edited_output == s.output)
      problems.emplace_back("edited_output equals output");
  } else if (s.edited_output) {
    problems.emplace_back("edited_output present on a non-Edited sample");
  }
  return problems;
}

std::string make_sample_id(const InstructionSample& s) {
  static constexpr std::string_view kPrefixes[] = {"kqa", "cqa", "term"};
  std::string key;
  auto add = [&key](std::string_view part) {
    key.append(part);
    key.push_back('\x1f');
  };
  add(to_string(s.task));
  add(to_string(s.provenance));
  add(s.instruction);
  add(s.context ? std::string_view(*s.context) : std::string_view{});
  add(s.output);
  add(s.source_doc_id ? std::string_view(*s.source_doc_id) : std::string_view{});
  return std::string(kPrefixes[static_cast<std::size_t>(s.task)]) + "-" + fnv1a_hex(key);
}

const InstructionFrames& frames(FrameLanguage language) { return frame_set(language).frames; }

InstructionSample build_knowledge_qa(const std::string& question, const std::string& answer,
                                     std::optional<std::string> source_doc_id) {
  require(question, "question");
  require(answer, "answer");
  InstructionSample s;
  s.task = TaskKind::KnowledgeQA;
  s.instruction = question;
  s.output = answer;
  s.provenance = Provenance::Template;
  s.source_doc_id = std::move(source_doc_id);
  s.id = make_sample_id(s);
  return s;
}

InstructionSample build_context_qa(const std::string& material, const std::string& question,
                                   const std::string& answer,
                                   std::optional<std::string> source_doc_id,
                                   FrameLanguage language) {
  require(material, "material");
  require(question, "question");
  require(answer, "answer");
  const auto& fs = frame_set(language);
  InstructionSample s;
  s.task = TaskKind::ContextQA;
  s.instruction = fs.frames.reference_marker + fs.joiner + fs.frames.context_directive +
                  fs.joiner + question;
  s.context = material;
  s.output = answer;
  s.provenance = Provenance::Template;
  s.source_doc_id = std::move(source_doc_id);
  s.id = make_sample_id(s);
  return s;
}

InstructionSample build_term_interpretation(const std::string& term,
                                            const std::string& explanation,
                                            std::optional<std::string> source_doc_id,
                                            FrameLanguage language) {
  require(term, "term");
  require(explanation, "explanation");
  const auto& fs = frame_set(language);
  InstructionSample s;
  s.task = TaskKind::TermInterpretation;
  s.instruction = fs.frames.term_directive + fs.joiner + term;
  s.output = explanation;
  s.provenance = Provenance::Template;
  s.source_doc_id = std::move(source_doc_id);
  s.id = make_sample_id(s);
  return s;
}

std::string render_prompt(const InstructionSample& s) {
  if (s.task != TaskKind::ContextQA || !s.context) return s.instruction;
  for (auto lang : {FrameLanguage::English, FrameLanguage::Chinese}) {
    const std::string& marker = frames(lang).reference_marker;
    if (auto pos = s.instruction.find(marker); pos != std::string::npos) {
      std::string prompt = s.instruction;
      prompt.replace(pos, marker.size(), *s.context);
      return prompt;
    }
  }
  return *s.context + "\n\n" + s.instruction;
}

Json to_json(const InstructionSample& s) {
  auto opt = [](const std::optional<std::string>& v) { return v ? Json(*v) : Json(nullptr); };
  return {{"id", s.id},
          {"task", to_string(s.task)},
          {"instruction", s.instruction},
          {"context", opt(s.context)},
          {"output", s.output},
          {"provenance", to_string(s.provenance)},
          {"source_doc_id", opt(s.source_doc_id)},
          {"review_state", to_string(s.review_state)},
          {"edited_output", opt(s.edited_output)}};
}

InstructionSample sample_from_json(const Json& row) {
  try {
    InstructionSample s;
    s.id = row.at("id").get<std::string>();
    const auto task = row.at("task").get<std::string>();
    auto parsed_task = parse_task(task);
    if (!parsed_task) throw Error("unknown task " + task);
    s.task = *parsed_task;
    s.instruction = row.at("instruction").get<std::string>();
    s.context = optional_string(row, "context");
    s.output = row.at("output").get<std::string>();
    const auto provenance = row.value("provenance", std::string("Template"));
    auto parsed_prov = parse_provenance(provenance);
    if (!parsed_prov) throw Error("unknown provenance " + provenance);
    s.provenance = *parsed_prov;
    s.source_doc_id = optional_string(row, "source_doc_id");
    const auto state = row.value("review_state", std::string("Pending"));
    auto parsed_state = parse_review_state(state);
    if (!parsed_state) throw Error("unknown review_state " + state);
    s.review_state = *parsed_state;
    s.edited_output = optional_string(row, "edited_output");
    return s;
  } catch (const Json::exception& e) {
    throw Error(std::string("malformed instruction record: ") + e.what());
  }
}

std::vector<InstructionSample> read_samples(const std::filesystem::path& path) {
  std::vector<InstructionSample> out;
  auto errors = jsonl::for_each(path, [&](const Json& row, std::size_t line) {
    try {
      out.push_back(sample_from_json(row));
    } catch (const Error& e) {
      throw Error(path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  if (!errors.empty())
    throw Error(path.string() + ":" + std::to_string(errors.front().line_number) +
                ": invalid JSON");
  return out;
}

void write_samples(const std::filesystem::path& path, std::span<const InstructionSample> samples) {
  std::vector<Json> rows;
  rows.reserve(samples.size());
  for (const auto& s : samples) rows.push_back(to_json(s));
  jsonl::write(path, rows);
}

std::vector<Json> export_rows(std::span<const InstructionSample> samples,
                              const std::set<ReviewState>& include) {
  std::unordered_set<std::string> seen;
  for (const auto& s : samples)
    if (!seen.insert(s.id).second) throw InvalidArgument("duplicate sample id " + s.id);

  std::vector<const InstructionSample*> picked;
  for (const auto& s : samples)
    if (include.contains(s.review_state)) picked.push_back(&s);
  std::sort(picked.begin(), picked.end(),
            [](const auto* a, const auto* b) { return a->id < b->id; });

  std::vector<Json> rows;
  rows.reserve(picked.size());
  for (const auto* s : picked) {
    if (s->review_state == ReviewState::Edited && (!s->edited_output || s->edited_output->empty()))
      throw InvalidArgument("Edited sample " + s->id + " has no edited_output");
    Json row = to_json(*s);
    row["output"] = s->effective_output();
    row["edited_output"] = nullptr;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::size_t export_dataset(std::span<const InstructionSample> samples,
                           const std::set<ReviewState>& include,
                           const std::filesystem::path& path) {
  const auto rows = export_rows(samples, include);
  jsonl::write(path, rows);
  return rows.size();
}

std::vector<InstructionSample> make_eval_split(std::span<const InstructionSample> samples,
                                               TaskKind task, std::size_t size,
                                               std::uint64_t seed) {
  std::vector<InstructionSample> pool;
  for (const auto& s : samples)
    if (s.task == task &&
        (s.review_state == ReviewState::Accepted || s.review_state == ReviewState::Edited))
      pool.push_back(s);
  if (pool.size() < size)
    throw InvalidArgument("not enough " + std::string(to_string(task)) + " samples: need " +
                          std::to_string(size) + ", have " + std::to_string(pool.size()));
  std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < size; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(bounded(rng, pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(size);
  std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return pool;
}

}  // namespace forge::instruct
