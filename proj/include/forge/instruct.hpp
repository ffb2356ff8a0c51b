// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 ICH Forge Contributors

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "forge/llm_client.hpp"

namespace forge::instruct {

enum class TaskKind { KnowledgeQA, ContextQA, TermInterpretation };
enum class Provenance { Template, Synthetic, Manual };
enum class ReviewState { Pending, Accepted, Edited, Rejected };

inline constexpr TaskKind kAllTasks[] = {TaskKind::KnowledgeQA, TaskKind::ContextQA,
                                         TaskKind::TermInterpretation};

std::string_view to_string(TaskKind task);
std::string_view to_string(Provenance provenance);
std::string_view to_string(ReviewState state);

/// Human-readable task title used in report headings.
std::string_view display_name(TaskKind task);

/// Parsing is case-insensitive ("accepted" == "Accepted").
std::optional<TaskKind> parse_task(std::string_view name);
std::optional<Provenance> parse_provenance(std::string_view name);
std::optional<ReviewState> parse_review_state(std::string_view name);

/// Comma-separated review states, e.g. "accepted,edited". Throws
/// InvalidArgument on an unknown name.
std::set<ReviewState> parse_state_list(std::string_view list);

struct InstructionSample {
  std::string id;
  TaskKind task = TaskKind::KnowledgeQA;
  std::string instruction;
  std::optional<std::string> context;  // ContextQA only
  std::string output;
  Provenance provenance = Provenance::Template;
  std::optional<std::string> source_doc_id;
  ReviewState review_state = ReviewState::Pending;
  std::optional<std::string> edited_output;  // Edited only

  /// edited_output for Edited samples, output otherwise.
  const std::string& effective_output() const;

  bool operator==(const InstructionSample&) const = default;
};

/// Store-level invariant violations; empty means valid.
std::vector<std::string> validate_sample(const InstructionSample& sample);

/// Content-derived id: task prefix plus a hash of the sample's fields.
std::string make_sample_id(const InstructionSample& sample);

// ---------------------------------------------------------------------------
// Instruction frames

enum class FrameLanguage { English, Chinese };

struct InstructionFrames {
  std::string reference_marker;   // stands in for the material inside the instruction
  std::string context_directive;  // ContextQA sentence before the question
  std::string term_directive;     // TermInterpretation persona sentence before the term
};

const InstructionFrames& frames(FrameLanguage language);

InstructionSample build_knowledge_qa(const std::string& question, const std::string& answer,
                                     std::optional<std::string> source_doc_id = std::nullopt);

InstructionSample build_context_qa(const std::string& material, const std::string& question,
                                   const std::string& answer,
                                   std::optional<std::string> source_doc_id = std::nullopt,
                                   FrameLanguage language = FrameLanguage::English);

InstructionSample build_term_interpretation(const std::string& term,
                                            const std::string& explanation,
                                            std::optional<std::string> source_doc_id = std::nullopt,
                                            FrameLanguage language = FrameLanguage::English);

/// The single user message sent to a model. For ContextQA the reference
/// marker is replaced by the context, giving context + directive + question.
std::string render_prompt(const InstructionSample& sample);

// ---------------------------------------------------------------------------
// Synthesis

inline constexpr std::string_view kSourcePlaceholder = "{source_text}";

struct PromptTemplate {
  std::string name;
  std::string body;

  /// Throws InvalidArgument unless `body` contains the placeholder exactly once.
  static PromptTemplate make(std::string name, std::string body);
  static PromptTemplate load(const std::filesystem::path& path);

  std::string fill(std::string_view source_text) const;
};

/// Knowledge-QA generation prompt for ICH source texts.
const PromptTemplate& default_qa_template();

/// Appended to every filled template; asks for `[{"question":..,"answer":..}]`.
extern const std::string_view kJsonResponseContract;

struct SynthesisDiagnostic {
  std::string source_doc_id;
  std::string request_id;
  std::string message;
  std::string response_excerpt;
};

struct SynthesisResult {
  std::vector<InstructionSample> samples;
  std::vector<SynthesisDiagnostic> diagnostics;
};

/// Parses a model reply as a JSON array of question/answer objects. Returns
/// nullopt (with `why` filled) when the reply is anything else.
std::optional<std::vector<std::pair<std::string, std::string>>> parse_qa_response(
    std::string_view reply, std::string& why);

/// Sends one request for `source_text` and turns the reply into Pending
/// Synthetic KnowledgeQA samples, at most `max_pairs`, duplicates collapsed.
/// An unusable reply yields zero samples and one diagnostic. Transport and
/// protocol failures from the client propagate (they carry the request id).
SynthesisResult synthesize_qa_pairs(std::string_view source_text,
                                    const std::optional<std::string>& source_doc_id,
                                    const PromptTemplate& prompt, llm::ChatClient& client,
                                    std::size_t max_pairs);

struct SourceText {
  std::string doc_id;
  std::string text;
};

/// synthesize_qa_pairs over many sources with at most `parallelism` requests
/// in flight. Output follows source order regardless of completion order;
/// client failures become diagnostics instead of aborting the batch.
SynthesisResult synthesize_batch(std::span<const SourceText> sources, const PromptTemplate& prompt,
                                 llm::ChatClient& client, std::size_t max_pairs,
                                 std::size_t parallelism = 4);

// ---------------------------------------------------------------------------
// Dataset I/O

nlohmann::json to_json(const InstructionSample& sample);
/// Structural decoding only; call validate_sample() for store invariants.
InstructionSample sample_from_json(const nlohmann::json& row);

std::vector<InstructionSample> read_samples(const std::filesystem::path& path);
void write_samples(const std::filesystem::path& path, std::span<const InstructionSample> samples);

/// Rows for the samples whose state is in `include`, ordered by id. Edited
/// samples carry their edited text in "output" and a null "edited_output".
/// Throws InvalidArgument on duplicate ids.
std::vector<nlohmann::json> export_rows(std::span<const InstructionSample> samples,
                                        const std::set<ReviewState>& include);

/// Writes export_rows() as JSONL and returns the number of lines.
std::size_t export_dataset(std::span<const InstructionSample> samples,
                           const std::set<ReviewState>& include,
                           const std::filesystem::path& path);

/// Seeded selection without replacement among Accepted/Edited samples of
/// `task`. Depends only on the sample set, not its order. Result is sorted by
/// id. Throws InvalidArgument when fewer than `size` candidates exist.
std::vector<InstructionSample> make_eval_split(std::span<const InstructionSample> samples,
                                               TaskKind task, std::size_t size,
                                               std::uint64_t seed);

}  // namespace forge::instruct
