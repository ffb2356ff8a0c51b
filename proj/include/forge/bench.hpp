// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 ICH Forge Contributors

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "forge/instruct.hpp"
#include "forge/llm_client.hpp"
#include "forge/metrics.hpp"

namespace forge::bench {

struct EndpointSpec {
  std::string name;
  llm::EndpointConfig endpoint;
  std::optional<std::string> system_prompt;
};

struct BenchmarkConfig {
  std::vector<EndpointSpec> endpoints;
  std::vector<std::pair<instruct::TaskKind, std::filesystem::path>> eval_sets;  // task order
  metrics::TokenMode mode = metrics::TokenMode::Char;
  std::filesystem::path output_dir = "results";
  std::uint64_t seed = 0;
  std::size_t concurrency = 4;
  nlohmann::json source = nlohmann::json::object();  // as loaded, for hashing

  /// Endpoint fields missing from the file fall back to FORGE_API_BASE,
  /// FORGE_API_KEY and FORGE_MODEL. Relative eval-set paths resolve against
  /// `base_dir`.
  static BenchmarkConfig from_json(const nlohmann::json& doc,
                                   const std::filesystem::path& base_dir = {});
  static BenchmarkConfig load(const std::filesystem::path& path);

  /// Throws InvalidArgument when there is no endpoint, no eval set, or an
  /// eval-set file is missing.
  void validate() const;

  /// FNV-1a over the canonical dump of `source`.
  std::string hash() const;
};

struct SampleRecord {
  std::string sample_id;
  std::string candidate;
  std::string reference;
  bool failed = false;
};

struct TaskResult {
  instruct::TaskKind task = instruct::TaskKind::KnowledgeQA;
  metrics::MetricReport report;
  std::vector<SampleRecord> samples;  // ordered by sample id
  std::size_t failures = 0;
};

struct ModelResult {
  std::string name;
  std::string model;
  bool skipped = false;
  std::string skip_reason;
  std::vector<TaskResult> tasks;
};

struct RunMetadata {
  std::string timestamp;
  std::string config_hash;
  std::uint64_t seed = 0;
  metrics::TokenMode mode = metrics::TokenMode::Char;
};

struct BenchmarkResult {
  RunMetadata metadata;
  std::vector<instruct::TaskKind> tasks;
  std::vector<ModelResult> models;  // config order
};

using ClientFactory = std::function<std::unique_ptr<llm::ChatClient>(const EndpointSpec&)>;

struct RunOptions {
  ClientFactory client_factory;        // default: HttpChatClient per endpoint
  std::function<std::string()> clock;  // default: current UTC time, ISO-8601
};

/// Queries every endpoint on every eval set and scores the replies.
///
/// Each endpoint first gets a one-message preflight; one that fails is
/// skipped and reported, and the run throws only if all of them fail. A
/// request that fails after retries is scored as an empty candidate and
/// counted in the task's failure tally.
BenchmarkResult run_benchmark(const BenchmarkConfig& config, const RunOptions& options = {});

/// Recomputes a task's MetricReport from its stored samples.
metrics::MetricReport rescore(const TaskResult& task, metrics::TokenMode mode);

enum class ReportFormat { Markdown, Csv, Json };
std::optional<ReportFormat> parse_report_format(std::string_view name);

/// One table per task: rows are models in config order, columns are the
/// eight scores x100 at two decimals. Markdown bolds each column's best value.
std::string render_report(const BenchmarkResult& result, ReportFormat format);

nlohmann::json to_json(const BenchmarkResult& result);
BenchmarkResult result_from_json(const nlohmann::json& doc);

// ---------------------------------------------------------------------------
// Training configuration for external fine-tuning frameworks

struct TrainingConfig {
  double learning_rate = 2e-4;
  int max_epochs = 5;
  std::string finetuning_type = "lora";
  int batch_size = 4;
  int max_sequence_length = 1024;
};

struct TrainingOverrides {
  std::optional<double> learning_rate;
  std::optional<int> max_epochs;
  std::optional<std::string> finetuning_type;
  std::optional<int> batch_size;
  std::optional<int> max_sequence_length;

  /// Parses `key=value` strings; throws InvalidArgument on unknown keys or
  /// unparsable values.
  static TrainingOverrides parse(const std::vector<std::string>& assignments);
};

/// Defaults with overrides applied. Throws InvalidArgument on a non-positive
/// numeric value or an empty finetuning_type.
TrainingConfig make_training_config(const TrainingOverrides& overrides);

/// `key=value` lines in declaration order; learning_rate in compact
/// scientific notation (2e-4).
std::string render_training_cfg(const TrainingConfig& config);
nlohmann::json to_json(const TrainingConfig& config);

/// Writes `train.cfg` and `train.json` into `out_dir`.
TrainingConfig emit_training_config(const TrainingOverrides& overrides,
                                    const std::filesystem::path& out_dir);

}  // namespace forge::bench
