// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 ICH Forge Contributors

#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "forge/error.hpp"
#include "forge/instruct.hpp"

namespace forge::review {

class NotFound : public Error {
 public:
  using Error::Error;
};

class ValidationError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

enum class Action { Accept, Reject, Edit };

std::string_view to_string(Action action);
std::optional<Action> parse_action(std::string_view name);  // case-insensitive

struct ReviewDecision {
  std::string sample_id;
  Action action = Action::Accept;
  std::optional<std::string> edited_output;
  std::string reviewer;
  std::string decided_at;  // ISO-8601 UTC; filled by the store when empty

  bool operator==(const ReviewDecision&) const = default;
};

nlohmann::json to_json(const ReviewDecision& decision);
ReviewDecision decision_from_json(const nlohmann::json& row);

struct QueueStats {
  std::size_t pending = 0;
  std::size_t accepted = 0;
  std::size_t edited = 0;
  std::size_t rejected = 0;

  std::size_t total() const { return pending + accepted + edited + rejected; }
  bool operator==(const QueueStats&) const = default;
};

nlohmann::json to_json(const QueueStats& stats);

struct SampleView {
  instruct::InstructionSample sample;
  std::optional<std::string> source_snippet;
};

struct Page {
  std::vector<SampleView> items;
  std::size_t page = 0;
  std::size_t page_size = 0;
  std::size_t total = 0;  // matching samples across all pages
};

struct SubmitResult {
  instruct::InstructionSample sample;
  bool recorded = false;  // false when the decision repeated the latest one
};

inline constexpr std::size_t kMaxPageSize = 200;
inline constexpr std::size_t kSnippetCodePoints = 160;

struct StoreOptions {
  std::optional<std::filesystem::path> log_path;  // no persistence when empty
  std::map<std::string, std::string> documents;   // doc id -> text, for snippets
  std::function<std::string()> clock;              // default: current UTC time
};

/// Sample store with an append-only decision log.
///
/// Thread-safe: readers share a lock, writes go through one exclusive commit
/// path that appends and fsyncs the log before the new state is visible.
class ReviewStore {
 public:
  /// Replays the log, if it exists, on top of `samples`. Throws
  /// InvalidArgument on duplicate or invalid samples and IoError on a log that
  /// cannot be read or names unknown samples.
  static std::unique_ptr<ReviewStore> open(std::vector<instruct::InstructionSample> samples,
                                           StoreOptions options = {});
  static std::unique_ptr<ReviewStore> open(const std::filesystem::path& sample_path,
                                           StoreOptions options = {});

  ~ReviewStore();
  ReviewStore(const ReviewStore&) = delete;
  ReviewStore& operator=(const ReviewStore&) = delete;

  /// Samples in `state` (all states when empty), ordered by id. Throws
  /// ValidationError when page_size is outside [1, kMaxPageSize].
  Page list(std::optional<instruct::ReviewState> state,
            std::optional<instruct::TaskKind> task, std::size_t page,
            std::size_t page_size) const;
  Page list_pending(std::optional<instruct::TaskKind> task, std::size_t page,
                    std::size_t page_size) const;

  /// Throws NotFound on an unknown sample and ValidationError when an Edit has
  /// no text or repeats the current output, or a non-Edit carries text.
  SubmitResult submit(ReviewDecision decision);

  QueueStats stats() const;
  std::vector<instruct::InstructionSample> snapshot() const;  // ordered by id
  std::optional<instruct::InstructionSample> find(std::string_view id) const;
  std::vector<ReviewDecision> history() const;
  std::vector<ReviewDecision> history(std::string_view sample_id) const;

 private:
  struct Impl;
  explicit ReviewStore(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

/// Applies `decisions` in order to `samples` without validation or I/O.
std::vector<instruct::InstructionSample> replay(std::vector<instruct::InstructionSample> samples,
                                                const std::vector<ReviewDecision>& decisions);

std::vector<ReviewDecision> read_decision_log(const std::filesystem::path& path);

struct ServerOptions {
  std::optional<std::string> token;  // bearer token required when set
  std::optional<std::filesystem::path> ui_dir;
};

/// HTTP front-end for a ReviewStore under /api/v1.
class ReviewServer {
 public:
  ReviewServer(ReviewStore& store, ServerOptions options = {});
  ~ReviewServer();
  ReviewServer(const ReviewServer&) = delete;
  ReviewServer& operator=(const ReviewServer&) = delete;

  /// Binds and starts serving on a background thread. Port 0 picks a free
  /// port. Returns the bound port; throws IoError when binding fails.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  /// Blocks until stop() is called.
  void wait();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace forge::review
