// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 ICH Forge Contributors

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>

#include "forge/logging.hpp"
#include "forge/review.hpp"
#include "forge/utf8.hpp"

namespace forge::review {

using instruct::InstructionSample;
using instruct::ReviewState;
using Json = nlohmann::json;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

void apply(InstructionSample& s, const ReviewDecision& d) {
  switch (d.action) {
    case Action::Accept:
      s.review_state = ReviewState::Accepted;
      s.edited_output.reset();
      break;
    case Action::Reject:
      s.review_state = ReviewState::Rejected;
      s.edited_output.reset();
      break;
    case Action::Edit:
      s.review_state = ReviewState::Edited;
      s.edited_output = d.edited_output;
      break;
  }
}

bool same_decision(const ReviewDecision& a, const ReviewDecision& b) {
  return a.sample_id == b.sample_id && a.action == b.action &&
         a.edited_output == b.edited_output && a.reviewer == b.reviewer;
}

std::string snippet(const std::string& text) {
  const auto cps = text::decode_utf8(text);
  std::string out;
  const std::size_t n = std::min(cps.size(), kSnippetCodePoints);
  for (std::size_t i = 0; i < n; ++i) text::append_utf8(out, cps[i]);
  return out;
}

class LogWriter {
 public:
  explicit LogWriter(const std::filesystem::path& path) : path_(path) {
    fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) throw IoError("cannot open decision log " + path.string() + ": " + std::strerror(errno));
  }
  ~LogWriter() {
    if (fd_ >= 0) ::close(fd_);
  }
  LogWriter(const LogWriter&) = delete;
  LogWriter& operator=(const LogWriter&) = delete;

  void append(const std::string& line) {
    const char* p = line.data();
    std::size_t left = line.size();
    while (left > 0) {
      const ssize_t n = ::write(fd_, p, left);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw IoError("cannot append to " + path_.string() + ": " + std::strerror(errno));
      }
      p += n;
      left -= static_cast<std::size_t>(n);
    }
    if (::fsync(fd_) != 0)
      throw IoError("cannot sync " + path_.string() + ": " + std::strerror(errno));
  }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
};

// Reads complete lines. A trailing fragment without a newline is a torn write
// and gets dropped; `complete_bytes` reports where the intact part ends.
std::vector<ReviewDecision> read_log(const std::filesystem::path& path, std::uintmax_t* complete_bytes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read decision log " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string data = buf.str();

  std::vector<ReviewDecision> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < data.size()) {
    const auto nl = data.find('\n', pos);
    if (nl == std::string::npos) {
      log::warn("ignoring incomplete trailing line in " + path.string());
      break;
    }
    ++line_no;
    std::string_view line(data.data() + pos, nl - pos);
    pos = nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    try {
      out.push_back(decision_from_json(Json::parse(line)));
    } catch (const std::exception& e) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (complete_bytes) *complete_bytes = data.rfind('\n') == std::string::npos ? 0 : data.rfind('\n') + 1;
  return out;
}

}  // namespace

std::string_view to_string(Action action) {
  switch (action) {
    case Action::Accept: return "Accept";
    case Action::Reject: return "Reject";
    case Action::Edit: return "Edit";
  }
  return "Accept";
}

std::optional<Action> parse_action(std::string_view name) {
  const auto n = lower(name);
  if (n == "accept") return Action::Accept;
  if (n == "reject") return Action::Reject;
  if (n == "edit") return Action::Edit;
  return std::nullopt;
}

Json to_json(const ReviewDecision& d) {
  return {{"sample_id", d.sample_id},
          {"action", to_string(d.action)},
          {"edited_output", d.edited_output ? Json(*d.edited_output) : Json(nullptr)},
          {"reviewer", d.reviewer},
          {"decided_at", d.decided_at}};
}

ReviewDecision decision_from_json(const Json& row) {
  if (!row.is_object()) throw ValidationError("decision must be a JSON object");
  auto str = [&](const char* key, bool required) -> std::optional<std::string> {
    auto it = row.find(key);
    if (it == row.end() || it->is_null()) {
      if (required) throw ValidationError(std::string("missing field ") + key);
      return std::nullopt;
    }
    if (!it->is_string()) throw ValidationError(std::string("field ") + key + " must be a string");
    return it->get<std::string>();
  };
  ReviewDecision d;
  d.sample_id = *str("sample_id", true);
  const auto action = str("action", true);
  const auto parsed = parse_action(*action);
  if (!parsed) throw ValidationError("unknown action " + *action);
  d.action = *parsed;
  d.edited_output = str("edited_output", false);
  d.reviewer = str("reviewer", false).value_or("");
  d.decided_at = str("decided_at", false).value_or("");
  return d;
}

Json to_json(const QueueStats& s) {
  return {{"pending", s.pending},
          {"accepted", s.accepted},
          {"edited", s.edited},
          {"rejected", s.rejected},
          {"total", s.total()}};
}

std::vector<InstructionSample> replay(std::vector<InstructionSample> samples,
                                      const std::vector<ReviewDecision>& decisions) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < samples.size(); ++i) index.emplace(samples[i].id, i);
  for (const auto& d : decisions) {
    auto it = index.find(d.sample_id);
    if (it != index.end()) apply(samples[it->second], d);
  }
  return samples;
}

std::vector<ReviewDecision> read_decision_log(const std::filesystem::path& path) {
  return read_log(path, nullptr);
}

struct ReviewStore::Impl {
  mutable std::shared_mutex mutex;
  std::vector<InstructionSample> samples;  // sorted by id
  std::unordered_map<std::string, std::size_t> index;
  std::vector<ReviewDecision> history;
  std::unordered_map<std::string, std::size_t> latest;  // sample id -> history index
  std::map<std::string, std::string> documents;
  std::function<std::string()> clock;
  std::unique_ptr<LogWriter> log;

  void record(const ReviewDecision& d) {
    apply(samples[index.at(d.sample_id)], d);
    latest[d.sample_id] = history.size();
    history.push_back(d);
  }

  SampleView view(const InstructionSample& s) const {
    SampleView v{s, std::nullopt};
    if (s.source_doc_id) {
      auto it = documents.find(*s.source_doc_id);
      if (it != documents.end()) v.source_snippet = snippet(it->second);
    }
    return v;
  }
};

ReviewStore::ReviewStore(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
ReviewStore::~ReviewStore() = default;

std::unique_ptr<ReviewStore> ReviewStore::open(std::vector<InstructionSample> samples,
                                               StoreOptions options) {
  auto impl = std::make_unique<Impl>();
  std::sort(samples.begin(), samples.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto problems = instruct::validate_sample(samples[i]);
    if (!problems.empty())
      throw InvalidArgument("sample " + samples[i].id + ": " + problems.front());
    if (!impl->index.emplace(samples[i].id, i).second)
      throw InvalidArgument("duplicate sample id " + samples[i].id);
  }
  impl->samples = std::move(samples);
  impl->documents = std::move(options.documents);
  impl->clock = options.clock ? std::move(options.clock) : utc_now;

  if (options.log_path) {
    const auto& path = *options.log_path;
    if (std::filesystem::exists(path)) {
      std::uintmax_t intact = 0;
      for (const auto& d : read_log(path, &intact)) {
        if (!impl->index.count(d.sample_id))
          throw IoError("decision log " + path.string() + " names unknown sample " + d.sample_id);
        impl->record(d);
      }
      if (std::filesystem::file_size(path) != intact) std::filesystem::resize_file(path, intact);
    }
    impl->log = std::make_unique<LogWriter>(path);
  }
  return std::unique_ptr<ReviewStore>(new ReviewStore(std::move(impl)));
}

std::unique_ptr<ReviewStore> ReviewStore::open(const std::filesystem::path& sample_path,
                                               StoreOptions options) {
  return open(instruct::read_samples(sample_path), std::move(options));
}

Page ReviewStore::list(std::optional<ReviewState> state, std::optional<instruct::TaskKind> task,
                       std::size_t page, std::size_t page_size) const {
  if (page_size < 1 || page_size > kMaxPageSize)
    throw ValidationError("page_size must be between 1 and " + std::to_string(kMaxPageSize));
  std::shared_lock lock(impl_->mutex);
  Page out;
  out.page = page;
  out.page_size = page_size;
  const std::size_t first = page * page_size;
  for (const auto& s : impl_->samples) {
    if (state && s.review_state != *state) continue;
    if (task && s.task != *task) continue;
    if (out.total >= first && out.items.size() < page_size) out.items.push_back(impl_->view(s));
    ++out.total;
  }
  return out;
}

Page ReviewStore::list_pending(std::optional<instruct::TaskKind> task, std::size_t page,
                               std::size_t page_size) const {
  return list(ReviewState::Pending, task, page, page_size);
}

SubmitResult ReviewStore::submit(ReviewDecision decision) {
  if (decision.action == Action::Edit) {
    if (!decision.edited_output || decision.edited_output->empty())
      throw ValidationError("Edit requires non-empty edited_output");
  } else if (decision.edited_output) {
    throw ValidationError("edited_output is only allowed with Edit");
  }

  std::unique_lock lock(impl_->mutex);
  auto it = impl_->index.find(decision.sample_id);
  if (it == impl_->index.end()) throw NotFound("unknown sample " + decision.sample_id);
  const InstructionSample& current = impl_->samples[it->second];

  if (auto last = impl_->latest.find(decision.sample_id); last != impl_->latest.end())
    if (same_decision(impl_->history[last->second], decision)) return {current, false};

  if (decision.action == Action::Edit && *decision.edited_output == current.output)
    throw ValidationError("edited_output must differ from the current output");

  if (decision.decided_at.empty()) decision.decided_at = impl_->clock();
  if (impl_->log) impl_->log->append(to_json(decision).dump() + "\n");
  impl_->record(decision);
  return {impl_->samples[it->second], true};
}

QueueStats ReviewStore::stats() const {
  std::shared_lock lock(impl_->mutex);
  QueueStats s;
  for (const auto& sample : impl_->samples) {
    switch (sample.review_state) {
      case ReviewState::Pending: ++s.pending; break;
      case ReviewState::Accepted: ++s.accepted; break;
      case ReviewState::Edited: ++s.edited; break;
      case ReviewState::Rejected: ++s.rejected; break;
    }
  }
  return s;
}

std::vector<InstructionSample> ReviewStore::snapshot() const {
  std::shared_lock lock(impl_->mutex);
  return impl_->samples;
}

std::optional<InstructionSample> ReviewStore::find(std::string_view id) const {
  std::shared_lock lock(impl_->mutex);
  auto it = impl_->index.find(std::string(id));
  if (it == impl_->index.end()) return std::nullopt;
  return impl_->samples[it->second];
}

std::vector<ReviewDecision> ReviewStore::history() const {
  std::shared_lock lock(impl_->mutex);
  return impl_->history;
}

std::vector<ReviewDecision> ReviewStore::history(std::string_view sample_id) const {
  std::shared_lock lock(impl_->mutex);
  std::vector<ReviewDecision> out;
  for (const auto& d : impl_->history)
    if (d.sample_id == sample_id) out.push_back(d);
  return out;
}

}  // namespace forge::review
