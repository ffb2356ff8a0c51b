// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 ICH Forge Contributors

#include <algorithm>
#include <atomic>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "forge/error.hpp"
#include "forge/instruct.hpp"
#include "forge/logging.hpp"

namespace forge::instruct {

using Json = nlohmann::json;

const std::string_view kJsonResponseContract =
    "\n\n请只输出一个JSON数组，不要输出任何其他内容。数组的每个元素是包含\"question\"和"
    "\"answer\"两个字符串字段的对象，例如：[{\"question\": \"……\", \"answer\": \"……\"}]";

namespace {

std::string trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return std::string(s.substr(first, last - first + 1));
}

std::string excerpt(std::string_view s) {
  constexpr std::size_t kMax = 200;
  return std::string(s.substr(0, kMax)) + (s.size() > kMax ? "..." : "");
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size()))
    ++n;
  return n;
}

}  // namespace

PromptTemplate PromptTemplate::make(std::string name, std::string body) {
  const auto n = count_occurrences(body, kSourcePlaceholder);
  if (n != 1)
    throw InvalidArgument("prompt template " + name + " must contain " +
                          std::string(kSourcePlaceholder) + " exactly once, found " +
                          std::to_string(n));
  return PromptTemplate{std::move(name), std::move(body)};
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open prompt template " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return make(path.stem().string(), buf.str());
}

std::string PromptTemplate::fill(std::string_view source_text) const {
  std::string out = body;
  out.replace(out.find(kSourcePlaceholder), kSourcePlaceholder.size(), source_text);
  return out;
}

const PromptTemplate& default_qa_template() {
  static const PromptTemplate t = PromptTemplate::make(
      "qa",
      "我要制作一批非遗领域的知识问答数据，接下来你需要根据给出的非遗领域文本，对其进行表述和格式的"
      "修改，形成一批问答数据。\n\n非遗领域文本：\n{source_text}");
  return t;
}

std::optional<std::vector<std::pair<std::string, std::string>>> parse_qa_response(
    std::string_view reply, std::string& why) {
  Json parsed;
  try {
    parsed = Json::parse(trim(reply));
  } catch (const Json::parse_error&) {
    why = "response is not valid JSON";
    return std::nullopt;
  }
  if (!parsed.is_array()) {
    why = "response is not a JSON array";
    return std::nullopt;
  }
  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    const Json& item = parsed[i];
    if (!item.is_object() || !item.contains("question") || !item.contains("answer") ||
        !item["question"].is_string() || !item["answer"].is_string()) {
      why = "element " + std::to_string(i) + " is not a {question, answer} object";
      return std::nullopt;
    }
    auto q = trim(item["question"].get<std::string>());
    auto a = trim(item["answer"].get<std::string>());
    if (q.empty() || a.empty()) {
      why = "element " + std::to_string(i) + " has an empty question or answer";
      return std::nullopt;
    }
    pairs.emplace_back(std::move(q), std::move(a));
  }
  return pairs;
}

SynthesisResult synthesize_qa_pairs(std::string_view source_text,
                                    const std::optional<std::string>& source_doc_id,
                                    const PromptTemplate& prompt, llm::ChatClient& client,
                                    std::size_t max_pairs) {
  if (trim(source_text).empty()) throw InvalidArgument("source text is empty");

  std::string request = prompt.fill(source_text);
  request.append(kJsonResponseContract);
  const auto exchange = client.complete({{llm::Role::User, std::move(request)}});

  SynthesisResult result;
  std::string why;
  auto pairs = parse_qa_response(exchange.response_text, why);
  if (!pairs) {
    result.diagnostics.push_back({source_doc_id.value_or(""), exchange.request_id,
                                  "rejected generation: " + why,
                                  excerpt(exchange.response_text)});
    return result;
  }

  std::set<std::pair<std::string, std::string>> seen;
  for (auto& [question, answer] : *pairs) {
    if (result.samples.size() >= max_pairs) break;
    if (!seen.insert({question, answer}).second) continue;
    InstructionSample s = build_knowledge_qa(question, answer, source_doc_id);
    s.provenance = Provenance::Synthetic;
    s.review_state = ReviewState::Pending;
    s.id = make_sample_id(s);
    result.samples.push_back(std::move(s));
  }
  return result;
}

SynthesisResult synthesize_batch(std::span<const SourceText> sources, const PromptTemplate& prompt,
                                 llm::ChatClient& client, std::size_t max_pairs,
                                 std::size_t parallelism) {
  std::vector<SynthesisResult> per_source(sources.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < sources.size(); i = next++) {
      const auto& src = sources[i];
      try {
        per_source[i] = synthesize_qa_pairs(src.text, src.doc_id, prompt, client, max_pairs);
      } catch (const llm::TransportError& e) {
        per_source[i].diagnostics.push_back({src.doc_id, e.request_id(), e.what(), ""});
      } catch (const llm::ProtocolError& e) {
        per_source[i].diagnostics.push_back({src.doc_id, e.request_id(), e.what(), ""});
      } catch (const Error& e) {
        per_source[i].diagnostics.push_back({src.doc_id, "", e.what(), ""});
      }
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(parallelism, 1, std::max<std::size_t>(1, sources.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }

  SynthesisResult merged;
  std::set<std::string> ids;
  for (auto& r : per_source) {
    for (auto& s : r.samples)
      if (ids.insert(s.id).second) merged.samples.push_back(std::move(s));
    for (auto& d : r.diagnostics) {
      log::warn("synthesis for " + d.source_doc_id + ": " + d.message);
      merged.diagnostics.push_back(std::move(d));
    }
  }
  return merged;
}

}  // namespace forge::instruct
