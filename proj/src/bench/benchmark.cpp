// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 ICH Forge Contributors

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <thread>

#include "forge/bench.hpp"
#include "forge/error.hpp"
#include "forge/hash.hpp"
#include "forge/logging.hpp"

namespace forge::bench {

namespace fs = std::filesystem;
using Json = nlohmann::json;
using instruct::TaskKind;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<instruct::InstructionSample> load_eval_set(TaskKind task, const fs::path& path) {
  auto samples = instruct::read_samples(path);
  if (samples.empty()) throw InvalidArgument("eval set " + path.string() + " is empty");
  for (const auto& s : samples)
    if (s.task != task)
      throw InvalidArgument("eval set " + path.string() + " for " +
                            std::string(instruct::to_string(task)) + " contains a " +
                            std::string(instruct::to_string(s.task)) + " sample (" + s.id + ")");
  std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return samples;
}

std::vector<llm::ChatMessage> messages_for(const EndpointSpec& spec, std::string user) {
  std::vector<llm::ChatMessage> msgs;
  if (spec.system_prompt) msgs.push_back({llm::Role::System, *spec.system_prompt});
  msgs.push_back({llm::Role::User, std::move(user)});
  return msgs;
}

std::vector<metrics::TextPair> pairs_of(const std::vector<SampleRecord>& records) {
  std::vector<metrics::TextPair> pairs;
  pairs.reserve(records.size());
  for (const auto& r : records) pairs.push_back({r.candidate, r.reference});
  return pairs;
}

Json scores_json(const metrics::MetricReport& r) {
  return {{"rouge1_f", r.rouge1_f}, {"rouge2_f", r.rouge2_f}, {"rougeL_f", r.rougeL_f},
          {"bleu1", r.bleu1},       {"bleu2", r.bleu2},       {"bleu3", r.bleu3},
          {"bleu4", r.bleu4},       {"chrf", r.chrf}};
}

metrics::MetricReport scores_from_json(const Json& j, std::size_t sample_count) {
  metrics::MetricReport r;
  r.rouge1_f = j.at("rouge1_f").get<double>();
  r.rouge2_f = j.at("rouge2_f").get<double>();
  r.rougeL_f = j.at("rougeL_f").get<double>();
  r.bleu1 = j.at("bleu1").get<double>();
  r.bleu2 = j.at("bleu2").get<double>();
  r.bleu3 = j.at("bleu3").get<double>();
  r.bleu4 = j.at("bleu4").get<double>();
  r.chrf = j.at("chrf").get<double>();
  r.sample_count = sample_count;
  return r;
}

}  // namespace

BenchmarkConfig BenchmarkConfig::from_json(const Json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw InvalidArgument("benchmark config must be a JSON object");
  BenchmarkConfig cfg;
  cfg.source = doc;
  try {
    const auto defaults = llm::EndpointConfig::from_env();
    for (const auto& e : doc.at("endpoints")) {
      EndpointSpec spec;
      spec.endpoint = defaults;
      spec.name = e.at("name").get<std::string>();
      if (e.contains("base_url")) spec.endpoint.base_url = e["base_url"].get<std::string>();
      if (e.contains("model")) spec.endpoint.model_name = e["model"].get<std::string>();
      if (e.contains("api_key")) spec.endpoint.api_key = e["api_key"].get<std::string>();
      if (e.contains("api_key_env")) {
        const auto var = e["api_key_env"].get<std::string>();
        if (const char* v = std::getenv(var.c_str()); v && *v) spec.endpoint.api_key = v;
      }
      spec.endpoint.timeout_seconds = e.value("timeout_seconds", spec.endpoint.timeout_seconds);
      spec.endpoint.max_retries = e.value("max_retries", spec.endpoint.max_retries);
      spec.endpoint.temperature = e.value("temperature", spec.endpoint.temperature);
      if (e.contains("system_prompt") && !e["system_prompt"].is_null())
        spec.system_prompt = e["system_prompt"].get<std::string>();
      cfg.endpoints.push_back(std::move(spec));
    }
    const auto& sets = doc.at("eval_sets");
    if (!sets.is_object()) throw InvalidArgument("\"eval_sets\" must be an object");
    for (auto it = sets.begin(); it != sets.end(); ++it)
      if (!instruct::parse_task(it.key())) throw InvalidArgument("unknown task " + it.key());
    for (auto task : instruct::kAllTasks) {
      const std::string key(instruct::to_string(task));
      if (!sets.contains(key)) continue;
      fs::path p = sets[key].get<std::string>();
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      cfg.eval_sets.emplace_back(task, p);
    }
    const auto mode_name = doc.value("mode", std::string("char"));
    auto mode = metrics::parse_token_mode(mode_name);
    if (!mode) throw InvalidArgument("unknown tokenization mode " + mode_name);
    cfg.mode = *mode;
    cfg.seed = doc.value("seed", std::uint64_t{0});
    cfg.concurrency = doc.value("concurrency", std::size_t{4});
    if (doc.contains("output_dir")) {
      cfg.output_dir = doc["output_dir"].get<std::string>();
      if (cfg.output_dir.is_relative() && !base_dir.empty()) cfg.output_dir = base_dir / cfg.output_dir;
    }
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("malformed benchmark config: ") + e.what());
  }
  return cfg;
}

BenchmarkConfig BenchmarkConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open benchmark config " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InvalidArgument("benchmark config " + path.string() + ": " + e.what());
  }
  return from_json(doc, path.parent_path());
}

void BenchmarkConfig::validate() const {
  if (endpoints.empty()) throw InvalidArgument("benchmark config has no endpoints");
  if (eval_sets.empty()) throw InvalidArgument("benchmark config has no eval sets");
  for (const auto& [task, path] : eval_sets)
    if (!fs::is_regular_file(path))
      throw InvalidArgument("eval set for " + std::string(instruct::to_string(task)) +
                            " not found: " + path.string());
  for (const auto& e : endpoints) {
    if (e.name.empty()) throw InvalidArgument("endpoint with empty name");
    e.endpoint.validate();
  }
  if (concurrency == 0) throw InvalidArgument("concurrency must be positive");
}

std::string BenchmarkConfig::hash() const { return fnv1a_hex(source.dump()); }

metrics::MetricReport rescore(const TaskResult& task, metrics::TokenMode mode) {
  const auto pairs = pairs_of(task.samples);
  return metrics::evaluate_corpus(pairs, mode);
}

BenchmarkResult run_benchmark(const BenchmarkConfig& config, const RunOptions& options) {
  config.validate();

  std::vector<std::pair<TaskKind, std::vector<instruct::InstructionSample>>> eval_sets;
  for (const auto& [task, path] : config.eval_sets)
    eval_sets.emplace_back(task, load_eval_set(task, path));

  BenchmarkResult result;
  result.metadata.timestamp = options.clock ? options.clock() : utc_now();
  result.metadata.config_hash = config.hash();
  result.metadata.seed = config.seed;
  result.metadata.mode = config.mode;
  for (const auto& [task, samples] : eval_sets) result.tasks.push_back(task);

  std::size_t reachable = 0;
  for (const auto& spec : config.endpoints) {
    ModelResult model;
    model.name = spec.name;
    model.model = spec.endpoint.model_name;

    std::unique_ptr<llm::ChatClient> client =
        options.client_factory ? options.client_factory(spec)
                               : std::make_unique<llm::HttpChatClient>(spec.endpoint);
    try {
      client->complete(messages_for(spec, "ping"));
    } catch (const Error& e) {
      model.skipped = true;
      model.skip_reason = e.what();
      log::warn("skipping endpoint " + spec.name + ": " + e.what());
      result.models.push_back(std::move(model));
      continue;
    }
    ++reachable;

    for (const auto& [task, samples] : eval_sets) {
      TaskResult tr;
      tr.task = task;
      tr.samples.resize(samples.size());
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (std::size_t i = next++; i < samples.size(); i = next++) {
          const auto& sample = samples[i];
          SampleRecord& rec = tr.samples[i];
          rec.sample_id = sample.id;
          rec.reference = sample.effective_output();
          try {
            rec.candidate = client->complete(messages_for(spec, instruct::render_prompt(sample)))
                                .response_text;
          } catch (const Error& e) {
            rec.failed = true;
            rec.candidate.clear();
            log::warn("endpoint " + spec.name + " failed on " + sample.id + ": " + e.what());
          }
        }
      };
      const std::size_t workers = std::min(config.concurrency, samples.size());
      {
        std::vector<std::jthread> pool;
        for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
        worker();
      }
      tr.failures = static_cast<std::size_t>(
          std::count_if(tr.samples.begin(), tr.samples.end(), [](const auto& r) { return r.failed; }));
      tr.report = rescore(tr, config.mode);
      model.tasks.push_back(std::move(tr));
    }
    result.models.push_back(std::move(model));
  }
  if (reachable == 0) throw Error("no benchmark endpoint passed preflight");
  return result;
}

Json to_json(const BenchmarkResult& result) {
  Json models = Json::array();
  for (const auto& m : result.models) {
    Json tasks = Json::array();
    for (const auto& t : m.tasks) {
      Json samples = Json::array();
      for (const auto& s : t.samples)
        samples.push_back({{"id", s.sample_id},
                           {"candidate", s.candidate},
                           {"reference", s.reference},
                           {"failed", s.failed}});
      tasks.push_back({{"task", instruct::to_string(t.task)},
                       {"sample_count", t.report.sample_count},
                       {"failures", t.failures},
                       {"scores", scores_json(t.report)},
                       {"samples", std::move(samples)}});
    }
    models.push_back({{"name", m.name},
                      {"model", m.model},
                      {"skipped", m.skipped},
                      {"skip_reason", m.skip_reason},
                      {"results", std::move(tasks)}});
  }
  Json tasks = Json::array();
  for (auto t : result.tasks) tasks.push_back(instruct::to_string(t));
  return {{"metadata",
           {{"timestamp", result.metadata.timestamp},
            {"config_hash", result.metadata.config_hash},
            {"seed", result.metadata.seed},
            {"mode", metrics::to_string(result.metadata.mode)}}},
          {"tasks", std::move(tasks)},
          {"models", std::move(models)}};
}

BenchmarkResult result_from_json(const Json& doc) {
  auto task_of = [](const Json& j) {
    auto t = instruct::parse_task(j.get<std::string>());
    if (!t) throw InvalidArgument("unknown task " + j.get<std::string>());
    return *t;
  };
  try {
    BenchmarkResult r;
    const auto& meta = doc.at("metadata");
    r.metadata.timestamp = meta.at("timestamp").get<std::string>();
    r.metadata.config_hash = meta.at("config_hash").get<std::string>();
    r.metadata.seed = meta.at("seed").get<std::uint64_t>();
    auto mode = metrics::parse_token_mode(meta.at("mode").get<std::string>());
    if (!mode) throw InvalidArgument("unknown tokenization mode in result");
    r.metadata.mode = *mode;
    for (const auto& t : doc.at("tasks")) r.tasks.push_back(task_of(t));
    for (const auto& m : doc.at("models")) {
      ModelResult mr;
      mr.name = m.at("name").get<std::string>();
      mr.model = m.at("model").get<std::string>();
      mr.skipped = m.at("skipped").get<bool>();
      mr.skip_reason = m.at("skip_reason").get<std::string>();
      for (const auto& t : m.at("results")) {
        TaskResult tr;
        tr.task = task_of(t.at("task"));
        tr.failures = t.at("failures").get<std::size_t>();
        tr.report = scores_from_json(t.at("scores"), t.at("sample_count").get<std::size_t>());
        for (const auto& s : t.at("samples"))
          tr.samples.push_back({s.at("id").get<std::string>(), s.at("candidate").get<std::string>(),
                                s.at("reference").get<std::string>(), s.at("failed").get<bool>()});
        mr.tasks.push_back(std::move(tr));
      }
      r.models.push_back(std::move(mr));
    }
    return r;
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("malformed benchmark result: ") + e.what());
  }
}

}  // namespace forge::bench
