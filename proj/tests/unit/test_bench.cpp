// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 ICH Forge Contributors

#include <doctest.h>

#include <cstdlib>
#include <map>
#include <mutex>

#include "forge/bench.hpp"
#include "forge/error.hpp"
#include "forge/utf8.hpp"
#include "support/bench_fixture.hpp"
#include "support/generators.hpp"
#include "support/metric_oracle.hpp"
#include "support/mock_llm.hpp"
#include "support/test_paths.hpp"

using namespace forge::bench;
using forge::instruct::InstructionSample;
using forge::instruct::ReviewState;
using forge::instruct::TaskKind;
using Json = nlohmann::json;
namespace fs = std::filesystem;
namespace llm = forge::llm;
namespace instruct = forge::instruct;
namespace metrics = forge::metrics;
using forge::testing::Fixture;
using forge::testing::answer_key;
using forge::testing::fake_for;

namespace {

const TaskResult& task_of(const ModelResult& m, TaskKind t) {
  for (const auto& r : m.tasks)
    if (r.task == t) return r;
  throw std::runtime_error("task missing");
}

bool close(double a, double b) { return std::abs(a - b) < 1e-12; }

}  // namespace

TEST_SUITE("benchmark run") {
  TEST_CASE("identity endpoint scores one everywhere, empty scores zero") {
    Fixture f({"identity", "empty"});
    const auto r = f.run();
    REQUIRE(r.models.size() == 2);
    for (const auto& t : r.models[0].tasks)
      for (double v : t.report.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
    for (const auto& t : r.models[1].tasks)
      for (double v : t.report.values()) CHECK(v == 0.0);
    CHECK(r.tasks == std::vector{TaskKind::KnowledgeQA, TaskKind::TermInterpretation});
    CHECK(task_of(r.models[0], TaskKind::KnowledgeQA).report.sample_count == 3);
  }

  TEST_CASE("edited references and sample order") {
    Fixture f({"identity"});
    const auto r = f.run();
    const auto& t = task_of(r.models[0], TaskKind::KnowledgeQA);
    for (std::size_t i = 1; i < t.samples.size(); ++i) CHECK(t.samples[i - 1].sample_id < t.samples[i].sample_id);
    bool saw_edit = false;
    for (const auto& s : t.samples) saw_edit |= s.reference == "分为男蟒和女蟒两种";
    CHECK(saw_edit);
  }

  TEST_CASE("scores are the mean of oracle pair scores") {
    Fixture f({"half"});
    const auto r = f.run();
    for (const auto& t : r.models[0].tasks) {
      double sums[8] = {};
      for (const auto& s : t.samples) {
        const auto c = forge::testing::split_chars(s.candidate), ref = forge::testing::split_chars(s.reference);
        const auto o = forge::testing::oracle::score(c, ref, c, ref);
        const double v[8] = {o.rouge1, o.rouge2, o.rougeL, o.bleu1, o.bleu2, o.bleu3, o.bleu4, o.chrf};
        for (int i = 0; i < 8; ++i) sums[i] += v[i];
      }
      const auto got = t.report.values();
      for (int i = 0; i < 8; ++i) CHECK(close(got[i], sums[i] / static_cast<double>(t.samples.size())));
    }
  }

  TEST_CASE("unreachable endpoint is skipped, all unreachable fails") {
    Fixture f({"dead", "identity"});
    const auto r = f.run();
    CHECK(r.models[0].skipped);
    CHECK(r.models[0].skip_reason.find("connection refused") != std::string::npos);
    CHECK(r.models[0].tasks.empty());
    CHECK_FALSE(r.models[1].skipped);
    Fixture g({"dead"});
    CHECK_THROWS_AS(g.run(), forge::Error);
  }

  TEST_CASE("failed requests are tallied and scored empty") {
    Fixture f({"flaky"});
    const auto r = f.run();
    const auto& t = task_of(r.models[0], TaskKind::KnowledgeQA);
    CHECK(t.failures == 1);
    for (const auto& s : t.samples)
      if (s.failed) CHECK(s.candidate.empty());
    CHECK(t.report.rouge1_f == doctest::Approx(2.0 / 3.0));
    CHECK(task_of(r.models[0], TaskKind::TermInterpretation).failures == 0);
  }

  TEST_CASE("repeat runs are identical") {
    Fixture f({"half", "identity"});
    CHECK(to_json(f.run()) == to_json(f.run()));
    const auto r = f.run();
    CHECK(r.metadata.timestamp == "2026-01-01T00:00:00Z");
    CHECK(r.metadata.seed == 7);
    CHECK(r.metadata.config_hash == f.config().hash());
  }

  TEST_CASE("rescore reproduces stored scores") {
    Fixture f({"half"});
    const auto r = f.run();
    for (const auto& t : r.models[0].tasks) CHECK(rescore(t, r.metadata.mode).values() == t.report.values());
  }

  TEST_CASE("json round trip") {
    Fixture f({"dead", "half", "flaky"});
    const auto r = f.run();
    const auto j = to_json(r);
    CHECK(to_json(result_from_json(Json::parse(j.dump()))) == j);
    CHECK_THROWS_AS(result_from_json(Json{{"metadata", 1}}), forge::InvalidArgument);
  }

  TEST_CASE("config validation") {
    Fixture f({"identity"});
    CHECK_NOTHROW(f.config().validate());
    auto doc = f.doc;
    doc["eval_sets"]["KnowledgeQA"] = "missing.jsonl";
    CHECK_THROWS_AS(BenchmarkConfig::from_json(doc, f.dir.path()).validate(), forge::InvalidArgument);
    doc = f.doc;
    doc["endpoints"] = Json::array();
    CHECK_THROWS_AS(BenchmarkConfig::from_json(doc, f.dir.path()).validate(), forge::InvalidArgument);
    doc = f.doc;
    doc["eval_sets"]["Poetry"] = "x";
    CHECK_THROWS_AS(BenchmarkConfig::from_json(doc, f.dir.path()), forge::InvalidArgument);
    doc = f.doc;
    doc["mode"] = "bytes";
    CHECK_THROWS_AS(BenchmarkConfig::from_json(doc, f.dir.path()), forge::InvalidArgument);
    doc = f.doc;
    doc["eval_sets"]["KnowledgeQA"] = "term.jsonl";  // wrong task in file
    RunOptions opts;
    opts.client_factory = [](const EndpointSpec& spec) { return fake_for(spec.name); };
    CHECK_THROWS_AS(run_benchmark(BenchmarkConfig::from_json(doc, f.dir.path()), opts), forge::InvalidArgument);
  }

  TEST_CASE("over HTTP with a system prompt") {
    const auto key = answer_key();
    forge::testing::MockLlmServer server([&](const Json& body, int) -> forge::testing::MockReply {
      const auto prompt = forge::testing::MockLlmServer::last_user(body);
      if (prompt == "ping") return {200, forge::testing::chat_body("pong")};
      if (body["messages"][0]["role"] != "system") return {400, "no system prompt"};
      return {200, forge::testing::chat_body(key.at(prompt))};
    });
    Fixture f({});
    f.doc["endpoints"].push_back({{"name", "local"}, {"base_url", server.base_url()}, {"model", "qwen"},
                                  {"system_prompt", "你是非遗专家"}, {"max_retries", 0}});
    const auto r = run_benchmark(f.config());
    REQUIRE(r.models.size() == 1);
    CHECK(r.models[0].model == "qwen");
    for (const auto& t : r.models[0].tasks) CHECK(t.report.chrf == doctest::Approx(1.0));
  }
}

TEST_SUITE("report") {
  TEST_CASE("formats") {
    CHECK(parse_report_format("md") == ReportFormat::Markdown);
    CHECK(parse_report_format("CSV") == ReportFormat::Csv);
    CHECK_FALSE(parse_report_format("html").has_value());
    CHECK_THROWS_AS(render_report(BenchmarkResult{}, ReportFormat::Markdown), forge::InvalidArgument);
  }

  TEST_CASE("markdown matches the golden file") {
    Fixture f(forge::testing::kGoldenEndpoints);
    const auto md = render_report(f.run(), ReportFormat::Markdown);
    const fs::path golden = forge::testing::golden_report_path();
    if (std::getenv("FORGE_UPDATE_GOLDEN")) forge::testing::spit(golden, md);
    CHECK(md == forge::testing::slurp(golden));
  }

  TEST_CASE("markdown cells and bolding") {
    Fixture f({"identity", "half"});
    const auto r = f.run();
    const auto md = render_report(r, ReportFormat::Markdown);
    CHECK(md.find("## Knowledge Q&A") != std::string::npos);
    CHECK(md.find("## Terminology Interpretation") != std::string::npos);
    CHECK(md.find("| identity | **100.00** | **100.00** |") != std::string::npos);
    const auto& half = task_of(r.models[1], TaskKind::KnowledgeQA).report;
    CHECK(md.find("| half | " + metrics::format_percent(half.rouge1_f) + " |") != std::string::npos);
    CHECK(md.find("Skipped") == std::string::npos);
  }

  TEST_CASE("csv") {
    Fixture f({"identity", "half"});
    const auto csv = render_report(f.run(), ReportFormat::Csv);
    CHECK(csv.rfind("task,model,ROUGE-1-F,ROUGE-2-F,ROUGE-L-F,BLEU-1,BLEU-2,BLEU-3,BLEU-4,chrF\r\n", 0) == 0);
    CHECK(csv.find("KnowledgeQA,identity,100.00,100.00,100.00,100.00,100.00,100.00,100.00,100.00\r\n") !=
          std::string::npos);
    std::size_t lines = 0;
    for (std::size_t p = csv.find("\r\n"); p != std::string::npos; p = csv.find("\r\n", p + 2)) ++lines;
    CHECK(lines == 5);
  }

  TEST_CASE("json report is the result document") {
    Fixture f({"half"});
    const auto r = f.run();
    CHECK(Json::parse(render_report(r, ReportFormat::Json)) == to_json(r));
  }
}

TEST_SUITE("training config") {
  TEST_CASE("defaults") {
    const auto c = make_training_config({});
    CHECK(c.learning_rate == 2e-4);
    CHECK(c.max_epochs == 5);
    CHECK(c.finetuning_type == "lora");
    CHECK(c.batch_size == 4);
    CHECK(c.max_sequence_length == 1024);
    CHECK(render_training_cfg(c) ==
          "learning_rate=2e-4\nmax_epochs=5\nfinetuning_type=lora\nbatch_size=4\nmax_sequence_length=1024\n");
  }

  TEST_CASE("overrides") {
    const auto c = make_training_config(TrainingOverrides::parse({"batch_size=8", "learning_rate=1.5e-5"}));
    CHECK(c.batch_size == 8);
    CHECK(c.max_epochs == 5);
    CHECK(render_training_cfg(c).find("learning_rate=1.5e-5\n") != std::string::npos);
    CHECK_THROWS_AS(make_training_config(TrainingOverrides::parse({"max_epochs=0"})), forge::InvalidArgument);
    CHECK_THROWS_AS(make_training_config(TrainingOverrides::parse({"learning_rate=-1"})), forge::InvalidArgument);
    CHECK_THROWS_AS(make_training_config(TrainingOverrides::parse({"finetuning_type="})), forge::InvalidArgument);
    CHECK_THROWS_AS(TrainingOverrides::parse({"warmup=3"}), forge::InvalidArgument);
    CHECK_THROWS_AS(TrainingOverrides::parse({"batch_size=eight"}), forge::InvalidArgument);
    CHECK_THROWS_AS(TrainingOverrides::parse({"batch_size"}), forge::InvalidArgument);
  }

  TEST_CASE("emitted files") {
    forge::testing::TempDir dir;
    emit_training_config(TrainingOverrides::parse({"finetuning_type=full"}), dir.path());
    CHECK(forge::testing::slurp(dir.path() / "train.cfg").find("finetuning_type=full\n") != std::string::npos);
    const auto j = Json::parse(forge::testing::slurp(dir.path() / "train.json"));
    CHECK(j["learning_rate"] == 2e-4);
    CHECK(j["finetuning_type"] == "full");
  }
}
