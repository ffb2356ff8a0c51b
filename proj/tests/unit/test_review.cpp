// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 ICH Forge Contributors

#include <doctest.h>

#include <fstream>
#include <thread>

#include <httplib.h>

#include "forge/review.hpp"
#include "support/test_paths.hpp"

using namespace forge::review;
using forge::instruct::InstructionSample;
using forge::instruct::ReviewState;
using forge::instruct::TaskKind;
using Json = nlohmann::json;
namespace instruct = forge::instruct;

namespace {

std::vector<InstructionSample> samples() {
  std::vector<InstructionSample> out;
  out.push_back(instruct::build_knowledge_qa("苗族古歌在什么场合演唱?", "鼓社祭和婚丧活动", "doc/miao.txt#0"));
  out.push_back(instruct::build_knowledge_qa("蟒分为哪两种?", "男蟒和女蟒", "doc/mang.txt#0"));
  out.push_back(instruct::build_term_interpretation("布洛陀", "壮族创世神话人物"));
  for (auto& s : out) s.provenance = instruct::Provenance::Synthetic, s.id = instruct::make_sample_id(s);
  return out;
}

std::string fixed_clock() { return "2026-03-01T08:00:00Z"; }

StoreOptions options(std::optional<std::filesystem::path> log = std::nullopt) {
  StoreOptions o;
  o.log_path = std::move(log);
  o.clock = fixed_clock;
  o.documents["doc/miao.txt#0"] = std::string(200, 'x') + "tail";
  o.documents["doc/mang.txt#0"] = "传统戏服中的蟒";
  return o;
}

ReviewDecision decide(const std::string& id, Action a, std::optional<std::string> text = std::nullopt,
                      std::string reviewer = "li") {
  return {id, a, std::move(text), std::move(reviewer), ""};
}

}  // namespace

TEST_SUITE("review store") {
  TEST_CASE("pending queue pages") {
    auto store = ReviewStore::open(samples(), options());
    const auto p0 = store->list_pending(std::nullopt, 0, 2);
    CHECK(p0.total == 3);
    CHECK(p0.items.size() == 2);
    const auto p1 = store->list_pending(std::nullopt, 1, 2);
    CHECK(p1.items.size() == 1);
    CHECK(p0.items[1].sample.id < p1.items[0].sample.id);
    CHECK(store->list_pending(std::nullopt, 5, 2).items.empty());
    CHECK_THROWS_AS(store->list_pending(std::nullopt, 0, 0), ValidationError);
    CHECK_THROWS_AS(store->list_pending(std::nullopt, 0, kMaxPageSize + 1), ValidationError);
    CHECK(store->list_pending(TaskKind::TermInterpretation, 0, 20).total == 1);
    CHECK(store->list_pending(TaskKind::ContextQA, 0, 20).total == 0);
  }

  TEST_CASE("snippets") {
    auto store = ReviewStore::open(samples(), options());
    for (const auto& v : store->list(std::nullopt, std::nullopt, 0, 20).items) {
      if (v.sample.source_doc_id == "doc/miao.txt#0") CHECK(v.source_snippet == std::string(kSnippetCodePoints, 'x'));
      if (v.sample.source_doc_id == "doc/mang.txt#0") CHECK(v.source_snippet == "传统戏服中的蟒");
      if (!v.sample.source_doc_id) CHECK_FALSE(v.source_snippet.has_value());
    }
  }

  TEST_CASE("empty store") {
    auto store = ReviewStore::open(std::vector<InstructionSample>{}, options());
    CHECK(store->list_pending(std::nullopt, 0, 20).total == 0);
    CHECK(store->stats() == QueueStats{});
  }

  TEST_CASE("accept, edit and reject") {
    auto store = ReviewStore::open(samples(), options());
    const auto ids = store->snapshot();
    auto r = store->submit(decide(ids[0].id, Action::Accept));
    CHECK(r.recorded);
    CHECK(r.sample.review_state == ReviewState::Accepted);
    r = store->submit(decide(ids[1].id, Action::Edit, "修订后的答案"));
    CHECK(r.sample.review_state == ReviewState::Edited);
    CHECK(r.sample.edited_output == "修订后的答案");
    CHECK(r.sample.output == ids[1].output);
    CHECK(r.sample.effective_output() == "修订后的答案");
    store->submit(decide(ids[2].id, Action::Reject));
    CHECK(store->stats() == QueueStats{0, 1, 1, 1});
    CHECK(store->list_pending(std::nullopt, 0, 20).total == 0);
    CHECK(store->history().size() == 3);
    CHECK(store->history().front().decided_at == "2026-03-01T08:00:00Z");
  }

  TEST_CASE("reject then accept keeps both in history") {
    auto store = ReviewStore::open(samples(), options());
    const auto id = store->snapshot()[0].id;
    store->submit(decide(id, Action::Reject));
    const auto r = store->submit(decide(id, Action::Accept));
    CHECK(r.sample.review_state == ReviewState::Accepted);
    CHECK(store->history(id).size() == 2);
    CHECK(store->history(id)[0].action == Action::Reject);
  }

  TEST_CASE("accept after edit clears the edit") {
    auto store = ReviewStore::open(samples(), options());
    const auto id = store->snapshot()[0].id;
    store->submit(decide(id, Action::Edit, "改"));
    const auto r = store->submit(decide(id, Action::Accept));
    CHECK_FALSE(r.sample.edited_output.has_value());
    CHECK(instruct::validate_sample(r.sample).empty());
  }

  TEST_CASE("repeating the latest decision records nothing") {
    auto store = ReviewStore::open(samples(), options());
    const auto id = store->snapshot()[0].id;
    CHECK(store->submit(decide(id, Action::Accept)).recorded);
    CHECK_FALSE(store->submit(decide(id, Action::Accept)).recorded);
    CHECK(store->submit(decide(id, Action::Accept, std::nullopt, "wang")).recorded);
    CHECK(store->history(id).size() == 2);
    store->submit(decide(id, Action::Edit, "改"));
    CHECK_FALSE(store->submit(decide(id, Action::Edit, "改")).recorded);
    CHECK(store->submit(decide(id, Action::Edit, "再改")).recorded);
  }

  TEST_CASE("invalid decisions") {
    auto store = ReviewStore::open(samples(), options());
    const auto s = store->snapshot()[0];
    CHECK_THROWS_AS(store->submit(decide("kqa-missing", Action::Accept)), NotFound);
    CHECK_THROWS_AS(store->submit(decide(s.id, Action::Edit)), ValidationError);
    CHECK_THROWS_AS(store->submit(decide(s.id, Action::Edit, "")), ValidationError);
    CHECK_THROWS_AS(store->submit(decide(s.id, Action::Edit, s.output)), ValidationError);
    CHECK_THROWS_AS(store->submit(decide(s.id, Action::Accept, "text")), ValidationError);
    CHECK(store->history().empty());
    CHECK(store->stats().pending == 3);
  }

  TEST_CASE("invalid sample sets") {
    auto dup = samples();
    dup.push_back(dup[0]);
    CHECK_THROWS_AS(ReviewStore::open(dup, options()), forge::InvalidArgument);
    auto bad = samples();
    bad[0].output.clear();
    CHECK_THROWS_AS(ReviewStore::open(bad, options()), forge::InvalidArgument);
  }

  TEST_CASE("actions and decision json") {
    CHECK(parse_action("EDIT") == Action::Edit);
    CHECK_FALSE(parse_action("skip").has_value());
    const ReviewDecision d{"x", Action::Edit, "t", "li", "2026-01-01T00:00:00Z"};
    CHECK(decision_from_json(to_json(d)) == d);
    CHECK_THROWS_AS(decision_from_json(Json{{"action", "Accept"}}), ValidationError);
    CHECK_THROWS_AS(decision_from_json(Json{{"sample_id", "x"}, {"action", "maybe"}}), ValidationError);
    CHECK(to_json(QueueStats{1, 2, 3, 4})["total"] == 10);
  }
}

TEST_SUITE("decision log") {
  TEST_CASE("replay reproduces the store") {
    forge::testing::TempDir dir;
    const auto log = dir.path() / "decisions.jsonl";
    std::vector<InstructionSample> before;
    {
      auto store = ReviewStore::open(samples(), options(log));
      const auto snap = store->snapshot();
      store->submit(decide(snap[0].id, Action::Edit, "改"));
      store->submit(decide(snap[1].id, Action::Reject));
      store->submit(decide(snap[1].id, Action::Accept));
      before = store->snapshot();
    }
    auto reopened = ReviewStore::open(samples(), options(log));
    CHECK(reopened->snapshot() == before);
    CHECK(reopened->history().size() == 3);
    CHECK(replay(samples(), read_decision_log(log)) != samples());
    auto replayed = replay(samples(), read_decision_log(log));
    std::sort(replayed.begin(), replayed.end(), [](auto& a, auto& b) { return a.id < b.id; });
    CHECK(replayed == before);
  }

  TEST_CASE("torn trailing line is dropped") {
    forge::testing::TempDir dir;
    const auto log = dir.path() / "decisions.jsonl";
    std::string id;
    {
      auto store = ReviewStore::open(samples(), options(log));
      id = store->snapshot()[0].id;
      store->submit(decide(id, Action::Accept));
    }
    { std::ofstream(log, std::ios::app) << "{\"sample_id\":\"" << id << "\",\"act"; }
    auto store = ReviewStore::open(samples(), options(log));
    CHECK(store->history().size() == 1);
    CHECK(store->find(id)->review_state == ReviewState::Accepted);
    store->submit(decide(id, Action::Reject));
    CHECK(read_decision_log(log).size() == 2);
  }

  TEST_CASE("log naming an unknown sample is refused") {
    forge::testing::TempDir dir;
    const auto log = dir.path() / "decisions.jsonl";
    forge::testing::spit(log, to_json(ReviewDecision{"kqa-nope", Action::Accept, {}, "", "t"}).dump() + "\n");
    CHECK_THROWS_AS(ReviewStore::open(samples(), options(log)), forge::IoError);
  }

  TEST_CASE("concurrent submissions all land") {
    forge::testing::TempDir dir;
    const auto log = dir.path() / "decisions.jsonl";
    std::vector<InstructionSample> many;
    for (int i = 0; i < 64; ++i) many.push_back(instruct::build_knowledge_qa("q" + std::to_string(i), "a"));
    auto store = ReviewStore::open(many, options(log));
    {
      std::vector<std::jthread> threads;
      for (int t = 0; t < 8; ++t)
        threads.emplace_back([&, t] {
          for (int i = t; i < 64; i += 8) {
            store->submit(decide(many[i].id, i % 2 ? Action::Accept : Action::Reject, std::nullopt, "r" + std::to_string(t)));
            (void)store->stats();
            (void)store->list_pending(std::nullopt, 0, 10);
          }
        });
    }
    CHECK(store->stats() == QueueStats{0, 32, 0, 32});
    CHECK(read_decision_log(log).size() == 64);
    CHECK(ReviewStore::open(many, options(log))->snapshot() == store->snapshot());
  }
}

TEST_SUITE("review http api") {
  struct Running {
    std::unique_ptr<ReviewStore> store = ReviewStore::open(samples(), options());
    ReviewServer server;
    int port;
    explicit Running(ServerOptions o = {}) : server(*store, std::move(o)), port(server.start()) {}
    ~Running() { server.stop(); }
    httplib::Client client() const { return httplib::Client("127.0.0.1", port); }
  };

  TEST_CASE("list, decide, stats, export") {
    Running r;
    auto cli = r.client();
    auto res = cli.Get("/api/v1/samples?page_size=2");
    REQUIRE(res);
    CHECK(res->status == 200);
    auto body = Json::parse(res->body);
    CHECK(body["total"] == 3);
    CHECK(body["items"].size() == 2);
    CHECK(body["page_size"] == 2);
    CHECK(body["items"][0].contains("source_snippet"));
    const std::string id = body["items"][0]["id"];

    res = cli.Post("/api/v1/decisions", Json{{"sample_id", id}, {"action", "edit"}, {"edited_output", "新答案"}, {"reviewer", "li"}}.dump(),
                   "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    body = Json::parse(res->body);
    CHECK(body["recorded"] == true);
    CHECK(body["sample"]["review_state"] == "Edited");

    res = cli.Post("/api/v1/decisions", Json{{"sample_id", id}, {"action", "edit"}, {"edited_output", "新答案"}, {"reviewer", "li"}}.dump(),
                   "application/json");
    CHECK(Json::parse(res->body)["recorded"] == false);

    res = cli.Get("/api/v1/stats");
    CHECK(Json::parse(res->body) == Json{{"pending", 2}, {"accepted", 0}, {"edited", 1}, {"rejected", 0}, {"total", 3}});

    CHECK(Json::parse(cli.Get("/api/v1/samples?state=edited")->body)["total"] == 1);
    CHECK(Json::parse(cli.Get("/api/v1/samples?state=all&task=TermInterpretation")->body)["total"] == 1);

    res = cli.Get("/api/v1/export");
    REQUIRE(res);
    CHECK(res->get_header_value("Content-Type") == "application/x-ndjson");
    CHECK(res->body == Json(instruct::export_rows(r.store->snapshot(), {ReviewState::Edited})[0]).dump() + "\n");
    res = cli.Get("/api/v1/export?states=pending");
    CHECK(std::count(res->body.begin(), res->body.end(), '\n') == 2);
  }

  TEST_CASE("errors come back as json") {
    Running r;
    auto cli = r.client();
    auto check_error = [](const httplib::Result& res, int status, const std::string& code) {
      REQUIRE(res);
      CHECK(res->status == status);
      const auto body = Json::parse(res->body);
      CHECK(body["error"]["code"] == code);
      CHECK(body["error"]["message"].is_string());
    };
    check_error(cli.Post("/api/v1/decisions", "{not json", "application/json"), 400, "invalid_json");
    check_error(cli.Post("/api/v1/decisions", Json{{"sample_id", "kqa-0"}, {"action", "accept"}}.dump(), "application/json"),
                404, "not_found");
    const std::string id = r.store->snapshot()[0].id;
    check_error(cli.Post("/api/v1/decisions", Json{{"sample_id", id}, {"action", "edit"}}.dump(), "application/json"), 400,
                "validation_error");
    check_error(cli.Get("/api/v1/samples?page_size=0"), 400, "validation_error");
    check_error(cli.Get("/api/v1/samples?state=done"), 400, "validation_error");
    check_error(cli.Get("/api/v1/samples?page=x"), 400, "validation_error");
    check_error(cli.Get("/api/v1/export?states=done"), 400, "validation_error");
    check_error(cli.Get("/api/v1/nothing"), 404, "not_found");
  }

  TEST_CASE("bearer token") {
    Running r(ServerOptions{std::string("s3cret"), std::nullopt});
    auto cli = r.client();
    auto res = cli.Get("/api/v1/stats");
    REQUIRE(res);
    CHECK(res->status == 401);
    CHECK(Json::parse(res->body)["error"]["code"] == "unauthorized");
    cli.set_bearer_token_auth("wrong");
    CHECK(cli.Get("/api/v1/stats")->status == 401);
    cli.set_bearer_token_auth("s3cret");
    CHECK(cli.Get("/api/v1/stats")->status == 200);
  }

  TEST_CASE("static ui directory") {
    forge::testing::TempDir dir;
    forge::testing::spit(dir.path() / "index.html", "<html>review</html>");
    Running r(ServerOptions{std::nullopt, dir.path()});
    auto res = r.client().Get("/index.html");
    REQUIRE(res);
    CHECK(res->body == "<html>review</html>");
  }
}
