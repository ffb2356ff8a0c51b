// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 ICH Forge Contributors

#include <doctest.h>

#include <random>

#include "forge/annotation.hpp"
#include "support/generators.hpp"
#include "support/test_paths.hpp"

using namespace forge::annotation;
using Json = nlohmann::json;

namespace {

const std::string kExample = "<ICH-TITLE>苗族古歌</ICH-TITLE>流传于<ICH-PLACE>贵州省</ICH-PLACE>";

std::string parse_error_message(const std::string& markup) {
  try {
    parse_annotated_text(markup);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

bool has_kind(const ValidationReport& r, ViolationKind k) {
  for (const auto& v : r)
    if (v.kind == k) return true;
  return false;
}

}  // namespace

TEST_SUITE("parse_annotated_text") {
  TEST_CASE("title and place example") {
    const auto doc = parse_annotated_text(kExample);
    CHECK(doc.text == "苗族古歌流传于贵州省");
    CHECK(doc.entities == std::vector<EntitySpan>{{0, 4, EntityLabel::IchTitle}, {7, 10, EntityLabel::IchPlace}});
  }

  TEST_CASE("plain text has no spans") {
    const auto doc = parse_annotated_text("无标注文本");
    CHECK(doc.text == "无标注文本");
    CHECK(doc.entities.empty());
  }

  TEST_CASE("unknown label names the label and byte offset") {
    const auto msg = parse_error_message("<ICH-SONG>x</ICH-SONG>");
    CHECK(msg.find("unknown label ICH-SONG") != std::string::npos);
    CHECK(msg.find("byte offset 0") != std::string::npos);
    try {
      parse_annotated_text("古<ICH-SONG>x</ICH-SONG>");
    } catch (const ParseError& e) {
      CHECK(e.offset() == 3);
    }
  }

  TEST_CASE("structural errors") {
    CHECK(parse_error_message("<ICH-TITLE>苗族").find("unclosed") != std::string::npos);
    CHECK(parse_error_message("<ICH-TITLE>苗族</ICH-PLACE>").find("mismatched") != std::string::npos);
    CHECK(parse_error_message("<ICH-TITLE>苗<ICH-TERM>族</ICH-TERM></ICH-TITLE>").find("nested") !=
          std::string::npos);
    CHECK(parse_error_message("苗族</ICH-TERM>") != "");
    CHECK(parse_error_message("<ICH-TERM></ICH-TERM>").find("empty") != std::string::npos);
    CHECK(parse_error_message("a & b").find("escape") != std::string::npos);
    CHECK(parse_error_message("a < b") != "");
    CHECK(parse_error_message("bad\xff") != "");
  }

  TEST_CASE("escapes resolve and offsets count code points") {
    const auto doc = parse_annotated_text("&lt;&amp;<ICH-TERM>𠀀古歌</ICH-TERM>");
    CHECK(doc.text == "<&𠀀古歌");
    CHECK(doc.entities == std::vector<EntitySpan>{{2, 5, EntityLabel::IchTerm}});
    CHECK(extract_entities(doc)[0].first == "𠀀古歌");
  }
}

TEST_SUITE("serialize_annotated") {
  TEST_CASE("round trip of the example") {
    CHECK(serialize_annotated(parse_annotated_text(kExample)) == kExample);
  }
  TEST_CASE("no entities gives escaped text") {
    AnnotatedDocument doc;
    doc.text = "1<2 & 3>2";
    CHECK(serialize_annotated(doc) == "1&lt;2 &amp; 3>2");
  }
  TEST_CASE("invalid document is rejected") {
    AnnotatedDocument doc;
    doc.text = "苗族古歌";
    doc.entities = {{0, 3, EntityLabel::IchTitle}, {2, 4, EntityLabel::IchTerm}};
    CHECK_THROWS_AS(serialize_annotated(doc), forge::InvalidArgument);
    doc.entities = {{0, 9, EntityLabel::IchTitle}};
    CHECK_THROWS_AS(serialize_annotated(doc), forge::InvalidArgument);
  }
  TEST_CASE("random documents round trip") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 1000; ++i) {
      auto doc = forge::testing::random_annotated(rng);
      const auto markup = serialize_annotated(doc);
      CAPTURE(markup);
      const auto back = parse_annotated_text(markup);
      CHECK(back == doc);
      CHECK(validate_annotations(back).empty());
      CHECK(serialize_annotated(back) == markup);
    }
  }
}

TEST_SUITE("validate_annotations") {
  TEST_CASE("overlap names both spans") {
    AnnotatedDocument doc;
    doc.text = "苗族古歌流传于";
    doc.entities = {{0, 4, EntityLabel::IchTitle}, {2, 6, EntityLabel::IchTerm}};
    const auto r = validate_annotations(doc);
    REQUIRE(r.size() == 1);
    CHECK(r[0].kind == ViolationKind::Overlap);
    CHECK(r[0].spans == std::vector<std::size_t>{0, 1});
  }
  TEST_CASE("nesting counts as overlap") {
    AnnotatedDocument doc;
    doc.text = "苗族古歌流传于";
    doc.entities = {{0, 4, EntityLabel::IchTitle}, {2, 4, EntityLabel::IchTerm}};
    CHECK(has_kind(validate_annotations(doc), ViolationKind::Overlap));
  }
  TEST_CASE("end beyond text") {
    AnnotatedDocument doc;
    doc.text = "苗族";
    doc.entities = {{0, 3, EntityLabel::IchTitle}};
    CHECK(has_kind(validate_annotations(doc), ViolationKind::OutOfBounds));
  }
  TEST_CASE("empty and unsorted spans") {
    AnnotatedDocument doc;
    doc.text = "苗族古歌";
    doc.entities = {{2, 3, EntityLabel::IchTitle}, {0, 1, EntityLabel::IchTerm}, {3, 3, EntityLabel::IchTerm}};
    const auto r = validate_annotations(doc);
    CHECK(has_kind(r, ViolationKind::Unsorted));
    CHECK(has_kind(r, ViolationKind::EmptySpan));
  }
  TEST_CASE("valid document") { CHECK(validate_annotations(parse_annotated_text(kExample)).empty()); }

  TEST_CASE("pos tokens must rebuild the text") {
    auto doc = parse_annotated_text("苗族分布广泛");
    doc.pos_tokens = parse_pos_line("苗族/n 分布/v 广泛/a");
    CHECK(validate_annotations(doc).empty());
    doc.pos_tokens = parse_pos_line("苗族/n 分布/v");
    CHECK(has_kind(validate_annotations(doc), ViolationKind::PosMismatch));
    doc.pos_tokens = std::vector<PosToken>{{"苗族", "n"}, {"分布", "zz"}, {"广泛", "a"}};
    CHECK(has_kind(validate_annotations(doc), ViolationKind::PosInvalidToken));
  }
}

TEST_SUITE("validate_record") {
  TEST_CASE("unknown label in a record") {
    const Json row = {{"doc_id", "d"}, {"text", "苗族"}, {"entities", Json::array({Json{{"start", 0}, {"end", 2}, {"label", "ICH-SONG"}}})}};
    const auto r = validate_record(row);
    REQUIRE(r.size() == 1);
    CHECK(r[0].kind == ViolationKind::UnknownLabel);
  }
  TEST_CASE("malformed records") {
    CHECK(has_kind(validate_record(Json::array()), ViolationKind::MalformedRecord));
    CHECK(has_kind(validate_record({{"text", "x"}}), ViolationKind::MalformedRecord));
    CHECK(has_kind(validate_record({{"text", "x"}, {"entities", Json::array({Json{{"start", -1}, {"end", 1}, {"label", "ICH-TERM"}}})}}),
                   ViolationKind::MalformedRecord));
  }
  TEST_CASE("json round trip") {
    auto doc = parse_annotated_text(kExample, "doc-1");
    doc.pos_tokens = std::vector<PosToken>{{"苗族古歌", "n"}, {"流传", "v"}, {"于", "p"}, {"贵州省", "n"}};
    const auto j = to_json(doc);
    CHECK(j["doc_id"] == "doc-1");
    CHECK(j["entities"][1]["label"] == "ICH-PLACE");
    CHECK(j["pos"][0] == Json::array({"苗族古歌", "n"}));
    CHECK(validate_record(j).empty());
    CHECK(annotated_from_json(j) == doc);
  }
}

TEST_SUITE("extract_entities") {
  TEST_CASE("all, filtered and term") {
    const auto doc = parse_annotated_text(kExample);
    using P = std::pair<std::string, EntityLabel>;
    CHECK(extract_entities(doc) == std::vector<P>{{"苗族古歌", EntityLabel::IchTitle}, {"贵州省", EntityLabel::IchPlace}});
    CHECK(extract_entities(doc, EntityLabel::IchTerm).empty());
    const auto term = parse_annotated_text("苗族<ICH-TERM>古歌</ICH-TERM>");
    CHECK(extract_entities(term) == std::vector<P>{{"古歌", EntityLabel::IchTerm}});
  }
  TEST_CASE("count equals spans passing the filter") {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 200; ++i) {
      const auto doc = forge::testing::random_annotated(rng);
      std::size_t terms = 0;
      for (const auto& e : doc.entities) terms += e.label == EntityLabel::IchTerm;
      CHECK(extract_entities(doc).size() == doc.entities.size());
      CHECK(extract_entities(doc, EntityLabel::IchTerm).size() == terms);
    }
  }
  TEST_CASE("label names") {
    CHECK(to_string(EntityLabel::IchTitle) == "ICH-TITLE");
    CHECK(to_string(EntityLabel::IchPlace) == "ICH-PLACE");
    CHECK(to_string(EntityLabel::IchTerm) == "ICH-TERM");
  }
}

TEST_SUITE("pos") {
  TEST_CASE("noun verb adjective") {
    CHECK(parse_pos_line("苗族/n 分布/v 广泛/a") ==
          std::vector<PosToken>{{"苗族", "n"}, {"分布", "v"}, {"广泛", "a"}});
  }
  TEST_CASE("empty line") { CHECK(parse_pos_line("").empty()); }
  TEST_CASE("unknown tag and missing separator") {
    try {
      parse_pos_line("古歌/x");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("unknown tag x") != std::string::npos);
      CHECK(e.offset() == 0);
    }
    try {
      parse_pos_line("苗族/n 分布");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.offset() == 1);
    }
  }
  TEST_CASE("round trip modulo whitespace") {
    const auto tokens = parse_pos_line("  苗族/n \t分布/v   广泛/a ");
    CHECK(format_pos_line(tokens) == "苗族/n 分布/v 广泛/a");
    CHECK(parse_pos_line(format_pos_line(tokens)) == tokens);
  }
  TEST_CASE("custom tagset file") {
    forge::testing::TempDir dir;
    forge::testing::spit(dir / "tags.txt", "# custom\nn v\nx\n");
    const auto tagset = PosTagset::load(dir / "tags.txt");
    CHECK(tagset.tags() == std::set<std::string>{"n", "v", "x"});
    CHECK(parse_pos_line("古歌/x", tagset).size() == 1);
    CHECK_THROWS_AS(parse_pos_line("古歌/a", tagset), ParseError);
  }
  TEST_CASE("default tagset") {
    CHECK(PosTagset::default_set().tags() ==
          std::set<std::string>{"n", "v", "a", "d", "p", "m", "q", "r", "c", "u", "w"});
  }
}
