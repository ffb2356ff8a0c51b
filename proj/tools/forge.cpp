// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 ICH Forge Contributors

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "forge/annotation.hpp"
#include "forge/bench.hpp"
#include "forge/corpus.hpp"
#include "forge/error.hpp"
#include "forge/instruct.hpp"
#include "forge/jsonl.hpp"
#include "forge/llm_client.hpp"
#include "forge/logging.hpp"
#include "forge/metrics.hpp"
#include "forge/review.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

// Exit codes: 0 ok, 1 failure or violations found, 2 usage error.
constexpr int kFailure = 1;
constexpr int kUsage = 2;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw forge::IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  const fs::path p(out_path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw forge::IoError("cannot write " + out_path);
  out << text;
}

// Accepts both corpus rows ("id") and annotated rows ("doc_id").
std::vector<forge::instruct::SourceText> read_source_texts(const fs::path& path) {
  std::vector<forge::instruct::SourceText> out;
  auto errors = forge::jsonl::for_each(path, [&](const Json& row, std::size_t line) {
    const auto id_key = row.contains("doc_id") ? "doc_id" : "id";
    if (!row.is_object() || !row.contains(id_key) || !row.contains("text") ||
        !row[id_key].is_string() || !row["text"].is_string())
      throw forge::InvalidArgument(path.string() + ":" + std::to_string(line) +
                                   ": expected an object with id/doc_id and text");
    out.push_back({row[id_key].get<std::string>(), row["text"].get<std::string>()});
  });
  if (!errors.empty())
    throw forge::InvalidArgument(path.string() + ":" + std::to_string(errors.front().line_number) +
                                 ": " + errors.front().message);
  return out;
}

std::string samples_jsonl(std::span<const forge::instruct::InstructionSample> samples) {
  std::string out;
  for (const auto& s : samples) out += forge::jsonl::dump_line(forge::instruct::to_json(s)) + "\n";
  return out;
}

Json report_json(const forge::metrics::MetricReport& r) {
  return {{"rouge1_f", r.rouge1_f}, {"rouge2_f", r.rouge2_f}, {"rougeL_f", r.rougeL_f},
          {"bleu1", r.bleu1},       {"bleu2", r.bleu2},       {"bleu3", r.bleu3},
          {"bleu4", r.bleu4},       {"chrf", r.chrf},         {"sample_count", r.sample_count}};
}

forge::metrics::TokenMode token_mode(const std::string& name) {
  auto mode = forge::metrics::parse_token_mode(name);
  if (!mode) throw forge::InvalidArgument("unknown mode " + name + " (expected char or whitespace)");
  return *mode;
}

// ---------------------------------------------------------------------------

void add_corpus(CLI::App& app) {
  auto* corpus = app.add_subcommand("corpus", "Ingest, clean, deduplicate and describe source texts");
  corpus->require_subcommand(1);

  {
    auto* cmd = corpus->add_subcommand("ingest", "Read raw texts, clean them and write corpus JSONL");
    auto root = std::make_shared<std::string>();
    auto category = std::make_shared<std::string>();
    auto format = std::make_shared<std::string>("plain");
    auto out = std::make_shared<std::string>();
    auto threads = std::make_shared<unsigned>(0);
    auto keep_dups = std::make_shared<bool>(false);
    cmd->add_option("--root", *root, "File or directory to read")->required();
    cmd->add_option("--category", *category, "Source category name")->required();
    cmd->add_option("--format", *format, "plain or jsonl")->capture_default_str();
    cmd->add_option("--out", *out, "Output corpus JSONL")->required();
    cmd->add_option("--threads", *threads, "Cleaning workers, 0 = all cores")->capture_default_str();
    cmd->add_flag("--keep-duplicates", *keep_dups, "Skip exact-text deduplication");
    cmd->callback([=] {
      auto cat = forge::corpus::parse_category(*category);
      if (!cat) throw forge::InvalidArgument("unknown category " + *category);
      auto fmt = forge::corpus::parse_ingest_format(*format);
      if (!fmt) throw forge::InvalidArgument("unknown format " + *format);
      auto ingested = forge::corpus::ingest_documents(*root, *cat, *fmt);
      for (const auto& d : ingested.report.skipped)
        forge::log::warn("skipped " + d.source_path + ":" + std::to_string(d.line) + ": " + d.message);
      auto cleaned = forge::corpus::clean_documents(std::move(ingested.documents), *threads);
      std::vector<forge::corpus::Document> docs = std::move(cleaned.documents);
      std::size_t removed = 0;
      if (!*keep_dups) {
        auto dedup = forge::corpus::deduplicate(std::move(docs));
        docs = std::move(dedup.documents);
        removed = dedup.removed.size();
      }
      forge::corpus::write_corpus(*out, docs);
      std::cerr << "files=" << ingested.report.files_read << " records=" << ingested.report.records
                << " skipped=" << ingested.report.skipped.size()
                << " dropped_empty=" << cleaned.dropped_ids.size() << " duplicates=" << removed
                << " written=" << docs.size() << "\n";
    });
  }
  {
    auto* cmd = corpus->add_subcommand("stats", "Per-category token statistics");
    auto inputs = std::make_shared<std::vector<std::string>>();
    auto format = std::make_shared<std::string>("table");
    cmd->add_option("corpus", *inputs, "Corpus JSONL file(s)")->required();
    cmd->add_option("--format", *format, "table, csv or json")->capture_default_str();
    cmd->callback([=] {
      auto fmt = forge::corpus::parse_stats_format(*format);
      if (!fmt) throw forge::InvalidArgument("unknown stats format " + *format);
      std::vector<forge::corpus::Document> docs;
      for (const auto& in : *inputs) {
        auto part = forge::corpus::read_corpus(in);
        docs.insert(docs.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
      }
      std::cout << forge::corpus::render_stats(forge::corpus::compute_stats(docs), *fmt);
    });
  }
  {
    auto* cmd = corpus->add_subcommand("dedup", "Remove exact-duplicate texts, keeping the first");
    auto in = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    cmd->add_option("--in", *in, "Input corpus JSONL")->required();
    cmd->add_option("--out", *out, "Output corpus JSONL")->required();
    cmd->callback([=] {
      auto result = forge::corpus::deduplicate(forge::corpus::read_corpus(*in));
      forge::corpus::write_corpus(*out, result.documents);
      for (const auto& p : result.removed)
        std::cerr << "duplicate " << p.dropped_id << " of " << p.kept_id << "\n";
      std::cerr << "kept=" << result.documents.size() << " removed=" << result.removed.size() << "\n";
    });
  }
}

void add_annotate(CLI::App& app) {
  auto* annotate = app.add_subcommand("annotate", "Entity markup and POS annotation tools");
  annotate->require_subcommand(1);

  {
    auto* cmd = annotate->add_subcommand("parse", "Convert inline markup (one document per line) to JSONL");
    auto in = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    cmd->add_option("--in", *in, "Markup text file")->required();
    cmd->add_option("--out", *out, "Annotated JSONL output")->required();
    cmd->callback([=] {
      std::ifstream src(*in, std::ios::binary);
      if (!src) throw forge::IoError("cannot read " + *in);
      std::vector<Json> rows;
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(src, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
          rows.push_back(forge::annotation::to_json(
              forge::annotation::parse_annotated_text(line, *in + "#" + std::to_string(line_no - 1))));
        } catch (const forge::annotation::ParseError& e) {
          throw forge::InvalidArgument(*in + ":" + std::to_string(line_no) + ": byte " +
                                       std::to_string(e.offset()) + ": " + e.what());
        }
      }
      forge::jsonl::write(*out, rows);
      std::cerr << "documents=" << rows.size() << "\n";
    });
  }
  {
    auto* cmd = annotate->add_subcommand("validate", "Check annotated JSONL; exit 1 on any violation");
    auto in = std::make_shared<std::string>();
    auto tagset_path = std::make_shared<std::string>();
    cmd->add_option("annotated", *in, "Annotated JSONL")->required();
    cmd->add_option("--tagset", *tagset_path, "POS tagset file");
    cmd->callback([=] {
      const auto tagset = tagset_path->empty() ? forge::annotation::PosTagset::default_set()
                                               : forge::annotation::PosTagset::load(*tagset_path);
      std::size_t violations = 0;
      std::size_t records = 0;
      auto errors = forge::jsonl::for_each(*in, [&](const Json& row, std::size_t line) {
        ++records;
        for (const auto& v : forge::annotation::validate_record(row, tagset)) {
          ++violations;
          std::cout << *in << ":" << line << ": " << forge::annotation::to_string(v.kind) << ": "
                    << v.message << "\n";
        }
      });
      for (const auto& e : errors) {
        ++violations;
        std::cout << *in << ":" << e.line_number << ": MalformedRecord: " << e.message << "\n";
      }
      std::cerr << "records=" << records << " violations=" << violations << "\n";
      if (violations > 0) throw CLI::RuntimeError(kFailure);
    });
  }
  {
    auto* cmd = annotate->add_subcommand("entities", "List entity surfaces, optionally by label");
    auto in = std::make_shared<std::string>();
    auto label = std::make_shared<std::string>();
    cmd->add_option("annotated", *in, "Annotated JSONL")->required();
    cmd->add_option("--label", *label, "ICH-TITLE, ICH-PLACE or ICH-TERM");
    cmd->callback([=] {
      std::optional<forge::annotation::EntityLabel> filter;
      if (!label->empty()) {
        filter = forge::annotation::parse_label(*label);
        if (!filter) throw forge::InvalidArgument("unknown label " + *label);
      }
      auto errors = forge::jsonl::for_each(*in, [&](const Json& row, std::size_t) {
        const auto doc = forge::annotation::annotated_from_json(row);
        for (const auto& [surface, l] : forge::annotation::extract_entities(doc, filter))
          std::cout << doc.doc_id << "\t" << forge::annotation::to_string(l) << "\t" << surface << "\n";
      });
      if (!errors.empty())
        throw forge::InvalidArgument(*in + ":" + std::to_string(errors.front().line_number) + ": " +
                                     errors.front().message);
    });
  }
}

void add_eval(CLI::App& app) {
  auto* eval = app.add_subcommand("eval", "ROUGE, BLEU and chrF scoring");
  eval->require_subcommand(1);

  {
    auto* cmd = eval->add_subcommand("pair", "Score one candidate file against one reference file");
    auto cand = std::make_shared<std::string>();
    auto ref = std::make_shared<std::string>();
    auto mode = std::make_shared<std::string>("char");
    cmd->add_option("--cand", *cand, "Candidate text file")->required();
    cmd->add_option("--ref", *ref, "Reference text file")->required();
    cmd->add_option("--mode", *mode, "char or whitespace")->capture_default_str();
    cmd->callback([=] {
      auto strip = [](std::string s) {
        while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
        return s;
      };
      const std::vector<forge::metrics::TextPair> pairs{{strip(read_file(*cand)), strip(read_file(*ref))}};
      std::cout << report_json(forge::metrics::evaluate_corpus(pairs, token_mode(*mode))).dump(2) << "\n";
    });
  }
  {
    auto* cmd = eval->add_subcommand("corpus", "Mean scores over {candidate, reference} JSONL pairs");
    auto in = std::make_shared<std::string>();
    auto mode = std::make_shared<std::string>("char");
    auto threads = std::make_shared<unsigned>(1);
    cmd->add_option("--pairs", *in, "Pairs JSONL")->required();
    cmd->add_option("--mode", *mode, "char or whitespace")->capture_default_str();
    cmd->add_option("--threads", *threads, "Scoring workers")->capture_default_str();
    cmd->callback([=] {
      std::vector<forge::metrics::TextPair> pairs;
      auto errors = forge::jsonl::for_each(*in, [&](const Json& row, std::size_t line) {
        if (!row.is_object() || !row.contains("candidate") || !row.contains("reference") ||
            !row["candidate"].is_string() || !row["reference"].is_string())
          throw forge::InvalidArgument(*in + ":" + std::to_string(line) +
                                       ": expected string candidate and reference");
        pairs.push_back({row["candidate"].get<std::string>(), row["reference"].get<std::string>()});
      });
      if (!errors.empty())
        throw forge::InvalidArgument(*in + ":" + std::to_string(errors.front().line_number) + ": " +
                                     errors.front().message);
      std::cout << report_json(forge::metrics::evaluate_corpus(pairs, token_mode(*mode), *threads)).dump(2)
                << "\n";
    });
  }
}

void add_instruct(CLI::App& app) {
  auto* instruct = app.add_subcommand("instruct", "Instruction sample synthesis, export and splits");
  instruct->require_subcommand(1);

  {
    auto* cmd = instruct->add_subcommand("synth", "Generate Pending synthetic QA samples with an LLM");
    auto corpus = std::make_shared<std::string>();
    auto tmpl = std::make_shared<std::string>();
    auto max_pairs = std::make_shared<std::size_t>(5);
    auto out = std::make_shared<std::string>();
    auto parallelism = std::make_shared<std::size_t>(4);
    auto base_url = std::make_shared<std::string>();
    auto model = std::make_shared<std::string>();
    auto temperature = std::make_shared<double>(0.0);
    cmd->add_option("--corpus", *corpus, "Corpus or annotated JSONL")->required();
    cmd->add_option("--template", *tmpl, "Prompt template with {source_text}; built-in when omitted");
    cmd->add_option("--max-pairs", *max_pairs, "Samples kept per source text")->capture_default_str();
    cmd->add_option("--out", *out, "Output sample JSONL")->required();
    cmd->add_option("--parallel", *parallelism, "Requests in flight")->capture_default_str();
    cmd->add_option("--base-url", *base_url, "Endpoint base URL (default FORGE_API_BASE)");
    cmd->add_option("--model", *model, "Model name (default FORGE_MODEL)");
    cmd->add_option("--temperature", *temperature, "Sampling temperature")->capture_default_str();
    cmd->callback([=] {
      auto endpoint = forge::llm::EndpointConfig::from_env();
      if (!base_url->empty()) endpoint.base_url = *base_url;
      if (!model->empty()) endpoint.model_name = *model;
      endpoint.temperature = *temperature;
      endpoint.validate();
      const auto prompt = tmpl->empty() ? forge::instruct::default_qa_template()
                                        : forge::instruct::PromptTemplate::load(*tmpl);
      forge::llm::ConcurrencyLimiter::global().set_limit(*parallelism);
      forge::llm::HttpChatClient client(endpoint, {}, {}, &forge::llm::ConcurrencyLimiter::global());
      const auto sources = read_source_texts(*corpus);
      auto result = forge::instruct::synthesize_batch(sources, prompt, client, *max_pairs, *parallelism);
      for (const auto& d : result.diagnostics)
        forge::log::warn("source " + d.source_doc_id + " (request " + d.request_id + "): " + d.message);
      forge::instruct::write_samples(*out, result.samples);
      std::cerr << "sources=" << sources.size() << " samples=" << result.samples.size()
                << " diagnostics=" << result.diagnostics.size() << "\n";
    });
  }
  {
    auto* cmd = instruct->add_subcommand("export", "Write reviewed samples in the chosen states");
    auto in = std::make_shared<std::string>();
    auto states = std::make_shared<std::string>("accepted,edited");
    auto out = std::make_shared<std::string>();
    auto log_path = std::make_shared<std::string>();
    cmd->add_option("--in", *in, "Sample JSONL")->required();
    cmd->add_option("--states", *states, "Comma-separated review states")->capture_default_str();
    cmd->add_option("--out", *out, "Output JSONL")->required();
    cmd->add_option("--log", *log_path, "Decision log to apply before exporting");
    cmd->callback([=] {
      auto samples = forge::instruct::read_samples(*in);
      if (!log_path->empty())
        samples = forge::review::replay(std::move(samples), forge::review::read_decision_log(*log_path));
      const auto n = forge::instruct::export_dataset(samples, forge::instruct::parse_state_list(*states), *out);
      std::cerr << "exported=" << n << "\n";
    });
  }
  {
    auto* cmd = instruct->add_subcommand("split", "Seeded evaluation split of reviewed samples");
    auto in = std::make_shared<std::string>();
    auto task = std::make_shared<std::string>();
    auto size = std::make_shared<std::size_t>(100);
    auto seed = std::make_shared<std::uint64_t>(0);
    auto out = std::make_shared<std::string>();
    cmd->add_option("--in", *in, "Sample JSONL")->required();
    cmd->add_option("--task", *task, "KnowledgeQA, ContextQA or TermInterpretation")->required();
    cmd->add_option("--size", *size, "Samples to select")->capture_default_str();
    cmd->add_option("--seed", *seed, "Random seed")->capture_default_str();
    cmd->add_option("--out", *out, "Output JSONL (stdout when omitted)");
    cmd->callback([=] {
      auto t = forge::instruct::parse_task(*task);
      if (!t) throw forge::InvalidArgument("unknown task " + *task);
      const auto samples = forge::instruct::read_samples(*in);
      write_text(*out, samples_jsonl(forge::instruct::make_eval_split(samples, *t, *size, *seed)));
    });
  }
}

void add_bench(CLI::App& app) {
  auto* bench = app.add_subcommand("bench", "Benchmark chat endpoints on evaluation sets");
  bench->require_subcommand(1);

  {
    auto* cmd = bench->add_subcommand("run", "Query every endpoint and score the replies");
    auto config = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    cmd->add_option("--config", *config, "bench.json")->required();
    cmd->add_option("--out", *out, "Output directory (default: config output_dir)");
    cmd->callback([=] {
      auto cfg = forge::bench::BenchmarkConfig::load(*config);
      if (!out->empty()) cfg.output_dir = *out;
      forge::llm::ConcurrencyLimiter::global().set_limit(cfg.concurrency);
      const auto result = forge::bench::run_benchmark(cfg);
      fs::create_directories(cfg.output_dir);
      using forge::bench::ReportFormat;
      write_text((cfg.output_dir / "run.json").string(), forge::bench::render_report(result, ReportFormat::Json));
      write_text((cfg.output_dir / "report.md").string(),
                 forge::bench::render_report(result, ReportFormat::Markdown));
      write_text((cfg.output_dir / "report.csv").string(), forge::bench::render_report(result, ReportFormat::Csv));
      std::cout << forge::bench::render_report(result, ReportFormat::Markdown);
    });
  }
  {
    auto* cmd = bench->add_subcommand("render", "Render a stored run as markdown, csv or json");
    auto in = std::make_shared<std::string>();
    auto format = std::make_shared<std::string>("markdown");
    auto out = std::make_shared<std::string>();
    cmd->add_option("run", *in, "run.json")->required();
    cmd->add_option("--format", *format, "markdown, csv or json")->capture_default_str();
    cmd->add_option("--out", *out, "Output file (stdout when omitted)");
    cmd->callback([=] {
      auto fmt = forge::bench::parse_report_format(*format);
      if (!fmt) throw forge::InvalidArgument("unknown report format " + *format);
      Json doc;
      try {
        doc = Json::parse(read_file(*in));
      } catch (const Json::exception& e) {
        throw forge::InvalidArgument(*in + ": " + e.what());
      }
      write_text(*out, forge::bench::render_report(forge::bench::result_from_json(doc), *fmt));
    });
  }
  {
    auto* cmd = bench->add_subcommand("train-config", "Write train.cfg and train.json");
    auto out = std::make_shared<std::string>(".");
    auto sets = std::make_shared<std::vector<std::string>>();
    cmd->add_option("--out", *out, "Output directory")->capture_default_str();
    cmd->add_option("--set", *sets, "Override as key=value (repeatable)");
    cmd->callback([=] {
      const auto cfg = forge::bench::emit_training_config(forge::bench::TrainingOverrides::parse(*sets), *out);
      std::cout << forge::bench::render_training_cfg(cfg);
    });
  }
}

void add_review(CLI::App& app) {
  auto* review = app.add_subcommand("review", "Human review service for instruction samples");
  review->require_subcommand(1);

  auto* cmd = review->add_subcommand("serve", "Serve the review API under /api/v1");
  auto store_path = std::make_shared<std::string>();
  auto log_path = std::make_shared<std::string>();
  auto host = std::make_shared<std::string>("127.0.0.1");
  auto port = std::make_shared<int>(8787);
  auto corpus = std::make_shared<std::vector<std::string>>();
  auto ui_dir = std::make_shared<std::string>();
  cmd->add_option("--store", *store_path, "Sample JSONL")->required();
  cmd->add_option("--log", *log_path, "Decision log JSONL (created if missing)")->required();
  cmd->add_option("--host", *host, "Bind address")->capture_default_str();
  cmd->add_option("--port", *port, "Port, 0 picks a free one")->capture_default_str();
  cmd->add_option("--corpus", *corpus, "Corpus/annotated JSONL for source snippets (repeatable)");
  cmd->add_option("--ui-dir", *ui_dir, "Static UI assets served at /");
  cmd->callback([=] {
    forge::review::StoreOptions opts;
    opts.log_path = fs::path(*log_path);
    for (const auto& c : *corpus)
      for (auto& s : read_source_texts(c)) opts.documents.emplace(std::move(s.doc_id), std::move(s.text));
    auto store = forge::review::ReviewStore::open(fs::path(*store_path), std::move(opts));

    forge::review::ServerOptions server_opts;
    if (const char* token = std::getenv("FORGE_REVIEW_TOKEN"); token && *token) server_opts.token = token;
    if (!ui_dir->empty()) server_opts.ui_dir = fs::path(*ui_dir);

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);  // server threads inherit the mask

    forge::review::ReviewServer server(*store, server_opts);
    const int bound = server.start(*host, *port);
    const auto stats = store->stats();
    std::cerr << "review service on http://" << *host << ":" << bound << "/api/v1 (samples=" << stats.total()
              << " pending=" << stats.pending << (server_opts.token ? ", token required" : "") << ")\n";
    int sig = 0;
    sigwait(&signals, &sig);
    std::cerr << "shutting down\n";
    server.stop();
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forge: toolkit for building and evaluating an intangible-cultural-heritage LLM"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log debug messages");
  app.parse_complete_callback([&] {
    if (verbose)
      forge::log::set_sink([](forge::log::Level level, std::string_view msg) {
        std::cerr << (level == forge::log::Level::Debug ? "debug: " : "") << msg << "\n";
      });
  });

  add_corpus(app);
  add_annotate(app);
  add_eval(app);
  add_instruct(app);
  add_bench(app);
  add_review(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::RuntimeError& e) {
    return e.get_exit_code();
  } catch (const CLI::Error& e) {
    return app.exit(e) == 0 ? 0 : kUsage;
  } catch (const forge::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return 0;
}
