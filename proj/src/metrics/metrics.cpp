// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 ICH Forge Contributors

#include "forge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <thread>

#include "forge/error.hpp"
#include "forge/utf8.hpp"

namespace forge::metrics {

namespace {

double f1(double precision, double recall) {
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

std::string_view to_string(TokenMode mode) {
  return mode == TokenMode::Char ? "char" : "whitespace";
}

std::optional<TokenMode> parse_token_mode(std::string_view name) {
  if (name == "char") return TokenMode::Char;
  if (name == "whitespace") return TokenMode::Whitespace;
  return std::nullopt;
}

TokenSequence tokenize(std::string_view text_utf8, TokenMode mode) {
  TokenSequence seq;
  seq.mode = mode;
  std::string current;
  for (char32_t c : text::decode_utf8(text_utf8)) {
    if (text::is_whitespace(c)) {
      if (mode == TokenMode::Whitespace && !current.empty()) {
        seq.tokens.push_back(std::move(current));
        current.clear();
      }
      continue;
    }
    if (mode == TokenMode::Char) {
      std::string tok;
      text::append_utf8(tok, c);
      seq.tokens.push_back(std::move(tok));
    } else {
      text::append_utf8(current, c);
    }
  }
  if (!current.empty()) seq.tokens.push_back(std::move(current));
  return seq;
}

std::size_t NGramCounts::total() const {
  std::size_t sum = 0;
  for (const auto& [gram, count] : counts) sum += count;
  return sum;
}

NGramCounts count_ngrams(const std::vector<std::string>& tokens, int n) {
  if (n < 1) throw InvalidArgument("n-gram order must be >= 1");
  NGramCounts out;
  out.n = n;
  const auto order = static_cast<std::size_t>(n);
  if (tokens.size() < order) return out;
  for (std::size_t i = 0; i + order <= tokens.size(); ++i)
    ++out.counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                          tokens.begin() + static_cast<std::ptrdiff_t>(i + order))];
  return out;
}

std::size_t clipped_overlap(const NGramCounts& a, const NGramCounts& b) {
  std::size_t overlap = 0;
  auto ia = a.counts.begin();
  auto ib = b.counts.begin();
  while (ia != a.counts.end() && ib != b.counts.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      overlap += std::min(ia->second, ib->second);
      ++ia;
      ++ib;
    }
  }
  return overlap;
}

double rouge_n_f(const TokenSequence& candidate, const TokenSequence& reference, int n) {
  if (n < 1) throw InvalidArgument("ROUGE-N order must be >= 1");
  const auto cand = count_ngrams(candidate.tokens, n);
  const auto ref = count_ngrams(reference.tokens, n);
  const std::size_t cand_total = cand.total();
  const std::size_t ref_total = ref.total();
  // Both sides too short for order n: score at the longest order they share.
  if (cand_total == 0 && ref_total == 0 && !candidate.empty() && !reference.empty())
    return rouge_n_f(candidate, reference,
                     static_cast<int>(std::min(candidate.size(), reference.size())));
  if (cand_total == 0 || ref_total == 0) return 0.0;
  const std::size_t overlap = clipped_overlap(cand, ref);
  if (overlap == 0) return 0.0;
  return f1(static_cast<double>(overlap) / static_cast<double>(cand_total),
            static_cast<double>(overlap) / static_cast<double>(ref_total));
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), row(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      row[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], row[j - 1]);
    std::swap(prev, row);
  }
  return prev[b.size()];
}

double rouge_l_f(const TokenSequence& candidate, const TokenSequence& reference) {
  if (candidate.empty() || reference.empty()) return 0.0;
  const std::size_t lcs = lcs_length(candidate.tokens, reference.tokens);
  if (lcs == 0) return 0.0;
  return f1(static_cast<double>(lcs) / static_cast<double>(candidate.size()),
            static_cast<double>(lcs) / static_cast<double>(reference.size()));
}

double brevity_penalty(std::size_t candidate_length, std::size_t reference_length) {
  if (candidate_length == 0) return 0.0;
  if (candidate_length >= reference_length) return 1.0;
  return std::exp(1.0 - static_cast<double>(reference_length) /
                            static_cast<double>(candidate_length));
}

double bleu_n(const TokenSequence& candidate, const TokenSequence& reference, int n) {
  if (n < 1 || n > 4) throw InvalidArgument("BLEU order must be in 1..4, got " + std::to_string(n));
  if (candidate.empty()) return 0.0;

  double log_sum = 0.0;
  int orders = 0;
  for (int k = 1; k <= n; ++k) {
    const auto cand = count_ngrams(candidate.tokens, k);
    const std::size_t total = cand.total();
    if (total == 0) break;  // longer orders are empty too
    const std::size_t matches = clipped_overlap(cand, count_ngrams(reference.tokens, k));
    double num = static_cast<double>(matches);
    double den = static_cast<double>(total);
    if (matches == 0) {
      num += kBleuEpsilon;
      den += kBleuEpsilon;
    }
    log_sum += std::log(num / den);
    ++orders;
  }
  const double geo_mean = std::exp(log_sum / orders);
  return brevity_penalty(candidate.size(), reference.size()) * geo_mean;
}

double chrf(std::string_view candidate, std::string_view reference, ChrfParams params) {
  const auto cand = tokenize(candidate, TokenMode::Char);
  const auto ref = tokenize(reference, TokenMode::Char);
  if (cand.empty() || ref.empty()) return 0.0;

  const double beta2 = params.beta * params.beta;
  double f_sum = 0.0;
  int orders = 0;
  for (int n = 1; n <= params.max_order; ++n) {
    const auto c = count_ngrams(cand.tokens, n);
    const auto r = count_ngrams(ref.tokens, n);
    const std::size_t c_total = c.total();
    const std::size_t r_total = r.total();
    if (c_total == 0 && r_total == 0) continue;
    ++orders;
    const auto matches = static_cast<double>(clipped_overlap(c, r));
    const double precision = c_total ? matches / static_cast<double>(c_total) : 0.0;
    const double recall = r_total ? matches / static_cast<double>(r_total) : 0.0;
    if (precision + recall > 0.0)
      f_sum += (1.0 + beta2) * precision * recall / (beta2 * precision + recall);
  }
  return orders ? f_sum / orders : 0.0;
}

PairScores score_pair(std::string_view candidate, std::string_view reference, TokenMode mode) {
  const auto cand = tokenize(candidate, mode);
  const auto ref = tokenize(reference, mode);
  PairScores s;
  s.rouge1_f = rouge_n_f(cand, ref, 1);
  s.rouge2_f = rouge_n_f(cand, ref, 2);
  s.rougeL_f = rouge_l_f(cand, ref);
  s.bleu1 = bleu_n(cand, ref, 1);
  s.bleu2 = bleu_n(cand, ref, 2);
  s.bleu3 = bleu_n(cand, ref, 3);
  s.bleu4 = bleu_n(cand, ref, 4);
  s.chrf = chrf(candidate, reference);
  return s;
}

std::vector<double> MetricReport::values() const {
  return {rouge1_f, rouge2_f, rougeL_f, bleu1, bleu2, bleu3, bleu4, chrf};
}

MetricReport evaluate_corpus(std::span<const TextPair> pairs, TokenMode mode, unsigned threads) {
  if (pairs.empty()) throw InvalidArgument("evaluate_corpus needs at least one pair");

  std::vector<PairScores> scores(pairs.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      scores[i] = score_pair(pairs[i].candidate, pairs[i].reference, mode);
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(pairs.size())));
  if (threads == 1) {
    work(0, pairs.size());
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (pairs.size() + threads - 1) / threads;
    for (std::size_t begin = 0; begin < pairs.size(); begin += chunk)
      pool.emplace_back(work, begin, std::min(pairs.size(), begin + chunk));
  }

  // Summed strictly in input order.
  MetricReport r;
  for (const auto& s : scores) {
    r.rouge1_f += s.rouge1_f;
    r.rouge2_f += s.rouge2_f;
    r.rougeL_f += s.rougeL_f;
    r.bleu1 += s.bleu1;
    r.bleu2 += s.bleu2;
    r.bleu3 += s.bleu3;
    r.bleu4 += s.bleu4;
    r.chrf += s.chrf;
  }
  const auto n = static_cast<double>(scores.size());
  for (double* v : {&r.rouge1_f, &r.rouge2_f, &r.rougeL_f, &r.bleu1, &r.bleu2, &r.bleu3,
                    &r.bleu4, &r.chrf})
    *v /= n;
  r.sample_count = scores.size();
  return r;
}

std::string format_percent(double score) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", score * 100.0 + 0.0);
  return buf;
}

}  // namespace forge::metrics
