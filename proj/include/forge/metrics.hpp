// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 ICH Forge Contributors

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace forge::metrics {

enum class TokenMode { Char, Whitespace };

std::string_view to_string(TokenMode mode);
std::optional<TokenMode> parse_token_mode(std::string_view name);

struct TokenSequence {
  std::vector<std::string> tokens;
  TokenMode mode = TokenMode::Char;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
};

/// Char mode: one token per non-whitespace code point. Whitespace mode: split
/// on runs of Unicode whitespace.
TokenSequence tokenize(std::string_view text, TokenMode mode = TokenMode::Char);

/// Multiset of the n-grams of one sequence.
struct NGramCounts {
  int n = 1;
  std::map<std::vector<std::string>, std::size_t> counts;

  /// max(0, len - n + 1) for the source sequence.
  std::size_t total() const;
};

NGramCounts count_ngrams(const std::vector<std::string>& tokens, int n);

/// Sum over n-gram types of min(count_a, count_b).
std::size_t clipped_overlap(const NGramCounts& a, const NGramCounts& b);

/// ROUGE-N F1. Zero when exactly one side has no n-grams or nothing
/// overlaps. When both non-empty sides are shorter than n, the order drops to
/// the shorter length, so rouge_n_f(x, x, n) == 1 for any non-empty x.
double rouge_n_f(const TokenSequence& candidate, const TokenSequence& reference, int n);

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// ROUGE-L F1 from the longest common subsequence.
double rouge_l_f(const TokenSequence& candidate, const TokenSequence& reference);

inline constexpr double kBleuEpsilon = 1e-9;

/// Cumulative sentence BLEU-n with uniform weights over orders 1..n.
///
/// Clipped precisions whose numerator is zero are smoothed by adding
/// kBleuEpsilon to numerator and denominator. Orders for which the candidate
/// has no n-grams at all are left out of the geometric mean (effective
/// order), so a short candidate identical to its reference still scores 1.
/// Brevity penalty is exp(1 - r/c) when c < r. Empty candidate scores 0.
/// Throws InvalidArgument unless 1 <= n <= 4.
double bleu_n(const TokenSequence& candidate, const TokenSequence& reference, int n);

/// exp(1 - r/c) for c < r, 1 otherwise, 0 for an empty candidate.
double brevity_penalty(std::size_t candidate_length, std::size_t reference_length);

struct ChrfParams {
  int max_order = 6;
  double beta = 2.0;
};

/// Character n-gram F-beta averaged over orders 1..max_order on the
/// whitespace-stripped strings. Orders where neither side has n-grams are
/// skipped; zero if either string is empty after stripping.
double chrf(std::string_view candidate, std::string_view reference, ChrfParams params = {});

struct PairScores {
  double rouge1_f = 0, rouge2_f = 0, rougeL_f = 0;
  double bleu1 = 0, bleu2 = 0, bleu3 = 0, bleu4 = 0;
  double chrf = 0;
};

/// All eight scores for one candidate/reference pair.
PairScores score_pair(std::string_view candidate, std::string_view reference,
                      TokenMode mode = TokenMode::Char);

struct MetricReport {
  double rouge1_f = 0, rouge2_f = 0, rougeL_f = 0;
  double bleu1 = 0, bleu2 = 0, bleu3 = 0, bleu4 = 0;
  double chrf = 0;
  std::size_t sample_count = 0;

  /// Scores in report column order: ROUGE-1-F, ROUGE-2-F, ROUGE-L-F,
  /// BLEU-1..4, chrF.
  std::vector<double> values() const;
};

inline constexpr const char* kColumnNames[] = {"ROUGE-1-F", "ROUGE-2-F", "ROUGE-L-F", "BLEU-1",
                                               "BLEU-2",    "BLEU-3",    "BLEU-4",    "chrF"};

struct TextPair {
  std::string candidate;
  std::string reference;
};

/// Scores every pair and takes the arithmetic mean of each metric. Pairs may
/// be scored on `threads` workers; the sum always runs in input order, so the
/// result does not depend on the thread count. Throws InvalidArgument on an
/// empty list.
MetricReport evaluate_corpus(std::span<const TextPair> pairs, TokenMode mode = TokenMode::Char,
                             unsigned threads = 1);

/// Score scaled by 100 with two decimals, e.g. 0.2504 -> "25.04".
std::string format_percent(double score);

}  // namespace forge::metrics
