// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 ICH Forge Contributors

#include <charconv>
#include <fstream>

#include "forge/bench.hpp"
#include "forge/error.hpp"

namespace forge::bench {

namespace {

// "2e-04" -> "2e-4", "1.5e+00" -> "1.5e0".
std::string compact_scientific(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific);
  if (ec != std::errc{}) throw Error("cannot format number");
  std::string s(buf, end);
  const auto e = s.find('e');
  if (e == std::string::npos) return s;
  std::string mantissa = s.substr(0, e);
  std::string exponent = s.substr(e + 1);
  const bool negative = !exponent.empty() && exponent.front() == '-';
  if (!exponent.empty() && (exponent.front() == '-' || exponent.front() == '+')) exponent.erase(0, 1);
  exponent.erase(0, std::min(exponent.find_first_not_of('0'), exponent.size() - 1));
  return mantissa + "e" + (negative ? "-" : "") + exponent;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last)
    throw InvalidArgument("invalid value for " + key + ": " + text);
  return value;
}

}  // namespace

TrainingOverrides TrainingOverrides::parse(const std::vector<std::string>& assignments) {
  TrainingOverrides o;
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) throw InvalidArgument("expected key=value, got " + a);
    const std::string key = a.substr(0, eq);
    const std::string value = a.substr(eq + 1);
    if (key == "learning_rate")
      o.learning_rate = parse_number<double>(key, value);
    else if (key == "max_epochs")
      o.max_epochs = parse_number<int>(key, value);
    else if (key == "finetuning_type")
      o.finetuning_type = value;
    else if (key == "batch_size")
      o.batch_size = parse_number<int>(key, value);
    else if (key == "max_sequence_length")
      o.max_sequence_length = parse_number<int>(key, value);
    else
      throw InvalidArgument("unknown training config key " + key);
  }
  return o;
}

TrainingConfig make_training_config(const TrainingOverrides& o) {
  TrainingConfig c;
  if (o.learning_rate) c.learning_rate = *o.learning_rate;
  if (o.max_epochs) c.max_epochs = *o.max_epochs;
  if (o.finetuning_type) c.finetuning_type = *o.finetuning_type;
  if (o.batch_size) c.batch_size = *o.batch_size;
  if (o.max_sequence_length) c.max_sequence_length = *o.max_sequence_length;

  if (!(c.learning_rate > 0.0)) throw InvalidArgument("learning_rate must be positive");
  if (c.max_epochs <= 0) throw InvalidArgument("max_epochs must be positive");
  if (c.batch_size <= 0) throw InvalidArgument("batch_size must be positive");
  if (c.max_sequence_length <= 0) throw InvalidArgument("max_sequence_length must be positive");
  if (c.finetuning_type.empty()) throw InvalidArgument("finetuning_type must not be empty");
  return c;
}

std::string render_training_cfg(const TrainingConfig& c) {
  return "learning_rate=" + compact_scientific(c.learning_rate) + "\n" +
         "max_epochs=" + std::to_string(c.max_epochs) + "\n" +
         "finetuning_type=" + c.finetuning_type + "\n" +
         "batch_size=" + std::to_string(c.batch_size) + "\n" +
         "max_sequence_length=" + std::to_string(c.max_sequence_length) + "\n";
}

nlohmann::json to_json(const TrainingConfig& c) {
  return {{"learning_rate", c.learning_rate},
          {"max_epochs", c.max_epochs},
          {"finetuning_type", c.finetuning_type},
          {"batch_size", c.batch_size},
          {"max_sequence_length", c.max_sequence_length}};
}

TrainingConfig emit_training_config(const TrainingOverrides& overrides,
                                    const std::filesystem::path& out_dir) {
  const TrainingConfig config = make_training_config(overrides);
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream cfg(out_dir / "train.cfg", std::ios::binary | std::ios::trunc);
    if (!cfg) throw IoError("cannot write " + (out_dir / "train.cfg").string());
    cfg << render_training_cfg(config);
  }
  {
    std::ofstream js(out_dir / "train.json", std::ios::binary | std::ios::trunc);
    if (!js) throw IoError("cannot write " + (out_dir / "train.json").string());
    js << to_json(config).dump(2) << '\n';
  }
  return config;
}

}  // namespace forge::bench
