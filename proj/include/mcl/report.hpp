// Copyright 2026 The mcl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mcl/bytes.hpp"
#include "mcl/errors.hpp"

namespace mcl {

inline constexpr std::string_view kArtifactVersion = "0.1.0";

inline constexpr std::string_view kCsvHeader =
    "stage,strategy,fraction,repeat,seed,accuracy,effective_params,cascaded_extra,"
    "total_compression,wall_ms";

// One point of an experiment. `strategy` is "none" for unpruned stages.
struct ExperimentRecord {
  std::string stage;
  std::string strategy;
  double fraction = 0.0;
  std::uint64_t repeat = 0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  std::uint64_t effective_params = 0;
  std::uint64_t cascaded_extra = 0;
  double total_compression = 0.0;  // 1 - effective_params / reference params
  std::uint64_t wall_ms = 0;

  friend bool operator==(const ExperimentRecord&, const ExperimentRecord&) = default;
};

struct ReportMetadata {
  std::string artifact_version = std::string(kArtifactVersion);
  std::string config_hash;
  std::string timestamp;
  std::map<std::string, std::string> config;

  friend bool operator==(const ReportMetadata&, const ReportMetadata&) = default;
};

struct ReportBundle {
  ReportMetadata metadata;
  std::vector<ExperimentRecord> records;

  friend bool operator==(const ReportBundle&, const ReportBundle&) = default;
};

// FNV-1a over "key=value\n" lines in key order.
inline std::string config_hash(const std::map<std::string, std::string>& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& [k, v] : config) {
    feed(k);
    feed("=");
    feed(v);
    feed("\n");
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string utc_timestamp(std::time_t t) {
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Bundle for `records`. Reproducible bundles take their timestamp from
// SOURCE_DATE_EPOCH, or the Unix epoch when it is unset.
inline ReportBundle make_bundle(std::map<std::string, std::string> config,
                                std::vector<ExperimentRecord> records, bool reproducible) {
  ReportBundle b;
  b.metadata.config_hash = config_hash(config);
  b.metadata.config = std::move(config);
  std::time_t t = 0;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  } else if (!reproducible) {
    t = std::time(nullptr);
  }
  b.metadata.timestamp = utc_timestamp(t);
  b.records = std::move(records);
  return b;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string to_csv(const ReportBundle& bundle) {
  if (bundle.records.empty()) throw ConfigError("report has no records");
  std::string out(kCsvHeader);
  out += '\n';
  for (const ExperimentRecord& r : bundle.records) {
    out += r.stage + ',' + r.strategy + ',' + format_double(r.fraction) + ',' +
           std::to_string(r.repeat) + ',' + std::to_string(r.seed) + ',' +
           format_double(r.accuracy) + ',' + std::to_string(r.effective_params) + ',' +
           std::to_string(r.cascaded_extra) + ',' + format_double(r.total_compression) + ',' +
           std::to_string(r.wall_ms) + '\n';
  }
  return out;
}

namespace detail {

inline ParseError field_error(std::size_t line, std::string_view field, std::string_view text) {
  return ParseError(ParseError::Kind::kBadField, "csv line " + std::to_string(line) + ": bad " +
                                                     std::string(field) + " '" +
                                                     std::string(text) + "'");
}

inline std::uint64_t parse_u64(std::string_view s, std::size_t line, std::string_view field) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw field_error(line, field, s);
  return v;
}

inline double parse_f64(std::string_view s, std::size_t line, std::string_view field) {
  const std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size() || !std::isfinite(v)) {
    throw field_error(line, field, s);
  }
  return v;
}

}  // namespace detail

// Records from CSV text with the fixed header. Metadata is not part of CSV.
inline std::vector<ExperimentRecord> parse_csv(std::string_view text) {
  std::vector<ExperimentRecord> records;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!header_seen) {
      if (line != kCsvHeader) {
        throw ParseError(ParseError::Kind::kBadField, "csv header mismatch: '" +
                                                          std::string(line) + "'");
      }
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 10) {
      throw ParseError(ParseError::Kind::kBadField,
                       "csv line " + std::to_string(line_no) + ": expected 10 fields, got " +
                           std::to_string(cells.size()));
    }
    ExperimentRecord r;
    r.stage = std::string(cells[0]);
    r.strategy = std::string(cells[1]);
    r.fraction = detail::parse_f64(cells[2], line_no, "fraction");
    r.repeat = detail::parse_u64(cells[3], line_no, "repeat");
    r.seed = detail::parse_u64(cells[4], line_no, "seed");
    r.accuracy = detail::parse_f64(cells[5], line_no, "accuracy");
    r.effective_params = detail::parse_u64(cells[6], line_no, "effective_params");
    r.cascaded_extra = detail::parse_u64(cells[7], line_no, "cascaded_extra");
    r.total_compression = detail::parse_f64(cells[8], line_no, "total_compression");
    r.wall_ms = detail::parse_u64(cells[9], line_no, "wall_ms");
    records.push_back(std::move(r));
  }
  if (!header_seen) throw ParseError(ParseError::Kind::kNoRecords, "csv is empty");
  return records;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::ordered_json to_json_value(const ExperimentRecord& r) {
  nlohmann::ordered_json j;
  j["stage"] = r.stage;
  j["strategy"] = r.strategy;
  j["fraction"] = r.fraction;
  j["repeat"] = r.repeat;
  j["seed"] = r.seed;
  j["accuracy"] = r.accuracy;
  j["effective_params"] = r.effective_params;
  j["cascaded_extra"] = r.cascaded_extra;
  j["total_compression"] = r.total_compression;
  j["wall_ms"] = r.wall_ms;
  return j;
}

inline std::string to_json(const ReportBundle& bundle) {
  if (bundle.records.empty()) throw ConfigError("report has no records");
  nlohmann::ordered_json meta;
  meta["artifact_version"] = bundle.metadata.artifact_version;
  meta["config_hash"] = bundle.metadata.config_hash;
  meta["timestamp"] = bundle.metadata.timestamp;
  meta["config"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : bundle.metadata.config) meta["config"][k] = v;
  nlohmann::ordered_json root;
  root["metadata"] = std::move(meta);
  root["records"] = nlohmann::ordered_json::array();
  for (const auto& r : bundle.records) root["records"].push_back(to_json_value(r));
  return root.dump(2) + "\n";
}

inline ReportBundle parse_json(std::string_view text) {
  try {
    const auto root = nlohmann::json::parse(text);
    ReportBundle b;
    const auto& meta = root.at("metadata");
    b.metadata.artifact_version = meta.at("artifact_version").get<std::string>();
    b.metadata.config_hash = meta.at("config_hash").get<std::string>();
    b.metadata.timestamp = meta.at("timestamp").get<std::string>();
    for (const auto& [k, v] : meta.at("config").items()) {
      b.metadata.config[k] = v.get<std::string>();
    }
    for (const auto& j : root.at("records")) {
      ExperimentRecord r;
      r.stage = j.at("stage").get<std::string>();
      r.strategy = j.at("strategy").get<std::string>();
      r.fraction = j.at("fraction").get<double>();
      r.repeat = j.at("repeat").get<std::uint64_t>();
      r.seed = j.at("seed").get<std::uint64_t>();
      r.accuracy = j.at("accuracy").get<double>();
      r.effective_params = j.at("effective_params").get<std::uint64_t>();
      r.cascaded_extra = j.at("cascaded_extra").get<std::uint64_t>();
      r.total_compression = j.at("total_compression").get<double>();
      r.wall_ms = j.at("wall_ms").get<std::uint64_t>();
      b.records.push_back(std::move(r));
    }
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ParseError::Kind::kBadField, std::string("report json: ") + e.what());
  }
}

inline void emit_csv(const ReportBundle& bundle, const std::filesystem::path& path) {
  const std::string text = to_csv(bundle);
  write_file(path, ByteView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

inline void emit_json(const ReportBundle& bundle, const std::filesystem::path& path) {
  const std::string text = to_json(bundle);
  write_file(path, ByteView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// ---------------------------------------------------------------------------
// Curves

inline double median(std::vector<double> values) {
  if (values.empty()) throw ConfigError("median of no values");
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

inline double record_field(const ExperimentRecord& r, std::string_view field) {
  if (field == "accuracy") return r.accuracy;
  if (field == "effective_params") return static_cast<double>(r.effective_params);
  if (field == "cascaded_extra") return static_cast<double>(r.cascaded_extra);
  if (field == "total_compression") return r.total_compression;
  if (field == "wall_ms") return static_cast<double>(r.wall_ms);
  throw ConfigError("unknown record field '" + std::string(field) +
                    "' (expected accuracy, effective_params, cascaded_extra, "
                    "total_compression or wall_ms)");
}

// (fraction, median over repeats of `field`) for one strategy, fractions
// ascending.
inline std::vector<std::pair<double, double>> curve(const ReportBundle& bundle,
                                                    std::string_view strategy,
                                                    std::string_view field) {
  record_field(ExperimentRecord{}, field);
  std::map<double, std::vector<double>> by_fraction;
  for (const auto& r : bundle.records) {
    if (r.strategy == strategy) by_fraction[r.fraction].push_back(record_field(r, field));
  }
  if (by_fraction.empty()) {
    throw ConfigError("no records for strategy '" + std::string(strategy) + "'");
  }
  std::vector<std::pair<double, double>> out;
  for (auto& [f, ys] : by_fraction) out.emplace_back(f, median(std::move(ys)));
  return out;
}

// Two-column plot data, tab separated, with a header line.
inline std::string curve_tsv(const std::vector<std::pair<double, double>>& points,
                             std::string_view field) {
  std::string out = "fraction\t" + std::string(field) + "\n";
  for (const auto& [x, y] : points) out += format_double(x) + "\t" + format_double(y) + "\n";
  return out;
}

}  // namespace mcl
