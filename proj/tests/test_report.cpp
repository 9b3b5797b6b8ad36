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

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "mcl.hpp"

namespace mcl {
namespace {

ExperimentRecord sample_record(std::size_t i = 0) {
  ExperimentRecord r;
  r.stage = stage::kPruned;
  r.strategy = "class_blind";
  r.fraction = 0.1 * static_cast<double>(i);
  r.repeat = i % 3;
  r.seed = 40 + i;
  r.accuracy = 1.0 / 3.0 + 1e-3 * static_cast<double>(i);
  r.effective_params = 1000 - i;
  r.cascaded_extra = i;
  r.total_compression = 0.1 + 1.0 / 7.0;
  r.wall_ms = 12;
  return r;
}

std::string read_text(const std::filesystem::path& p) {
  const Bytes b = read_file(p);
  return std::string(b.begin(), b.end());
}

TEST(Csv, OneRecordIsTwoLines) {
  ReportBundle b = make_bundle({{"k", "v"}}, {sample_record()}, true);
  const std::string csv = to_csv(b);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "stage,strategy,fraction,repeat,seed,accuracy,effective_params,cascaded_extra,"
            "total_compression,wall_ms");
}

TEST(Csv, RoundTripIsLosslessAndCanonical) {
  std::vector<ExperimentRecord> records;
  for (std::size_t i = 0; i < 7; ++i) records.push_back(sample_record(i));
  records[3].accuracy = 0.1 + 0.2;
  records[4].total_compression = -0.25;
  ReportBundle b = make_bundle({}, records, true);
  const std::string csv = to_csv(b);
  EXPECT_EQ(parse_csv(csv), records);
  ReportBundle again;
  again.records = parse_csv(csv);
  EXPECT_EQ(to_csv(again), csv);
}

TEST(Csv, RejectsMalformedText) {
  EXPECT_THROW(parse_csv(""), ParseError);
  EXPECT_THROW(parse_csv("a,b\n"), ParseError);
  const std::string header(kCsvHeader);
  EXPECT_THROW(parse_csv(header + "\npruned,x,0.5,0,1,0.9,10,0,0.5\n"), ParseError);
  EXPECT_THROW(parse_csv(header + "\npruned,x,abc,0,1,0.9,10,0,0.5,3\n"), ParseError);
  EXPECT_THROW(parse_csv(header + "\npruned,x,0.5,-1,1,0.9,10,0,0.5,3\n"), ParseError);
  EXPECT_THROW(to_csv(ReportBundle{}), ConfigError);
}

TEST(Json, RoundTripMirrorsFieldsAndIsCanonical) {
  std::vector<ExperimentRecord> records{sample_record(1), sample_record(2)};
  ReportBundle b = make_bundle({{"strategy", "class_blind"}, {"epochs", "3"}}, records, true);
  const std::string text = to_json(b);
  ReportBundle back = parse_json(text);
  EXPECT_EQ(back, b);
  EXPECT_EQ(to_json(back), text);
  const auto j = nlohmann::json::parse(text);
  std::set<std::string> keys;
  for (const auto& [k, v] : j["records"][0].items()) keys.insert(k);
  EXPECT_EQ(keys, (std::set<std::string>{"stage", "strategy", "fraction", "repeat", "seed",
                                         "accuracy", "effective_params", "cascaded_extra",
                                         "total_compression", "wall_ms"}));
  EXPECT_EQ(j["metadata"]["artifact_version"], std::string(kArtifactVersion));
}

TEST(Json, RejectsMalformedText) {
  EXPECT_THROW(parse_json("{"), ParseError);
  EXPECT_THROW(parse_json("{\"records\": []}"), ParseError);
  EXPECT_THROW(to_json(ReportBundle{}), ConfigError);
}

TEST(Metadata, HashIsPureFunctionOfConfig) {
  const std::map<std::string, std::string> a{{"x", "1"}, {"y", "2"}};
  EXPECT_EQ(config_hash(a), config_hash(a));
  EXPECT_EQ(config_hash(a).size(), 16u);
  EXPECT_NE(config_hash(a), config_hash({{"x", "1"}, {"y", "3"}}));
  EXPECT_NE(config_hash({{"ab", "c"}}), config_hash({{"a", "bc"}}));
  EXPECT_EQ(make_bundle(a, {sample_record()}, true).metadata.config_hash, config_hash(a));
}

TEST(Metadata, ReproducibleTimestampIsFixed) {
  if (std::getenv("SOURCE_DATE_EPOCH")) GTEST_SKIP();
  EXPECT_EQ(make_bundle({}, {sample_record()}, true).metadata.timestamp, "1970-01-01T00:00:00Z");
  EXPECT_EQ(utc_timestamp(86400 + 3661), "1970-01-02T01:01:01Z");
}

TEST(Emit, WritesFilesThatParseBack) {
  const auto dir = std::filesystem::temp_directory_path() / "mcl_report_test";
  ReportBundle b = make_bundle({{"k", "v"}}, {sample_record(1), sample_record(2)}, true);
  emit_csv(b, dir / "r.csv");
  emit_json(b, dir / "r.json");
  EXPECT_EQ(parse_csv(read_text(dir / "r.csv")), b.records);
  EXPECT_EQ(parse_json(read_text(dir / "r.json")), b);
  std::filesystem::remove_all(dir);
}

TEST(Median, OddEvenAndEmpty) {
  EXPECT_EQ(median({0.2, 0.9, 0.4}), 0.4);
  EXPECT_EQ(median({1.0, 3.0}), 2.0);
  EXPECT_THROW(median({}), ConfigError);
}

ReportBundle bundle_of(std::vector<ExperimentRecord> records) {
  ReportBundle b;
  b.records = std::move(records);
  return b;
}

TEST(Curve, SingleRepeatEqualsRawValues) {
  std::vector<ExperimentRecord> rs;
  for (std::size_t i = 0; i < 4; ++i) {
    ExperimentRecord r = sample_record(i);
    r.repeat = 0;
    rs.push_back(r);
  }
  auto c = curve(bundle_of(rs), "class_blind", "accuracy");
  ASSERT_EQ(c.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(c[i].first, rs[i].fraction);
    EXPECT_EQ(c[i].second, rs[i].accuracy);
  }
}

TEST(Curve, OddRepeatMedian) {
  std::vector<ExperimentRecord> rs;
  for (double acc : {0.2, 0.9, 0.4}) {
    ExperimentRecord r = sample_record();
    r.fraction = 0.5;
    r.accuracy = acc;
    rs.push_back(r);
  }
  EXPECT_EQ(curve(bundle_of(rs), "class_blind", "accuracy"),
            (std::vector<std::pair<double, double>>{{0.5, 0.4}}));
}

TEST(Curve, MatchesSortMedianOracleOnRandomBundles) {
  Rng rng(1);
  const std::vector<std::string> strategies{"random", "class_uniform", "class_blind"};
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<ExperimentRecord> rs;
    const std::size_t fractions = 1 + rng.below(6), repeats = 1 + rng.below(5);
    for (const auto& s : strategies) {
      for (std::size_t f = 0; f < fractions; ++f) {
        for (std::size_t r = 0; r < repeats; ++r) {
          ExperimentRecord rec;
          rec.strategy = s;
          rec.fraction = static_cast<double>(f) / 10.0;
          rec.repeat = r;
          rec.accuracy = rng.uniform01();
          rec.effective_params = rng.below(1000);
          rs.push_back(rec);
        }
      }
    }
    rng.shuffle(std::span<ExperimentRecord>(rs));
    const std::string& s = strategies[rng.below(3)];
    for (const char* field : {"accuracy", "effective_params"}) {
      auto c = curve(bundle_of(rs), s, field);
      ASSERT_EQ(c.size(), fractions);
      for (std::size_t f = 0; f < fractions; ++f) {
        std::vector<double> ys;
        for (const auto& rec : rs) {
          if (rec.strategy == s && rec.fraction == static_cast<double>(f) / 10.0) {
            ys.push_back(record_field(rec, field));
          }
        }
        std::sort(ys.begin(), ys.end());
        const double oracle = ys.size() % 2 ? ys[ys.size() / 2]
                                            : (ys[ys.size() / 2 - 1] + ys[ys.size() / 2]) / 2.0;
        EXPECT_EQ(c[f].first, static_cast<double>(f) / 10.0);
        EXPECT_EQ(c[f].second, oracle);
      }
    }
  }
}

TEST(Curve, UnknownStrategyOrField) {
  ReportBundle b = bundle_of({sample_record()});
  EXPECT_THROW(curve(b, "random", "accuracy"), ConfigError);
  EXPECT_THROW(curve(b, "class_blind", "loss"), ConfigError);
}

TEST(Curve, TsvHasHeaderAndRows) {
  EXPECT_EQ(curve_tsv({{0.0, 1.0}, {0.5, 0.25}}, "accuracy"),
            "fraction\taccuracy\n0\t1\n0.5\t0.25\n");
}

TEST(Golden, PipelineFilesAreCanonicalAndAgree) {
  const std::filesystem::path dir = MCL_TEST_GOLDEN_DIR;
  const std::string csv = read_text(dir / "pipeline_blobs.csv");
  const std::string json = read_text(dir / "pipeline_blobs.json");
  ReportBundle b = parse_json(json);
  EXPECT_EQ(to_json(b), json);
  EXPECT_EQ(to_csv(b), csv);
  EXPECT_EQ(parse_csv(csv), b.records);
  EXPECT_EQ(b.metadata.config_hash, config_hash(b.metadata.config));
}

}  // namespace
}  // namespace mcl
