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
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcl/dataset.hpp"
#include "mcl/distill.hpp"
#include "mcl/errors.hpp"
#include "mcl/metrics.hpp"
#include "mcl/network.hpp"
#include "mcl/pruning.hpp"
#include "mcl/report.hpp"
#include "mcl/train.hpp"

namespace mcl {

namespace stage {
inline constexpr const char* kBaseline = "baseline";
inline constexpr const char* kPruned = "pruned";
inline constexpr const char* kTeacherBaseline = "teacher_baseline";
inline constexpr const char* kStudentKd = "student_kd";
inline constexpr const char* kStudentPruned = "student_pruned";
}  // namespace stage

inline constexpr const char* kNoStrategy = "none";

struct SweepSpec {
  std::vector<Strategy> strategies{std::begin(kAllStrategies), std::end(kAllStrategies)};
  std::vector<double> fractions;  // ascending, within [0, 1]
  std::size_t repeats = 1;
  std::uint64_t base_seed = 0;  // repeat r uses base_seed + r
  std::optional<TrainConfig> fine_tune;
  bool cascade = false;
  // When false wall_ms is recorded as 0 so record streams are byte-stable.
  bool record_timing = true;

  void validate() const {
    if (strategies.empty()) throw ConfigError("sweep needs at least one strategy");
    if (fractions.empty()) throw ConfigError("sweep needs at least one fraction");
    for (std::size_t i = 0; i < fractions.size(); ++i) {
      if (!(fractions[i] >= 0.0 && fractions[i] <= 1.0)) {
        throw ConfigError("sweep fraction " + std::to_string(fractions[i]) +
                          " is outside [0, 1]");
      }
      if (i > 0 && !(fractions[i] > fractions[i - 1])) {
        throw ConfigError("sweep fractions must be strictly ascending");
      }
    }
    if (repeats < 1) throw ConfigError("sweep repeats must be at least 1");
    if (fine_tune) fine_tune->validate();
  }
};

struct SweepPoint {
  ExperimentRecord record;
  Network network;
};

// Prunes a fresh copy of `net` for one (strategy, fraction, repeat) and
// evaluates it. `reference_params` is the denominator of total_compression.
inline SweepPoint run_sweep_point(const Network& net, const LabeledDataset& train_data,
                                  const LabeledDataset& val_data, const SweepSpec& spec,
                                  Strategy strategy, double fraction, std::size_t repeat,
                                  std::size_t reference_params, const std::string& stage_name) {
  const auto start = std::chrono::steady_clock::now();
  PruneConfig cfg;
  cfg.strategy = strategy;
  cfg.fraction = fraction;
  cfg.seed = spec.base_seed + repeat;
  cfg.cascade = spec.cascade;
  if (spec.fine_tune) {
    cfg.fine_tune = *spec.fine_tune;
    cfg.fine_tune->seed = cfg.seed;
  }
  PruneOutcome outcome = prune(net, cfg, &train_data);
  SweepPoint p;
  p.record.stage = stage_name;
  p.record.strategy = std::string(to_string(strategy));
  p.record.fraction = fraction;
  p.record.repeat = repeat;
  p.record.seed = cfg.seed;
  p.record.accuracy = evaluate_top1(outcome.masked_network, val_data);
  p.record.effective_params = outcome.effective_params;
  p.record.cascaded_extra = outcome.cascaded_extra;
  p.record.total_compression =
      1.0 - static_cast<double>(outcome.effective_params) / static_cast<double>(reference_params);
  if (spec.record_timing) {
    p.record.wall_ms = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                              start)
            .count());
  }
  p.network = std::move(outcome.masked_network);
  return p;
}

// One record per (strategy, fraction, repeat), each pruned from a fresh copy
// of `net`, ordered by strategy, fraction, repeat.
inline std::vector<ExperimentRecord> prune_sweep(const Network& net,
                                                 const LabeledDataset& train_data,
                                                 const LabeledDataset& val_data,
                                                 const SweepSpec& spec,
                                                 std::size_t reference_params = 0,
                                                 const std::string& stage_name = stage::kPruned) {
  spec.validate();
  if (reference_params == 0) reference_params = count_effective_params(net);
  if (reference_params == 0) throw ConfigError("reference network has no parameters");
  std::vector<Strategy> strategies = spec.strategies;
  std::sort(strategies.begin(), strategies.end());
  strategies.erase(std::unique(strategies.begin(), strategies.end()), strategies.end());
  std::vector<ExperimentRecord> records;
  for (Strategy s : strategies) {
    for (double f : spec.fractions) {
      for (std::size_t r = 0; r < spec.repeats; ++r) {
        records.push_back(run_sweep_point(net, train_data, val_data, spec, s, f, r,
                                          reference_params, stage_name)
                              .record);
      }
    }
  }
  return records;
}

// Record for an unpruned network.
inline ExperimentRecord unpruned_record(const Network& net, const LabeledDataset& val_data,
                                        const std::string& stage_name, std::uint64_t seed,
                                        std::size_t reference_params) {
  ExperimentRecord r;
  r.stage = stage_name;
  r.strategy = kNoStrategy;
  r.seed = seed;
  r.accuracy = evaluate_top1(net, val_data);
  r.effective_params = count_effective_params(net);
  r.total_compression =
      1.0 - static_cast<double>(r.effective_params) / static_cast<double>(reference_params);
  return r;
}

struct PipelineSpec {
  // Either a trained teacher, or an architecture plus a training schedule.
  std::optional<Network> teacher;
  std::vector<LayerSpec> teacher_arch;
  Shape teacher_input_shape;  // empty: derived from the first layer
  std::optional<TrainConfig> teacher_train;
  std::uint64_t teacher_init_seed = 0;

  std::vector<LayerSpec> student_arch;
  std::uint64_t student_init_seed = 0;
  DistillConfig distill;
  SweepSpec sweep;
};

struct PipelineResult {
  std::vector<ExperimentRecord> records;
  Network teacher;
  Network student;        // after distillation, before pruning
  Network student_final;  // first strategy, largest fraction, repeat 0
  double param_ratio = 0.0;
  std::vector<std::string> warnings;
};

// Distils the teacher into the student, then sweeps pruning over the
// student. Compression is reported relative to the teacher.
inline PipelineResult kd_then_prune(const PipelineSpec& spec, const LabeledDataset& train_data,
                                    const LabeledDataset& val_data) {
  spec.sweep.validate();
  spec.distill.validate();
  PipelineResult out;
  if (spec.teacher) {
    out.teacher = *spec.teacher;
  } else {
    if (spec.teacher_arch.empty() || !spec.teacher_train) {
      throw ConfigError("pipeline needs a teacher network or a teacher architecture and schedule");
    }
    out.teacher = init_network(spec.teacher_arch, spec.teacher_init_seed, spec.teacher_input_shape);
    train(out.teacher, train_data, *spec.teacher_train);
  }
  if (spec.student_arch.empty()) throw ConfigError("pipeline needs a student architecture");
  Network student = init_network(spec.student_arch, spec.student_init_seed, out.teacher.input_shape);
  if (student.num_outputs != out.teacher.num_outputs) {
    throw ShapeError("student has " + std::to_string(student.num_outputs) +
                     " outputs, teacher has " + std::to_string(out.teacher.num_outputs));
  }
  const std::size_t teacher_params = count_effective_params(out.teacher);
  if (teacher_params == 0) throw ConfigError("teacher has no parameters");

  out.records.push_back(unpruned_record(out.teacher, val_data, stage::kTeacherBaseline,
                                        spec.teacher_init_seed, teacher_params));

  StudentResult kd = train_student(out.teacher, student, train_data, spec.distill);
  out.student = std::move(kd.student);
  out.param_ratio = param_ratio(out.student, out.teacher);
  if (auto w = student_ratio_warning(out.param_ratio)) out.warnings.push_back(*w);
  out.records.push_back(unpruned_record(out.student, val_data, stage::kStudentKd,
                                        spec.distill.train.seed, teacher_params));

  std::vector<Strategy> strategies = spec.sweep.strategies;
  std::sort(strategies.begin(), strategies.end());
  strategies.erase(std::unique(strategies.begin(), strategies.end()), strategies.end());
  bool have_final = false;
  for (Strategy s : strategies) {
    for (std::size_t fi = 0; fi < spec.sweep.fractions.size(); ++fi) {
      for (std::size_t r = 0; r < spec.sweep.repeats; ++r) {
        SweepPoint p = run_sweep_point(out.student, train_data, val_data, spec.sweep, s,
                                       spec.sweep.fractions[fi], r, teacher_params,
                                       stage::kStudentPruned);
        out.records.push_back(p.record);
        if (!have_final && fi + 1 == spec.sweep.fractions.size() && r == 0) {
          out.student_final = std::move(p.network);
          have_final = true;
        }
      }
    }
  }
  return out;
}

}  // namespace mcl
