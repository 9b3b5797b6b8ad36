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

// Command-line front end. Every flag can also be given in a key-value config
// file (--config), with '-' in the flag name written as '_'; flags on the
// command line win over the file.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "CLI11.hpp"
#include "mcl.hpp"

namespace mcl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitRuntime = 2;

inline constexpr const char* kArchHelp = R"(Architecture strings:
  arch  := item (',' item)*
  item  := in:CxHxW | dense:N-N[-N...] | conv:CkK[sS][pP] | pool:W[sS]
         | flatten | relu
  'relu' adds a ReLU after each layer of the preceding item, except the
  network's last layer. A flatten is inserted before a dense chain that
  follows an image-shaped layer.
  Examples: dense:784-128-64-10,relu
            in:1x28x28,conv:8k3p1,relu,pool:2,dense:1568-10
)";

struct Flag {
  std::string key;  // config key; the flag is "--" + key with '_' -> '-'
  std::string default_value;
  std::string help;
  bool boolean = false;
  bool required = false;
};

inline std::string flag_name(const std::string& key) {
  std::string s = "--" + key;
  std::replace(s.begin(), s.end(), '_', '-');
  return s;
}

// Keys that control where and how a run writes, not what it computes. They
// are left out of the echoed configuration.
inline bool is_plumbing(const std::string& key) {
  return key == "config" || key == "out" || key == "quiet";
}

inline std::vector<Flag> common_flags() {
  return {
      {"seed", "0", "seed for initialisation, shuffling and random pruning"},
      {"config", "", "key-value config file"},
      {"out", "out", "output directory"},
      {"quiet", "false", "suppress progress messages", true},
      {"reproducible", "false", "record wall_ms as 0 and a fixed timestamp", true},
  };
}

inline std::vector<Flag> data_flags() {
  return {
      {"data", "blobs", "dataset source: blobs, idx or cifar"},
      {"train_images", "", "IDX training images"},
      {"train_labels", "", "IDX training labels"},
      {"test_images", "", "IDX validation images"},
      {"test_labels", "", "IDX validation labels"},
      {"cifar_train", "", "comma-separated CIFAR-10 training batches"},
      {"cifar_test", "", "comma-separated CIFAR-10 validation batches"},
      {"blob_classes", "3", "number of blob classes"},
      {"blob_per_class", "200", "blob examples per class"},
      {"blob_dims", "2", "blob input dimensions"},
      {"blob_separation", "4", "distance between adjacent blob centres"},
      {"data_seed", "0", "seed for synthetic data and splits"},
      {"train_fraction", "0.75", "training share when no validation set is given"},
      {"train_limit", "0", "use only the first N training examples (0: all)"},
  };
}

inline std::vector<Flag> sgd_flags(const std::string& epochs_default) {
  return {
      {"epochs", epochs_default, "training epochs"},
      {"batch_size", "32", "minibatch size"},
      {"lr", "0.05", "learning rate"},
      {"momentum", "0.9", "SGD momentum"},
  };
}

inline std::vector<Flag> distill_flags() {
  return {
      {"student_arch", "", "student architecture string", false, true},
      {"temperature", "4", "softmax temperature"},
      {"alpha", "0", "weight of the hard-label loss"},
      {"cache_targets", "false", "compute teacher outputs once per run", true},
  };
}

inline std::vector<Flag> prune_flags() {
  return {
      {"cascade", "false", "remove outputs of units whose inputs are all pruned", true},
      {"fine_tune_epochs", "0", "masked fine-tuning epochs after pruning (0: none)"},
  };
}

struct Command {
  std::string name;
  std::string description;
  std::vector<Flag> flags;
};

inline std::vector<Command> commands() {
  auto concat = [](std::initializer_list<std::vector<Flag>> parts) {
    std::vector<Flag> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
  };
  return {
      {"train", "train a network from scratch",
       concat({common_flags(), data_flags(), sgd_flags("5"),
               {{"arch", "", "architecture string", false, true}}})},
      {"prune", "prune a trained network",
       concat({common_flags(), data_flags(), sgd_flags("1"), prune_flags(),
               {{"model", "", "input NNCM model", false, true},
                {"strategy", "class_blind", "random, class_uniform or class_blind"},
                {"fraction", "", "share of weights to remove, in [0, 1]", false, true}}})},
      {"distill", "train a student against a teacher",
       concat({common_flags(), data_flags(), sgd_flags("5"), distill_flags(),
               {{"teacher", "", "teacher NNCM model", false, true}}})},
      {"pipeline", "distil a teacher, then sweep pruning over the student",
       concat({common_flags(), data_flags(), sgd_flags("5"), distill_flags(), prune_flags(),
               {{"teacher", "", "teacher NNCM model (else trained from --teacher-arch)"},
                {"teacher_arch", "", "teacher architecture string"},
                {"teacher_epochs", "5", "teacher training epochs"},
                {"strategies", "random,class_uniform,class_blind", "pruning strategies"},
                {"fractions", "0,0.2,0.4,0.6,0.8", "ascending pruning fractions"},
                {"repeats", "1", "seeds per sweep point"}}})},
      {"eval", "report top-1 accuracy of a model",
       concat({common_flags(), data_flags(), {{"model", "", "NNCM model", false, true}}})},
      {"report", "print an accuracy or parameter curve from a record file",
       concat({common_flags(),
               {{"input", "", "records file (.csv or .json)", false, true},
                {"strategy", "class_blind", "strategy to plot"},
                {"field", "accuracy", "record field on the y axis"},
                {"stage", "", "only records of this stage"}}})},
  };
}

// Resolved flag values for one subcommand.
class Settings {
 public:
  Settings(std::string command, std::map<std::string, std::string> values,
           std::map<std::string, Flag> flags)
      : command_(std::move(command)), values_(std::move(values)), flags_(std::move(flags)) {}

  const std::string& command() const { return command_; }

  bool has(const std::string& key) const { return !str(key).empty(); }

  std::string str(const std::string& key) const {
    auto it = values_.find(key);
    return it == values_.end() ? std::string() : it->second;
  }

  double f64(const std::string& key) const {
    const std::string s = str(key);
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size()) throw invalid(key, "a number");
    return v;
  }

  std::uint64_t u64(const std::string& key) const {
    const std::string s = str(key);
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size()) {
      throw invalid(key, "a non-negative integer");
    }
    return v;
  }

  std::size_t size(const std::string& key) const { return static_cast<std::size_t>(u64(key)); }

  bool flag(const std::string& key) const {
    const std::string s = str(key);
    if (s.empty() || s == "false" || s == "0") return false;
    if (s == "true" || s == "1") return true;
    throw invalid(key, "true or false");
  }

  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    std::stringstream ss(str(key));
    for (std::string item; std::getline(ss, item, ',');) {
      if (item.empty()) throw invalid(key, "a comma-separated list without empty items");
      out.push_back(item);
    }
    return out;
  }

  // Configuration echoed into report metadata.
  std::map<std::string, std::string> echo() const {
    std::map<std::string, std::string> out{{"command", command_}};
    for (const auto& [k, v] : values_) {
      if (!is_plumbing(k)) out[k] = v;
    }
    return out;
  }

  ConfigError invalid(const std::string& key, const std::string& expected) const {
    return ConfigError("invalid value '" + str(key) + "' for " + flag_name(key) + ": expected " +
                       expected);
  }

 private:
  std::string command_;
  std::map<std::string, std::string> values_;
  std::map<std::string, Flag> flags_;
};

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

class Logger {
 public:
  Logger(std::ostream& err, bool quiet) : err_(err), quiet_(quiet) {}
  void operator()(const std::string& msg) const {
    if (!quiet_) err_ << msg << '\n';
  }

 private:
  std::ostream& err_;
  bool quiet_;
};

inline std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * v);
  return buf;
}

// Input files and output files of a run, checked up front.
struct FilePlan {
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
};

inline void check_files(const FilePlan& plan) {
  for (const auto& p : plan.inputs) {
    if (!std::filesystem::is_regular_file(p)) throw IoError("file not found: " + p.string());
  }
  for (const auto& o : plan.outputs) {
    for (const auto& i : plan.inputs) {
      std::error_code ec;
      if (std::filesystem::weakly_canonical(o, ec) == std::filesystem::weakly_canonical(i, ec)) {
        throw ConfigError("output " + o.string() + " would overwrite input " + i.string());
      }
    }
  }
}

struct DataPlan {
  std::string source;
  std::vector<std::filesystem::path> train_files, test_files;
  std::size_t blob_classes = 0, blob_per_class = 0, blob_dims = 0;
  double blob_separation = 0.0;
  std::uint64_t data_seed = 0;
  double train_fraction = 0.75;
  std::size_t train_limit = 0;
};

inline std::vector<std::filesystem::path> paths(const std::vector<std::string>& items) {
  return {items.begin(), items.end()};
}

inline DataPlan plan_data(const Settings& s, FilePlan& files) {
  DataPlan d;
  d.source = s.str("data");
  d.data_seed = s.u64("data_seed");
  d.train_fraction = s.f64("train_fraction");
  d.train_limit = s.size("train_limit");
  if (d.source == "blobs") {
    d.blob_classes = s.size("blob_classes");
    d.blob_per_class = s.size("blob_per_class");
    d.blob_dims = s.size("blob_dims");
    d.blob_separation = s.f64("blob_separation");
    if (d.blob_classes < 2) throw ConfigError("--blob-classes must be at least 2");
    if (d.blob_per_class < 1 || d.blob_dims < 1) {
      throw ConfigError("--blob-per-class and --blob-dims must be positive");
    }
    if (!(d.blob_separation > 0.0)) throw ConfigError("--blob-separation must be positive");
  } else if (d.source == "idx") {
    if (!s.has("train_images") || !s.has("train_labels")) {
      throw ConfigError("--data idx needs --train-images and --train-labels");
    }
    d.train_files = {s.str("train_images"), s.str("train_labels")};
    if (s.has("test_images") != s.has("test_labels")) {
      throw ConfigError("--test-images and --test-labels go together");
    }
    if (s.has("test_images")) d.test_files = {s.str("test_images"), s.str("test_labels")};
  } else if (d.source == "cifar") {
    if (!s.has("cifar_train")) throw ConfigError("--data cifar needs --cifar-train");
    d.train_files = paths(s.list("cifar_train"));
    if (s.has("cifar_test")) d.test_files = paths(s.list("cifar_test"));
  } else {
    throw s.invalid("data", "blobs, idx or cifar");
  }
  if (d.test_files.empty() && !(d.train_fraction > 0.0 && d.train_fraction < 1.0)) {
    throw ConfigError("--train-fraction must be in (0, 1), got " + s.str("train_fraction"));
  }
  files.inputs.insert(files.inputs.end(), d.train_files.begin(), d.train_files.end());
  files.inputs.insert(files.inputs.end(), d.test_files.begin(), d.test_files.end());
  return d;
}

struct DataSplit {
  LabeledDataset train;
  LabeledDataset val;
};

inline DataSplit load_data(const DataPlan& d) {
  LabeledDataset all, test;
  if (d.source == "blobs") {
    all = synth_blobs(d.blob_classes, d.blob_per_class, d.blob_dims, d.blob_separation,
                      d.data_seed);
  } else if (d.source == "idx") {
    all = load_idx(d.train_files[0], d.train_files[1]);
    if (!d.test_files.empty()) test = load_idx(d.test_files[0], d.test_files[1]);
  } else {
    all = load_cifar10(d.train_files);
    if (!d.test_files.empty()) test = load_cifar10(d.test_files);
  }
  DataSplit out;
  if (d.test_files.empty()) {
    auto [tr, va] = split(all, d.train_fraction, d.data_seed);
    out.train = std::move(tr);
    out.val = std::move(va);
  } else {
    out.train = std::move(all);
    out.val = std::move(test);
    const std::size_t classes = std::max(out.train.class_count, out.val.class_count);
    out.train.class_count = out.val.class_count = classes;
  }
  if (d.train_limit > 0 && d.train_limit < out.train.size()) {
    std::vector<std::size_t> first(d.train_limit);
    std::iota(first.begin(), first.end(), 0);
    out.train = out.train.subset(first);
  }
  return out;
}

// Reshapes inputs to what `net` expects when only the layout differs.
inline LabeledDataset fit_to(const LabeledDataset& data, const Shape& input_shape) {
  if (data.input_shape() == input_shape) return data;
  if (shape_size(data.input_shape()) != shape_size(input_shape)) {
    throw ShapeError("dataset inputs " + shape_string(data.input_shape()) +
                     " do not fit network input " + shape_string(input_shape));
  }
  return data.reshaped(input_shape);
}

inline Architecture plan_arch(const Settings& s, const std::string& key) {
  Architecture a = parse_architecture(s.str(key));
  if (a.input_shape.empty()) a.input_shape = natural_input_shape(a.layers.front());
  infer_shapes(a.layers, a.input_shape);
  return a;
}

inline TrainConfig plan_sgd(const Settings& s, std::size_t epochs) {
  TrainConfig t;
  t.epochs = epochs;
  t.batch_size = s.size("batch_size");
  t.learning_rate = s.f64("lr");
  t.momentum = s.f64("momentum");
  t.seed = s.u64("seed");
  t.validate();
  return t;
}

inline std::optional<TrainConfig> plan_fine_tune(const Settings& s) {
  const std::size_t epochs = s.size("fine_tune_epochs");
  if (epochs == 0) return std::nullopt;
  return plan_sgd(s, epochs);
}

inline DistillConfig plan_distill(const Settings& s) {
  DistillConfig d;
  d.temperature = s.f64("temperature");
  d.alpha = s.f64("alpha");
  d.cache_targets = s.flag("cache_targets");
  d.train = plan_sgd(s, s.size("epochs"));
  d.validate();
  return d;
}

struct Outputs {
  std::filesystem::path dir;
  bool reproducible = false;

  std::filesystem::path operator/(const std::string& name) const { return dir / name; }
};

inline void write_records(const Outputs& out, const Settings& s,
                          std::vector<ExperimentRecord> records) {
  const ReportBundle bundle = make_bundle(s.echo(), std::move(records), out.reproducible);
  emit_csv(bundle, out / "records.csv");
  emit_json(bundle, out / "records.json");
}

inline std::vector<std::filesystem::path> record_files(const Outputs& out) {
  return {out / "records.csv", out / "records.json"};
}

using Action = std::function<void()>;

// Validates `s` for its subcommand and returns the run, which does all the
// computation. Errors thrown here are validation errors.
inline Action plan(const Settings& s, const Streams& io) {
  FilePlan files;
  Outputs out{s.str("out"), s.flag("reproducible")};
  const Logger log(io.err, s.flag("quiet"));
  const std::uint64_t seed = s.u64("seed");
  const std::string cmd = s.command();

  if (cmd == "train") {
    const DataPlan data = plan_data(s, files);
    const Architecture arch = plan_arch(s, "arch");
    const TrainConfig cfg = plan_sgd(s, s.size("epochs"));
    files.outputs = record_files(out);
    files.outputs.push_back(out / "model.nncm");
    check_files(files);
    return [=, &s, &io] {
      DataSplit d = load_data(data);
      Network net = init_network(arch.layers, seed, arch.input_shape);
      d.train = fit_to(d.train, net.input_shape);
      d.val = fit_to(d.val, net.input_shape);
      log("training " + std::to_string(parameter_count(net)) + " parameters on " +
          std::to_string(d.train.size()) + " examples");
      train(net, d.train, cfg);
      const std::size_t params = count_effective_params(net);
      ExperimentRecord r = unpruned_record(net, d.val, stage::kBaseline, seed, params);
      io.out << "top1 " << format_double(r.accuracy) << '\n';
      save_network(net, out / "model.nncm");
      write_records(out, s, {r});
    };
  }

  if (cmd == "prune") {
    const DataPlan data = plan_data(s, files);
    PruneConfig cfg;
    cfg.strategy = parse_strategy(s.str("strategy"));
    cfg.fraction = s.f64("fraction");
    cfg.seed = seed;
    cfg.cascade = s.flag("cascade");
    cfg.fine_tune = plan_fine_tune(s);
    cfg.validate();
    const std::filesystem::path model = s.str("model");
    files.inputs.push_back(model);
    files.outputs = record_files(out);
    files.outputs.push_back(out / "pruned.nncm");
    check_files(files);
    return [=, &s, &io] {
      const Network net = load_network(model);
      DataSplit d = load_data(data);
      d.train = fit_to(d.train, net.input_shape);
      d.val = fit_to(d.val, net.input_shape);
      SweepSpec sweep;
      sweep.strategies = {cfg.strategy};
      sweep.fractions = {cfg.fraction};
      sweep.base_seed = seed;
      sweep.fine_tune = cfg.fine_tune;
      sweep.cascade = cfg.cascade;
      sweep.record_timing = !out.reproducible;
      const std::size_t reference = count_effective_params(net);
      SweepPoint p = run_sweep_point(net, d.train, d.val, sweep, cfg.strategy, cfg.fraction, 0,
                                     reference, stage::kPruned);
      log("pruned " + std::string(to_string(cfg.strategy)) + " at " + format_double(cfg.fraction) +
          ": " + std::to_string(p.record.effective_params) + " of " + std::to_string(reference) +
          " parameters left");
      io.out << "top1 " << format_double(p.record.accuracy) << '\n';
      save_network(p.network, out / "pruned.nncm");
      write_records(out, s, {p.record});
    };
  }

  if (cmd == "distill") {
    const DataPlan data = plan_data(s, files);
    const DistillConfig cfg = plan_distill(s);
    const Architecture arch = plan_arch(s, "student_arch");
    const std::filesystem::path teacher_path = s.str("teacher");
    files.inputs.push_back(teacher_path);
    files.outputs = record_files(out);
    files.outputs.push_back(out / "student.nncm");
    check_files(files);
    return [=, &s, &io] {
      const Network teacher = load_network(teacher_path);
      DataSplit d = load_data(data);
      d.train = fit_to(d.train, teacher.input_shape);
      d.val = fit_to(d.val, teacher.input_shape);
      const Network fresh = init_network(arch.layers, seed, teacher.input_shape);
      const double ratio = param_ratio(fresh, teacher);
      if (auto w = student_ratio_warning(ratio)) io.err << "warning: " << *w << '\n';
      log("distilling at temperature " + format_double(cfg.temperature));
      StudentResult kd = train_student(teacher, fresh, d.train, cfg);
      const std::size_t reference = count_effective_params(teacher);
      std::vector<ExperimentRecord> records{
          unpruned_record(teacher, d.val, stage::kTeacherBaseline, seed, reference),
          unpruned_record(kd.student, d.val, stage::kStudentKd, seed, reference)};
      io.out << "teacher_top1 " << format_double(records[0].accuracy) << '\n'
             << "student_top1 " << format_double(records[1].accuracy) << '\n'
             << "param_ratio " << format_double(ratio) << '\n';
      save_network(kd.student, out / "student.nncm");
      write_records(out, s, std::move(records));
    };
  }

  if (cmd == "pipeline") {
    const DataPlan data = plan_data(s, files);
    PipelineSpec spec;
    std::optional<std::filesystem::path> teacher_path;
    if (s.has("teacher")) {
      teacher_path = s.str("teacher");
      files.inputs.push_back(*teacher_path);
    } else if (s.has("teacher_arch")) {
      const Architecture t = plan_arch(s, "teacher_arch");
      spec.teacher_arch = t.layers;
      spec.teacher_input_shape = t.input_shape;
      spec.teacher_train = plan_sgd(s, s.size("teacher_epochs"));
      spec.teacher_init_seed = seed;
    } else {
      throw ConfigError("pipeline needs --teacher or --teacher-arch");
    }
    spec.student_arch = plan_arch(s, "student_arch").layers;
    spec.student_init_seed = seed;
    spec.distill = plan_distill(s);
    spec.sweep.strategies.clear();
    for (const auto& name : s.list("strategies")) {
      spec.sweep.strategies.push_back(parse_strategy(name));
    }
    for (const auto& f : s.list("fractions")) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || p != f.data() + f.size()) throw s.invalid("fractions", "numbers");
      spec.sweep.fractions.push_back(v);
    }
    spec.sweep.repeats = s.size("repeats");
    spec.sweep.base_seed = seed;
    spec.sweep.fine_tune = plan_fine_tune(s);
    spec.sweep.cascade = s.flag("cascade");
    spec.sweep.record_timing = !out.reproducible;
    spec.sweep.validate();
    files.outputs = record_files(out);
    for (const char* m : {"teacher.nncm", "student.nncm", "student_final.nncm"}) {
      files.outputs.push_back(out / m);
    }
    check_files(files);
    return [=, &s, &io]() mutable {
      DataSplit d = load_data(data);
      if (teacher_path) {
        spec.teacher = load_network(*teacher_path);
        d.train = fit_to(d.train, spec.teacher->input_shape);
        d.val = fit_to(d.val, spec.teacher->input_shape);
      } else {
        d.train = fit_to(d.train, spec.teacher_input_shape);
        d.val = fit_to(d.val, spec.teacher_input_shape);
        log("training teacher");
      }
      PipelineResult r = kd_then_prune(spec, d.train, d.val);
      for (const auto& w : r.warnings) io.err << "warning: " << w << '\n';
      log("student has " + pct(r.param_ratio) + " of the teacher's parameters");
      save_network(r.teacher, out / "teacher.nncm");
      save_network(r.student, out / "student.nncm");
      save_network(r.student_final, out / "student_final.nncm");
      for (const auto& rec : r.records) {
        io.out << rec.stage << ' ' << rec.strategy << ' ' << format_double(rec.fraction) << ' '
               << rec.repeat << " top1 " << format_double(rec.accuracy) << " compression "
               << format_double(rec.total_compression) << '\n';
      }
      write_records(out, s, std::move(r.records));
    };
  }

  if (cmd == "eval") {
    const DataPlan data = plan_data(s, files);
    const std::filesystem::path model = s.str("model");
    files.inputs.push_back(model);
    check_files(files);
    return [=, &io] {
      const Network net = load_network(model);
      DataSplit d = load_data(data);
      io.out << "top1 " << format_double(evaluate_top1(net, fit_to(d.val, net.input_shape)))
             << '\n';
    };
  }

  // report
  const std::filesystem::path input = s.str("input");
  const std::string field = s.str("field");
  record_field(ExperimentRecord{}, field);
  const std::string strategy = s.str("strategy");
  const std::string stage_filter = s.str("stage");
  files.inputs.push_back(input);
  check_files(files);
  return [=, &io] {
    const Bytes bytes = read_file(input);
    const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    ReportBundle bundle;
    if (input.extension() == ".json") {
      bundle = parse_json(text);
    } else {
      bundle.records = parse_csv(text);
    }
    if (!stage_filter.empty()) {
      std::erase_if(bundle.records,
                    [&](const ExperimentRecord& r) { return r.stage != stage_filter; });
    }
    io.out << curve_tsv(curve(bundle, strategy, field), field);
  };
}

inline std::string join_flags(const std::vector<Flag>& flags) {
  std::string s;
  for (const auto& f : flags) s += (s.empty() ? "" : ", ") + flag_name(f.key);
  return s;
}

// Runs one command line; argv[0] is the program name.
inline int run(const std::vector<std::string>& argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  const Streams io{out, err};
  CLI::App app{"Pruning and knowledge distillation workbench", "mcl"};
  app.footer(kArchHelp);
  app.require_subcommand(1);

  const std::vector<Command> cmds = commands();
  std::map<std::string, std::map<std::string, std::string>> given;
  std::map<std::string, std::map<std::string, bool>> given_flags;
  std::vector<CLI::App*> subs;
  for (const Command& c : cmds) {
    CLI::App* sub = app.add_subcommand(c.name, c.description);
    sub->footer(kArchHelp);
    for (const Flag& f : c.flags) {
      if (f.boolean) {
        sub->add_flag(flag_name(f.key), given_flags[c.name][f.key], f.help);
      } else {
        std::string help = f.help;
        if (!f.default_value.empty()) help += " (default " + f.default_value + ")";
        if (f.required) help += " (required)";
        sub->add_option(flag_name(f.key), given[c.name][f.key], help);
      }
    }
    subs.push_back(sub);
  }

  std::vector<std::string> args(argv.begin() + (argv.empty() ? 0 : 1), argv.end());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    for (std::size_t i = 0; i < cmds.size(); ++i) {
      if (subs[i]->parsed()) {
        if (dynamic_cast<const CLI::ExtrasError*>(&e) != nullptr) {
          err << "valid flags for " << cmds[i].name << ": " << join_flags(cmds[i].flags) << '\n';
        }
        return kExitInvalid;
      }
    }
    err << "valid subcommands: train, prune, distill, pipeline, eval, report\n";
    return kExitInvalid;
  }

  std::size_t which = 0;
  while (!subs[which]->parsed()) ++which;
  const Command& cmd = cmds[which];
  CLI::App* sub = subs[which];

  Action action;
  std::optional<Settings> settings;
  try {
    std::map<std::string, Flag> by_key;
    for (const Flag& f : cmd.flags) by_key[f.key] = f;
    std::map<std::string, std::string> values;
    for (const Flag& f : cmd.flags) values[f.key] = f.default_value;
    const std::string config_path = given[cmd.name]["config"];
    if (sub->count(flag_name("config")) > 0) {
      for (const auto& [key, v] : load_config(config_path)) {
        std::string k = key;
        std::replace(k.begin(), k.end(), '-', '_');
        if (!by_key.count(k) || k == "config") {
          throw ConfigError("unknown key '" + k + "' in " + config_path +
                            "; valid keys for " + cmd.name + ": " + join_flags(cmd.flags));
        }
        values[k] = v;
      }
    }
    for (const Flag& f : cmd.flags) {
      if (sub->count(flag_name(f.key)) == 0) continue;
      values[f.key] = f.boolean ? (given_flags[cmd.name][f.key] ? "true" : "false")
                                : given[cmd.name][f.key];
    }
    for (const Flag& f : cmd.flags) {
      if (f.required && values[f.key].empty()) {
        throw ConfigError("missing required flag " + flag_name(f.key));
      }
    }
    settings.emplace(cmd.name, std::move(values), std::move(by_key));
    action = plan(*settings, io);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }

  try {
    action();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

inline int run(int argc, char** argv) {
  return run(std::vector<std::string>(argv, argv + argc));
}

}  // namespace mcl::cli
