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

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcl/dataset.hpp"
#include "mcl/errors.hpp"
#include "mcl/metrics.hpp"
#include "mcl/network.hpp"
#include "mcl/pruning.hpp"
#include "mcl/train.hpp"

namespace mcl {

// Student/teacher size ratio below which a warning is emitted.
inline constexpr double kStudentRatioWarning = 0.20;

// Knowledge distillation settings. temperature = 4 and alpha = 0 (pure
// mimicry of the teacher's softened outputs) are defaults, not tuned values.
struct DistillConfig {
  double temperature = 4.0;
  double alpha = 0.0;  // weight of the hard-label term
  TrainConfig train;
  // Precompute teacher logits once instead of per batch. Results are
  // identical either way.
  bool cache_targets = false;

  void validate() const {
    if (!(temperature > 0.0) || !std::isfinite(temperature)) {
      throw ConfigError("temperature must be positive, got " + std::to_string(temperature));
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
      throw ConfigError("alpha must be in [0, 1], got " + std::to_string(alpha));
    }
    train.validate();
  }
};

// softmax(logits / temperature), row-wise.
inline Tensor soft_targets(const Tensor& logits, double temperature) {
  return softmax(logits, temperature);
}

struct DistillLoss {
  double loss = 0.0;
  Tensor grad;  // d loss / d student logits
};

// (1 - alpha) * T^2 * CE(softmax(teacher / T), softmax(student / T))
//   + alpha * CE(onehot(labels), softmax(student)), averaged over rows.
inline DistillLoss distill_loss_and_grad(const Tensor& student_logits,
                                         const Tensor& teacher_logits,
                                         const std::vector<std::size_t>& hard_labels,
                                         double temperature, double alpha) {
  if (student_logits.shape() != teacher_logits.shape() || student_logits.rank() != 2) {
    throw ShapeError("student logits " + shape_string(student_logits.shape()) +
                     " and teacher logits " + shape_string(teacher_logits.shape()) +
                     " differ");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ConfigError("alpha must be in [0, 1], got " + std::to_string(alpha));
  }
  const std::size_t n = student_logits.dim(0), c = student_logits.dim(1);
  const double inv_n = 1.0 / static_cast<double>(n);
  DistillLoss out;
  out.grad = Tensor(student_logits.shape(), 0.0);
  if (alpha < 1.0) {
    const Tensor p = soft_targets(teacher_logits, temperature);
    const Tensor q = softmax(student_logits, temperature);
    const double w = (1.0 - alpha) * temperature * temperature;
    out.loss += w * cross_entropy(p, student_logits, temperature);
    const double gw = (1.0 - alpha) * temperature * inv_n;
    for (std::size_t i = 0; i < out.grad.size(); ++i) out.grad[i] += gw * (q[i] - p[i]);
  } else {
    softmax(teacher_logits, temperature);  // temperature check only
  }
  if (alpha > 0.0) {
    const Tensor y = target_distribution(Targets(hard_labels), n, c);
    const Tensor q1 = softmax(student_logits);
    out.loss += alpha * cross_entropy(y, student_logits);
    for (std::size_t i = 0; i < out.grad.size(); ++i) out.grad[i] += alpha * inv_n * (q1[i] - y[i]);
  }
  return out;
}

inline double distill_loss(const Tensor& student_logits, const Tensor& teacher_logits,
                           const std::vector<std::size_t>& hard_labels, const DistillConfig& cfg) {
  return distill_loss_and_grad(student_logits, teacher_logits, hard_labels, cfg.temperature,
                               cfg.alpha)
      .loss;
}

// Mean KL(softmax(teacher / T) || softmax(student / T)) over rows.
inline double mean_kl(const Tensor& teacher_logits, const Tensor& student_logits,
                      double temperature = 1.0) {
  const Tensor p = softmax(teacher_logits, temperature);
  const Tensor lp = log_softmax(teacher_logits, temperature);
  const Tensor lq = log_softmax(student_logits, temperature);
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) total += p[i] * (lp[i] - lq[i]);
  }
  return total / static_cast<double>(p.dim(0));
}

inline double param_ratio(double student_params, double teacher_params) {
  if (!(teacher_params > 0.0)) throw ConfigError("teacher has no parameters");
  return student_params / teacher_params;
}

// Effective parameter count of the student over that of the teacher.
inline double param_ratio(const Network& student, const Network& teacher) {
  return param_ratio(static_cast<double>(count_effective_params(student)),
                     static_cast<double>(count_effective_params(teacher)));
}

inline std::optional<std::string> student_ratio_warning(double ratio) {
  if (ratio >= kStudentRatioWarning) return std::nullopt;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "student/teacher parameter ratio %.4f is below %.2f; accuracy may drop "
                "noticeably",
                ratio, kStudentRatioWarning);
  return std::string(buf);
}

struct StudentResult {
  Network student;
  TrainReport report;  // validation accuracy is top-1 against dataset labels
};

// Trains a copy of `student` on the distillation loss against the frozen
// teacher's outputs.
inline StudentResult train_student(const Network& teacher, const Network& student,
                                   const LabeledDataset& data, const DistillConfig& cfg,
                                   const LabeledDataset* validation = nullptr) {
  cfg.validate();
  if (teacher.num_outputs != student.num_outputs) {
    throw ShapeError("teacher has " + std::to_string(teacher.num_outputs) +
                     " outputs, student has " + std::to_string(student.num_outputs));
  }
  if (teacher.input_shape != student.input_shape) {
    throw ShapeError("teacher input " + shape_string(teacher.input_shape) +
                     " != student input " + shape_string(student.input_shape));
  }
  std::optional<Tensor> cached;
  if (cfg.cache_targets) cached = predict_logits(teacher, data.inputs);

  BatchObjective objective = [&](const Network& s, std::span<const std::size_t> idx,
                                 std::size_t batch_index) {
    const Tensor batch = gather_rows(data.inputs, idx);
    Tensor teacher_logits =
        cached ? gather_rows(*cached, idx) : forward(teacher, batch);
    std::vector<std::size_t> labels(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) labels[r] = data.labels[idx[r]];
    ForwardTrace trace = forward_trace(s, batch);
    DistillLoss dl = distill_loss_and_grad(trace.logits(), teacher_logits, labels,
                                           cfg.temperature, cfg.alpha);
    if (!std::isfinite(dl.loss)) {
      throw DivergenceError(0, batch_index,
                            "non-finite distillation loss in batch " + std::to_string(batch_index));
    }
    LossAndGradients out;
    out.loss = dl.loss;
    out.grads = backward(s, trace, dl.grad);
    out.logits = std::move(trace.activations.back());
    return out;
  };
  StudentResult result;
  result.student = student;
  result.report = run_sgd(result.student, data, cfg.train, objective, validation);
  return result;
}

}  // namespace mcl
