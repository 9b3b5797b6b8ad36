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

#include <string>
#include <vector>

namespace mcl::testing {

// Fixed-seed command line behind the golden pipeline records.
inline std::vector<std::string> golden_pipeline_args(const std::string& out_dir) {
  return {"mcl",
          "pipeline",
          "--data", "blobs",
          "--blob-classes", "3",
          "--blob-per-class", "120",
          "--blob-separation", "3.5",
          "--data-seed", "5",
          "--teacher-arch", "dense:2-32-32-3,relu",
          "--teacher-epochs", "8",
          "--student-arch", "dense:2-6-3,relu",
          "--epochs", "8",
          "--fractions", "0,0.25,0.5,0.75",
          "--repeats", "2",
          "--fine-tune-epochs", "1",
          "--cascade",
          "--seed", "11",
          "--reproducible",
          "--quiet",
          "--out", out_dir};
}

}  // namespace mcl::testing
