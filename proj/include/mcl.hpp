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

#include "mcl/arch.hpp"
#include "mcl/bytes.hpp"
#include "mcl/config.hpp"
#include "mcl/dataio.hpp"
#include "mcl/dataset.hpp"
#include "mcl/distill.hpp"
#include "mcl/errors.hpp"
#include "mcl/layers.hpp"
#include "mcl/mask.hpp"
#include "mcl/metrics.hpp"
#include "mcl/network.hpp"
#include "mcl/pipeline.hpp"
#include "mcl/pruning.hpp"
#include "mcl/report.hpp"
#include "mcl/rng.hpp"
#include "mcl/serialize.hpp"
#include "mcl/tensor.hpp"
#include "mcl/train.hpp"
