// Copyright 2026 The SELI Geometry Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "seli/sel.hpp"

namespace seli {

/// Unconstrained-features state: classifiers W (d x k) and free embeddings
/// H (d x n).
struct UfmState {
  MatrixXd W;
  MatrixXd H;

  int d() const { return static_cast<int>(W.rows()); }
  MatrixXd logits() const { return W.transpose() * H; }
};

}  // namespace seli
