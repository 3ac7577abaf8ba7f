// Copyright 2026 The HeteroGNN Authors.
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

#ifndef HGNN_OPTIM_HPP_
#define HGNN_OPTIM_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "hgnn/tensor.hpp"

namespace hgnn {

struct AdamOptions {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  // true: AdamW-style decay applied to the weights; false: L2 term folded
  // into the gradient.
  bool decoupled = true;
};

struct AdamState {
  AdamOptions options;
  std::int64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

// Moments shaped like `params`.
AdamState adam_init(const AdamOptions& options,
                    std::span<const Tensor* const> params);

// One bias-corrected Adam update, in place.
void adam_step(AdamState& state, std::span<Tensor* const> params,
               std::span<const Tensor> grads);

}  // namespace hgnn

#endif  // HGNN_OPTIM_HPP_
