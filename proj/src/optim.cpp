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

#include "hgnn/optim.hpp"

#include <cmath>
#include <string>

#include "hgnn/errors.hpp"

namespace hgnn {

AdamState adam_init(const AdamOptions& options,
                    std::span<const Tensor* const> params) {
  if (!(options.lr >= 0.0) || !(options.beta1 >= 0.0 && options.beta1 < 1.0) ||
      !(options.beta2 >= 0.0 && options.beta2 < 1.0) || !(options.eps > 0.0) ||
      !(options.weight_decay >= 0.0))
    throw ParameterError("adam: invalid options");
  AdamState s;
  s.options = options;
  for (const Tensor* p : params) {
    s.m.emplace_back(p->rows(), p->cols());
    s.v.emplace_back(p->rows(), p->cols());
  }
  return s;
}

void adam_step(AdamState& state, std::span<Tensor* const> params,
               std::span<const Tensor> grads) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw DimensionError("adam_step: parameter/gradient count mismatch");
  const AdamOptions& o = state.options;
  ++state.step;
  const double bc1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    const Tensor& g = grads[k];
    Tensor& m = state.m[k];
    Tensor& v = state.v[k];
    if (!p.same_shape(g) || !p.same_shape(m))
      throw DimensionError("adam_step: shape mismatch for parameter " +
                           std::to_string(k));
    for (std::size_t i = 0; i < p.size(); ++i) {
      double gi = g[i];
      if (!o.decoupled) gi += o.weight_decay * p[i];
      m[i] = o.beta1 * m[i] + (1.0 - o.beta1) * gi;
      v[i] = o.beta2 * v[i] + (1.0 - o.beta2) * gi * gi;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      if (o.decoupled) p[i] -= o.lr * o.weight_decay * p[i];
      p[i] -= o.lr * mhat / (std::sqrt(vhat) + o.eps);
    }
  }
}

}  // namespace hgnn
