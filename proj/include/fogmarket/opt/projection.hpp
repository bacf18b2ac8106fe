// Copyright 2026 The fogmarket Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace fogmarket::opt {

/// Euclidean projection onto {v : v_k <= upper}: a componentwise clamp.
inline Eigen::VectorXd clamp_projection(const Eigen::VectorXd& v, double upper) {
  if (!(upper > 0.0)) throw std::invalid_argument("clamp_projection: upper must be positive");
  return v.cwiseMin(upper);
}

}  // namespace fogmarket::opt
