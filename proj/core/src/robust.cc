/*
 * Copyright 2026 The ctcalib Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ctcalib/robust.h"

#include <cmath>

namespace ctcalib {

double RobustWeight::Cost(double s) const {
  switch (kernel) {
    case RobustKernel::kNone:
      return 0.5 * s * s;
    case RobustKernel::kHuber:
      return s <= scale ? 0.5 * s * s : scale * s - 0.5 * scale * scale;
    case RobustKernel::kCauchy:
      return 0.5 * scale * scale * std::log1p((s * s) / (scale * scale));
  }
  return 0.5 * s * s;
}

double RobustWeight::Weight(double s) const {
  switch (kernel) {
    case RobustKernel::kNone:
      return 1.0;
    case RobustKernel::kHuber:
      return s <= scale ? 1.0 : scale / s;
    case RobustKernel::kCauchy:
      return 1.0 / (1.0 + (s * s) / (scale * scale));
  }
  return 1.0;
}

double RobustWeight::Curvature(double s) const {
  switch (kernel) {
    case RobustKernel::kNone:
      return 1.0;
    case RobustKernel::kHuber:
      return s <= scale ? 1.0 : 0.0;
    case RobustKernel::kCauchy: {
      const double q = (s * s) / (scale * scale);
      return (1.0 - q) / ((1.0 + q) * (1.0 + q));
    }
  }
  return 1.0;
}

}  // namespace ctcalib
