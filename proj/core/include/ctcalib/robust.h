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

#ifndef CTCALIB_ROBUST_H_
#define CTCALIB_ROBUST_H_

namespace ctcalib {

enum class RobustKernel { kNone, kHuber, kCauchy };

// M-estimator applied to the residual norm.
struct RobustWeight {
  RobustKernel kernel = RobustKernel::kHuber;
  double scale = 2.0;  // pixels

  // rho(s); equals s^2 / 2 for small s.
  double Cost(double residual_norm) const;
  // IRLS weight rho'(s) / s.
  double Weight(double residual_norm) const;
  // rho''(s).
  double Curvature(double residual_norm) const;
};

}  // namespace ctcalib

#endif  // CTCALIB_ROBUST_H_
