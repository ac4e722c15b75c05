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

#include "ctcalib/normal_equations.h"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace ctcalib {

Eigen::MatrixXd NormalEquations::DenseHessian() const {
  const auto n = static_cast<Eigen::Index>(kCoreDim + 3 * landmarks.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  h.topLeftCorner<kCoreDim, kCoreDim>() = h_cc;
  for (std::size_t j = 0; j < landmarks.size(); ++j) {
    const auto o = static_cast<Eigen::Index>(kCoreDim + 3 * j);
    h.block<3, 3>(o, o) = landmarks[j].h_ss;
    h.block<kCoreDim, 3>(0, o) = landmarks[j].h_cs;
    h.block<3, kCoreDim>(o, 0) = landmarks[j].h_cs.transpose();
  }
  return h;
}

Eigen::VectorXd NormalEquations::DenseGradient() const {
  const auto n = static_cast<Eigen::Index>(kCoreDim + 3 * landmarks.size());
  Eigen::VectorXd g(n);
  g.head<kCoreDim>() = g_c;
  for (std::size_t j = 0; j < landmarks.size(); ++j) {
    g.segment<3>(static_cast<Eigen::Index>(kCoreDim + 3 * j)) =
        landmarks[j].g_s;
  }
  return g;
}

NormalEquations AssembleNormalEquations(
    const CalibrationState& state,
    std::span<const LandmarkObservations> landmarks,
    const ContinuousTrajectory& lidar, const CameraIntrinsics& intrinsics,
    const RobustWeight& robust) {
  const Pose camera_from_lidar = state.camera_from_lidar();
  NormalEquations ne;
  ne.landmarks.reserve(landmarks.size());
  // Sequential accumulation keeps the floating-point reduction order fixed.
  for (const auto& lm : landmarks) {
    LandmarkBlock block;
    block.landmark_id = lm.landmark_id;
    for (const auto& obs : lm.observations) {
      if (!lidar.Contains(obs.frame_time + state.tau)) {
        ++ne.excluded_count;
        continue;
      }
      ResidualJacobians jac;
      const Reprojection rep =
          ReprojectionResidual(camera_from_lidar, state.tau, obs.frame_time,
                               obs.pixel, lm.position, lidar, intrinsics, &jac);
      if (!rep.valid) {
        ++ne.invalid_count;
        continue;
      }
      const double norm = rep.residual.norm();
      const double w = robust.Weight(norm);
      ne.cost += robust.Cost(norm);
      ++ne.residual_count;

      Eigen::Matrix<double, 2, kCoreDim> jc;
      jc.leftCols<6>() = jac.d_xi;
      jc.col(kTauIndex) = jac.d_tau;
      ne.h_cc.noalias() += w * jc.transpose() * jc;
      ne.g_c.noalias() += w * jc.transpose() * rep.residual;
      block.h_ss.noalias() += w * jac.d_landmark.transpose() * jac.d_landmark;
      block.h_cs.noalias() += w * jc.transpose() * jac.d_landmark;
      block.g_s.noalias() += w * jac.d_landmark.transpose() * rep.residual;
    }
    ne.landmarks.push_back(block);
  }
  if (ne.residual_count == 0) {
    throw Error(ErrorCode::kNoConstraints,
                "no valid reprojection residuals (" +
                    std::to_string(ne.invalid_count) + " behind camera, " +
                    std::to_string(ne.excluded_count) + " outside span)");
  }
  return ne;
}

ReducedSystem MarginalizeLandmarks(const NormalEquations& system) {
  ReducedSystem reduced;
  reduced.h = system.h_cc;
  reduced.g = system.g_c;
  for (const auto& block : system.landmarks) {
    const Eigen::LDLT<Eigen::Matrix3d> ldlt(block.h_ss);
    if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-14)) {
      // Unconstrained landmark; it carries no information about the core.
      continue;
    }
    const Eigen::Matrix<double, 3, kCoreDim> h_ss_inv_h_sc =
        ldlt.solve(block.h_cs.transpose());
    reduced.h.noalias() -= block.h_cs * h_ss_inv_h_sc;
    reduced.g.noalias() -= h_ss_inv_h_sc.transpose() * block.g_s;
  }
  reduced.h = 0.5 * (reduced.h + reduced.h.transpose()).eval();
  return reduced;
}

namespace {

template <typename Matrix>
void CheckObservable(const Matrix& h, const char* what) {
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
  const auto& values = eig.eigenvalues();
  const double largest = values.cwiseAbs().maxCoeff();
  if (!(largest > 0.0) || !(values(0) > 1e-12 * largest)) {
    Eigen::VectorXd direction = eig.eigenvectors().col(0);
    std::ostringstream msg;
    msg << what << " is singular; null direction ["
        << direction.transpose().format(
               Eigen::IOFormat(6, Eigen::DontAlignCols, ", ", ", "))
        << "]";
    throw UnobservableCoreError(msg.str(), std::move(direction));
  }
}

}  // namespace

CoreVector SolveCore(const ReducedSystem& reduced, double damping) {
  const CoreMatrix h =
      reduced.h + damping * CoreMatrix::Identity();
  CheckObservable(h, "reduced core system");
  return h.ldlt().solve(-reduced.g);
}

CoreVector SchurSolve(const NormalEquations& system, double damping) {
  return SolveCore(MarginalizeLandmarks(system), damping);
}

Eigen::VectorXd SchurSolve(const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                           int landmark_count, double damping) {
  const Eigen::Index n = h.rows();
  const Eigen::Index core = n - 3 * static_cast<Eigen::Index>(landmark_count);
  if (h.cols() != n || g.size() != n || core <= 0 || landmark_count < 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "inconsistent Schur system dimensions");
  }
  Eigen::MatrixXd h_bar = h.topLeftCorner(core, core);
  Eigen::VectorXd g_bar = g.head(core);
  for (int j = 0; j < landmark_count; ++j) {
    const Eigen::Index o = core + 3 * j;
    const Eigen::LDLT<Eigen::Matrix3d> ldlt(h.block<3, 3>(o, o));
    if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-14)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "landmark block " + std::to_string(j) + " is singular");
    }
    const Eigen::MatrixXd h_cs = h.block(0, o, core, 3);
    const Eigen::MatrixXd inv_h_sc = ldlt.solve(h_cs.transpose());
    h_bar.noalias() -= h_cs * inv_h_sc;
    g_bar.noalias() -= inv_h_sc.transpose() * g.segment<3>(o);
  }
  h_bar = 0.5 * (h_bar + h_bar.transpose()).eval();
  h_bar.diagonal().array() += damping;
  CheckObservable(h_bar, "reduced core system");
  return h_bar.ldlt().solve(-g_bar);
}

double SolveTimeLagOnly(const ReducedSystem& reduced, double damping) {
  const Eigen::Matrix<double, 6, 6> h_xx = reduced.h.topLeftCorner<6, 6>();
  const Eigen::Matrix<double, 6, 1> h_xt = reduced.h.block<6, 1>(0, kTauIndex);
  double h_tt = reduced.h(kTauIndex, kTauIndex);
  double g_t = reduced.g(kTauIndex);
  const Eigen::LDLT<Eigen::Matrix<double, 6, 6>> ldlt(h_xx);
  if (ldlt.info() == Eigen::Success && ldlt.rcond() > 1e-14) {
    const Eigen::Matrix<double, 6, 1> inv_h_xt = ldlt.solve(h_xt);
    h_tt -= h_xt.dot(inv_h_xt);
    g_t -= inv_h_xt.dot(reduced.g.head<6>());
  }
  h_tt += damping;
  const double scale = reduced.h.diagonal().cwiseAbs().maxCoeff();
  if (!(h_tt > 1e-12 * scale) || !(scale > 0.0)) {
    Eigen::VectorXd direction = Eigen::VectorXd::Zero(kCoreDim);
    direction(kTauIndex) = 1.0;
    throw UnobservableCoreError("time lag is unobservable", direction);
  }
  return -g_t / h_tt;
}

}  // namespace ctcalib
