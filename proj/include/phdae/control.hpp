#pragma once

#include <algorithm>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "phdae/errors.hpp"
#include "phdae/types.hpp"

namespace phdae {

/// Produces the ZOH command u_alpha from the step index and the sampled
/// output y_alpha. Sources must be deterministic in (alpha, y).
struct ControlSource {
  std::function<Vector(int alpha, const Vector& y)> next;
};

/// Symmetric positive semi-definite damping gain.
struct DampingGain {
  Matrix K;
};

/// Feedback u_alpha = -K y_alpha. Validates that K is symmetric (to 1e-12)
/// and positive semi-definite (eigenvalues >= -1e-12).
inline ControlSource damping_source(const DampingGain& gain) {
  const Matrix& K = gain.K;
  if (K.rows() != K.cols()) {
    throw Error("damping gain must be square");
  }
  if ((K - K.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error("damping gain must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eigs(K);
  if (eigs.info() != Eigen::Success || eigs.eigenvalues().minCoeff() < -1e-12) {
    throw Error("damping gain must be positive semi-definite");
  }
  return ControlSource{[K](int, const Vector& y) -> Vector { return -K * y; }};
}

/// Open-loop replay of a command sequence; the last row is held once the
/// step index runs past the end.
inline ControlSource sequence_source(std::vector<Vector> rows) {
  if (rows.empty()) {
    throw Error("sequence_source requires at least one row");
  }
  for (const Vector& row : rows) {
    if (row.size() != rows.front().size()) {
      throw Error("sequence_source rows must have equal dimension");
    }
  }
  return ControlSource{[rows = std::move(rows)](int alpha, const Vector&) -> Vector {
    const std::size_t last = rows.size() - 1;
    const std::size_t idx = alpha < 0 ? 0
                            : std::min(static_cast<std::size_t>(alpha), last);
    return rows[idx];
  }};
}

/// u identically zero on m ports.
inline ControlSource zero_source(int m) {
  return ControlSource{[m](int, const Vector&) -> Vector { return Vector::Zero(m); }};
}

}  // namespace phdae
