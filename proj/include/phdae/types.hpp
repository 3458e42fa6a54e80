#pragma once

#include <Eigen/Dense>

namespace phdae {

using Real = double;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Vector2 = Eigen::Vector2d;
using Matrix2 = Eigen::Matrix2d;

/// Phase point (r, p) in the ambient cotangent space.
struct State {
  Vector r;
  Vector p;
};

/// Power-conjugated port pair: input covector u and output vector y.
struct PortSignals {
  Vector u;
  Vector y;
};

/// Constraint-force magnitudes of the continuous-time dynamics.
struct Multipliers {
  Vector lambda;
};

inline Real inf_norm(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

}  // namespace phdae
