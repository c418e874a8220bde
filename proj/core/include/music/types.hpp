#pragma once

#include <Eigen/Dense>

namespace music {

/// One row per agent, one column per decision coordinate. Row-major so each
/// agent's p-vector is contiguous.
using AgentMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace music
