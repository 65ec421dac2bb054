#pragma once

#include <Eigen/Dense>

namespace adrx {

// One labeled coherence block: transmitted (or re-encoded) BPSK symbols s (K x B)
// and the matching channel output y (N x B).  SISO blocks use K = N = 1.
struct Block {
  long index = 0;
  Eigen::MatrixXd s;
  Eigen::MatrixXd y;
};

}  // namespace adrx
