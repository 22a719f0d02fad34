#pragma once

#include <Eigen/Dense>

namespace pdapa {

// Block-structured vectorization of square matrices partitioned into
// block_size x block_size blocks: blocks are stacked block-column-major and
// each block is vectorized column-major. For a single block this is the
// ordinary column-stacking vec.

// Position of entry (row, col) of the matrix inside its block vector.
inline Eigen::Index bvec_index(Eigen::Index row, Eigen::Index col,
                               Eigen::Index block_size, Eigen::Index blocks) {
  const Eigen::Index bi = row / block_size;
  const Eigen::Index bj = col / block_size;
  const Eigen::Index r = row % block_size;
  const Eigen::Index c = col % block_size;
  return (bj * blocks + bi) * block_size * block_size + c * block_size + r;
}

Eigen::VectorXd bvec(const Eigen::MatrixXd& sigma, Eigen::Index block_size);

Eigen::MatrixXd unbvec(const Eigen::VectorXd& stacked, Eigen::Index block_size);

// Block Kronecker product, defined operationally as the unique linear map
// with bvec(rightFactor * Sigma * leftFactor^T) = (leftFactor x_b rightFactor) bvec(Sigma)
// for every Sigma. Columns are assembled by pushing each basis matrix E_ij
// through the map, i.e. column bvec_index(i,j) holds bvec of the outer
// product rightFactor.col(i) * leftFactor.col(j)^T.
Eigen::MatrixXd block_kron(const Eigen::MatrixXd& left_factor,
                           const Eigen::MatrixXd& right_factor,
                           Eigen::Index block_size);

}  // namespace pdapa
