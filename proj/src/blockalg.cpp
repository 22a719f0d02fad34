#include "blockalg.hpp"

#include <stdexcept>

namespace pdapa {

namespace {

void check_blocked(const Eigen::MatrixXd& m, Eigen::Index block_size) {
  if (m.rows() != m.cols()) throw std::invalid_argument("blockalg: matrix must be square");
  if (block_size < 1 || m.rows() % block_size != 0) {
    throw std::invalid_argument("blockalg: dimension not divisible by block size");
  }
}

}  // namespace

Eigen::VectorXd bvec(const Eigen::MatrixXd& sigma, Eigen::Index block_size) {
  check_blocked(sigma, block_size);
  const Eigen::Index blocks = sigma.rows() / block_size;
  const Eigen::Index bb = block_size * block_size;
  Eigen::VectorXd out(sigma.size());
  Eigen::Index pos = 0;
  for (Eigen::Index bj = 0; bj < blocks; ++bj) {
    for (Eigen::Index bi = 0; bi < blocks; ++bi) {
      for (Eigen::Index c = 0; c < block_size; ++c) {
        out.segment(pos + c * block_size, block_size) =
            sigma.block(bi * block_size, bj * block_size, block_size, block_size).col(c);
      }
      pos += bb;
    }
  }
  return out;
}

Eigen::MatrixXd unbvec(const Eigen::VectorXd& stacked, Eigen::Index block_size) {
  const auto total = stacked.size();
  Eigen::Index dim = 1;
  while (dim * dim < total) ++dim;
  if (dim * dim != total || block_size < 1 || dim % block_size != 0) {
    throw std::invalid_argument("blockalg: stacked length is not a blocked square");
  }
  const Eigen::Index blocks = dim / block_size;
  const Eigen::Index bb = block_size * block_size;
  Eigen::MatrixXd out(dim, dim);
  Eigen::Index pos = 0;
  for (Eigen::Index bj = 0; bj < blocks; ++bj) {
    for (Eigen::Index bi = 0; bi < blocks; ++bi) {
      for (Eigen::Index c = 0; c < block_size; ++c) {
        out.block(bi * block_size, bj * block_size, block_size, block_size).col(c) =
            stacked.segment(pos + c * block_size, block_size);
      }
      pos += bb;
    }
  }
  return out;
}

Eigen::MatrixXd block_kron(const Eigen::MatrixXd& left_factor,
                           const Eigen::MatrixXd& right_factor,
                           Eigen::Index block_size) {
  check_blocked(left_factor, block_size);
  check_blocked(right_factor, block_size);
  if (left_factor.rows() != right_factor.rows()) {
    throw std::invalid_argument("blockalg: factor dimensions differ");
  }
  const Eigen::Index dim = left_factor.rows();
  const Eigen::Index blocks = dim / block_size;
  Eigen::MatrixXd out(dim * dim, dim * dim);
  // Column for basis matrix E_ij is bvec(right.col(i) * left.col(j)^T);
  // write rank-one outer products entry-block-wise to keep bvec order.
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      const Eigen::Index col = bvec_index(i, j, block_size, blocks);
      auto dst = out.col(col);
      for (Eigen::Index cj = 0; cj < dim; ++cj) {
        const double scale = left_factor(cj, j);
        const Eigen::Index bj = cj / block_size;
        const Eigen::Index c = cj % block_size;
        for (Eigen::Index bi = 0; bi < blocks; ++bi) {
          dst.segment((bj * blocks + bi) * block_size * block_size + c * block_size,
                      block_size) = scale * right_factor.col(i).segment(bi * block_size,
                                                                        block_size);
        }
      }
    }
  }
  return out;
}

}  // namespace pdapa
