#pragma once

#include <cmath>

#include "gsan/graph.hpp"

namespace gsan {

// Adam over one parameter block.
class Adam {
 public:
  explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  template <typename Param, typename Grad>
  void step(Param& param, const Grad& grad) {
    if (m_.size() == 0) {
      m_ = Matrix::Zero(param.rows(), param.cols());
      v_ = Matrix::Zero(param.rows(), param.cols());
    }
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(beta1_, t_);
    const double c2 = 1.0 - std::pow(beta2_, t_);
    param.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
  }

 private:
  double lr_, beta1_, beta2_, eps_;
  Matrix m_, v_;
  int t_ = 0;
};

}  // namespace gsan
