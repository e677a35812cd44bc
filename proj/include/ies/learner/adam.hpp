#pragma once

#include "ies/learner/mlp.hpp"

#include <cmath>

namespace ies::learn {

/// First-order optimiser with bias-corrected moment estimates.
class Adam {
public:
    Adam() = default;
    Adam(Eigen::Index size, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(Vec::Zero(size)), v_(Vec::Zero(size)) {}

    /// Descends along `grad`.
    void step(Vec& params, const Vec& grad) {
        if (grad.size() != params.size() || grad.size() != m_.size())
            throw ContractViolation("Adam::step: size mismatch");
        ++t_;
        m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
        v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
        const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
    }

    double learning_rate() const { return lr_; }
    void set_learning_rate(double lr) { lr_ = lr; }
    long steps() const { return t_; }

private:
    double lr_ = 1e-3;
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    Vec m_;
    Vec v_;
    long t_ = 0;
};

/// Rescales `grad` in place so its Euclidean norm is at most `max_norm`.
/// Returns the norm before clipping.
inline double clip_grad_norm(Vec& grad, double max_norm) {
    const double norm = grad.norm();
    if (max_norm > 0.0 && norm > max_norm) grad *= max_norm / norm;
    return norm;
}

}  // namespace ies::learn
