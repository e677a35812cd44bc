#pragma once

// Fully connected network with tanh hidden layers and a linear output layer.
// All weights and biases live in one contiguous parameter vector so that
// optimisers, gradient clipping and serialisation work on a single buffer.

#include "ies/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

namespace ies::learn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class Mlp {
public:
    Mlp() = default;

    /// `sizes` = {input, hidden..., output}; at least input and output.
    explicit Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
        if (sizes_.size() < 2) throw ContractViolation("Mlp: need at least input and output sizes");
        std::size_t total = 0;
        for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
            if (sizes_[l] <= 0 || sizes_[l + 1] <= 0) throw ContractViolation("Mlp: layer sizes must be positive");
            offsets_.push_back(total);
            total += static_cast<std::size_t>(sizes_[l + 1]) * static_cast<std::size_t>(sizes_[l] + 1);
        }
        theta_ = Vec::Zero(static_cast<Eigen::Index>(total));
    }

    const std::vector<int>& sizes() const { return sizes_; }
    int input_dim() const { return sizes_.front(); }
    int output_dim() const { return sizes_.back(); }
    int layer_count() const { return static_cast<int>(sizes_.size()) - 1; }
    Eigen::Index parameter_count() const { return theta_.size(); }

    Vec& parameters() { return theta_; }
    const Vec& parameters() const { return theta_; }

    Eigen::Map<const Mat> weight(int l) const {
        return {theta_.data() + offsets_[l], sizes_[l + 1], sizes_[l]};
    }
    Eigen::Map<Mat> weight(int l) { return {theta_.data() + offsets_[l], sizes_[l + 1], sizes_[l]}; }
    Eigen::Map<const Vec> bias(int l) const {
        return {theta_.data() + offsets_[l] + weight_size(l), sizes_[l + 1]};
    }
    Eigen::Map<Vec> bias(int l) { return {theta_.data() + offsets_[l] + weight_size(l), sizes_[l + 1]}; }

    /// Layer outputs kept for the backward pass; act[0] is the input batch.
    struct Trace {
        std::vector<Mat> act;
    };

    /// Forward pass on a batch stored column-wise (input_dim x batch).
    Mat forward(const Mat& x, Trace* trace = nullptr) const {
        if (x.rows() != input_dim()) throw ContractViolation("Mlp::forward: input dimension mismatch");
        if (trace) {
            trace->act.clear();
            trace->act.push_back(x);
        }
        Mat h = x;
        for (int l = 0; l < layer_count(); ++l) {
            Mat z = weight(l) * h;
            z.colwise() += bias(l);
            if (l + 1 < layer_count()) z = z.array().tanh().matrix();
            h = std::move(z);
            if (trace) trace->act.push_back(h);
        }
        return h;
    }

    Vec forward(const Vec& x) const {
        Mat m = forward(Mat(x));
        return m.col(0);
    }

    /// Gradient of sum_batch <d_out, output> with respect to the parameters.
    /// Optionally also returns the gradient with respect to the input.
    Vec backward(const Trace& trace, const Mat& d_out, Mat* d_input = nullptr) const {
        if (static_cast<int>(trace.act.size()) != layer_count() + 1)
            throw ContractViolation("Mlp::backward: trace does not match network");
        if (d_out.rows() != output_dim() || d_out.cols() != trace.act.back().cols())
            throw ContractViolation("Mlp::backward: output gradient shape mismatch");
        Vec grad = Vec::Zero(theta_.size());
        Mat delta = d_out;
        for (int l = layer_count() - 1; l >= 0; --l) {
            const Mat& in = trace.act[static_cast<std::size_t>(l)];
            Eigen::Map<Mat> gw(grad.data() + offsets_[l], sizes_[l + 1], sizes_[l]);
            Eigen::Map<Vec> gb(grad.data() + offsets_[l] + weight_size(l), sizes_[l + 1]);
            gw.noalias() = delta * in.transpose();
            gb = delta.rowwise().sum();
            if (l > 0 || d_input) {
                Mat back = weight(l).transpose() * delta;
                if (l > 0) {
                    // tanh' = 1 - tanh^2, using the stored post-activation
                    back.array() *= (1.0 - in.array().square());
                    delta = std::move(back);
                } else {
                    *d_input = std::move(back);
                }
            }
        }
        return grad;
    }

    /// Orthogonal initialisation: each weight matrix is a scaled
    /// (semi-)orthogonal matrix drawn from the QR factorisation of a Gaussian
    /// matrix; biases start at zero.
    void init_orthogonal(std::mt19937_64& rng, double hidden_gain, double output_gain) {
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int l = 0; l < layer_count(); ++l) {
            const int rows = sizes_[l + 1];
            const int cols = sizes_[l];
            const bool tall = rows >= cols;
            const int m = tall ? rows : cols;
            const int k = tall ? cols : rows;
            Mat a(m, k);
            for (Eigen::Index j = 0; j < a.cols(); ++j)
                for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = gauss(rng);
            Eigen::HouseholderQR<Mat> qr(a);
            Mat q = qr.householderQ() * Mat::Identity(m, k);
            const Mat r = qr.matrixQR().topLeftCorner(k, k);
            for (int j = 0; j < k; ++j)
                if (r(j, j) < 0.0) q.col(j) *= -1.0;
            const double gain = (l + 1 < layer_count()) ? hidden_gain : output_gain;
            if (tall)
                weight(l) = gain * q;
            else
                weight(l) = gain * q.transpose();
            bias(l).setZero();
        }
    }

private:
    std::ptrdiff_t weight_size(int l) const {
        return static_cast<std::ptrdiff_t>(sizes_[l + 1]) * sizes_[l];
    }

    std::vector<int> sizes_;
    std::vector<std::size_t> offsets_;
    Vec theta_;
};

/// Network shape {input, hidden..., output}.
inline std::vector<int> layer_sizes(int input, const std::vector<int>& hidden, int output) {
    std::vector<int> s{input};
    s.insert(s.end(), hidden.begin(), hidden.end());
    s.push_back(output);
    return s;
}

}  // namespace ies::learn
