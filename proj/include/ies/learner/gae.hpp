#pragma once

#include "ies/error.hpp"

#include <cmath>
#include <cstddef>
#include <vector>

namespace ies::learn {

struct AdvantageEstimate {
    std::vector<double> advantages;
    std::vector<double> returns;  ///< advantages + values, the critic targets
};

/// Generalised advantage estimation over one complete episode; the value
/// after the last step is zero.
inline AdvantageEstimate gae_advantages(const std::vector<double>& rewards, const std::vector<double>& values,
                                        double discount, double gae_lambda) {
    if (rewards.size() != values.size())
        throw ContractViolation("gae_advantages: rewards and values must have the same length");
    const std::size_t n = rewards.size();
    AdvantageEstimate out;
    out.advantages.assign(n, 0.0);
    out.returns.assign(n, 0.0);
    double running = 0.0;
    for (std::size_t k = n; k-- > 0;) {
        const double next_value = (k + 1 < n) ? values[k + 1] : 0.0;
        const double delta = rewards[k] + discount * next_value - values[k];
        running = delta + discount * gae_lambda * running;
        out.advantages[k] = running;
        out.returns[k] = running + values[k];
    }
    return out;
}

/// Shifts and scales to zero mean and unit variance (population variance).
inline void normalize_in_place(std::vector<double>& x, double eps = 1e-8) {
    if (x.empty()) return;
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(x.size());
    const double inv = 1.0 / (std::sqrt(var) + eps);
    for (double& v : x) v = (v - mean) * inv;
}

/// Running mean and variance of value targets (parallel-merge update).
struct RunningMeanStd {
    double mean = 0.0;
    double var = 1.0;
    double count = 1e-4;

    void update(const std::vector<double>& batch) {
        if (batch.empty()) return;
        double bm = 0.0;
        for (double v : batch) bm += v;
        const double bn = static_cast<double>(batch.size());
        bm /= bn;
        double bv = 0.0;
        for (double v : batch) bv += (v - bm) * (v - bm);
        bv /= bn;
        const double delta = bm - mean;
        const double total = count + bn;
        const double m2 = var * count + bv * bn + delta * delta * count * bn / total;
        mean += delta * bn / total;
        var = m2 / total;
        count = total;
    }

    double std() const { return std::sqrt(var) + 1e-8; }
    double normalize(double x) const { return (x - mean) / std(); }
    double denormalize(double x) const { return x * std() + mean; }
};

}  // namespace ies::learn
