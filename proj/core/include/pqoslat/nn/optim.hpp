#pragma once

#include <vector>

#include "pqoslat/nn/tensor.hpp"

namespace pqoslat::nn {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double clip_norm = 0.0; // global gradient-norm clip; 0 disables
};

/// Bias-corrected adaptive-moment optimizer over a fixed parameter list.
class Adam {
public:
    Adam(std::vector<Tensor> params, AdamConfig config = {});

    void step();
    void zero_grad();
    int steps_taken() const { return t_; }
    const AdamConfig& config() const { return config_; }

private:
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    AdamConfig config_;
    int t_ = 0;
};

} // namespace pqoslat::nn
