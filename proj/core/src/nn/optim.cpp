#include "pqoslat/nn/optim.hpp"

#include <cmath>

#include "pqoslat/errors.hpp"

namespace pqoslat::nn {

Adam::Adam(std::vector<Tensor> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
    for (const auto& p : params_) {
        if (!p.requires_grad()) {
            throw ParameterError("optimizer parameters must require gradients");
        }
        m_.emplace_back(p.size(), 0.0);
        v_.emplace_back(p.size(), 0.0);
    }
}

void Adam::step() {
    ++t_;
    double scale = 1.0;
    if (config_.clip_norm > 0.0) {
        double norm_sq = 0.0;
        for (const auto& p : params_) {
            for (double g : p.grad()) norm_sq += g * g;
        }
        const double norm = std::sqrt(norm_sq);
        if (norm > config_.clip_norm) scale = config_.clip_norm / norm;
    }
    const double bc1 = 1.0 - std::pow(config_.beta1, t_);
    const double bc2 = 1.0 - std::pow(config_.beta2, t_);
    for (std::size_t k = 0; k < params_.size(); ++k) {
        auto& value = params_[k].mutable_value();
        const auto& grad = params_[k].grad();
        auto& m = m_[k];
        auto& v = v_[k];
        for (std::size_t i = 0; i < value.size(); ++i) {
            const double g = grad[i] * scale;
            m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
            v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            value[i] -= config_.learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon);
        }
    }
}

void Adam::zero_grad() {
    for (auto& p : params_) p.zero_grad();
}

} // namespace pqoslat::nn
