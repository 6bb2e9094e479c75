#pragma once

#include <vector>

#include "pqoslat/nn/tensor.hpp"

namespace pqoslat::nn {

/// Maps the last layer's raw outputs to a strictly increasing positive rate
/// sequence: r_1 = softplus(o_1) + delta, r_k = r_{k-1} + softplus(o_k) + delta.
/// The hard floor keeps the rates separated during training so the
/// distinct-rates pdf never degenerates.
struct HypoexpHead {
    int n_stages = 4;            // [2, 4]
    double min_increment = 1e-4; // delta

    void validate() const;
    /// raw: (batch, n_stages) -> (batch, n_stages) rates.
    Tensor rates(const Tensor& raw) const;
};

/// Mean negative log hypoexponential density over a batch.
/// rates: (batch, n) with each row strictly increasing; y: batch of positive
/// latencies (ms). Differentiable w.r.t. the rates; the density and its rate
/// partials are evaluated in extended precision (the alternating-sign weight
/// formula cancels heavily for close rates).
Tensor hypoexp_nll(const Tensor& rates, const std::vector<double>& y);

/// Mean Gaussian negative log-likelihood; mu and sigma are (batch, 1) graph
/// tensors, sigma must be positive.
Tensor gaussian_nll(const Tensor& mu, const Tensor& sigma, const std::vector<double>& y);

/// Variational free energy estimate: kl_weight * kl_total minus the average
/// over Monte-Carlo draws of the batch-mean log-likelihood. Each entry of
/// `mc_batch_loglik` is the scalar batch-mean log-likelihood of one draw.
Tensor elbo_loss(const std::vector<Tensor>& mc_batch_loglik, const Tensor& kl_total,
                 double kl_weight);

/// Scalar log-pdf of a distinct-rates hypoexponential (extended-precision
/// path shared with hypoexp_nll; exposed for prediction and scoring).
double hypoexp_logpdf(const std::vector<double>& rates, double y);

} // namespace pqoslat::nn
