#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "pqoslat/cell_graph.hpp"
#include "pqoslat/nn/tensor.hpp"
#include "pqoslat/rng.hpp"

namespace pqoslat::nn {

/// Affine layer y = x W + b with Glorot-uniform init.
struct Dense {
    Tensor W; // (in, out)
    Tensor b; // (1, out)

    Dense() = default;
    Dense(std::size_t in, std::size_t out, Rng& rng);

    Tensor forward(const Tensor& x) const { return add(matmul(x, W), b); }
    std::vector<Tensor> parameters() const { return {W, b}; }
    std::size_t parameter_count() const { return W.size() + b.size(); }
};

/// Mean-field variational dense layer: every weight has a Gaussian posterior
/// N(mu, softplus(rho)^2) against a zero-mean N(0, prior_sigma^2) prior.
/// Forward draws reparametrized weights (w = mu + softplus(rho) * eps) and
/// returns the layer output together with the KL term of the loss.
struct BayesianDense {
    Tensor w_mu, w_rho; // (in, out)
    Tensor b_mu, b_rho; // (1, out)
    double prior_sigma = 1.0;

    BayesianDense() = default;
    BayesianDense(std::size_t in, std::size_t out, double prior_sigma, Rng& rng);

    /// rng == nullptr freezes eps to zero: deterministic forward with the
    /// posterior means and the same closed-form KL.
    std::pair<Tensor, Tensor> forward(const Tensor& x, Rng* rng) const;

    /// Single-sample Monte Carlo KL (log q(w) - log p(w) at the drawn w),
    /// the literal stochastic estimate of the variational free energy gap.
    std::pair<Tensor, Tensor> forward_mc_kl(const Tensor& x, Rng& rng) const;

    std::vector<Tensor> parameters() const { return {w_mu, w_rho, b_mu, b_rho}; }
    std::size_t parameter_count() const {
        return w_mu.size() + w_rho.size() + b_mu.size() + b_rho.size();
    }
};

/// Standard LSTM cell (input, forget, output, candidate gates).
struct LstmCell {
    Tensor Wi, Ui, bi;
    Tensor Wf, Uf, bf;
    Tensor Wo, Uo, bo;
    Tensor Wg, Ug, bg;
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;

    LstmCell() = default;
    LstmCell(std::size_t input, std::size_t hidden, Rng& rng);

    /// One recurrence step on a (batch, input) row block.
    std::pair<Tensor, Tensor> step(const Tensor& x, const Tensor& h, const Tensor& c) const;

    std::vector<Tensor> parameters() const;
    std::size_t parameter_count() const;
};

/// Final hidden state after feeding the sequence; throws ParameterError on an
/// empty sequence.
Tensor lstm_forward(const LstmCell& cell, const std::vector<Tensor>& sequence);

/// Row-normalized neighbor-mean operator of a cell graph as a constant
/// (n, n) tensor; isolated nodes get an all-zero row.
Tensor mean_aggregation_matrix(const kpi::CellGraph& graph);

/// GraphSAGE-style layer with mean aggregation:
/// h'_v = act(W_self h_v + W_nbr mean_{u in N(v)} h_u + b).
struct SageLayer {
    enum class Activation { tanh, linear };

    Tensor W_self, W_nbr; // (in, out)
    Tensor b;             // (1, out)
    Activation activation = Activation::tanh;

    SageLayer() = default;
    SageLayer(std::size_t in, std::size_t out, Activation act, Rng& rng);

    /// node_features: (n_nodes, in); agg: mean_aggregation_matrix of the graph.
    Tensor forward(const Tensor& node_features, const Tensor& agg) const;

    std::vector<Tensor> parameters() const { return {W_self, W_nbr, b}; }
    std::size_t parameter_count() const { return W_self.size() + W_nbr.size() + b.size(); }
};

/// Symmetric tanh autoencoder; the bottleneck must be strictly smaller than
/// the input so the identity is not representable.
struct AutoencoderSpec {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden; // encoder widths before the bottleneck
    std::size_t bottleneck = 0;

    void validate() const;
};

struct Autoencoder {
    AutoencoderSpec spec;
    std::vector<Dense> layers; // encoder then decoder, linear final output

    Autoencoder() = default;
    Autoencoder(AutoencoderSpec spec, Rng& rng);

    Tensor forward(const Tensor& x) const;
    std::vector<Tensor> parameters() const;
};

} // namespace pqoslat::nn
