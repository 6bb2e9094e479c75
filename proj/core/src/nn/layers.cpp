#include "pqoslat/nn/layers.hpp"

#include <cmath>

#include "pqoslat/errors.hpp"

namespace pqoslat::nn {

namespace {

Tensor glorot(std::size_t in, std::size_t out, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    std::vector<double> w(in * out);
    for (auto& v : w) v = rng.uniform(-bound, bound);
    return Tensor::parameter(std::move(w), in, out);
}

Tensor zero_param(std::size_t rows, std::size_t cols) {
    return Tensor::parameter(std::vector<double>(rows * cols, 0.0), rows, cols);
}

Tensor const_param(double v, std::size_t rows, std::size_t cols) {
    return Tensor::parameter(std::vector<double>(rows * cols, v), rows, cols);
}

// softplus^-1, so posterior stddevs can be initialized to a target value.
double inv_softplus(double y) { return std::log(std::expm1(y)); }

} // namespace

Dense::Dense(std::size_t in, std::size_t out, Rng& rng)
    : W(glorot(in, out, rng)), b(zero_param(1, out)) {}

BayesianDense::BayesianDense(std::size_t in, std::size_t out, double prior,
                             Rng& rng)
    : w_mu(glorot(in, out, rng)),
      w_rho(const_param(inv_softplus(0.05), in, out)),
      b_mu(zero_param(1, out)),
      b_rho(const_param(inv_softplus(0.05), 1, out)),
      prior_sigma(prior) {
    if (!(prior > 0.0)) throw ParameterError("prior sigma must be positive");
}

namespace {

Tensor draw_eps(std::size_t rows, std::size_t cols, Rng* rng) {
    std::vector<double> e(rows * cols, 0.0);
    if (rng != nullptr) {
        for (auto& v : e) v = rng->normal();
    }
    return Tensor::constant(std::move(e), rows, cols);
}

// Closed-form KL(q || N(0, sigma_p^2)) summed over one mu/rho block:
// sum log(sigma_p) - log(sigma_q) + (sigma_q^2 + mu^2) / (2 sigma_p^2) - 1/2.
Tensor block_kl(const Tensor& mu, const Tensor& rho, double prior_sigma) {
    Tensor sq = softplus(rho);
    Tensor ratio = scale(add(square(sq), square(mu)), 1.0 / (2.0 * prior_sigma * prior_sigma));
    Tensor terms = sub(ratio, log_op(sq));
    terms = add_scalar(terms, std::log(prior_sigma) - 0.5);
    return sum_all(terms);
}

// log N(w; mu, sigma^2) summed elementwise; mu/sigma may be graph tensors.
Tensor gaussian_logdensity_sum(const Tensor& w, const Tensor& mu, const Tensor& sigma) {
    Tensor z = div(sub(w, mu), sigma);
    Tensor terms = add_scalar(add(scale(square(z), 0.5), log_op(sigma)),
                              0.5 * std::log(2.0 * 3.14159265358979323846));
    return neg(sum_all(terms));
}

} // namespace

std::pair<Tensor, Tensor> BayesianDense::forward(const Tensor& x, Rng* rng) const {
    Tensor w_eps = draw_eps(w_mu.rows(), w_mu.cols(), rng);
    Tensor b_eps = draw_eps(1, b_mu.cols(), rng);
    Tensor w = add(w_mu, mul(softplus(w_rho), w_eps));
    Tensor b = add(b_mu, mul(softplus(b_rho), b_eps));
    Tensor y = add(matmul(x, w), b);
    Tensor kl = add(block_kl(w_mu, w_rho, prior_sigma), block_kl(b_mu, b_rho, prior_sigma));
    return {y, kl};
}

std::pair<Tensor, Tensor> BayesianDense::forward_mc_kl(const Tensor& x, Rng& rng) const {
    Tensor w_eps = draw_eps(w_mu.rows(), w_mu.cols(), &rng);
    Tensor b_eps = draw_eps(1, b_mu.cols(), &rng);
    Tensor w_sigma = softplus(w_rho);
    Tensor b_sigma = softplus(b_rho);
    Tensor w = add(w_mu, mul(w_sigma, w_eps));
    Tensor b = add(b_mu, mul(b_sigma, b_eps));
    Tensor y = add(matmul(x, w), b);

    Tensor prior_mu_w = Tensor::constant(std::vector<double>(w.size(), 0.0), w.rows(), w.cols());
    Tensor prior_sd_w =
        Tensor::constant(std::vector<double>(w.size(), prior_sigma), w.rows(), w.cols());
    Tensor prior_mu_b = Tensor::constant(std::vector<double>(b.size(), 0.0), 1, b.cols());
    Tensor prior_sd_b =
        Tensor::constant(std::vector<double>(b.size(), prior_sigma), 1, b.cols());

    Tensor log_q = add(gaussian_logdensity_sum(w, w_mu, w_sigma),
                       gaussian_logdensity_sum(b, b_mu, b_sigma));
    Tensor log_p = add(gaussian_logdensity_sum(w, prior_mu_w, prior_sd_w),
                       gaussian_logdensity_sum(b, prior_mu_b, prior_sd_b));
    return {y, sub(log_q, log_p)};
}

LstmCell::LstmCell(std::size_t input, std::size_t hidden, Rng& rng)
    : Wi(glorot(input, hidden, rng)), Ui(glorot(hidden, hidden, rng)), bi(zero_param(1, hidden)),
      Wf(glorot(input, hidden, rng)), Uf(glorot(hidden, hidden, rng)),
      bf(const_param(1.0, 1, hidden)), // open forget gates at init
      Wo(glorot(input, hidden, rng)), Uo(glorot(hidden, hidden, rng)), bo(zero_param(1, hidden)),
      Wg(glorot(input, hidden, rng)), Ug(glorot(hidden, hidden, rng)), bg(zero_param(1, hidden)),
      input_dim(input), hidden_dim(hidden) {}

std::pair<Tensor, Tensor> LstmCell::step(const Tensor& x, const Tensor& h,
                                         const Tensor& c) const {
    Tensor i = sigmoid(add(add(matmul(x, Wi), matmul(h, Ui)), bi));
    Tensor f = sigmoid(add(add(matmul(x, Wf), matmul(h, Uf)), bf));
    Tensor o = sigmoid(add(add(matmul(x, Wo), matmul(h, Uo)), bo));
    Tensor g = tanh_op(add(add(matmul(x, Wg), matmul(h, Ug)), bg));
    Tensor c_next = add(mul(f, c), mul(i, g));
    Tensor h_next = mul(o, tanh_op(c_next));
    return {h_next, c_next};
}

std::vector<Tensor> LstmCell::parameters() const {
    return {Wi, Ui, bi, Wf, Uf, bf, Wo, Uo, bo, Wg, Ug, bg};
}

std::size_t LstmCell::parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : parameters()) n += p.size();
    return n;
}

Tensor lstm_forward(const LstmCell& cell, const std::vector<Tensor>& sequence) {
    if (sequence.empty()) throw ParameterError("lstm_forward needs a nonempty sequence");
    const std::size_t batch = sequence.front().rows();
    Tensor h = Tensor::zeros(batch, cell.hidden_dim);
    Tensor c = Tensor::zeros(batch, cell.hidden_dim);
    for (const auto& x : sequence) {
        auto [h_next, c_next] = cell.step(x, h, c);
        h = h_next;
        c = c_next;
    }
    return h;
}

Tensor mean_aggregation_matrix(const kpi::CellGraph& graph) {
    const std::size_t n = graph.size();
    std::vector<double> a(n * n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
        const auto& nbrs = graph.neighbors(static_cast<int>(v));
        if (nbrs.empty()) continue;
        const double w = 1.0 / static_cast<double>(nbrs.size());
        for (int u : nbrs) a[v * n + static_cast<std::size_t>(u)] = w;
    }
    return Tensor::constant(std::move(a), n, n);
}

SageLayer::SageLayer(std::size_t in, std::size_t out, Activation act, Rng& rng)
    : W_self(glorot(in, out, rng)), W_nbr(glorot(in, out, rng)), b(zero_param(1, out)),
      activation(act) {}

Tensor SageLayer::forward(const Tensor& node_features, const Tensor& agg) const {
    Tensor self_part = matmul(node_features, W_self);
    Tensor nbr_part = matmul(matmul(agg, node_features), W_nbr);
    Tensor pre = add(add(self_part, nbr_part), b);
    return activation == Activation::tanh ? tanh_op(pre) : pre;
}

void AutoencoderSpec::validate() const {
    if (input_dim == 0) throw ParameterError("autoencoder input dim must be positive");
    if (bottleneck >= input_dim) {
        throw ParameterError("bottleneck must be smaller than the input dimension");
    }
    if (bottleneck == 0) throw ParameterError("bottleneck must be positive");
    for (std::size_t h : hidden) {
        if (h == 0) throw ParameterError("hidden widths must be positive");
    }
}

Autoencoder::Autoencoder(AutoencoderSpec s, Rng& rng) : spec(std::move(s)) {
    spec.validate();
    std::vector<std::size_t> widths;
    widths.push_back(spec.input_dim);
    for (std::size_t h : spec.hidden) widths.push_back(h);
    widths.push_back(spec.bottleneck);
    for (std::size_t i = spec.hidden.size(); i-- > 0;) widths.push_back(spec.hidden[i]);
    widths.push_back(spec.input_dim);
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        layers.emplace_back(widths[i], widths[i + 1], rng);
    }
}

Tensor Autoencoder::forward(const Tensor& x) const {
    Tensor h = x;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        h = layers[i].forward(h);
        if (i + 1 < layers.size()) h = tanh_op(h);
    }
    return h;
}

std::vector<Tensor> Autoencoder::parameters() const {
    std::vector<Tensor> out;
    for (const auto& layer : layers) {
        out.push_back(layer.W);
        out.push_back(layer.b);
    }
    return out;
}

} // namespace pqoslat::nn
