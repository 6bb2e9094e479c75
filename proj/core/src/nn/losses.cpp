#include "pqoslat/nn/losses.hpp"

#include <cmath>
#include <string>

#include "pqoslat/errors.hpp"

namespace pqoslat::nn {

namespace {

// Forward-mode dual over long double; one seeded pass per rate gives the
// exact partials of the log-density at n <= 6 stages for trivial cost.
struct Dual {
    long double v = 0.0L;
    long double d = 0.0L;

    Dual() = default;
    Dual(long double value, long double deriv = 0.0L) : v(value), d(deriv) {}
};

Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
Dual operator/(Dual a, Dual b) {
    const long double inv = 1.0L / b.v;
    return {a.v * inv, (a.d - a.v * b.d * inv) * inv};
}
Dual exp(Dual a) {
    const long double e = std::exp(a.v);
    return {e, e * a.d};
}
Dual log(Dual a) { return {std::log(a.v), a.d / a.v}; }

long double exp(long double a) { return std::exp(a); }
long double log(long double a) { return std::log(a); }

void clamp_floor(long double& x) {
    if (x <= 0.0L) x = 1e-300L;
}
void clamp_floor(Dual& x) {
    if (x.v <= 0.0L) x.v = 1e-300L;
}

// log f(y) for f the distinct-rates hypoexponential density. The smallest
// rate's exponential is factored out so the tail stays representable.
template <typename T>
T hypoexp_logpdf_t(const T* rates, std::size_t n, double y) {
    const T ty(static_cast<long double>(y));
    if (n == 1) return log(rates[0]) - rates[0] * ty;
    T bracket(0.0L);
    for (std::size_t i = 0; i < n; ++i) {
        T w(1.0L);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            w = w * (rates[j] / (rates[j] - rates[i]));
        }
        bracket = bracket + w * rates[i] * exp((rates[0] - rates[i]) * ty);
    }
    // Cancellation can leave a nonpositive residue where the true density is
    // tiny (t -> 0 with near-equal rates); clamp to keep the loss finite.
    clamp_floor(bracket);
    return log(bracket) - rates[0] * ty;
}

} // namespace

double hypoexp_logpdf(const std::vector<double>& rates, double y) {
    if (rates.empty()) throw ParameterError("hypoexp_logpdf needs at least one rate");
    if (!(y > 0.0)) throw ValidationError("hypoexponential likelihood needs y > 0");
    std::vector<long double> r(rates.begin(), rates.end());
    return static_cast<double>(hypoexp_logpdf_t(r.data(), r.size(), y));
}

void HypoexpHead::validate() const {
    if (n_stages < 2 || n_stages > 4) {
        throw ParameterError("HypoexpHead stages must lie in [2, 4], got " +
                             std::to_string(n_stages));
    }
    if (!(min_increment > 0.0)) throw ParameterError("min_increment must be positive");
}

Tensor HypoexpHead::rates(const Tensor& raw) const {
    validate();
    if (raw.cols() != static_cast<std::size_t>(n_stages)) {
        throw ParameterError("head expects " + std::to_string(n_stages) +
                             " raw outputs, got " + std::to_string(raw.cols()));
    }
    return cumsum_cols(add_scalar(softplus(raw), min_increment));
}

Tensor hypoexp_nll(const Tensor& rates, const std::vector<double>& y) {
    const std::size_t batch = rates.rows();
    const std::size_t n = rates.cols();
    if (y.size() != batch) throw ParameterError("hypoexp_nll: y size mismatch");
    if (n > 6) throw ParameterError("hypoexp_nll capped at 6 stages");
    for (double v : y) {
        if (!(v > 0.0)) throw ValidationError("hypoexponential likelihood needs y > 0");
    }

    auto node = std::make_shared<Tensor::Node>();
    node->rows = 1;
    node->cols = 1;
    node->value.assign(1, 0.0);
    node->requires_grad = rates.requires_grad();
    if (node->requires_grad) node->grad.assign(1, 0.0);
    node->parents.push_back(rates.node());

    // Forward: mean of -log f(y_i; rates_i).
    long double total = 0.0L;
    std::vector<long double> row(n);
    for (std::size_t i = 0; i < batch; ++i) {
        for (std::size_t k = 0; k < n; ++k) row[k] = rates.value()[i * n + k];
        total -= hypoexp_logpdf_t(row.data(), n, y[i]);
    }
    node->value[0] = static_cast<double>(total / batch);

    if (node->requires_grad) {
        auto rn = rates.node();
        auto ys = y; // owned copy for the closure
        node->backprop = [rn, ys, batch, n](Tensor::Node& self) {
            const double g = self.grad[0] / static_cast<double>(batch);
            std::vector<Dual> row(n);
            for (std::size_t i = 0; i < batch; ++i) {
                for (std::size_t seed = 0; seed < n; ++seed) {
                    for (std::size_t k = 0; k < n; ++k) {
                        row[k] = Dual(rn->value[i * n + k], k == seed ? 1.0L : 0.0L);
                    }
                    const Dual lp = hypoexp_logpdf_t(row.data(), n, ys[i]);
                    rn->grad[i * n + seed] -= g * static_cast<double>(lp.d);
                }
            }
        };
    }
    return Tensor::from_node(std::move(node));
}

Tensor gaussian_nll(const Tensor& mu, const Tensor& sigma, const std::vector<double>& y) {
    if (mu.rows() != y.size() || mu.cols() != 1 || sigma.rows() != y.size() ||
        sigma.cols() != 1) {
        throw ParameterError("gaussian_nll expects (batch, 1) mu and sigma");
    }
    for (double s : sigma.value()) {
        if (!(s > 0.0)) throw ParameterError("gaussian_nll needs positive sigma");
    }
    Tensor target = Tensor::constant(std::vector<double>(y.begin(), y.end()), y.size(), 1);
    Tensor z = div(sub(target, mu), sigma);
    Tensor per_sample = add_scalar(add(scale(square(z), 0.5), log_op(sigma)),
                                   0.5 * std::log(2.0 * 3.14159265358979323846));
    return mean_all(per_sample);
}

Tensor elbo_loss(const std::vector<Tensor>& mc_batch_loglik, const Tensor& kl_total,
                 double kl_weight) {
    if (mc_batch_loglik.empty()) throw ParameterError("elbo needs at least one MC draw");
    Tensor acc = mc_batch_loglik.front();
    for (std::size_t s = 1; s < mc_batch_loglik.size(); ++s) {
        acc = add(acc, mc_batch_loglik[s]);
    }
    Tensor avg_loglik = scale(acc, 1.0 / static_cast<double>(mc_batch_loglik.size()));
    return sub(scale(kl_total, kl_weight), avg_loglik);
}

} // namespace pqoslat::nn
