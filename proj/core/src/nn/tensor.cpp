#include "pqoslat/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "pqoslat/errors.hpp"

namespace pqoslat::nn {

namespace {

std::shared_ptr<Tensor::Node> make_node(std::size_t rows, std::size_t cols,
                                        bool requires_grad) {
    auto node = std::make_shared<Tensor::Node>();
    node->rows = rows;
    node->cols = cols;
    node->value.assign(rows * cols, 0.0);
    node->requires_grad = requires_grad;
    if (requires_grad) node->grad.assign(rows * cols, 0.0);
    return node;
}

// Result node wired to its parents; requires_grad is inherited.
Tensor result_like(std::size_t rows, std::size_t cols,
                   std::initializer_list<Tensor> parents) {
    bool needs = false;
    for (const auto& p : parents) needs = needs || p.requires_grad();
    auto node = make_node(rows, cols, needs);
    for (const auto& p : parents) node->parents.push_back(p.node());
    return Tensor::from_node(std::move(node));
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ParameterError(std::string(op) + ": shape mismatch (" +
                             std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                             " vs " + std::to_string(b.rows()) + "x" +
                             std::to_string(b.cols()) + ")");
    }
}

} // namespace

Tensor Tensor::from_node(std::shared_ptr<Node> node) {
    Tensor t;
    t.node_ = std::move(node);
    return t;
}

Tensor Tensor::constant(std::vector<double> values, std::size_t rows, std::size_t cols) {
    if (values.size() != rows * cols) {
        throw ParameterError("tensor value count does not match its shape");
    }
    auto node = make_node(rows, cols, false);
    node->value = std::move(values);
    return from_node(std::move(node));
}

Tensor Tensor::parameter(std::vector<double> values, std::size_t rows, std::size_t cols) {
    if (values.size() != rows * cols) {
        throw ParameterError("tensor value count does not match its shape");
    }
    auto node = make_node(rows, cols, true);
    node->value = std::move(values);
    return from_node(std::move(node));
}

Tensor Tensor::zeros(std::size_t rows, std::size_t cols, bool requires_grad) {
    return from_node(make_node(rows, cols, requires_grad));
}

double Tensor::item() const {
    if (!node_ || node_->value.size() != 1) {
        throw ParameterError("item() requires a scalar tensor");
    }
    return node_->value[0];
}

void Tensor::zero_grad() {
    if (node_ && node_->requires_grad) {
        std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
    }
}

void backward(const Tensor& loss) {
    if (!loss.defined() || loss.size() != 1) {
        throw ParameterError("backward expects a scalar loss");
    }
    if (!loss.requires_grad()) return; // nothing reachable

    // Iterative post-order DFS for the topological order.
    std::vector<Tensor::Node*> order;
    std::unordered_set<Tensor::Node*> visited;
    std::vector<std::pair<Tensor::Node*, std::size_t>> stack;
    stack.emplace_back(loss.node().get(), 0);
    visited.insert(loss.node().get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Tensor::Node* parent = node->parents[next++].get();
            if (parent->requires_grad && visited.insert(parent).second) {
                stack.emplace_back(parent, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    loss.node()->grad[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if ((*it)->backprop) (*it)->backprop(**it);
    }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) {
        throw ParameterError("matmul: inner dimensions differ (" +
                             std::to_string(a.cols()) + " vs " +
                             std::to_string(b.rows()) + ")");
    }
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    Tensor out = result_like(m, n, {a, b});
    const double* av = a.value().data();
    const double* bv = b.value().data();
    double* ov = out.mutable_value().data();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = av[i * k + p];
            if (aip == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                ov[i * n + j] += aip * bv[p * n + j];
            }
        }
    }
    if (out.requires_grad()) {
        auto an = a.node();
        auto bn = b.node();
        out.node()->backprop = [an, bn, m, k, n](Tensor::Node& self) {
            const double* g = self.grad.data();
            if (an->requires_grad) {
                // dA = dC * B^T
                double* ga = an->grad.data();
                const double* bv2 = bn->value.data();
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                        const double gij = g[i * n + j];
                        if (gij == 0.0) continue;
                        for (std::size_t p = 0; p < k; ++p) {
                            ga[i * k + p] += gij * bv2[p * n + j];
                        }
                    }
                }
            }
            if (bn->requires_grad) {
                // dB = A^T * dC
                double* gb = bn->grad.data();
                const double* av2 = an->value.data();
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t p = 0; p < k; ++p) {
                        const double aip = av2[i * k + p];
                        if (aip == 0.0) continue;
                        for (std::size_t j = 0; j < n; ++j) {
                            gb[p * n + j] += aip * g[i * n + j];
                        }
                    }
                }
            }
        };
    }
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    const bool broadcast = b.rows() == 1 && a.rows() > 1 && a.cols() == b.cols();
    if (!broadcast) check_same_shape(a, b, "add");
    Tensor out = result_like(a.rows(), a.cols(), {a, b});
    const std::size_t n = a.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            out.mutable_value()[i * n + j] =
                a.value()[i * n + j] + b.value()[broadcast ? j : i * n + j];
        }
    }
    if (out.requires_grad()) {
        auto an = a.node();
        auto bn = b.node();
        out.node()->backprop = [an, bn, broadcast, n](Tensor::Node& self) {
            if (an->requires_grad) {
                for (std::size_t i = 0; i < self.grad.size(); ++i) {
                    an->grad[i] += self.grad[i];
                }
            }
            if (bn->requires_grad) {
                if (broadcast) {
                    for (std::size_t i = 0; i < self.rows; ++i) {
                        for (std::size_t j = 0; j < n; ++j) {
                            bn->grad[j] += self.grad[i * n + j];
                        }
                    }
                } else {
                    for (std::size_t i = 0; i < self.grad.size(); ++i) {
                        bn->grad[i] += self.grad[i];
                    }
                }
            }
        };
    }
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "sub");
    Tensor out = result_like(a.rows(), a.cols(), {a, b});
    for (std::size_t i = 0; i < a.size(); ++i) {
        out.mutable_value()[i] = a.value()[i] - b.value()[i];
    }
    if (out.requires_grad()) {
        auto an = a.node();
        auto bn = b.node();
        out.node()->backprop = [an, bn](Tensor::Node& self) {
            if (an->requires_grad) {
                for (std::size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i];
            }
            if (bn->requires_grad) {
                for (std::size_t i = 0; i < self.grad.size(); ++i) bn->grad[i] -= self.grad[i];
            }
        };
    }
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "mul");
    Tensor out = result_like(a.rows(), a.cols(), {a, b});
    for (std::size_t i = 0; i < a.size(); ++i) {
        out.mutable_value()[i] = a.value()[i] * b.value()[i];
    }
    if (out.requires_grad()) {
        auto an = a.node();
        auto bn = b.node();
        out.node()->backprop = [an, bn](Tensor::Node& self) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                if (an->requires_grad) an->grad[i] += self.grad[i] * bn->value[i];
                if (bn->requires_grad) bn->grad[i] += self.grad[i] * an->value[i];
            }
        };
    }
    return out;
}

Tensor div(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "div");
    Tensor out = result_like(a.rows(), a.cols(), {a, b});
    for (std::size_t i = 0; i < a.size(); ++i) {
        out.mutable_value()[i] = a.value()[i] / b.value()[i];
    }
    if (out.requires_grad()) {
        auto an = a.node();
        auto bn = b.node();
        out.node()->backprop = [an, bn](Tensor::Node& self) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                const double binv = 1.0 / bn->value[i];
                if (an->requires_grad) an->grad[i] += self.grad[i] * binv;
                if (bn->requires_grad) {
                    bn->grad[i] -= self.grad[i] * an->value[i] * binv * binv;
                }
            }
        };
    }
    return out;
}

namespace {

// Shared scaffolding for elementwise unary ops: value map + derivative from
// (input, output).
Tensor unary(const Tensor& a, double (*f)(double), double (*df)(double, double)) {
    Tensor out = result_like(a.rows(), a.cols(), {a});
    for (std::size_t i = 0; i < a.size(); ++i) {
        out.mutable_value()[i] = f(a.value()[i]);
    }
    if (out.requires_grad()) {
        auto an = a.node();
        out.node()->backprop = [an, df](Tensor::Node& self) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                an->grad[i] += self.grad[i] * df(an->value[i], self.value[i]);
            }
        };
    }
    return out;
}

} // namespace

Tensor scale(const Tensor& a, double s) {
    Tensor out = result_like(a.rows(), a.cols(), {a});
    for (std::size_t i = 0; i < a.size(); ++i) out.mutable_value()[i] = a.value()[i] * s;
    if (out.requires_grad()) {
        auto an = a.node();
        out.node()->backprop = [an, s](Tensor::Node& self) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                an->grad[i] += self.grad[i] * s;
            }
        };
    }
    return out;
}

Tensor add_scalar(const Tensor& a, double s) {
    Tensor out = result_like(a.rows(), a.cols(), {a});
    for (std::size_t i = 0; i < a.size(); ++i) out.mutable_value()[i] = a.value()[i] + s;
    if (out.requires_grad()) {
        auto an = a.node();
        out.node()->backprop = [an](Tensor::Node& self) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i];
        };
    }
    return out;
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor tanh_op(const Tensor& a) {
    return unary(a, [](double x) { return std::tanh(x); },
                 [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& a) {
    return unary(a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
                 [](double, double y) { return y * (1.0 - y); });
}

Tensor softplus(const Tensor& a) {
    // log1p(exp(x)) with the large-x branch to avoid overflow.
    return unary(a,
                 [](double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); },
                 [](double x, double) { return 1.0 / (1.0 + std::exp(-x)); });
}

Tensor exp_op(const Tensor& a) {
    return unary(a, [](double x) { return std::exp(x); },
                 [](double, double y) { return y; });
}

Tensor log_op(const Tensor& a) {
    return unary(a, [](double x) { return std::log(x); },
                 [](double x, double) { return 1.0 / x; });
}

Tensor square(const Tensor& a) {
    return unary(a, [](double x) { return x * x; },
                 [](double x, double) { return 2.0 * x; });
}

Tensor sum_all(const Tensor& a) {
    Tensor out = result_like(1, 1, {a});
    double acc = 0.0;
    for (double v : a.value()) acc += v;
    out.mutable_value()[0] = acc;
    if (out.requires_grad()) {
        auto an = a.node();
        out.node()->backprop = [an](Tensor::Node& self) {
            for (std::size_t i = 0; i < an->grad.size(); ++i) an->grad[i] += self.grad[0];
        };
    }
    return out;
}

Tensor mean_all(const Tensor& a) {
    return scale(sum_all(a), 1.0 / static_cast<double>(a.size()));
}

Tensor cumsum_cols(const Tensor& a) {
    Tensor out = result_like(a.rows(), a.cols(), {a});
    const std::size_t n = a.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            acc += a.value()[i * n + j];
            out.mutable_value()[i * n + j] = acc;
        }
    }
    if (out.requires_grad()) {
        auto an = a.node();
        out.node()->backprop = [an, n](Tensor::Node& self) {
            for (std::size_t i = 0; i < self.rows; ++i) {
                double acc = 0.0;
                for (std::size_t j = n; j-- > 0;) {
                    acc += self.grad[i * n + j];
                    an->grad[i * n + j] += acc;
                }
            }
        };
    }
    return out;
}

} // namespace pqoslat::nn
