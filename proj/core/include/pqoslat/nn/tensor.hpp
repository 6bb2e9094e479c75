#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

namespace pqoslat::nn {

/// Handle to a node of a dynamically built computation graph. All tensors are
/// 2-D (rows x cols); scalars are (1, 1). Values and gradients are row-major
/// doubles. Copying a Tensor shares the underlying node.
///
/// Graphs are built per forward pass by the free-function ops below and torn
/// down when the handles go out of scope; parameters (leaf tensors with
/// requires_grad) persist across passes and accumulate gradients until
/// zero_grad.
class Tensor {
public:
    struct Node {
        std::size_t rows = 0;
        std::size_t cols = 0;
        std::vector<double> value;
        std::vector<double> grad;
        bool requires_grad = false;
        std::vector<std::shared_ptr<Node>> parents;
        std::function<void(Node&)> backprop; // scatter node.grad into parents
    };

    Tensor() = default;

    static Tensor constant(std::vector<double> values, std::size_t rows, std::size_t cols);
    static Tensor parameter(std::vector<double> values, std::size_t rows, std::size_t cols);
    static Tensor zeros(std::size_t rows, std::size_t cols, bool requires_grad = false);
    static Tensor scalar(double v) { return constant({v}, 1, 1); }

    bool defined() const { return node_ != nullptr; }
    std::size_t rows() const { return node_->rows; }
    std::size_t cols() const { return node_->cols; }
    std::size_t size() const { return node_->value.size(); }

    const std::vector<double>& value() const { return node_->value; }
    std::vector<double>& mutable_value() { return node_->value; }
    const std::vector<double>& grad() const { return node_->grad; }
    bool requires_grad() const { return node_ && node_->requires_grad; }

    /// Scalar content; throws ParameterError when size() != 1.
    double item() const;

    void zero_grad();

    std::shared_ptr<Node> node() const { return node_; }
    static Tensor from_node(std::shared_ptr<Node> node);

private:
    std::shared_ptr<Node> node_;
};

/// Reverse-mode accumulation from a scalar loss into every reachable
/// parameter. Throws ParameterError when the loss is not scalar.
void backward(const Tensor& loss);

// --- graph ops -------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
/// Elementwise add; also broadcasts a (1, n) row bias over (m, n).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b); // elementwise
Tensor div(const Tensor& a, const Tensor& b); // elementwise
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor neg(const Tensor& a);

Tensor tanh_op(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor softplus(const Tensor& a);
Tensor exp_op(const Tensor& a);
Tensor log_op(const Tensor& a);
Tensor square(const Tensor& a);

Tensor sum_all(const Tensor& a);  // (1, 1)
Tensor mean_all(const Tensor& a); // (1, 1)
/// Per-row prefix sum along columns (used for increasing rate sequences).
Tensor cumsum_cols(const Tensor& a);

} // namespace pqoslat::nn
