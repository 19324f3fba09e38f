#pragma once

#include <functional>
#include <span>
#include <vector>

#include "core/matrix.hpp"

namespace vgc {

// Reverse-mode differentiation tape for the small MLPs in this project.
// Nodes are matrix-valued; recording an operation appends a node whose
// parents precede it, so the reverse pass is a single backward sweep over
// the node list.
class Tape {
public:
    using Id = int;

    Id input(Matrix value, bool requires_grad = false);

    // x (B,in) * w (out,in)^T -> (B,out)
    Id matmul_nt(Id x, Id w);
    // Adds a (1,k) bias row to every row of x.
    Id add_row(Id x, Id bias);
    Id add(Id a, Id b);
    Id tanh_op(Id a);
    Id relu_op(Id a);
    Id sigmoid_op(Id a);
    Id scale(Id a, double s);
    // Columns [c0, c1) of a.
    Id slice_cols(Id a, std::size_t c0, std::size_t c1);
    // mu + exp(0.5 * logvar) (elementwise) * noise; noise is a constant.
    Id reparameterize(Id mu, Id logvar, Matrix noise);
    // Scalar: mean over all entries of (pred - target)^2; target is constant.
    Id mse_mean(Id pred, Matrix target);
    // Scalar: (1/B) sum_b 0.5 sum_j (mu^2 + exp(lv) - lv - 1).
    Id kl_mean(Id mu, Id logvar);
    Id weighted_sum(Id a, double wa, Id b, double wb);

    void backward(Id loss);

    const Matrix& value(Id id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    const Matrix& grad(Id id) const { return nodes_[static_cast<std::size_t>(id)].grad; }
    double scalar(Id id) const { return value(id)(0, 0); }

private:
    struct Node {
        Matrix value;
        Matrix grad;
        bool requires_grad = false;
        std::function<void(Tape&, const Node&)> backward;
    };

    Id push(Matrix value, std::function<void(Tape&, const Node&)> backward);
    Matrix& grad_ref(Id id) { return nodes_[static_cast<std::size_t>(id)].grad; }

    std::vector<Node> nodes_;
};

}  // namespace vgc
