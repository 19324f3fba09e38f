#include "core/tape.hpp"

#include <cmath>
#include <utility>

#include "core/errors.hpp"

namespace vgc {

Tape::Id Tape::push(Matrix value, std::function<void(Tape&, const Node&)> backward) {
    Node node;
    node.grad = Matrix(value.rows(), value.cols());
    node.value = std::move(value);
    node.requires_grad = true;
    node.backward = std::move(backward);
    nodes_.push_back(std::move(node));
    return static_cast<Id>(nodes_.size() - 1);
}

Tape::Id Tape::input(Matrix value, bool requires_grad) {
    Id id = push(std::move(value), nullptr);
    nodes_.back().requires_grad = requires_grad;
    return id;
}

Tape::Id Tape::matmul_nt(Id x, Id w) {
    Matrix out = vgc::matmul_nt(value(x), value(w));
    return push(std::move(out), [x, w](Tape& t, const Node& n) {
        // dX += dC * W ; dW += dC^T * X
        const Matrix& gx = vgc::matmul(n.grad, t.value(w));
        const Matrix& gw = vgc::matmul_tn(n.grad, t.value(x));
        auto& xg = t.grad_ref(x);
        for (std::size_t i = 0; i < xg.size(); ++i) xg.flat()[i] += gx.flat()[i];
        auto& wg = t.grad_ref(w);
        for (std::size_t i = 0; i < wg.size(); ++i) wg.flat()[i] += gw.flat()[i];
    });
}

Tape::Id Tape::add_row(Id x, Id bias) {
    Matrix out = value(x);
    add_row_inplace(out, value(bias).flat());
    return push(std::move(out), [x, bias](Tape& t, const Node& n) {
        auto& xg = t.grad_ref(x);
        for (std::size_t i = 0; i < xg.size(); ++i) xg.flat()[i] += n.grad.flat()[i];
        auto& bg = t.grad_ref(bias);
        const std::size_t cols = n.grad.cols();
        for (std::size_t i = 0; i < n.grad.rows(); ++i)
            for (std::size_t j = 0; j < cols; ++j) bg.flat()[j] += n.grad(i, j);
    });
}

Tape::Id Tape::add(Id a, Id b) {
    require(value(a).rows() == value(b).rows() && value(a).cols() == value(b).cols(),
            ErrorKind::invalid_argument, "tape add: shape mismatch");
    Matrix out = value(a);
    for (std::size_t i = 0; i < out.size(); ++i) out.flat()[i] += value(b).flat()[i];
    return push(std::move(out), [a, b](Tape& t, const Node& n) {
        auto& ag = t.grad_ref(a);
        auto& bg = t.grad_ref(b);
        for (std::size_t i = 0; i < n.grad.size(); ++i) {
            ag.flat()[i] += n.grad.flat()[i];
            bg.flat()[i] += n.grad.flat()[i];
        }
    });
}

Tape::Id Tape::tanh_op(Id a) {
    Matrix out = value(a);
    for (double& v : out.flat()) v = std::tanh(v);
    return push(std::move(out), [a](Tape& t, const Node& n) {
        auto& ag = t.grad_ref(a);
        for (std::size_t i = 0; i < n.grad.size(); ++i) {
            const double y = n.value.flat()[i];
            ag.flat()[i] += n.grad.flat()[i] * (1.0 - y * y);
        }
    });
}

Tape::Id Tape::relu_op(Id a) {
    Matrix out = value(a);
    for (double& v : out.flat()) v = v > 0.0 ? v : 0.0;
    return push(std::move(out), [a](Tape& t, const Node& n) {
        auto& ag = t.grad_ref(a);
        for (std::size_t i = 0; i < n.grad.size(); ++i)
            if (n.value.flat()[i] > 0.0) ag.flat()[i] += n.grad.flat()[i];
    });
}

Tape::Id Tape::sigmoid_op(Id a) {
    Matrix out = value(a);
    for (double& v : out.flat()) v = 1.0 / (1.0 + std::exp(-v));
    return push(std::move(out), [a](Tape& t, const Node& n) {
        auto& ag = t.grad_ref(a);
        for (std::size_t i = 0; i < n.grad.size(); ++i) {
            const double y = n.value.flat()[i];
            ag.flat()[i] += n.grad.flat()[i] * y * (1.0 - y);
        }
    });
}

Tape::Id Tape::scale(Id a, double s) {
    Matrix out = value(a);
    for (double& v : out.flat()) v *= s;
    return push(std::move(out), [a, s](Tape& t, const Node& n) {
        auto& ag = t.grad_ref(a);
        for (std::size_t i = 0; i < n.grad.size(); ++i) ag.flat()[i] += s * n.grad.flat()[i];
    });
}

Tape::Id Tape::slice_cols(Id a, std::size_t c0, std::size_t c1) {
    const Matrix& src = value(a);
    require(c0 < c1 && c1 <= src.cols(), ErrorKind::invalid_argument, "slice_cols: bad range");
    Matrix out(src.rows(), c1 - c0);
    for (std::size_t i = 0; i < src.rows(); ++i)
        for (std::size_t j = c0; j < c1; ++j) out(i, j - c0) = src(i, j);
    return push(std::move(out), [a, c0](Tape& t, const Node& n) {
        auto& ag = t.grad_ref(a);
        for (std::size_t i = 0; i < n.grad.rows(); ++i)
            for (std::size_t j = 0; j < n.grad.cols(); ++j) ag(i, c0 + j) += n.grad(i, j);
    });
}

Tape::Id Tape::reparameterize(Id mu, Id logvar, Matrix noise) {
    const Matrix& m = value(mu);
    const Matrix& lv = value(logvar);
    require(noise.rows() == m.rows() && noise.cols() == m.cols(), ErrorKind::invalid_argument,
            "reparameterize: noise shape mismatch");
    Matrix out = m;
    for (std::size_t i = 0; i < out.size(); ++i)
        out.flat()[i] += std::exp(0.5 * lv.flat()[i]) * noise.flat()[i];
    Matrix noise_copy = std::move(noise);
    return push(std::move(out), [mu, logvar, noise_copy](Tape& t, const Node& n) {
        auto& mg = t.grad_ref(mu);
        auto& lg = t.grad_ref(logvar);
        const Matrix& lv2 = t.value(logvar);
        for (std::size_t i = 0; i < n.grad.size(); ++i) {
            const double g = n.grad.flat()[i];
            mg.flat()[i] += g;
            lg.flat()[i] += g * 0.5 * std::exp(0.5 * lv2.flat()[i]) * noise_copy.flat()[i];
        }
    });
}

Tape::Id Tape::mse_mean(Id pred, Matrix target) {
    const Matrix& p = value(pred);
    require(target.rows() == p.rows() && target.cols() == p.cols(), ErrorKind::invalid_argument,
            "mse_mean: target shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = p.flat()[i] - target.flat()[i];
        s += d * d;
    }
    Matrix out(1, 1);
    out(0, 0) = s / static_cast<double>(p.size());
    Matrix target_copy = std::move(target);
    return push(std::move(out), [pred, target_copy](Tape& t, const Node& n) {
        const double g = n.grad(0, 0);
        const Matrix& p2 = t.value(pred);
        auto& pg = t.grad_ref(pred);
        const double scale = 2.0 / static_cast<double>(p2.size());
        for (std::size_t i = 0; i < p2.size(); ++i)
            pg.flat()[i] += g * scale * (p2.flat()[i] - target_copy.flat()[i]);
    });
}

Tape::Id Tape::kl_mean(Id mu, Id logvar) {
    const Matrix& m = value(mu);
    const Matrix& lv = value(logvar);
    const double batch = static_cast<double>(m.rows());
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double mv = m.flat()[i];
        const double l = lv.flat()[i];
        s += 0.5 * (mv * mv + std::exp(l) - l - 1.0);
    }
    Matrix out(1, 1);
    out(0, 0) = s / batch;
    return push(std::move(out), [mu, logvar, batch](Tape& t, const Node& n) {
        const double g = n.grad(0, 0) / batch;
        const Matrix& m2 = t.value(mu);
        const Matrix& lv2 = t.value(logvar);
        auto& mg = t.grad_ref(mu);
        auto& lg = t.grad_ref(logvar);
        for (std::size_t i = 0; i < m2.size(); ++i) {
            mg.flat()[i] += g * m2.flat()[i];
            lg.flat()[i] += g * 0.5 * (std::exp(lv2.flat()[i]) - 1.0);
        }
    });
}

Tape::Id Tape::weighted_sum(Id a, double wa, Id b, double wb) {
    Matrix out(1, 1);
    out(0, 0) = wa * scalar(a) + wb * scalar(b);
    return push(std::move(out), [a, wa, b, wb](Tape& t, const Node& n) {
        const double g = n.grad(0, 0);
        t.grad_ref(a)(0, 0) += wa * g;
        t.grad_ref(b)(0, 0) += wb * g;
    });
}

void Tape::backward(Id loss) {
    require(value(loss).rows() == 1 && value(loss).cols() == 1, ErrorKind::invalid_argument,
            "backward: loss is not a scalar");
    for (auto& node : nodes_) node.grad.fill(0.0);
    grad_ref(loss)(0, 0) = 1.0;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        const Node& node = nodes_[i];
        if (node.backward) node.backward(*this, node);
    }
}

}  // namespace vgc
