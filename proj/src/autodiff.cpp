#include "proco/autodiff.hpp"

#include <cmath>
#include <utility>

#include "proco/error.hpp"

namespace proco {

Var Tape::push(Matrix value, bool requires_grad,
               std::function<void(Tape&)> backprop) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    n.backprop = std::move(backprop);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Tape::Node& Tape::node(Var v) {
    if (!v.valid() || v.idx >= static_cast<int>(nodes_.size())) {
        throw InvariantError("tape: invalid var handle");
    }
    return nodes_[v.idx];
}

const Tape::Node& Tape::node(Var v) const {
    if (!v.valid() || v.idx >= static_cast<int>(nodes_.size())) {
        throw InvariantError("tape: invalid var handle");
    }
    return nodes_[v.idx];
}

void Tape::accumulate(int idx, const Matrix& g) {
    Node& n = nodes_[idx];
    if (!n.requires_grad) return;
    if (n.grad.empty()) {
        n.grad = Matrix(n.value.rows(), n.value.cols());
    }
    for (std::size_t i = 0; i < g.size(); ++i) n.grad.raw()[i] += g.data()[i];
}

Var Tape::leaf(Matrix value) { return push(std::move(value), true, nullptr); }

Var Tape::constant(Matrix value) { return push(std::move(value), false, nullptr); }

const Matrix& Tape::value(Var v) const { return node(v).value; }

bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }

const Matrix& Tape::grad(Var v) const {
    const Node& n = node(v);
    if (!n.requires_grad) {
        throw InvariantError("tape: gradient requested for a non-differentiable node");
    }
    if (!backward_done_) {
        throw InvariantError("tape: backward() has not run");
    }
    return n.grad;
}

Var Tape::matmul(Var a, Var b) {
    const int ai = a.idx, bi = b.idx;
    const bool rg = requires_grad(a) || requires_grad(b);
    Var out = push(proco::matmul(value(a), value(b)), rg, nullptr);
    const int oi = out.idx;
    if (rg) {
        nodes_[oi].backprop = [ai, bi, oi](Tape& t) {
            const Matrix& g = t.nodes_[oi].grad;
            if (t.nodes_[ai].requires_grad) {
                t.accumulate(ai, proco::matmul(g, proco::transpose(t.nodes_[bi].value)));
            }
            if (t.nodes_[bi].requires_grad) {
                t.accumulate(bi, proco::matmul(proco::transpose(t.nodes_[ai].value), g));
            }
        };
    }
    return out;
}

void Tape::backward(Var loss) {
    const Node& ln = node(loss);
    if (ln.value.rows() != 1 || ln.value.cols() != 1) {
        throw ShapeError("backward: loss must be 1x1, got " + ln.value.shape_str());
    }
    if (!ln.requires_grad) {
        throw InvariantError("backward: loss does not depend on any leaf");
    }
    for (Node& n : nodes_) {
        if (n.requires_grad) n.grad = Matrix(n.value.rows(), n.value.cols());
    }
    nodes_[loss.idx].grad(0, 0) = 1.0;
    for (int i = loss.idx; i >= 0; --i) {
        Node& n = nodes_[i];
        if (n.backprop && n.requires_grad) n.backprop(*this);
    }
    backward_done_ = true;
}

Var Tape::transpose(Var a) {
    const int ai = a.idx;
    Var out = push(proco::transpose(value(a)), requires_grad(a), nullptr);
    const int oi = out.idx;
    if (requires_grad(a)) {
        nodes_[oi].backprop = [ai, oi](Tape& t) {
            t.accumulate(ai, proco::transpose(t.nodes_[oi].grad));
        };
    }
    return out;
}

Var Tape::add(Var a, Var b) {
    const int ai = a.idx, bi = b.idx;
    const bool rg = requires_grad(a) || requires_grad(b);
    Var out = push(proco::add(value(a), value(b)), rg, nullptr);
    const int oi = out.idx;
    if (rg) {
        nodes_[oi].backprop = [ai, bi, oi](Tape& t) {
            t.accumulate(ai, t.nodes_[oi].grad);
            t.accumulate(bi, t.nodes_[oi].grad);
        };
    }
    return out;
}

Var Tape::sub(Var a, Var b) {
    const int ai = a.idx, bi = b.idx;
    const bool rg = requires_grad(a) || requires_grad(b);
    Var out = push(proco::sub(value(a), value(b)), rg, nullptr);
    const int oi = out.idx;
    if (rg) {
        nodes_[oi].backprop = [ai, bi, oi](Tape& t) {
            t.accumulate(ai, t.nodes_[oi].grad);
            t.accumulate(bi, proco::scale(t.nodes_[oi].grad, -1.0));
        };
    }
    return out;
}

Var Tape::scale(Var a, double factor) {
    const int ai = a.idx;
    Var out = push(proco::scale(value(a), factor), requires_grad(a), nullptr);
    const int oi = out.idx;
    if (requires_grad(a)) {
        nodes_[oi].backprop = [ai, oi, factor](Tape& t) {
            t.accumulate(ai, proco::scale(t.nodes_[oi].grad, factor));
        };
    }
    return out;
}

Var Tape::add_col_broadcast(Var a, Var bias) {
    const int ai = a.idx, bi = bias.idx;
    const bool rg = requires_grad(a) || requires_grad(bias);
    Var out = push(proco::add_col_broadcast(value(a), value(bias)), rg, nullptr);
    const int oi = out.idx;
    if (rg) {
        nodes_[oi].backprop = [ai, bi, oi](Tape& t) {
            const Matrix& g = t.nodes_[oi].grad;
            t.accumulate(ai, g);
            Matrix gb(g.rows(), 1);
            for (int i = 0; i < g.rows(); ++i) {
                double s = 0.0;
                for (int j = 0; j < g.cols(); ++j) s += g(i, j);
                gb(i, 0) = s;
            }
            t.accumulate(bi, gb);
        };
    }
    return out;
}

Var Tape::relu(Var a) {
    const int ai = a.idx;
    Var out = push(proco::relu(value(a)), requires_grad(a), nullptr);
    const int oi = out.idx;
    if (requires_grad(a)) {
        nodes_[oi].backprop = [ai, oi](Tape& t) {
            const Matrix& g = t.nodes_[oi].grad;
            const Matrix& x = t.nodes_[ai].value;
            Matrix gx(g.rows(), g.cols());
            for (std::size_t i = 0; i < g.size(); ++i) {
                gx.raw()[i] = x.data()[i] > 0.0 ? g.data()[i] : 0.0;
            }
            t.accumulate(ai, gx);
        };
    }
    return out;
}

Var Tape::sigmoid(Var a) {
    const int ai = a.idx;
    Var out = push(proco::sigmoid(value(a)), requires_grad(a), nullptr);
    const int oi = out.idx;
    if (requires_grad(a)) {
        nodes_[oi].backprop = [ai, oi](Tape& t) {
            const Matrix& g = t.nodes_[oi].grad;
            const Matrix& y = t.nodes_[oi].value;
            Matrix gx(g.rows(), g.cols());
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double s = y.data()[i];
                gx.raw()[i] = g.data()[i] * s * (1.0 - s);
            }
            t.accumulate(ai, gx);
        };
    }
    return out;
}

Var Tape::exp(Var a) {
    const int ai = a.idx;
    Var out = push(proco::exp(value(a)), requires_grad(a), nullptr);
    const int oi = out.idx;
    if (requires_grad(a)) {
        nodes_[oi].backprop = [ai, oi](Tape& t) {
            const Matrix& g = t.nodes_[oi].grad;
            const Matrix& y = t.nodes_[oi].value;
            Matrix gx(g.rows(), g.cols());
            for (std::size_t i = 0; i < g.size(); ++i) {
                gx.raw()[i] = g.data()[i] * y.data()[i];
            }
            t.accumulate(ai, gx);
        };
    }
    return out;
}

Var Tape::log(Var a) {
    const int ai = a.idx;
    Var out = push(proco::log(value(a)), requires_grad(a), nullptr);
    const int oi = out.idx;
    if (requires_grad(a)) {
        nodes_[oi].backprop = [ai, oi](Tape& t) {
            const Matrix& g = t.nodes_[oi].grad;
            const Matrix& x = t.nodes_[ai].value;
            Matrix gx(g.rows(), g.cols());
            for (std::size_t i = 0; i < g.size(); ++i) {
                gx.raw()[i] = g.data()[i] / x.data()[i];
            }
            t.accumulate(ai, gx);
        };
    }
    return out;
}

Var Tape::softplus(Var a) {
    const int ai = a.idx;
    Var out = push(proco::softplus(value(a)), requires_grad(a), nullptr);
    const int oi = out.idx;
    if (requires_grad(a)) {
        nodes_[oi].backprop = [ai, oi](Tape& t) {
            const Matrix& g = t.nodes_[oi].grad;
            const Matrix& x = t.nodes_[ai].value;
            Matrix gx(g.rows(), g.cols());
            for (std::size_t i = 0; i < g.size(); ++i) {
                gx.raw()[i] = g.data()[i] * sigmoid_scalar(x.data()[i]);
            }
            t.accumulate(ai, gx);
        };
    }
    return out;
}

Var Tape::logsumexp_rows(Var a) {
    const int ai = a.idx;
    Var out = push(proco::logsumexp_rows(value(a)), requires_grad(a), nullptr);
    const int oi = out.idx;
    if (requires_grad(a)) {
        nodes_[oi].backprop = [ai, oi](Tape& t) {
            const Matrix& g = t.nodes_[oi].grad;  // m x 1
            const Matrix& x = t.nodes_[ai].value;
            const Matrix& y = t.nodes_[oi].value;
            Matrix gx(x.rows(), x.cols());
            for (int i = 0; i < x.rows(); ++i) {
                for (int j = 0; j < x.cols(); ++j) {
                    gx(i, j) = g(i, 0) * std::exp(x(i, j) - y(i, 0));
                }
            }
            t.accumulate(ai, gx);
        };
    }
    return out;
}

Var Tape::l2_normalize_cols(Var a) {
    const int ai = a.idx;
    Var out = push(proco::l2_normalize_cols(value(a)), requires_grad(a), nullptr);
    const int oi = out.idx;
    if (requires_grad(a)) {
        nodes_[oi].backprop = [ai, oi](Tape& t) {
            const Matrix& g = t.nodes_[oi].grad;
            const Matrix& x = t.nodes_[ai].value;
            const Matrix& y = t.nodes_[oi].value;
            Matrix gx(x.rows(), x.cols());
            for (int j = 0; j < x.cols(); ++j) {
                double sq = 0.0, gy = 0.0;
                for (int i = 0; i < x.rows(); ++i) {
                    sq += x(i, j) * x(i, j);
                    gy += y(i, j) * g(i, j);
                }
                const double norm = std::sqrt(sq);
                for (int i = 0; i < x.rows(); ++i) {
                    gx(i, j) = (g(i, j) - y(i, j) * gy) / norm;
                }
            }
            t.accumulate(ai, gx);
        };
    }
    return out;
}

Var Tape::concat_cols(Var a, Var b) {
    const int ai = a.idx, bi = b.idx;
    const bool rg = requires_grad(a) || requires_grad(b);
    const int split = value(a).cols();
    Var out = push(proco::concat_cols(value(a), value(b)), rg, nullptr);
    const int oi = out.idx;
    if (rg) {
        nodes_[oi].backprop = [ai, bi, oi, split](Tape& t) {
            const Matrix& g = t.nodes_[oi].grad;
            Matrix ga(g.rows(), split);
            Matrix gb(g.rows(), g.cols() - split);
            for (int i = 0; i < g.rows(); ++i) {
                for (int j = 0; j < split; ++j) ga(i, j) = g(i, j);
                for (int j = split; j < g.cols(); ++j) gb(i, j - split) = g(i, j);
            }
            t.accumulate(ai, ga);
            t.accumulate(bi, gb);
        };
    }
    return out;
}

Var Tape::gather_rows(Var a, std::vector<int> indices) {
    const int ai = a.idx;
    Var out = push(proco::gather_rows(value(a), indices), requires_grad(a), nullptr);
    const int oi = out.idx;
    if (requires_grad(a)) {
        nodes_[oi].backprop = [ai, oi, idx = std::move(indices)](Tape& t) {
            const Matrix& g = t.nodes_[oi].grad;
            const Matrix& x = t.nodes_[ai].value;
            Matrix gx(x.rows(), x.cols());
            for (std::size_t r = 0; r < idx.size(); ++r) {
                for (int j = 0; j < x.cols(); ++j) {
                    gx(idx[r], j) += g(static_cast<int>(r), j);
                }
            }
            t.accumulate(ai, gx);
        };
    }
    return out;
}

Var Tape::gather_cols(Var a, std::vector<int> indices) {
    const int ai = a.idx;
    Var out = push(proco::gather_cols(value(a), indices), requires_grad(a), nullptr);
    const int oi = out.idx;
    if (requires_grad(a)) {
        nodes_[oi].backprop = [ai, oi, idx = std::move(indices)](Tape& t) {
            const Matrix& g = t.nodes_[oi].grad;
            const Matrix& x = t.nodes_[ai].value;
            Matrix gx(x.rows(), x.cols());
            for (std::size_t c = 0; c < idx.size(); ++c) {
                for (int i = 0; i < x.rows(); ++i) {
                    gx(i, idx[c]) += g(i, static_cast<int>(c));
                }
            }
            t.accumulate(ai, gx);
        };
    }
    return out;
}

Var Tape::sum_all(Var a) {
    const int ai = a.idx;
    Var out = push(Matrix(1, 1, {proco::sum_all(value(a))}), requires_grad(a), nullptr);
    const int oi = out.idx;
    if (requires_grad(a)) {
        nodes_[oi].backprop = [ai, oi](Tape& t) {
            const double g = t.nodes_[oi].grad(0, 0);
            const Matrix& x = t.nodes_[ai].value;
            t.accumulate(ai, Matrix::filled(x.rows(), x.cols(), g));
        };
    }
    return out;
}

Var Tape::mean_all(Var a) {
    const int ai = a.idx;
    const double n = static_cast<double>(value(a).size());
    if (n == 0.0) {
        throw ShapeError("mean_all: empty matrix");
    }
    Var out = push(Matrix(1, 1, {proco::sum_all(value(a)) / n}), requires_grad(a), nullptr);
    const int oi = out.idx;
    if (requires_grad(a)) {
        nodes_[oi].backprop = [ai, oi, n](Tape& t) {
            const double g = t.nodes_[oi].grad(0, 0) / n;
            const Matrix& x = t.nodes_[ai].value;
            t.accumulate(ai, Matrix::filled(x.rows(), x.cols(), g));
        };
    }
    return out;
}

// ---- gradient checking ------------------------------------------------

GradCheckReport grad_check(
    const std::function<double(const std::vector<Matrix>&)>& f,
    const std::vector<Matrix>& params, const std::vector<Matrix>& analytic,
    double eps, double tol) {
    if (analytic.size() != params.size()) {
        throw ShapeError("grad_check: analytic gradient count mismatch");
    }
    GradCheckReport report;
    std::vector<Matrix> work = params;
    for (std::size_t p = 0; p < params.size(); ++p) {
        if (!analytic[p].same_shape(params[p])) {
            throw ShapeError("grad_check: gradient shape mismatch at param " +
                             std::to_string(p));
        }
        for (std::size_t i = 0; i < params[p].size(); ++i) {
            const double orig = work[p].raw()[i];
            work[p].raw()[i] = orig + eps;
            const double up = f(work);
            work[p].raw()[i] = orig - eps;
            const double down = f(work);
            work[p].raw()[i] = orig;
            const double numeric = (up - down) / (2.0 * eps);
            const double a = analytic[p].data()[i];
            const double denom = std::max({1e-6, std::abs(a), std::abs(numeric)});
            const double rel = std::abs(a - numeric) / denom;
            if (rel > report.max_rel_err) {
                report.max_rel_err = rel;
                report.worst_param = static_cast<int>(p);
                report.worst_coord = static_cast<int>(i);
            }
        }
    }
    report.pass = report.max_rel_err < tol;
    return report;
}

GradCheckReport grad_check_tape(
    const std::function<Var(Tape&, const std::vector<Var>&)>& build,
    const std::vector<Matrix>& params, double eps, double tol) {
    Tape tape;
    std::vector<Var> leaves;
    leaves.reserve(params.size());
    for (const Matrix& p : params) leaves.push_back(tape.leaf(p));
    Var loss = build(tape, leaves);
    tape.backward(loss);
    std::vector<Matrix> analytic;
    analytic.reserve(params.size());
    for (Var v : leaves) analytic.push_back(tape.grad(v));

    auto eval = [&build](const std::vector<Matrix>& ps) {
        Tape t;
        std::vector<Var> vs;
        vs.reserve(ps.size());
        for (const Matrix& p : ps) vs.push_back(t.leaf(p));
        return t.value(build(t, vs))(0, 0);
    };
    return grad_check(eval, params, analytic, eps, tol);
}

}  // namespace proco
