#pragma once

#include <functional>
#include <vector>

#include "proco/matrix.hpp"

namespace proco {

// Handle into a Tape. Only meaningful for the tape that produced it.
struct Var {
    int idx = -1;
    bool valid() const { return idx >= 0; }
};

// Reverse-mode differentiation record for one scalar loss evaluation.
//
// Nodes are appended in evaluation order, which is automatically a
// topological order, and the backward sweep visits them exactly once in
// reverse. A tape is built fresh for every loss evaluation and discarded
// afterwards; it is single-threaded, but independent tapes may run on
// separate threads.
//
// Gradients only flow into nodes reachable from a leaf(); constant()
// inputs are never differentiated and their gradient buffers are never
// allocated, so large frozen feature blocks cost nothing in backward.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Trainable parameter: gradient is tracked and readable after backward().
    Var leaf(Matrix value);
    // Frozen input: participates in forward values only.
    Var constant(Matrix value);

    Var matmul(Var a, Var b);
    Var transpose(Var a);
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var scale(Var a, double factor);
    Var add_col_broadcast(Var a, Var bias);
    Var relu(Var a);
    Var sigmoid(Var a);
    Var exp(Var a);
    Var log(Var a);
    Var softplus(Var a);
    Var logsumexp_rows(Var a);
    Var l2_normalize_cols(Var a);
    Var concat_cols(Var a, Var b);
    Var gather_rows(Var a, std::vector<int> indices);
    Var gather_cols(Var a, std::vector<int> indices);
    Var sum_all(Var a);
    Var mean_all(Var a);

    // Seeds d(loss)/d(loss) = 1 and accumulates gradients into every
    // reachable differentiable node. The loss node must be 1x1.
    void backward(Var loss);

    const Matrix& value(Var v) const;
    // Gradient of the last backward() loss w.r.t. v. v must require
    // gradients (be a leaf or depend on one).
    const Matrix& grad(Var v) const;
    bool requires_grad(Var v) const;

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Matrix value;
        Matrix grad;
        std::function<void(Tape&)> backprop;  // empty for leaves/constants
        bool requires_grad = false;
    };

    Var push(Matrix value, bool requires_grad, std::function<void(Tape&)> backprop);
    Node& node(Var v);
    const Node& node(Var v) const;
    void accumulate(int idx, const Matrix& g);

    std::vector<Node> nodes_;
    bool backward_done_ = false;
};

// Coordinate-wise comparison of reverse-mode gradients against central
// finite differences.
struct GradCheckReport {
    double max_rel_err = 0.0;
    bool pass = false;
    int worst_param = -1;   // index into the parameter list
    int worst_coord = -1;   // flat index within that parameter
};

// Evaluates `f(params)` as a plain scalar function (no tape involved) and
// compares `analytic` against central differences with step `eps`.
// Relative error uses max(1e-6, |a|, |n|) in the denominator so that
// near-zero gradients are compared absolutely.
GradCheckReport grad_check(
    const std::function<double(const std::vector<Matrix>&)>& f,
    const std::vector<Matrix>& params, const std::vector<Matrix>& analytic,
    double eps, double tol);

// Builds the loss from leaf vars via `build`, runs backward for the
// analytic gradients, then checks them against finite differences of the
// forward evaluation.
GradCheckReport grad_check_tape(
    const std::function<Var(Tape&, const std::vector<Var>&)>& build,
    const std::vector<Matrix>& params, double eps, double tol);

}  // namespace proco
