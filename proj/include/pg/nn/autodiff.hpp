#pragma once

#include "pg/nn/tensor.hpp"

#include <functional>
#include <memory>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace pg::nn {

// Define-by-run reverse-mode tape. Backward rules are expressed in terms of
// the public ops themselves, so calling grad() with create_graph=true yields
// a differentiable gradient graph (needed for the R1 penalty, whose training
// gradient is a second derivative of the discriminator).

inline thread_local bool g_grad_enabled = true;

struct NoGradGuard {
    bool prev;
    NoGradGuard() : prev(g_grad_enabled) { g_grad_enabled = false; }
    ~NoGradGuard() { g_grad_enabled = prev; }
    NoGradGuard(const NoGradGuard&) = delete;
};

struct GradModeGuard {
    bool prev;
    explicit GradModeGuard(bool on) : prev(g_grad_enabled) { g_grad_enabled = on; }
    ~GradModeGuard() { g_grad_enabled = prev; }
    GradModeGuard(const GradModeGuard&) = delete;
};

template <class T>
class Var;

template <class T>
using VjpFn = std::function<std::vector<Var<T>>(const Var<T>& grad_out,
                                                const std::vector<Var<T>>& inputs,
                                                const Var<T>& output)>;

template <class T>
struct Node {
    Tensor<T> value;
    std::vector<Var<T>> inputs;
    VjpFn<T> vjp;
    bool requires_grad = false;
    const char* op = "leaf";
};

template <class T>
class Var {
public:
    Var() = default;
    explicit Var(std::shared_ptr<Node<T>> n) : n_(std::move(n)) {}

    static Var leaf(Tensor<T> v, bool requires_grad = false) {
        auto n = std::make_shared<Node<T>>();
        n->value = std::move(v);
        n->requires_grad = requires_grad;
        return Var(std::move(n));
    }

    bool defined() const { return static_cast<bool>(n_); }
    const Tensor<T>& val() const { return n_->value; }
    Tensor<T>& val() { return n_->value; }
    bool requires_grad() const { return n_ && n_->requires_grad; }
    Node<T>* node() const { return n_.get(); }
    std::shared_ptr<Node<T>> node_ptr() const { return n_; }
    const Shape& shape() const { return n_->value.shape; }
    Index numel() const { return n_->value.numel(); }

private:
    std::shared_ptr<Node<T>> n_;
};

template <class T>
Var<T> constant(Tensor<T> v) {
    return Var<T>::leaf(std::move(v), false);
}

template <class T>
Var<T> make_op(const char* name, Tensor<T> value, std::vector<Var<T>> inputs, VjpFn<T> vjp) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(value);
    n->op = name;
    bool any = false;
    if (g_grad_enabled) {
        for (const auto& in : inputs) any = any || in.requires_grad();
    }
    if (any) {
        n->requires_grad = true;
        n->inputs = std::move(inputs);
        n->vjp = std::move(vjp);
    }
    return Var<T>(std::move(n));
}

// Topological order of the grad-requiring subgraph reachable from root.
template <class T>
std::vector<Var<T>> topo_order(const Var<T>& root) {
    std::vector<Var<T>> order;
    if (!root.requires_grad()) return order;
    std::unordered_set<const Node<T>*> seen;
    struct Frame {
        Var<T> var;
        std::size_t next = 0;
    };
    std::vector<Frame> stack;
    stack.push_back({root, 0});
    seen.insert(root.node());
    while (!stack.empty()) {
        Frame& f = stack.back();
        auto& ins = f.var.node()->inputs;
        if (f.next < ins.size()) {
            Var<T> child = ins[f.next++];
            if (child.requires_grad() && !seen.count(child.node())) {
                seen.insert(child.node());
                stack.push_back({child, 0});
            }
        } else {
            order.push_back(f.var);
            stack.pop_back();
        }
    }
    return order;
}

template <class T>
Var<T> add(const Var<T>& a, const Var<T>& b);  // defined in ops.hpp

// Reverse-mode gradients of a scalar `loss` w.r.t. `wrt`. With
// create_graph=true the returned Vars carry history and can be
// differentiated again.
template <class T>
std::vector<Var<T>> grad(const Var<T>& loss, const std::vector<Var<T>>& wrt,
                         bool create_graph = false) {
    require(loss.defined() && loss.numel() == 1, ErrorCode::InvalidArgument,
            "grad: loss must be a defined scalar");
    std::unordered_map<const Node<T>*, Var<T>> acc;
    {
        GradModeGuard guard(create_graph);
        acc[loss.node()] = constant(Tensor<T>::full(loss.shape(), T(1)));
        auto order = topo_order(loss);
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const Var<T>& v = *it;
            auto found = acc.find(v.node());
            if (found == acc.end()) continue;
            Node<T>* n = v.node();
            if (!n->vjp) continue;
            std::vector<Var<T>> gs = n->vjp(found->second, n->inputs, v);
            require(gs.size() == n->inputs.size(), ErrorCode::InvalidArgument,
                    std::string("vjp arity mismatch in op ") + n->op);
            for (std::size_t i = 0; i < gs.size(); ++i) {
                const Var<T>& parent = n->inputs[i];
                if (!parent.requires_grad() || !gs[i].defined()) continue;
                auto slot = acc.find(parent.node());
                if (slot == acc.end()) {
                    acc[parent.node()] = gs[i];
                } else {
                    slot->second = add(slot->second, gs[i]);
                }
            }
        }
    }
    std::vector<Var<T>> out;
    out.reserve(wrt.size());
    for (const auto& w : wrt) {
        auto found = acc.find(w.node());
        if (found != acc.end()) {
            out.push_back(found->second);
        } else {
            out.push_back(constant(Tensor<T>::zeros(w.shape())));
        }
    }
    return out;
}

template <class T>
Var<T> detach(const Var<T>& x) {
    return constant(x.val());
}

}  // namespace pg::nn
