#include "pg/nn/layers.hpp"
#include "pg/nn/ops.hpp"

#include "testing_util.hpp"

#include <doctest.h>

using namespace pg;
using namespace pg::nn;
using pg::testing::max_rel_err;
using pg::testing::numeric_grad;

namespace {

Tensor<double> analytic_grad(Var<double>& leaf, const std::function<Var<double>()>& f) {
    Var<double> loss = f();
    auto gs = grad(loss, {leaf});
    return gs[0].val();
}

void check_fd(Var<double>& leaf, const std::function<Var<double>()>& f, double tol = 1e-6) {
    auto a = analytic_grad(leaf, f);
    auto n = numeric_grad(leaf, f);
    CHECK(max_rel_err(a, n) < tol);
}

}  // namespace

TEST_CASE("elementwise op gradients match finite differences") {
    Rng rng(42);
    auto x = Var<double>::leaf(Tensor<double>::randn({3, 4}, rng), true);
    auto y = Var<double>::leaf(Tensor<double>::randn({3, 4}, rng), true);

    check_fd(x, [&] { return sum_all(mul(x, y)); });
    check_fd(x, [&] { return sum_all(div(x, add_scalar(square(y), 1.0))); });
    check_fd(x, [&] { return sum_all(sigmoid(x)); });
    check_fd(x, [&] { return sum_all(tanh_(x)); });
    check_fd(x, [&] { return sum_all(exp_(mul_scalar(x, 0.3))); });
    check_fd(x, [&] { return sum_all(log_(add_scalar(square(x), 1.0))); });
    check_fd(x, [&] { return sum_all(sqrt_(add_scalar(square(x), 1.0))); });
    check_fd(x, [&] { return sum_all(leaky_relu(x, 0.2)); });
    check_fd(x, [&] { return sum_all(softplus(x)); });
    check_fd(x, [&] { return mean_all(square(sub(x, y))); });
}

TEST_CASE("matmul / reshape / slice gradients") {
    Rng rng(7);
    auto a = Var<double>::leaf(Tensor<double>::randn({3, 5}, rng), true);
    auto b = Var<double>::leaf(Tensor<double>::randn({5, 2}, rng), true);

    check_fd(a, [&] { return sum_all(square(matmul(a, b))); });
    check_fd(b, [&] { return sum_all(square(matmul(a, b))); });
    check_fd(a, [&] { return sum_all(transpose2d(matmul(a, b))); });
    check_fd(a, [&] { return sum_all(square(reshape(a, {5, 3}))); });
    check_fd(a, [&] { return sum_all(square(slice_cols(a, 1, 3))); });
    check_fd(a, [&] {
        return sum_all(square(concat_cols<double>({slice_cols(a, 0, 2), slice_cols(a, 2, 3)})));
    });
}

TEST_CASE("reduction / broadcast gradients") {
    Rng rng(11);
    auto x = Var<double>::leaf(Tensor<double>::randn({4, 3}, rng), true);
    auto v = Var<double>::leaf(Tensor<double>::randn({3}, rng), true);
    auto img = Var<double>::leaf(Tensor<double>::randn({2, 3, 4, 4}, rng), true);
    auto s = Var<double>::leaf(Tensor<double>::randn({2, 3}, rng), true);
    auto c = Var<double>::leaf(Tensor<double>::randn({3}, rng), true);

    check_fd(x, [&] { return sum_all(square(sum_rows(x))); });
    check_fd(v, [&] { return sum_all(square(broadcast_rows(v, 4))); });
    check_fd(x, [&] { return sum_all(square(sum_cols(x))); });
    check_fd(x, [&] { return sum_all(square(tile_cols(sum_cols(x), 5))); });
    check_fd(img, [&] { return sum_all(square(sum_hw(img))); });
    check_fd(s, [&] { return sum_all(square(tile_hw(s, 4, 4))); });
    check_fd(img, [&] { return sum_all(square(sum_to_c(img))); });
    check_fd(c, [&] { return sum_all(square(broadcast_c(c, 2, 4, 4))); });
    check_fd(img, [&] { return square(mean_all(img)); });
}

TEST_CASE("conv / pooling gradients") {
    Rng rng(13);
    auto x = Var<double>::leaf(Tensor<double>::randn({2, 3, 6, 6}, rng), true);
    auto w = Var<double>::leaf(Tensor<double>::randn({4, 3, 3, 3}, rng), true);

    check_fd(x, [&] { return sum_all(square(conv2d(x, w, 1, 1))); });
    check_fd(w, [&] { return sum_all(square(conv2d(x, w, 1, 1))); });
    check_fd(x, [&] { return sum_all(square(conv2d(x, w, 2, 1))); });
    check_fd(w, [&] { return sum_all(square(conv2d(x, w, 2, 1))); });
    check_fd(x, [&] { return sum_all(square(avg_pool2x(x))); });
    check_fd(x, [&] { return sum_all(square(upsample2x(x))); });

    auto w1 = Var<double>::leaf(Tensor<double>::randn({4, 3, 1, 1}, rng), true);
    check_fd(x, [&] { return sum_all(square(conv2d(x, w1, 1, 0))); });
    check_fd(w1, [&] { return sum_all(square(conv2d(x, w1, 1, 0))); });
}

TEST_CASE("layer helpers differentiate") {
    Rng rng(17);
    auto img = Var<double>::leaf(Tensor<double>::randn({2, 3, 4, 4}, rng), true);
    auto lat = Var<double>::leaf(Tensor<double>::randn({2, 6}, rng), true);

    // project onto a random direction: the plain sum of squares of a
    // normalized output is constant and has a vanishing gradient
    auto pr_img = constant(Tensor<double>::randn(img.shape(), rng));
    auto pr_lat = constant(Tensor<double>::randn(lat.shape(), rng));
    check_fd(img, [&] { return sum_all(mul(instance_norm(img, 1e-5), pr_img)); }, 1e-5);
    check_fd(lat, [&] { return sum_all(mul(pixel_norm(lat), pr_lat)); }, 1e-5);

    LinearT<double> lin(6, 3, rng.child("lin"));
    check_fd(lat, [&] { return sum_all(square(lin.forward(lat))); });
    Var<double> lw = lin.w;
    check_fd(lw, [&] { return sum_all(square(lin.forward(lat))); });

    Conv2dT<double> conv(3, 5, 3, 1, 1, rng.child("conv"));
    check_fd(img, [&] { return sum_all(square(conv.forward(img))); });
    Var<double> cw = conv.w;
    Var<double> cb = conv.b;
    check_fd(cw, [&] { return sum_all(square(conv.forward(img))); });
    check_fd(cb, [&] { return sum_all(square(conv.forward(img))); });
}

TEST_CASE("double backward: second derivatives are exact") {
    // d/dx of (dy/dx) for y = sum(x^3): first grad 3x^2, second 6x.
    Rng rng(23);
    auto x = Var<double>::leaf(Tensor<double>::randn({5}, rng), true);
    auto y = sum_all(mul(square(x), x));
    auto g1 = grad(y, {x}, /*create_graph=*/true)[0];
    auto z = sum_all(g1);
    auto g2 = grad(z, {x})[0];
    for (Index i = 0; i < x.numel(); ++i) {
        CHECK(g2.val().data[i] == doctest::Approx(6.0 * x.val().data[i]).epsilon(1e-10));
    }
}

TEST_CASE("double backward through a conv matches finite differences") {
    // Gradient-norm penalty of a tiny conv net, differentiated w.r.t. weights:
    // the same structure the discriminator R1 term uses.
    Rng rng(29);
    auto x = Var<double>::leaf(Tensor<double>::randn({1, 2, 4, 4}, rng), true);
    auto w = Var<double>::leaf(Tensor<double>::randn({3, 2, 3, 3}, rng, 0.5), true);

    std::function<Var<double>()> penalty = [&]() -> Var<double> {
        auto score = sum_all(tanh_(conv2d(x, w, 1, 1)));
        auto gx = grad(score, {x}, /*create_graph=*/true)[0];
        return sum_all(square(gx));
    };
    auto a = analytic_grad(w, penalty);
    auto n = numeric_grad(w, penalty);
    CHECK(max_rel_err(a, n) < 1e-5);
}

TEST_CASE("no-grad mode records nothing") {
    Rng rng(31);
    auto x = Var<double>::leaf(Tensor<double>::randn({3}, rng), true);
    NoGradGuard guard;
    auto y = square(x);
    CHECK_FALSE(y.requires_grad());
}

TEST_CASE("Adam decreases a quadratic") {
    Rng rng(37);
    auto x = Var<float>::leaf(Tensor<float>::randn({4}, rng), true);
    AdamT<float> opt({x}, 0.1f);
    float first = 0;
    for (int i = 0; i < 60; ++i) {
        auto loss = sum_all(square(x));
        if (i == 0) first = loss.val().data[0];
        auto gs = grad(loss, {x});
        opt.step({gs[0].val()});
    }
    auto final_loss = sum_all(square(x)).val().data[0];
    CHECK(final_loss < 0.05f * first);
}
