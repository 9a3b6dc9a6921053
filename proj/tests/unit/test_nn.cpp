#include <doctest.h>

#include <cmath>
#include <functional>

#include "dapose/nn/layers.hpp"
#include "dapose/nn/optimizer.hpp"
#include "dapose/util/rng.hpp"

using namespace dapose;
using nn::Tensor;

namespace {

Tensor random_tensor(std::vector<int> shape, util::Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (auto& x : t.data) x = rng.uniform(-scale, scale);
  return t;
}

// Scalar objective L = sum(y * r) for a fixed random r, so dL/dy = r.
struct LinearObjective {
  Tensor r;
  double value(const Tensor& y) const {
    double s = 0.0;
    for (size_t i = 0; i < y.numel(); ++i) s += y.data[i] * r.data[i];
    return s;
  }
  Tensor grad() const { return r; }
};

// Central finite differences of f over every element of x.
Tensor fd_grad(Tensor& x, const std::function<double()>& f, double eps = 1e-6) {
  Tensor g(x.shape);
  for (size_t i = 0; i < x.numel(); ++i) {
    const double keep = x.data[i];
    x.data[i] = keep + eps;
    const double fp = f();
    x.data[i] = keep - eps;
    const double fm = f();
    x.data[i] = keep;
    g.data[i] = (fp - fm) / (2.0 * eps);
  }
  return g;
}

void check_close(const Tensor& a, const Tensor& b, double tol) {
  REQUIRE(a.numel() == b.numel());
  for (size_t i = 0; i < a.numel(); ++i) {
    const double denom = std::max({std::fabs(a.data[i]), std::fabs(b.data[i]), 1e-8});
    REQUIRE(std::fabs(a.data[i] - b.data[i]) / denom <= tol);
  }
}

}  // namespace

TEST_CASE("Conv2d gradients match finite differences") {
  util::Rng rng(7);
  nn::Conv2d conv("t.conv", 2, 3, 3, 2, 1);
  for (auto* p : conv.params()) {
    for (auto& x : p->value.data) x = rng.uniform(-0.5, 0.5);
  }
  Tensor x = random_tensor({2, 2, 6, 5}, rng);
  nn::Conv2d::Cache cache;
  Tensor y = conv.forward(x, &cache);
  CHECK(y.shape == std::vector<int>{2, 3, 3, 3});

  LinearObjective obj{random_tensor(y.shape, rng)};
  nn::Adam::zero_grad(conv.params());
  Tensor dx = conv.backward(obj.grad(), cache);

  auto forward_loss = [&] { return obj.value(conv.forward(x)); };
  check_close(dx, fd_grad(x, forward_loss), 1e-6);
  for (auto* p : conv.params()) {
    check_close(p->grad, fd_grad(p->value, forward_loss), 1e-6);
  }
}

TEST_CASE("ConvTranspose2d gradients match finite differences") {
  util::Rng rng(8);
  nn::ConvTranspose2d deconv("t.deconv", 3, 2, 4, 2, 1);
  for (auto* p : deconv.params()) {
    for (auto& x : p->value.data) x = rng.uniform(-0.5, 0.5);
  }
  Tensor x = random_tensor({2, 3, 3, 4}, rng);
  nn::ConvTranspose2d::Cache cache;
  Tensor y = deconv.forward(x, &cache);
  CHECK(y.shape == std::vector<int>{2, 2, 6, 8});

  LinearObjective obj{random_tensor(y.shape, rng)};
  nn::Adam::zero_grad(deconv.params());
  Tensor dx = deconv.backward(obj.grad(), cache);

  auto forward_loss = [&] { return obj.value(deconv.forward(x)); };
  check_close(dx, fd_grad(x, forward_loss), 1e-6);
  for (auto* p : deconv.params()) {
    check_close(p->grad, fd_grad(p->value, forward_loss), 1e-6);
  }
}

TEST_CASE("Linear and GlobalAvgPool gradients") {
  util::Rng rng(9);
  nn::Linear fc("t.fc", 5, 4);
  for (auto* p : fc.params()) {
    for (auto& x : p->value.data) x = rng.uniform(-0.5, 0.5);
  }
  Tensor x = random_tensor({3, 5}, rng);
  nn::Linear::Cache cache;
  Tensor y = fc.forward(x, &cache);
  LinearObjective obj{random_tensor(y.shape, rng)};
  nn::Adam::zero_grad(fc.params());
  Tensor dx = fc.backward(obj.grad(), cache);
  auto forward_loss = [&] { return obj.value(fc.forward(x)); };
  check_close(dx, fd_grad(x, forward_loss), 1e-6);
  for (auto* p : fc.params()) {
    check_close(p->grad, fd_grad(p->value, forward_loss), 1e-6);
  }

  nn::GlobalAvgPool gap;
  Tensor xi = random_tensor({2, 3, 4, 4}, rng);
  nn::GlobalAvgPool::Cache gcache;
  Tensor pooled = gap.forward(xi, &gcache);
  CHECK(pooled.shape == std::vector<int>{2, 3});
  LinearObjective gobj{random_tensor(pooled.shape, rng)};
  Tensor gdx = gap.backward(gobj.grad(), gcache);
  auto gap_loss = [&] { return gobj.value(gap.forward(xi)); };
  check_close(gdx, fd_grad(xi, gap_loss), 1e-6);
}

TEST_CASE("ReLU masks by input sign") {
  util::Rng rng(10);
  nn::ReLU relu;
  Tensor x = random_tensor({2, 3, 2, 2}, rng);
  nn::ReLU::Cache cache;
  Tensor y = relu.forward(x, &cache);
  for (size_t i = 0; i < x.numel(); ++i) {
    CHECK(y.data[i] == (x.data[i] > 0 ? x.data[i] : 0.0));
  }
  Tensor dy = random_tensor(x.shape, rng);
  Tensor dx = relu.backward(dy, cache);
  for (size_t i = 0; i < x.numel(); ++i) {
    CHECK(dx.data[i] == (x.data[i] > 0 ? dy.data[i] : 0.0));
  }
}

TEST_CASE("GradientReversal is identity forward, -lambda backward") {
  util::Rng rng(11);
  nn::GradientReversal grl;
  Tensor x = random_tensor({4, 6}, rng);
  Tensor y = grl.forward(x);
  CHECK(y.data == x.data);
  Tensor dy = random_tensor(x.shape, rng);
  for (double lambda : {0.0, 0.0005, 1.0}) {
    Tensor dx = grl.backward(dy, lambda);
    for (size_t i = 0; i < dy.numel(); ++i) {
      CHECK(dx.data[i] == doctest::Approx(-lambda * dy.data[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("Adam descends a quadratic and skips nothing it is given") {
  nn::Parameter p;
  p.name = "t.p";
  p.resize({4});
  for (auto& x : p.value.data) x = 1.0;
  nn::Adam adam({.lr = 0.05});
  for (int it = 0; it < 200; ++it) {
    for (size_t i = 0; i < 4; ++i) p.grad.data[i] = 2.0 * p.value.data[i];
    adam.step({&p});
    p.zero_grad();
  }
  for (double x : p.value.data) CHECK(std::fabs(x) < 1e-2);
  CHECK(p.steps == 200);
}

TEST_CASE("im2col/col2im adjoint identity") {
  // <im2col(x), c> == <x, col2im(c)> for random x, c.
  util::Rng rng(12);
  const int ch = 2, h = 5, w = 4, k = 3, stride = 2, pad = 1;
  const int oh = nn::conv_out_dim(h, k, stride, pad), ow = nn::conv_out_dim(w, k, stride, pad);
  Tensor x = random_tensor({ch, h, w}, rng);
  Tensor c = random_tensor({ch * k * k, oh * ow}, rng);
  Tensor cols({ch * k * k, oh * ow});
  nn::im2col(x.ptr(), ch, h, w, k, stride, pad, cols.ptr());
  Tensor back({ch, h, w});
  nn::col2im(c.ptr(), ch, h, w, k, stride, pad, back.ptr());
  double lhs = 0.0, rhs = 0.0;
  for (size_t i = 0; i < cols.numel(); ++i) lhs += cols.data[i] * c.data[i];
  for (size_t i = 0; i < x.numel(); ++i) rhs += x.data[i] * back.data[i];
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}
