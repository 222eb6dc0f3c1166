#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "colu/errors.hpp"
#include "colu/nn/architectures.hpp"
#include "colu/nn/loss.hpp"
#include "colu/nn/serialize.hpp"
#include "support.hpp"

using namespace colu;
using namespace colu::nn;
using act::Tag;
using testing::check_layer;
using testing::random_tensor;

namespace {

ForwardContext train_ctx(Rng& rng) { return {Mode::Train, &rng}; }

std::vector<LayerKind> kinds_of(std::initializer_list<LayerKind> k) { return k; }

}  // namespace

TEST_CASE("conv2d trivial cases") {
  Rng rng(0);
  auto ctx = train_ctx(rng);
  SUBCASE("1x1 kernel is a scalar multiply") {
    Conv2d conv(1, 1, 1);
    conv.weight()[0] = 3.0;
    conv.bias()[0] = 0.0;
    CHECK(conv.forward(Tensor({1, 1, 1, 1}, 2.0), ctx)[0] == 6.0);
  }
  SUBCASE("identity kernel") {
    Conv2d conv(2, 2, 3);
    conv.weight().fill(0.0);
    conv.bias().fill(0.0);
    for (std::size_t c = 0; c < 2; ++c) conv.weight().at(c, c, 1, 1) = 1.0;
    const Tensor x = random_tensor({3, 2, 5, 4}, rng);
    CHECK(conv.forward(x, ctx) == x);
  }
  SUBCASE("wrong channel count") {
    Conv2d conv(3, 2);
    CHECK_THROWS_AS(conv.forward(Tensor({1, 2, 4, 4}), ctx), ShapeError);
  }
}

TEST_CASE("conv2d against a direct loop") {
  Rng rng(3);
  auto ctx = train_ctx(rng);
  Conv2d conv(3, 4, 3);
  conv.initialize(rng);
  for (double& b : conv.bias().values()) b = rng.uniform(-1, 1);
  const Tensor x = random_tensor({2, 3, 5, 6}, rng);
  const Tensor y = conv.forward(x, ctx);
  REQUIRE(y.shape() == Shape{2, 4, 5, 6});
  double worst = 0.0;
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t o = 0; o < 4; ++o)
      for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 6; ++j) {
          double s = conv.bias()[o];
          for (std::size_t c = 0; c < 3; ++c)
            for (int di = -1; di <= 1; ++di)
              for (int dj = -1; dj <= 1; ++dj) {
                const int yy = static_cast<int>(i) + di, xx = static_cast<int>(j) + dj;
                if (yy < 0 || xx < 0 || yy >= 5 || xx >= 6) continue;
                s += conv.weight().at(o, c, di + 1, dj + 1) * x.at(n, c, yy, xx);
              }
          worst = std::max(worst, std::fabs(s - y.at(n, o, i, j)));
        }
  CHECK(worst <= 1e-12);
}

TEST_CASE("conv2d gradients") {
  Rng rng(5);
  Conv2d conv(3, 4, 3);
  conv.initialize(rng);
  for (double& b : conv.bias().values()) b = rng.uniform(-1, 1);
  const auto check = check_layer(conv, random_tensor({2, 3, 5, 5}, rng), Mode::Train, 1e-5, rng);
  INFO(check.worst);
  CHECK(check.max_error <= 1e-6);
}

TEST_CASE("dense") {
  Rng rng(0);
  auto ctx = train_ctx(rng);
  SUBCASE("identity") {
    Dense d(3, 3);
    d.weight().fill(0.0);
    d.bias().fill(0.0);
    for (std::size_t i = 0; i < 3; ++i) d.weight().at(i, i) = 1.0;
    const Tensor x = random_tensor({2, 3}, rng);
    CHECK(d.forward(x, ctx) == x);
  }
  SUBCASE("affine") {
    Dense d(1, 1);
    d.weight()[0] = 2.0;
    d.bias()[0] = 1.0;
    CHECK(d.forward(Tensor({1, 1}, 3.0), ctx)[0] == 7.0);
  }
  SUBCASE("gradients") {
    Dense d(6, 5);
    d.initialize(rng);
    for (double& b : d.bias().values()) b = rng.uniform(-1, 1);
    const auto check = check_layer(d, random_tensor({4, 6}, rng), Mode::Train, 1e-5, rng);
    INFO(check.worst);
    CHECK(check.max_error <= 1e-6);
  }
  SUBCASE("shape error") {
    Dense d(6, 5);
    CHECK_THROWS_AS(d.forward(Tensor({4, 5}), ctx), ShapeError);
  }
}

TEST_CASE("batchnorm") {
  Rng rng(7);
  auto ctx = train_ctx(rng);
  SUBCASE("constant channels normalize to zero") {
    BatchNorm2d bn(2);
    Tensor x({3, 2, 2, 2});
    for (std::size_t n = 0; n < 3; ++n)
      for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < 4; ++i) x[(n * 2 + c) * 4 + i] = c == 0 ? 5.0 : -2.0;
    const Tensor y = bn.forward(x, ctx);
    for (double v : y.values()) CHECK(v == 0.0);
  }
  SUBCASE("scale and shift on normalized input") {
    BatchNorm2d bn(1, 1e-300);
    bn.scale().fill(2.0);
    bn.shift().fill(1.0);
    // Zero mean, unit biased variance.
    Tensor x({2, 1, 1, 2}, std::vector<double>{1.0, -1.0, 1.0, -1.0});
    const Tensor y = bn.forward(x, ctx);
    for (std::size_t i = 0; i < 4; ++i) CHECK(y[i] == doctest::Approx(2.0 * x[i] + 1.0).epsilon(1e-15));
  }
  SUBCASE("running statistics use the unbiased variance") {
    BatchNorm2d bn(1);
    Tensor x({2, 1, 1, 2}, std::vector<double>{1.0, 2.0, 3.0, 6.0});
    bn.forward(x, ctx);
    // mean 3, unbiased variance 14/3
    CHECK(bn.running_mean()[0] == doctest::Approx(0.1 * 3.0));
    CHECK(bn.running_var()[0] == doctest::Approx(0.9 + 0.1 * 14.0 / 3.0));
  }
  SUBCASE("eval mode uses running statistics without side effects") {
    BatchNorm2d bn(2);
    bn.forward(random_tensor({4, 2, 3, 3}, rng), ctx);
    const Tensor mean = bn.running_mean(), var = bn.running_var();
    ForwardContext eval{Mode::Eval, nullptr};
    const Tensor x = random_tensor({1, 2, 3, 3}, rng);
    const Tensor a = bn.forward(x, eval);
    const Tensor b = bn.forward(x, eval);
    CHECK(a == b);
    CHECK(bn.running_mean() == mean);
    CHECK(bn.running_var() == var);
    CHECK(a.at(0, 1, 2, 0) == doctest::Approx((x.at(0, 1, 2, 0) - mean[1]) / std::sqrt(var[1] + 1e-5)));
  }
  SUBCASE("gradients") {
    BatchNorm2d bn(3);
    for (double& g : bn.scale().values()) g = rng.uniform(0.5, 1.5);
    for (double& b : bn.shift().values()) b = rng.uniform(-0.5, 0.5);
    const auto check = check_layer(bn, random_tensor({4, 3, 2, 2}, rng), Mode::Train, 1e-5, rng);
    INFO(check.worst);
    CHECK(check.max_error <= 1e-5);
  }
  SUBCASE("single-sample batch in train mode") {
    BatchNorm2d bn(1);
    CHECK_THROWS_AS(bn.forward(Tensor({1, 1, 2, 2}), ctx), UsageError);
  }
}

TEST_CASE("maxpool") {
  Rng rng(9);
  auto ctx = train_ctx(rng);
  SUBCASE("2x2") {
    MaxPool2d pool;
    CHECK(pool.forward(Tensor({1, 1, 2, 2}, std::vector<double>{1, 2, 3, 4}), ctx)[0] == 4.0);
  }
  SUBCASE("ties route to the first element") {
    MaxPool2d pool;
    pool.forward(Tensor({1, 1, 4, 4}, 1.0), ctx);
    const Tensor g = pool.backward(Tensor({1, 1, 2, 2}, 1.0));
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) CHECK(g.at(0, 0, i, j) == ((i % 2 == 0 && j % 2 == 0) ? 1.0 : 0.0));
  }
  SUBCASE("nested-loop oracle") {
    MaxPool2d pool;
    const Tensor x = random_tensor({2, 2, 6, 6}, rng);
    const Tensor y = pool.forward(x, ctx);
    const Tensor gy = random_tensor({2, 2, 3, 3}, rng);
    const Tensor gx = pool.backward(gy);
    Tensor ey({2, 2, 3, 3}), egx({2, 2, 6, 6});
    for (std::size_t n = 0; n < 2; ++n)
      for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < 3; ++i)
          for (std::size_t j = 0; j < 3; ++j) {
            std::size_t bi = 2 * i, bj = 2 * j;
            for (std::size_t a = 0; a < 2; ++a)
              for (std::size_t b = 0; b < 2; ++b)
                if (x.at(n, c, 2 * i + a, 2 * j + b) > x.at(n, c, bi, bj)) bi = 2 * i + a, bj = 2 * j + b;
            ey.at(n, c, i, j) = x.at(n, c, bi, bj);
            egx.at(n, c, bi, bj) += gy.at(n, c, i, j);
          }
    CHECK(y == ey);
    CHECK(gx == egx);
  }
  SUBCASE("odd extents round up") {
    MaxPool2d pool;
    const Tensor y = pool.forward(Tensor({1, 1, 7, 7}, std::vector<double>(49, -3.0)), ctx);
    CHECK(y.shape() == Shape{1, 1, 4, 4});
    CHECK(y.at(0, 0, 3, 3) == -3.0);
  }
}

TEST_CASE("dropout") {
  Rng rng(13);
  auto ctx = train_ctx(rng);
  SUBCASE("p = 0 is the identity") {
    Dropout d(0.0);
    const Tensor x = random_tensor({3, 4}, rng);
    CHECK(d.forward(x, ctx) == x);
    CHECK(d.backward(x) == x);
  }
  SUBCASE("eval mode is the identity") {
    Dropout d(0.5);
    ForwardContext eval{Mode::Eval, nullptr};
    const Tensor x = random_tensor({3, 4}, rng);
    CHECK(d.forward(x, eval) == x);
    CHECK(d.backward(x) == x);
  }
  SUBCASE("keep fraction and scaling") {
    Dropout d(0.25);
    const Tensor y = d.forward(Tensor({1000000}, 1.0), ctx);
    std::size_t kept = 0;
    for (double v : y.values()) {
      if (v != 0.0) {
        ++kept;
        CHECK(v == 1.0 / 0.75);
      }
    }
    const double frac = static_cast<double>(kept) / 1e6;
    CHECK(frac >= 0.7485);
    CHECK(frac <= 0.7515);
  }
  SUBCASE("backward applies the same mask") {
    Dropout d(0.5);
    const Tensor y = d.forward(Tensor({100}, 1.0), ctx);
    CHECK(d.backward(Tensor({100}, 1.0)) == y);
  }
  SUBCASE("frozen mask repeats") {
    Dropout d(0.5);
    const Tensor a = d.forward(Tensor({64}, 1.0), ctx);
    d.set_frozen(true);
    CHECK(d.forward(Tensor({64}, 1.0), ctx) == a);
  }
  CHECK_THROWS_AS(Dropout(1.0), ArgumentError);
  CHECK_THROWS_AS(Dropout(-0.1), ArgumentError);
}

TEST_CASE("activation layer gradients for every kind") {
  for (Tag tag : act::kAllTags) {
    Rng rng(17);
    Activation layer(tag);
    // Inputs kept away from 0 so the kinked kinds are differentiable at every probe.
    Tensor x = random_tensor({2, 3, 4}, rng, 0.05, 3.0);
    for (std::size_t i = 0; i < x.size(); i += 2) x[i] = -x[i];
    const auto check = check_layer(layer, x, Mode::Train, 1e-5, rng);
    INFO(act::tag_name(tag) << " " << check.worst);
    CHECK(check.max_error <= 1e-6);
    // Eval-mode backward gives the same gradient.
    ForwardContext train{Mode::Train, &rng}, eval{Mode::Eval, nullptr};
    const Tensor g = random_tensor(x.shape(), rng);
    layer.forward(x, train);
    const Tensor a = layer.backward(g);
    layer.forward(x, eval);
    CHECK(layer.backward(g) == a);
  }
}

TEST_CASE("softmax cross-entropy") {
  SUBCASE("uniform logits") {
    const std::vector<std::uint8_t> labels{3, 7};
    const auto r = softmax_cross_entropy(Tensor({2, 10}, 0.5), labels);
    CHECK(r.loss == doctest::Approx(std::log(10.0)).epsilon(1e-15));
  }
  SUBCASE("large logit is stable") {
    Tensor logits({1, 10}, 0.0);
    logits[4] = 1000.0;
    const std::vector<std::uint8_t> labels{4};
    const auto r = softmax_cross_entropy(logits, labels);
    CHECK(std::isfinite(r.loss));
    CHECK(r.loss == doctest::Approx(0.0));
    CHECK(r.grad_logits.all_finite());
    logits[4] = -1000.0;
    const auto wrong = softmax_cross_entropy(logits, labels);
    CHECK(wrong.loss == doctest::Approx(1000.0 + std::log(9.0)));
  }
  SUBCASE("gradient") {
    Rng rng(19);
    Tensor logits = random_tensor({3, 5}, rng, -2, 2);
    const std::vector<std::uint8_t> labels{0, 4, 2};
    const auto r = softmax_cross_entropy(logits, labels);
    double worst = 0.0;
    const double h = 1e-5;
    for (std::size_t i = 0; i < logits.size(); ++i) {
      const double s = logits[i];
      logits[i] = s + h;
      const double up = softmax_cross_entropy(logits, labels).loss;
      logits[i] = s - h;
      const double down = softmax_cross_entropy(logits, labels).loss;
      logits[i] = s;
      worst = std::max(worst, std::fabs((up - down) / (2 * h) - r.grad_logits[i]));
    }
    CHECK(worst <= 1e-7);
    const auto per = per_sample_cross_entropy(logits, labels);
    CHECK((per[0] + per[1] + per[2]) / 3.0 == doctest::Approx(r.loss).epsilon(1e-15));
  }
  SUBCASE("label out of range") {
    const std::vector<std::uint8_t> labels{10};
    CHECK_THROWS_AS(softmax_cross_entropy(Tensor({1, 10}), labels), ArgumentError);
  }
}

TEST_CASE("l2 penalty") {
  Tensor w({1}, 3.0), gw({1}, 0.0), b({1}, 5.0), gb({1}, 0.0);
  std::vector<Param> params{{"w", &w, &gw, ParamRole::Weight}, {"b", &b, &gb, ParamRole::Bias}};
  SUBCASE("factor 0") {
    const auto r = l2_penalty(params, 0.0);
    CHECK(r.loss == 0.0);
    for (const auto& g : r.grads) CHECK(g[0] == 0.0);
  }
  SUBCASE("single weight") {
    const auto r = l2_penalty(params, 1e-4);
    CHECK(r.loss == doctest::Approx(9e-4).epsilon(1e-14));
    CHECK(r.grads[0][0] == doctest::Approx(6e-4).epsilon(1e-14));
    CHECK(r.grads[1][0] == 0.0);
    CHECK(add_l2_gradients(params, 1e-4) == doctest::Approx(9e-4).epsilon(1e-14));
    CHECK(gw[0] == doctest::Approx(6e-4).epsilon(1e-14));
    CHECK(gb[0] == 0.0);
  }
  SUBCASE("network enumeration") {
    Network net = build_depth_sweep_cnn(2, Tag::CoLU, {.width_mult = 0.25, .seed = 3});
    double brute = 0.0;
    for (std::size_t i = 0; i < net.size(); ++i) {
      if (auto* c = dynamic_cast<Conv2d*>(&net.layer(i)))
        for (double v : c->weight().values()) brute += v * v;
      if (auto* d = dynamic_cast<Dense*>(&net.layer(i)))
        for (double v : d->weight().values()) brute += v * v;
    }
    CHECK(l2_penalty(net.parameters(), 1e-4).loss == doctest::Approx(1e-4 * brute).epsilon(1e-13));
  }
}

TEST_CASE("network plumbing") {
  Rng rng(23);
  SUBCASE("empty network is the identity") {
    Network net;
    const Tensor x = random_tensor({2, 3}, rng);
    CHECK(net.forward(x) == x);
    CHECK(net.backward(x) == x);
  }
  SUBCASE("backward before forward") {
    Network net;
    net.emplace<Dense>(2, 2);
    CHECK_THROWS_AS(net.backward(Tensor({1, 2})), UsageError);
    Dense d(2, 2);
    CHECK_THROWS_AS(d.backward(Tensor({1, 2})), UsageError);
  }
  SUBCASE("residual group around a zero conv") {
    std::vector<LayerPtr> inner;
    auto conv = std::make_unique<Conv2d>(3, 3);
    conv->weight().fill(0.0);
    conv->bias().fill(0.0);
    inner.push_back(std::move(conv));
    Network net;
    net.add(std::make_unique<ResidualGroup>(std::move(inner)));
    const Tensor x = random_tensor({2, 3, 4, 4}, rng);
    CHECK(net.forward(x) == x);
  }
  SUBCASE("residual group gradients") {
    std::vector<LayerPtr> inner;
    auto conv = std::make_unique<Conv2d>(2, 2);
    conv->initialize(rng);
    inner.push_back(std::move(conv));
    inner.push_back(std::make_unique<Activation>(Tag::CoLU));
    ResidualGroup group(std::move(inner));
    const auto check = check_layer(group, random_tensor({2, 2, 3, 3}, rng), Mode::Train, 1e-5, rng);
    INFO(check.worst);
    CHECK(check.max_error <= 1e-6);
  }
  SUBCASE("eval forward is deterministic and side-effect free") {
    Network net = build_depth_sweep_cnn(3, Tag::Mish, {.width_mult = 0.25, .seed = 1});
    net.forward(random_tensor({4, 1, 28, 28}, rng, 0, 1));
    std::vector<Tensor> before;
    for (Tensor* b : net.buffers()) before.push_back(*b);
    net.set_mode(Mode::Eval);
    const Tensor x = random_tensor({2, 1, 28, 28}, rng, 0, 1);
    const Tensor a = net.forward(x);
    CHECK(net.forward(x) == a);
    const auto bufs = net.buffers();
    for (std::size_t i = 0; i < bufs.size(); ++i) CHECK(*bufs[i] == before[i]);
  }
}

TEST_CASE("depth-sweep builder") {
  CHECK(build_depth_sweep_cnn(1, Tag::ReLU).layer_kinds() ==
        kinds_of({LayerKind::Conv2d, LayerKind::BatchNorm2d, LayerKind::Activation, LayerKind::MaxPool2d,
                  LayerKind::Dropout, LayerKind::Flatten, LayerKind::Dense}));
  const Network ten = build_depth_sweep_cnn(10, Tag::ReLU);
  CHECK(ten.count(LayerKind::Conv2d) == 10);
  CHECK(ten.count(LayerKind::MaxPool2d) == 4);
  CHECK(ten.count(LayerKind::Dropout) == 4);
  CHECK(ten.count(LayerKind::BatchNorm2d) == 10);

  Network forty = build_depth_sweep_cnn(40, Tag::CoLU, {.seed = 2});
  forty.set_mode(Mode::Eval);
  CHECK(forty.count(LayerKind::Conv2d) == 40);
  CHECK(forty.forward(Tensor({1, 1, 28, 28}, 0.5)).shape() == Shape{1, 10});

  CHECK_THROWS_AS(build_depth_sweep_cnn(0, Tag::CoLU), ArgumentError);
}

TEST_CASE("small_cnn8") {
  Network net = build_small_cnn8(Tag::CoLU, {.seed = 4});
  CHECK(net.count(LayerKind::Conv2d) == 8);
  Rng rng(29);
  CHECK(net.forward(random_tensor({64, 1, 28, 28}, rng, 0, 1)).shape() == Shape{64, 10});

  // Widths 32, 64, then 128 x 6; 28 -> 14 -> 7 -> 4 -> 2 after four pools.
  const std::size_t widths[] = {1, 32, 64, 128, 128, 128, 128, 128, 128};
  std::size_t expected = 0;
  for (std::size_t i = 1; i <= 8; ++i) expected += widths[i - 1] * widths[i] * 9 + widths[i] + 2 * widths[i];
  expected += 128 * 2 * 2 * 10 + 10;
  CHECK(expected == 837450);
  CHECK(net.parameter_count() == 837450);
  CHECK(build_small_cnn8(Tag::ReLU, {.seed = 99}).parameter_count() == 837450);
}

TEST_CASE("vgg13 and resnet9 structure") {
  Rng rng(31);
  Network vgg = build_vgg13(Tag::CoLU, {.in_channels = 1, .image_size = 32, .width_mult = 0.125, .seed = 1});
  CHECK(vgg.count(LayerKind::Conv2d) == 10);
  CHECK(vgg.count(LayerKind::Dense) == 3);
  CHECK(vgg.count(LayerKind::MaxPool2d) == 5);
  CHECK(vgg.forward(random_tensor({2, 1, 32, 32}, rng, 0, 1)).shape() == Shape{2, 10});

  Network res = build_resnet9(Tag::CoLU, {.in_channels = 3, .image_size = 32, .width_mult = 0.125, .seed = 1});
  CHECK(res.count(LayerKind::ResidualGroup) == 2);
  CHECK(res.count(LayerKind::Conv2d) == 8);
  CHECK(res.count(LayerKind::Dense) == 1);
  CHECK(res.forward(random_tensor({2, 3, 32, 32}, rng, 0, 1)).shape() == Shape{2, 10});
}

TEST_CASE("network gradient check, every activation") {
  for (Tag tag : act::kAllTags) {
    Network net = build_depth_sweep_cnn(2, tag, {.image_size = 8, .width_mult = 0.125, .seed = 5});
    Rng rng(37);
    const Tensor x = random_tensor({2, 1, 8, 8}, rng, 0, 1);
    net.forward(x);
    net.freeze_dropout(true);
    const auto check = testing::check_network(net, x, {3, 8}, 1e-5, rng);
    INFO(act::tag_name(tag) << " " << check.worst);
    CHECK(check.max_error <= 1e-4);
  }
}

TEST_CASE("serialization round trip") {
  Network a = build_depth_sweep_cnn(2, Tag::CoLU, {.width_mult = 0.25, .seed = 1});
  Rng rng(41);
  a.forward(random_tensor({4, 1, 28, 28}, rng, 0, 1));  // populate running statistics
  std::stringstream buf;
  save_network(a, buf);

  Network b = build_depth_sweep_cnn(2, Tag::CoLU, {.width_mult = 0.25, .seed = 2});
  load_network(b, buf);
  a.set_mode(Mode::Eval);
  b.set_mode(Mode::Eval);
  const Tensor x = random_tensor({3, 1, 28, 28}, rng, 0, 1);
  CHECK(a.forward(x) == b.forward(x));

  SUBCASE("bad magic") {
    std::stringstream junk("NOTATENSORFILE");
    CHECK_THROWS_AS(load_network(b, junk), FormatError);
  }
  SUBCASE("shape mismatch") {
    std::stringstream again;
    save_network(a, again);
    Network c = build_depth_sweep_cnn(2, Tag::CoLU, {.width_mult = 0.5, .seed = 1});
    CHECK_THROWS_AS(load_network(c, again), FormatError);
  }
  SUBCASE("truncated") {
    std::stringstream again;
    save_network(a, again);
    std::string bytes = again.str();
    bytes.resize(bytes.size() - 8);
    std::stringstream cut(bytes);
    CHECK_THROWS_AS(load_network(b, cut), FormatError);
  }
}
