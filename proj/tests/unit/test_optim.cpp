#include "doctest.h"

#include <cmath>

#include "medie/optim.hpp"

using namespace medie;

TEST_SUITE("optim") {

TEST_CASE("first AdamW steps by hand") {
  const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8, wd = 0.01;
  AdamW opt(lr, b1, b2, eps, wd);
  AdamState st;
  std::vector<double> w{1.0, -2.0};
  const std::vector<double> g1{0.5, 0.0}, g2{-1.0, 2.0};

  opt.begin_step();
  opt.update(w, g1, st);
  // Step 1: m_hat = g, v_hat = g^2, so the move is lr * sign(g) (or 0) plus decay.
  CHECK(w[0] == doctest::Approx(1.0 - lr * (0.5 / (0.5 + eps) + wd * 1.0)));
  CHECK(w[1] == doctest::Approx(-2.0 - lr * (wd * -2.0)));

  const double w0 = w[0], w1 = w[1];
  opt.begin_step();
  opt.update(w, g2, st);
  const double m0 = 0.9 * 0.05 + 0.1 * -1.0, v0 = 0.999 * 0.00025 + 0.001 * 1.0;
  const double m1 = 0.1 * 2.0, v1 = 0.001 * 4.0;
  const double c1 = 1 - b1 * b1, c2 = 1 - b2 * b2;
  CHECK(w[0] == doctest::Approx(w0 - lr * ((m0 / c1) / (std::sqrt(v0 / c2) + eps) + wd * w0)).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(w1 - lr * ((m1 / c1) / (std::sqrt(v1 / c2) + eps) + wd * w1)).epsilon(1e-12));
  CHECK(opt.step() == 2);
}

TEST_CASE("decay can be disabled per group") {
  AdamW opt(0.1, 0.9, 0.999, 1e-8, 0.5);
  AdamState st;
  std::vector<double> w{3.0};
  const std::vector<double> g{0.0};
  opt.begin_step();
  opt.update(w, g, st, false);
  CHECK(w[0] == 3.0);
  opt.begin_step();
  opt.update(w, g, st, true);
  CHECK(w[0] == doctest::Approx(3.0 - 0.1 * 0.5 * 3.0));
}

TEST_CASE("state grows with the group") {
  AdamW opt(0.1, 0.9, 0.999, 1e-8, 0.0);
  AdamState st;
  std::vector<double> w{0.0};
  opt.begin_step();
  opt.update(w, std::vector<double>{1.0}, st);
  w.push_back(0.0);
  opt.begin_step();
  opt.update(w, std::vector<double>{1.0, 1.0}, st);
  CHECK(st.m.size() == 2);
  CHECK(st.m[1] == doctest::Approx(0.1));
}

TEST_CASE("global norm clipping") {
  std::vector<double> a{3.0, 0.0}, b{4.0};
  const std::span<double> groups[] = {a, b};
  CHECK(clip_global_norm(groups, 1.0) == doctest::Approx(5.0));
  CHECK(a[0] == doctest::Approx(0.6));
  CHECK(b[0] == doctest::Approx(0.8));
  // Below the bound nothing changes.
  CHECK(clip_global_norm(groups, 2.0) == doctest::Approx(1.0));
  CHECK(a[0] == doctest::Approx(0.6));
  std::vector<double> z{0.0};
  const std::span<double> zg[] = {z};
  CHECK(clip_global_norm(zg, 1.0) == 0.0);
}

TEST_CASE("config checks") {
  CHECK_NOTHROW(TrainConfig{}.check());
  CHECK_NOTHROW(TrainConfig::span_defaults().check());
  const auto bad = [](auto mutate) {
    TrainConfig c;
    mutate(c);
    return c;
  };
  CHECK_THROWS(bad([](TrainConfig& c) { c.learning_rate = 0; }).check());
  CHECK_THROWS(bad([](TrainConfig& c) { c.batch_size = 0; }).check());
  CHECK_THROWS(bad([](TrainConfig& c) { c.patience = 0; }).check());
  CHECK_THROWS(bad([](TrainConfig& c) { c.beta2 = 1.0; }).check());
  CHECK_THROWS(bad([](TrainConfig& c) { c.l2_penalty = -1; }).check());
  CHECK_THROWS(bad([](TrainConfig& c) { c.grad_clip_l2 = 0; }).check());
}

TEST_CASE("defaults") {
  const TrainConfig c;
  CHECK(c.learning_rate == 1e-3);
  CHECK(c.batch_size == 48);
  CHECK(c.max_epochs == 50);
  CHECK(c.grad_clip_l2 == 5.0);
  CHECK(c.l2_penalty == 1e-6);
  CHECK(c.patience == 5);
}

}
