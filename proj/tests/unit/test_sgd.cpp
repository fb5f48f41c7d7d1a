#include <doctest.h>

#include "tce/error.hpp"
#include "tce/sgd.hpp"

using namespace tce;

TEST_CASE("plain SGD without momentum or decay") {
  Matrix p{{1.0, -2.0}};
  const Matrix g{{0.5, 0.25}};
  Sgd sgd({0.1, 0.0, 0.0});
  sgd.step({{&p, &g, true}});
  CHECK(p(0, 0) == doctest::Approx(0.95));
  CHECK(p(0, 1) == doctest::Approx(-2.025));
}

TEST_CASE("zero gradient and zero decay leave parameters unchanged") {
  Matrix p{{3.0, 4.0}};
  const Matrix g(1, 2);
  Sgd sgd({0.1, 0.9, 0.0});
  for (int i = 0; i < 5; ++i) sgd.step({{&p, &g, true}});
  CHECK(p == Matrix{{3.0, 4.0}});
}

TEST_CASE("Nesterov recurrence over two steps on a constant gradient") {
  // v1 = g, p1 = p0 - lr (g + 0.9 g) = p0 - 1.9 lr g
  // v2 = 0.9 g + g = 1.9 g, p2 = p1 - lr (g + 0.9 * 1.9 g) = p1 - 2.71 lr g
  const double lr = 0.1, g = 2.0;
  Matrix p{{1.0}};
  const Matrix grad{{g}};
  Sgd sgd({lr, 0.9, 0.0});
  sgd.step({{&p, &grad, true}});
  CHECK(sgd.velocity()[0](0, 0) == doctest::Approx(g));
  CHECK(p(0, 0) == doctest::Approx(1.0 - 1.9 * lr * g));
  sgd.step({{&p, &grad, true}});
  CHECK(sgd.velocity()[0](0, 0) == doctest::Approx(1.9 * g));
  CHECK(p(0, 0) == doctest::Approx(1.0 - 1.9 * lr * g - 2.71 * lr * g));
}

TEST_CASE("weight decay enters the gradient and skips undecayed parameters") {
  Matrix w{{2.0}};
  Matrix b{{2.0}};
  const Matrix zero(1, 1);
  Sgd sgd({0.5, 0.0, 0.1});
  sgd.step({{&w, &zero, true}, {&b, &zero, false}});
  CHECK(w(0, 0) == doctest::Approx(2.0 - 0.5 * 0.1 * 2.0));
  CHECK(b(0, 0) == 2.0);
}

TEST_CASE("sgd_step decays weights but not biases") {
  Mlp model({DenseLayer{Matrix{{1.0}}, Matrix{{1.0}}}});
  MlpGradients grads{{Matrix(1, 1)}, {Matrix(1, 1)}};
  Sgd sgd({1.0, 0.0, 0.5});
  sgd_step(sgd, model, grads);
  CHECK(model.layers()[0].weight(0, 0) == doctest::Approx(0.5));
  CHECK(model.layers()[0].bias(0, 0) == 1.0);
}

TEST_CASE("optimizer contract checks") {
  CHECK_THROWS_AS(Sgd({0.0, 0.9, 0.0}), ContractViolation);
  CHECK_THROWS_AS(Sgd({0.1, 1.0, 0.0}), ContractViolation);
  CHECK_THROWS_AS(Sgd({0.1, 0.5, -1.0}), ContractViolation);
  Matrix p(1, 2);
  const Matrix g(2, 1);
  Sgd sgd({0.1, 0.0, 0.0});
  CHECK_THROWS_AS(sgd.step({{&p, &g, true}}), ContractViolation);
}

TEST_CASE("step learning-rate schedule") {
  const LrSchedule full{0.1, {128, 192}, 10.0};
  CHECK(full.at(0) == doctest::Approx(0.1));
  CHECK(full.at(127) == doctest::Approx(0.1));
  CHECK(full.at(128) == doctest::Approx(0.01));
  CHECK(full.at(191) == doctest::Approx(0.01));
  CHECK(full.at(192) == doctest::Approx(0.001));
  CHECK(full.at(255) == doctest::Approx(0.001));

  const LrSchedule desk{0.1, {30, 45}, 10.0};
  CHECK(desk.at(29) == doctest::Approx(0.1));
  CHECK(desk.at(30) == doctest::Approx(0.01));
  CHECK(desk.at(60) == doctest::Approx(0.001));
  CHECK_THROWS_AS(LrSchedule({0.0, {}, 10.0}).validate(), ContractViolation);
}
