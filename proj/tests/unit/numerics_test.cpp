// Copyright 2026 The PyroGrid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "pyrogrid/error.hpp"
#include "pyrogrid/numerics/autodiff.hpp"
#include "pyrogrid/numerics/checkpoint.hpp"
#include "pyrogrid/numerics/optim.hpp"
#include "pyrogrid/numerics/random.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

using namespace pyrogrid;
using namespace pyrogrid::numerics;
using pyrogrid::testing::gradcheck;
using pyrogrid::testing::random_tensor;
namespace oracle = pyrogrid::testing::oracle;

TEST_CASE("tensor construction validates shape and finiteness") {
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), ShapeError);
  CHECK_THROWS_AS(Tensor({0, 2}), ShapeError);
  CHECK_THROWS_AS(Tensor::checked({2}, {1.0, std::nan("")}), NumericError);
  CHECK_THROWS_AS(Tensor::checked({1}, {INFINITY}), NumericError);
  const Tensor t = Tensor::checked({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(t.at(1, 2) == 6.0);
  CHECK(t.reshaped({3, 2}).at(2, 1) == 6.0);
  CHECK_THROWS_AS(t.reshaped({4}), ShapeError);
}

TEST_CASE("conv2d examples") {
  Tape tape;
  SUBCASE("1x1 kernel scales pointwise") {
    Var x = tape.constant(Tensor::filled({1, 3, 3}, 1.0));
    Var k = tape.constant(Tensor({1, 1, 1, 1}, {2.0}));
    const Tensor y = conv2d(x, k, 1, 0).value();
    CHECK(y.shape() == Shape{1, 3, 3});
    for (double v : y.data()) CHECK(v == 2.0);
  }
  SUBCASE("2x2 ones kernel sums entries") {
    Var x = tape.constant(Tensor({1, 2, 2}, {1, 2, 3, 4}));
    Var k = tape.constant(Tensor::filled({1, 1, 2, 2}, 1.0));
    const Tensor y = conv2d(x, k, 1, 0).value();
    CHECK(y.shape() == Shape{1, 1, 1});
    CHECK(y[0] == 10.0);
  }
  SUBCASE("matches direct summation") {
    Rng rng(7);
    for (int stride : {1, 2}) {
      for (int pad : {0, 1, 2}) {
        const Tensor in = random_tensor(rng, {2, 5, 5});
        const Tensor k = random_tensor(rng, {3, 2, 3, 3});
        const Tensor got = conv2d(tape.constant(in), tape.constant(k), stride, pad).value();
        const Tensor want = oracle::conv2d(in, k, stride, pad);
        REQUIRE(got.shape() == want.shape());
        CHECK(max_abs_diff(got, want) < 1e-12);
      }
    }
  }
  SUBCASE("shape errors name the dimensions") {
    Var x = tape.constant(Tensor({2, 4, 4}));
    Var k = tape.constant(Tensor({1, 3, 3, 3}));
    CHECK_THROWS_AS(conv2d(x, k, 1, 0), ShapeError);
    Var big = tape.constant(Tensor({1, 2, 5, 5}));
    CHECK_THROWS_AS(conv2d(x, big, 1, 0), ShapeError);
  }
}

TEST_CASE("conv_transpose2d examples") {
  Tape tape;
  SUBCASE("single pixel stamps the kernel") {
    Var x = tape.constant(Tensor({1, 1, 1}, {1.0}));
    Var k = tape.constant(Tensor({1, 1, 2, 2}, {1, 2, 3, 4}));
    const Tensor y = conv_transpose2d(x, k, 1, 0).value();
    CHECK(y == Tensor({1, 2, 2}, {1, 2, 3, 4}));
  }
  SUBCASE("adjoint of conv2d") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      for (int stride : {1, 2}) {
        for (int pad : {0, 1}) {
          const Tensor kernel = random_tensor(rng, {1, 1, 3, 3});
          const Tensor a = random_tensor(rng, {1, 5, 5});
          const Tensor conv = conv2d_forward(a, kernel, stride, pad);
          const Tensor b = random_tensor(rng, conv.shape());
          const Tensor back = conv_transpose2d_forward(b, kernel, stride, pad);
          REQUIRE(back.shape() == a.shape());
          CHECK(std::abs(dot(conv, b) - dot(a, back)) < 1e-10);
        }
      }
    }
  }
  SUBCASE("stride-2 upsampling stamps non-overlapping blocks") {
    Rng rng(3);
    const Tensor in = random_tensor(rng, {1, 2, 2});
    const Tensor k = random_tensor(rng, {1, 1, 2, 2});
    const Tensor got = conv_transpose2d(tape.constant(in), tape.constant(k), 2, 0).value();
    CHECK(got.shape() == Shape{1, 4, 4});
    CHECK(max_abs_diff(got, oracle::conv_transpose2d(in, k, 2, 0)) < 1e-15);
    CHECK(got.at(0, 3, 2) == in.at(0, 1, 1) * k[2]);
  }
  SUBCASE("matches brute-force scatter with padding and channels") {
    Rng rng(5);
    const Tensor in = random_tensor(rng, {3, 3, 3});
    const Tensor k = random_tensor(rng, {3, 2, 4, 4});
    const Tensor got = conv_transpose2d_forward(in, k, 2, 1);
    CHECK(got.shape() == Shape{2, 6, 6});
    CHECK(max_abs_diff(got, oracle::conv_transpose2d(in, k, 2, 1)) < 1e-12);
  }
}

namespace {
struct GruFixture {
  std::vector<Parameter> params;
  GruFixture(Rng& rng, std::size_t d_h, std::size_t d_x) {
    const char* names[] = {"w_z", "u_z", "b_z", "w_r", "u_r", "b_r", "w_h", "u_h", "b_h"};
    for (int g = 0; g < 3; ++g) {
      params.emplace_back(names[3 * g], random_tensor(rng, {d_h, d_x}));
      params.emplace_back(names[3 * g + 1], random_tensor(rng, {d_h, d_h}));
      params.emplace_back(names[3 * g + 2], random_tensor(rng, {d_h}));
    }
  }
  GruWeights vars(Tape& t) {
    return {t.parameter(params[0]), t.parameter(params[1]), t.parameter(params[2]),
            t.parameter(params[3]), t.parameter(params[4]), t.parameter(params[5]),
            t.parameter(params[6]), t.parameter(params[7]), t.parameter(params[8])};
  }
  std::vector<Parameter*> ptrs() {
    std::vector<Parameter*> out;
    for (auto& p : params) out.push_back(&p);
    return out;
  }
};
}  // namespace

TEST_CASE("gru_cell") {
  Rng rng(21);
  SUBCASE("zero parameters keep a zero state") {
    Tape tape;
    GruFixture f(rng, 4, 3);
    for (auto& p : f.params) p.value.fill(0.0);
    Var h = tape.constant(Tensor({4}));
    Var x = tape.constant(random_tensor(rng, {3}));
    const Tensor out = gru_cell(h, x, f.vars(tape)).value();
    for (double v : out.data()) CHECK(v == 0.0);
  }
  SUBCASE("matches the scalar gate equations") {
    Tape tape;
    GruFixture f(rng, 4, 3);
    oracle::ScalarGru ref;
    ref.d_h = 4;
    ref.d_x = 3;
    auto vec = [](const Parameter& p) { return std::vector<double>(p.value.data().begin(), p.value.data().end()); };
    ref.wz = vec(f.params[0]); ref.uz = vec(f.params[1]); ref.bz = vec(f.params[2]);
    ref.wr = vec(f.params[3]); ref.ur = vec(f.params[4]); ref.br = vec(f.params[5]);
    ref.wh = vec(f.params[6]); ref.uh = vec(f.params[7]); ref.bh = vec(f.params[8]);
    const Tensor h0 = random_tensor(rng, {4});
    const Tensor x0 = random_tensor(rng, {3});
    const Tensor got = gru_cell(tape.constant(h0), tape.constant(x0), f.vars(tape)).value();
    const auto want = ref.step({h0.data().begin(), h0.data().end()}, {x0.data().begin(), x0.data().end()});
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(got[i] - want[i]) < 1e-12);
  }
  SUBCASE("gradients match finite differences for parameters and inputs") {
    GruFixture f(rng, 4, 3);
    Parameter h("h", random_tensor(rng, {4}));
    Parameter x("x", random_tensor(rng, {3}));
    auto params = f.ptrs();
    params.push_back(&h);
    params.push_back(&x);
    const auto r = gradcheck(
        [&](Tape& t) { return sum(gru_cell(t.parameter(h), t.parameter(x), f.vars(t))); }, params);
    CHECK_MESSAGE(r.worst_relative_error < 1e-4, r.worst_param);
  }
}

TEST_CASE("pointwise ops") {
  Tape tape;
  CHECK(sigmoid(tape.constant(Tensor::scalar(0.0))).value().item() == 0.5);
  CHECK(leaky_relu(tape.constant(Tensor::scalar(-1.0)), 0.01).value().item() == doctest::Approx(-0.01).epsilon(1e-15));
  CHECK(leaky_relu(tape.constant(Tensor::scalar(2.0))).value().item() == 2.0);

  Rng rng(2);
  Parameter p("p", random_tensor(rng, {16}, -3.0, 3.0));
  {
    Tape t;
    t.backward(sum(tanh(t.parameter(p))));
  }
  for (std::size_t i = 0; i < p.value.size(); ++i) {
    const double th = std::tanh(p.value[i]);
    CHECK(std::abs(p.grad[i] - (1.0 - th * th)) < 1e-12);
  }
  const auto r = gradcheck([&](Tape& t) { return sum(mul(sigmoid(t.parameter(p)), leaky_relu(t.parameter(p)))); },
                           std::vector<Parameter*>{&p});
  CHECK(r.worst_relative_error < 1e-4);
}

TEST_CASE("backward") {
  Rng rng(8);
  Parameter p("p", random_tensor(rng, {2, 3}));
  SUBCASE("sum gives ones") {
    Tape t;
    t.backward(sum(t.parameter(p)));
    for (double g : p.grad.data()) CHECK(g == 1.0);
  }
  SUBCASE("half squared norm gives the value") {
    Tape t;
    Var v = t.parameter(p);
    t.backward(scale(sum(mul(v, v)), 0.5));
    CHECK(max_abs_diff(p.grad, p.value) == 0.0);
  }
  SUBCASE("non-scalar loss is rejected") {
    Tape t;
    Var v = t.parameter(p);
    try {
      t.backward(v);
      FAIL("expected NonScalarLoss");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::non_scalar_loss);
    }
  }
  SUBCASE("gradients add across backward calls and across uses") {
    Tape t;
    Var loss = sum(add(t.parameter(p), t.parameter(p)));
    t.backward(loss);
    for (double g : p.grad.data()) CHECK(g == 2.0);
    t.backward(loss);
    for (double g : p.grad.data()) CHECK(g == 4.0);
  }
  SUBCASE("composite conv, leaky_relu, gru, sigmoid, bce network") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Rng r(seed + 100);
      Parameter kernel("kernel", random_tensor(r, {3, 2, 3, 3}));
      Parameter bias("bias", random_tensor(r, {3}));
      GruFixture gru(r, 4, 27);
      Parameter h0("h0", random_tensor(r, {4}));
      const Tensor input = random_tensor(r, {2, 6, 6});
      Tensor target({4});
      for (std::size_t i = 0; i < 4; ++i) target[i] = r.bernoulli(0.5) ? 1.0 : 0.0;
      auto params = gru.ptrs();
      params.push_back(&kernel);
      params.push_back(&bias);
      params.push_back(&h0);
      const auto res = gradcheck(
          [&](Tape& t) {
            Var x = t.constant(input);
            Var feat = leaky_relu(add_channel_bias(conv2d(x, t.parameter(kernel), 2, 1), t.parameter(bias)));
            Var h = gru_cell(t.parameter(h0), reshape(feat, {27}), gru.vars(t));
            h = gru_cell(h, reshape(feat, {27}), gru.vars(t));
            return bce(target, sigmoid(h));
          },
          params);
      CHECK_MESSAGE(res.worst_relative_error < 1e-4, res.worst_param);
    }
  }
}

TEST_CASE("conv gradients match finite differences") {
  Rng rng(31);
  Parameter input("input", random_tensor(rng, {2, 5, 5}));
  Parameter k("k", random_tensor(rng, {3, 2, 3, 3}));
  Parameter kt("kt", random_tensor(rng, {3, 2, 4, 4}));
  const auto r = gradcheck(
      [&](Tape& t) {
        Var c = conv2d(t.parameter(input), t.parameter(k), 2, 1);
        Var up = conv_transpose2d(c, t.parameter(kt), 2, 1);
        return sum(mul(up, up));
      },
      std::vector<Parameter*>{&input, &k, &kt});
  CHECK_MESSAGE(r.worst_relative_error < 1e-4, r.worst_param);
}

TEST_CASE("structural ops and losses") {
  Rng rng(41);
  Parameter a("a", random_tensor(rng, {6}));
  Parameter b("b", random_tensor(rng, {2, 3}, 0.05, 0.95));
  Parameter w("w", random_tensor(rng, {3, 6}));
  const Tensor target({2, 3}, {1, 0, 0, 1, 1, 0});
  const auto r = gradcheck(
      [&](Tape& t) {
        Var av = t.parameter(a);
        Var joined = concat({slice(av, 1, 3), matvec(t.parameter(w), av)});
        Var m = mse(reshape(joined, {2, 3}), t.parameter(b));
        return add(m, add(bce(target, t.parameter(b)), mean(scale(add_scalar(av, 2.0), 3.0))));
      },
      std::vector<Parameter*>{&a, &b, &w});
  CHECK_MESSAGE(r.worst_relative_error < 1e-4, r.worst_param);

  Tape t;
  CHECK(bce(Tensor({1, 2}, {1, 0}), t.constant(Tensor({1, 2}, {0.9, 0.1}))).value().item() ==
        doctest::Approx(-std::log(0.9)).epsilon(1e-12));
}

TEST_CASE("action_matrix") {
  Tape tape;
  SUBCASE("zero logits give uniform off-diagonals") {
    const Tensor a = action_matrix(tape.constant(Tensor({9})), 3, 0.8).value();
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(a.at(i, j) == doctest::Approx(i == j ? 0.8 : 0.1).epsilon(1e-15));
  }
  SUBCASE("gradients match finite differences") {
    Rng rng(4);
    Parameter logits("logits", random_tensor(rng, {16}, -2.0, 2.0));
    const Tensor weights = random_tensor(rng, {4, 4});
    const auto r = gradcheck(
        [&](Tape& t) { return sum(mul(action_matrix(t.parameter(logits), 4, 0.8), t.constant(weights))); },
        std::vector<Parameter*>{&logits});
    CHECK(r.worst_relative_error < 1e-4);
  }
  SUBCASE("single agent") {
    const Tensor a = action_matrix(tape.constant(Tensor({1})), 1, 0.8).value();
    CHECK(a[0] == 1.0);
  }
}

TEST_CASE("adam_step") {
  SUBCASE("zero gradient leaves the value unchanged") {
    Parameter p("p", Tensor({3}, {1, -2, 3}));
    const Tensor before = p.value;
    adam_step(p, 0.1);
    CHECK(p.value == before);
    CHECK(p.step_count == 1);
  }
  SUBCASE("first step moves by the learning rate") {
    Parameter p("p", Tensor::scalar(0.0));
    p.grad[0] = 1.0;
    adam_step(p, 0.1);
    CHECK(p.value[0] == doctest::Approx(-0.1).epsilon(1e-6));
    CHECK(p.grad[0] == 0.0);
  }
  SUBCASE("quadratic converges like the reference recursion") {
    Parameter p("x", Tensor::scalar(0.0));
    for (int i = 0; i < 100; ++i) {
      p.grad[0] = 2.0 * (p.value[0] - 3.0);
      adam_step(p, 0.1);
    }
    const double ref = oracle::scalar_adam(0.0, 0.1, 100, [](double x) { return 2.0 * (x - 3.0); });
    CHECK(p.value[0] == doctest::Approx(ref).epsilon(1e-12));
    CHECK(std::abs(p.value[0] - 3.0) < 0.5);
  }
}

TEST_CASE("forward ops are deterministic") {
  Rng rng(1);
  const Tensor in = random_tensor(rng, {3, 8, 8});
  const Tensor k = random_tensor(rng, {4, 3, 3, 3});
  CHECK(conv2d_forward(in, k, 2, 1) == conv2d_forward(in, k, 2, 1));
}

TEST_CASE("checkpoint format") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "pyrogrid_ckpt_test";
  fs::create_directories(dir);
  Rng rng(9);
  std::vector<NamedTensor> records = {{"agent0.encoder.conv0.kernel", random_tensor(rng, {2, 3, 3, 3})},
                                      {"scalar", Tensor::scalar(-0.0)},
                                      {"v", random_tensor(rng, {5})}};
  SUBCASE("round trip is exact") {
    save_checkpoint(dir / "a.pgck", records);
    const auto back = load_checkpoint(dir / "a.pgck");
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      CHECK(back[i].name == records[i].name);
      CHECK(encode_checkpoint(std::span(&back[i], 1)) == encode_checkpoint(std::span(&records[i], 1)));
    }
  }
  SUBCASE("hand-built bytes decode to known values") {
    // "PGCK", v1, name "w" (len 1), rank 1, dim 2, payload {1.0, -2.5}
    const unsigned char raw[] = {'P', 'G', 'C', 'K', 1, 0, 1, 0, 'w', 1, 2, 0, 0, 0,
                                 0, 0, 0, 0, 0, 0, 0xf0, 0x3f, 0, 0, 0, 0, 0, 0, 0x04, 0xc0};
    const std::vector<char> bytes(raw, raw + sizeof(raw));
    const auto rec = decode_checkpoint(bytes);
    REQUIRE(rec.size() == 1);
    CHECK(rec[0].name == "w");
    CHECK(rec[0].value == Tensor({2}, {1.0, -2.5}));
  }
  SUBCASE("errors") {
    auto bytes = encode_checkpoint(records);
    auto expect = [](std::vector<char> b, Errc code) {
      try {
        decode_checkpoint(b);
        FAIL("expected error");
      } catch (const Error& e) {
        CHECK(e.code() == code);
      }
    };
    auto bad = bytes;
    bad[0] = 'X';
    expect(bad, Errc::bad_magic);
    bad = bytes;
    bad[4] = 2;
    expect(bad, Errc::version_mismatch);
    bad = bytes;
    bad.resize(bad.size() - 3);
    expect(bad, Errc::truncated_file);
  }
  fs::remove_all(dir);
}

TEST_CASE("portable math and random streams") {
  for (double x = -30.0; x < 30.0; x += 0.37) {
    CHECK(portable::exp(x) == doctest::Approx(std::exp(x)).epsilon(1e-14));
    CHECK(portable::sin(x) == doctest::Approx(std::sin(x)).epsilon(1e-12).scale(1.0));
    CHECK(portable::cos(x) == doctest::Approx(std::cos(x)).epsilon(1e-12).scale(1.0));
  }
  for (double x = 1e-6; x < 1e6; x *= 3.1) CHECK(portable::log(x) == doctest::Approx(std::log(x)).epsilon(1e-14));

  Rng a = Rng::stream(5, {1, 2});
  Rng b = Rng::stream(5, {1, 2});
  Rng c = Rng::stream(5, {2, 1});
  CHECK(a.next_u64() == b.next_u64());
  CHECK(a.next_u64() != c.next_u64());

  Rng rng(123);
  double s = 0.0, s2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
  for (int i = 0; i < 1000; ++i) CHECK(rng.uniform_index(7) < 7);
}
