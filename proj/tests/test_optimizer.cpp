#include <doctest.h>

#include <cmath>
#include <vector>

#include "varioeta/asymptotics.hpp"
#include "varioeta/error.hpp"
#include "varioeta/objectives.hpp"
#include "varioeta/optimizer.hpp"
#include "varioeta/rng.hpp"

using namespace varioeta;

namespace {

GradientBatch batch_of(const std::vector<std::vector<double>>& rows) {
  GradientBatch b(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t i = 0; i < rows[r].size(); ++i) b.row(r)[i] = rows[r][i];
  }
  return b;
}

OptimizerState at(std::vector<double> w) {
  OptimizerState s;
  s.last_update.assign(w.size(), 0.0);
  s.w = std::move(w);
  return s;
}

VarioEtaConfig config(double eta, double phi, std::size_t n, VarianceMode mode = VarianceMode::recursive) {
  VarioEtaConfig c;
  c.eta = eta;
  c.phi = phi;
  c.batch_size = n;
  c.variance_mode = mode;
  return c;
}

// Constant objective: gradient zero everywhere.
class Flat final : public Objective {
 public:
  std::string name() const override { return "flat"; }
  std::size_t dimension() const noexcept override { return 2; }
  std::size_t dataset_size() const noexcept override { return 50; }
  double eval(std::span<const double> w, std::size_t p) const override {
    check_point(w, p);
    return 3.0;
  }
  void grad(std::span<const double> w, std::size_t p, std::span<double> out) const override {
    check_point(w, p);
    out[0] = out[1] = 0.0;
  }
};

}  // namespace

TEST_CASE("varioeta_step: hand-evaluated update") {
  const auto s = varioeta_step(at({0.0}), config(0.1, 0.0, 2), batch_of({{1.0}, {3.0}}));
  CHECK(s.w[0] == doctest::Approx(-0.1 * 2.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(s.step_count == 1);
  CHECK(s.last_update[0] == s.w[0]);
}

TEST_CASE("varioeta_step: zero gradients with phi > 0 leave w unchanged") {
  const auto s = varioeta_step(at({1.0, 2.0}), config(0.1, 1e-6, 3), batch_of({{0, 0}, {0, 0}, {0, 0}}));
  CHECK(s.w == std::vector<double>{1.0, 2.0});
}

TEST_CASE("varioeta_step: zero spread with phi = 0 is a domain error") {
  try {
    varioeta_step(at({0.0}), config(0.1, 0.0, 2), batch_of({{2.0}, {2.0}}));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::domain);
  }
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(config(0.0, 0.0, 4).validate(), Error);
  CHECK_THROWS_AS(config(0.1, -1.0, 4).validate(), Error);
  CHECK_THROWS_AS(config(0.1, 0.0, 1).validate(), Error);
  CHECK_THROWS_AS(config(0.1, 0.0, 2, VarianceMode::asymptotic).validate(), Error);
  CHECK_NOTHROW(config(0.1, 0.0, 3, VarianceMode::asymptotic).validate());
  CHECK(config(0.1, 0.0, 100, VarianceMode::asymptotic).asymptotic_scale() ==
        doctest::Approx(std::sqrt(asymptotic_variance(100))));
}

TEST_CASE("varioeta_step: batch shape errors") {
  CHECK_THROWS_AS(varioeta_step(at({0.0}), config(0.1, 0.0, 3), batch_of({{1.0}, {3.0}})), Error);
  CHECK_THROWS_AS(varioeta_step(at({0.0, 0.0}), config(0.1, 0.0, 2), batch_of({{1.0}, {3.0}})), Error);
  CHECK_THROWS_AS(varioeta_step(at({0.0}), config(0.1, 0.0, 2), batch_of({{1.0}, {NAN}})), Error);
}

TEST_CASE("varioeta_step: asymptotic mode is SGD with a rescaled rate") {
  const auto cfg = config(0.05, 0.0, 4, VarianceMode::asymptotic);
  const auto b = batch_of({{1.0, -2.0}, {0.5, 4.0}, {2.0, 0.0}, {-1.0, 1.0}});
  const auto v = varioeta_step(at({0.3, 0.4}), cfg, b);
  const auto g = sgd_step(at({0.3, 0.4}), 0.05 / std::sqrt(asymptotic_variance(4)), b);
  CHECK(v.w == g.w);
}

TEST_CASE("sgd_step: examples") {
  auto s = sgd_step(at({0.0}), 0.1, batch_of({{2.0}}));
  CHECK(s.w[0] == doctest::Approx(-0.2));
  s = sgd_step(at({1.0}), 0.1, batch_of({{1.0}, {-1.0}}));
  CHECK(s.w[0] == 1.0);
  CHECK_THROWS_AS(sgd_step(at({1.0}), 0.0, batch_of({{1.0}})), Error);
}

TEST_CASE("max_step caps the sup norm of the update") {
  VarioEtaConfig c = config(1.0, 1e-12, 2);
  c.max_step = 0.01;
  const auto s = varioeta_step(at({0.0, 0.0}), c, batch_of({{1.0, 5.0}, {1.0 + 1e-9, 5.0}}));
  CHECK(std::max(std::abs(s.w[0]), std::abs(s.w[1])) == doctest::Approx(0.01));
  const auto g = sgd_step(at({0.0}), 10.0, batch_of({{1.0}}), 0.5);
  CHECK(g.w[0] == doctest::Approx(-0.5));
}

TEST_CASE("property: sign and finiteness with phi > 0") {
  RngStream rng(1234, 0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng.next_below(10);
    std::vector<std::vector<double>> rows(n, std::vector<double>(3));
    const bool degenerate = rng.next_below(4) == 0;
    for (auto& r : rows) {
      for (double& x : r) x = degenerate ? 0.25 : rng.next_symmetric() * 3.0 + 0.5;
    }
    const auto b = batch_of(rows);
    const auto mean = b.mean();
    const auto s = varioeta_step(at({0.0, 0.0, 0.0}), config(0.1, 1e-6, n), b);
    for (std::size_t i = 0; i < 3; ++i) {
      REQUIRE(std::isfinite(s.w[i]));
      if (mean[i] > 0) REQUIRE(s.w[i] < 0.0);
      if (mean[i] < 0) REQUIRE(s.w[i] > 0.0);
      if (mean[i] == 0) REQUIRE(s.w[i] == 0.0);
    }
  }
}

TEST_CASE("property: per-coordinate scale invariance with phi = 0") {
  RngStream rng(555, 0);
  const std::size_t n = 8;
  const double c = 1e3;
  auto plain = at({0.0, 0.0});
  auto scaled = at({0.0, 0.0});
  const auto cfg = config(0.01, 0.0, n);
  for (int step = 0; step < 100; ++step) {
    std::vector<std::vector<double>> rows(n, std::vector<double>(2)), rows_c(n, std::vector<double>(2));
    for (std::size_t r = 0; r < n; ++r) {
      rows[r][0] = rng.next_symmetric() + 0.2;
      rows[r][1] = rng.next_symmetric() - 0.1;
      rows_c[r][0] = c * rows[r][0];
      rows_c[r][1] = rows[r][1];
    }
    plain = varioeta_step(std::move(plain), cfg, batch_of(rows));
    scaled = varioeta_step(std::move(scaled), cfg, batch_of(rows_c));
    REQUIRE(std::abs(plain.w[0] - scaled.w[0]) <= 1e-8);
    REQUIRE(plain.w[1] == scaled.w[1]);
  }
}

TEST_CASE("BatchSampler draws without replacement within an epoch") {
  BatchSampler sampler(10, 3, 7);
  std::vector<int> seen(10, 0);
  for (int k = 0; k < 3; ++k) {
    for (std::size_t i : sampler.next()) ++seen[i];
  }
  for (int count : seen) CHECK(count <= 1);
  CHECK_THROWS_AS(BatchSampler(3, 4, 0), Error);
}

TEST_CASE("run: quadratic, seed 42, 1000 steps reduces the error a hundredfold") {
  // Noise 0.1: the error floor 0.5 * sum(lambda) * 0.01 sits well below initial / 100.
  const auto q = make_quadratic({1.0, 2.0, 5.0, 10.0}, {0.0, 0.0, 0.0, 0.0}, 0.1, 2000, 7);
  MethodConfig m;
  m.config = config(0.01, 1e-6, 32);
  const std::vector<double> w0(4, 3.0);
  const auto r = run(*q, m, w0, 1000, 42, 100);
  REQUIRE_FALSE(r.divergence.has_value());
  CHECK(r.records.front().step == 0);
  CHECK(r.records.back().step == 1000);
  CHECK(r.records.size() == 11);
  CHECK(r.records.back().error <= r.records.front().error / 100.0);
}

TEST_CASE("run: identical seeds give bit-identical trajectories") {
  const auto q = make_quadratic({1.0, 3.0}, {0.5, -0.5}, 0.8, 500, 3);
  MethodConfig m;
  m.config = config(0.02, 1e-6, 16);
  const std::vector<double> w0{2.0, 2.0};
  const auto a = run(*q, m, w0, 300, 9, 1);
  const auto b = run(*q, m, w0, 300, 9, 1);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    CHECK(a.records[k].error == b.records[k].error);
    CHECK(a.records[k].w_norm == b.records[k].w_norm);
  }
  CHECK(a.batch_fingerprint == b.batch_fingerprint);
  CHECK(a.final_state.w == b.final_state.w);
  const auto c = run(*q, m, w0, 300, 10, 1);
  CHECK(a.batch_fingerprint != c.batch_fingerprint);
}

TEST_CASE("run: zero-gradient objective leaves w unchanged") {
  Flat flat;
  MethodConfig m;
  m.config = config(0.5, 1e-6, 5);
  const std::vector<double> w0{1.25, -4.0};
  const auto r = run(flat, m, w0, 200, 1, 10);
  CHECK(r.final_state.w == w0);
  for (const auto& rec : r.records) CHECK(rec.error == 3.0);
}

TEST_CASE("run: phi = 0 on a flat objective is reported as a divergence") {
  Flat flat;
  MethodConfig m;
  m.config = config(0.5, 0.0, 5);
  const std::vector<double> w0{0.0, 0.0};
  const auto r = run(flat, m, w0, 10, 1, 1);
  REQUIRE(r.divergence.has_value());
  CHECK(r.divergence->step == 1);
}

TEST_CASE("run: asymptotic mode equals rescaled SGD to 1e-12 per step over 1000 steps") {
  const auto q = make_quadratic({0.5, 2.0, 8.0}, {1.0, 0.0, -1.0}, 1.0, 3000, 21);
  const std::size_t n = 64;
  MethodConfig a;
  a.config = config(0.001, 1e-6, n, VarianceMode::asymptotic);
  MethodConfig s;
  s.method = Method::sgd;
  s.config = a.config;
  s.config.eta = a.config.eta / (std::sqrt(asymptotic_variance(n)) + a.config.phi);
  const std::vector<double> w0{3.0, 3.0, 3.0};
  const auto ra = run(*q, a, w0, 1000, 42, 1);
  const auto rs = run(*q, s, w0, 1000, 42, 1);
  REQUIRE(ra.records.size() == 1001);
  REQUIRE(rs.records.size() == 1001);
  for (std::size_t k = 0; k < ra.records.size(); ++k) {
    REQUIRE(std::abs(ra.records[k].error - rs.records[k].error) <= 1e-12);
  }
  CHECK(ra.batch_fingerprint == rs.batch_fingerprint);
}

TEST_CASE("expected_error_simple: examples") {
  const auto q = make_quadratic({1.0}, {0.0}, 0.0, 2, 0);
  const std::vector<double> w{1.0};
  CHECK(expected_error_simple(*q, w, 0.1, std::vector<double>{4.0}) == doctest::Approx(0.52).epsilon(1e-7));
  CHECK(expected_error_simple(*q, w, 0.1, std::vector<double>{0.0}) == 0.5);
  CHECK_THROWS_AS(expected_error_simple(*q, w, 0.1, std::vector<double>{-1.0}), Error);
}

TEST_CASE("expected_error_full: a single repeated perturbation reproduces E(w + dw)") {
  const auto q = make_quadratic({2.0, 3.0, 0.5}, {0.1, 0.2, 0.3}, 0.4, 20, 5);
  const std::vector<double> w{1.0, -1.0, 0.5};
  const std::vector<double> dw{0.3, -0.2, 0.7};
  const std::vector<std::vector<double>> reps(4, dw);
  std::vector<double> moved(3);
  for (std::size_t i = 0; i < 3; ++i) moved[i] = w[i] + dw[i];
  CHECK(expected_error_full(*q, w, reps) == doctest::Approx(q->total_error(moved)).epsilon(1e-5));
}

TEST_CASE("expected estimators agree with brute force on a 2-d diagonal quadratic") {
  const auto q = make_quadratic({1.5, 6.0}, {0.0, 0.0}, 0.3, 10, 8);
  const std::vector<double> w{0.7, -0.4};
  RngStream rng(2, 0);
  const std::vector<double> sigma{0.2, 0.05};
  const std::size_t count = 100000;
  std::vector<std::vector<double>> perturbations(count, std::vector<double>(2));
  double sum = 0.0, sumsq = 0.0;
  std::vector<double> second(2, 0.0);
  for (auto& dw : perturbations) {
    for (std::size_t i = 0; i < 2; ++i) {
      dw[i] = sigma[i] * std::sqrt(3.0) * rng.next_symmetric();
      second[i] += dw[i] * dw[i] / static_cast<double>(count);
    }
    const std::vector<double> moved{w[0] + dw[0], w[1] + dw[1]};
    const double e = q->total_error(moved);
    sum += e;
    sumsq += e * e;
  }
  const double mean = sum / count;
  const double se = std::sqrt((sumsq / count - mean * mean) / (count - 1));
  const double full = expected_error_full(*q, w, perturbations);
  // expected_error_simple takes eta * sigma as the perturbation scale
  const double simple = expected_error_simple(*q, w, 1.0, second);
  CHECK(std::abs(full - mean) <= 3.0 * se);
  CHECK(std::abs(simple - mean) <= 3.0 * se);
}
