#include <cmath>

#include "doctest.h"

#include "ccrci/error.hpp"
#include "ccrci/lp.hpp"
#include "support.hpp"

using namespace ccrci::lp;

namespace {

LinearProgram lp_x_ge_one() {
  LinearProgram lp;
  const int x = lp.add_variable(-kInf, kInf, 1.0);
  lp.add_ge({{x, 1.0}}, 1.0);
  return lp;
}

LinearProgram lp_contradiction() {
  LinearProgram lp;
  const int x = lp.add_variable();
  lp.add_le({{x, 1.0}}, -1.0);
  lp.add_ge({{x, 1.0}}, 1.0);
  return lp;
}

LinearProgram lp_simplex_facet() {
  LinearProgram lp;
  const int x = lp.add_variable(0.0, kInf, -1.0);
  const int y = lp.add_variable(0.0, kInf, -1.0);
  lp.add_le({{x, 1.0}, {y, 1.0}}, 1.0);
  return lp;
}

// Random LP with a known feasible point x0; bounded by a box on x. Rows are
// a mix of <=, >= and = senses; some variables are free.
LinearProgram random_lp(ccrci::testing::Rng& rng, int n, int m, bool with_box = true) {
  LinearProgram lp;
  std::vector<double> x0(n);
  for (int j = 0; j < n; ++j) {
    x0[j] = rng.uniform(-2, 2);
    const bool free_var = rng.uniform() < 0.3;
    if (free_var || !with_box) lp.add_variable(-kInf, kInf, rng.uniform(-1, 1));
    else lp.add_variable(-5.0, 5.0, rng.uniform(-1, 1));
  }
  for (int i = 0; i < m; ++i) {
    SparseRow row;
    double act = 0.0;
    for (int j = 0; j < n; ++j) {
      if (rng.uniform() < 0.6) {
        const double a = std::round(rng.uniform(-4, 4) * 4.0) / 4.0;
        if (a == 0.0) continue;
        row.push_back({j, a});
        act += a * x0[j];
      }
    }
    const double r = rng.uniform();
    if (r < 0.15) lp.add_eq(row, act);
    else if (r < 0.5) lp.add_ge(row, act - rng.uniform(0, 1));
    else lp.add_le(row, act + rng.uniform(0, 1));
  }
  if (with_box) {
    for (int j = 0; j < n; ++j) {
      if (!std::isfinite(lp.lower()[j])) {
        lp.add_le({{j, 1.0}}, 6.0);
        lp.add_ge({{j, 1.0}}, -6.0);
      }
    }
  }
  return lp;
}

}  // namespace

TEST_CASE("min x s.t. x >= 1") {
  const auto r = solve(lp_x_ge_one());
  REQUIRE(r.status == Status::Optimal);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.objective_value == doctest::Approx(1.0));
}

TEST_CASE("contradictory bounds are infeasible") {
  const auto r = solve(lp_contradiction());
  CHECK(r.status == Status::Infeasible);
  CHECK_FALSE(r.infeasible_rows.empty());
}

TEST_CASE("objective value on a degenerate facet") {
  const auto r = solve(lp_simplex_facet());
  REQUIRE(r.status == Status::Optimal);
  CHECK(r.objective_value == doctest::Approx(-1.0).epsilon(1e-10));
}

TEST_CASE("unbounded LP") {
  LinearProgram lp;
  const int x = lp.add_variable(0.0, kInf, -1.0);
  const int y = lp.add_variable(0.0, kInf, 0.0);
  lp.add_le({{x, 1.0}, {y, -1.0}}, 1.0);
  CHECK(solve(lp).status == Status::Unbounded);
  CHECK(solve_dense_tableau(lp).status == Status::Unbounded);
}

TEST_CASE("external plugin agrees with embedded solver on the reference LPs") {
  for (const auto& lp : {lp_x_ge_one(), lp_contradiction(), lp_simplex_facet()}) {
    const auto a = solve(lp);
    const auto b = solve_external(lp, "dense-tableau");
    REQUIRE(a.status == b.status);
    if (a.status == Status::Optimal) CHECK(std::abs(a.objective_value - b.objective_value) <= 1e-7);
  }
}

TEST_CASE("unknown plugin id") {
  CHECK_THROWS_AS(solve_external(lp_x_ge_one(), "no-such-solver"), ccrci::Error);
  try {
    solve_external(lp_x_ge_one(), "no-such-solver");
  } catch (const ccrci::Error& e) {
    CHECK(e.code() == ccrci::ErrorCode::PluginUnavailable);
  }
}

TEST_CASE("empty LP is optimal with zero objective") {
  LinearProgram lp;
  for (const auto& id : {"embedded", "dense-tableau"}) {
    const auto r = solve_external(lp, id);
    CHECK(r.status == Status::Optimal);
    CHECK(r.objective_value == 0.0);
  }
}

TEST_CASE("registry lists the built-in solvers") {
  CHECK(has_solver("embedded"));
  CHECK(has_solver("dense-tableau"));
  register_solver("test-alias", [](const LinearProgram& lp, const SolverOptions& o) { return solve(lp, o); });
  CHECK(solve_external(lp_x_ge_one(), "test-alias").status == Status::Optimal);
}

TEST_CASE("bounded variables and bound flips") {
  LinearProgram lp;
  const int x = lp.add_variable(-1.0, 2.0, -1.0);
  const int y = lp.add_variable(0.0, 3.0, -2.0);
  lp.add_le({{x, 1.0}, {y, 1.0}}, 4.0);
  const auto r = solve(lp);
  REQUIRE(r.status == Status::Optimal);
  CHECK(r.objective_value == doctest::Approx(-7.0));
  CHECK(r.x[y] == doctest::Approx(3.0));
}

TEST_CASE("cross-check against dense tableau on random LPs") {
  ccrci::testing::Rng rng(21);
  int optimal = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + rng.index(6), m = 1 + rng.index(8);
    const auto lp = random_lp(rng, n, m);
    const auto a = solve(lp);
    const auto b = solve_dense_tableau(lp);
    INFO("trial " << trial);
    REQUIRE(a.status == b.status);
    if (a.status == Status::Optimal) {
      ++optimal;
      CHECK(std::abs(a.objective_value - b.objective_value) <= 1e-7 * (1.0 + std::abs(b.objective_value)));
      CHECK(lp.max_violation(a.x) <= 1e-7);
    }
  }
  CHECK(optimal == 200);
}

TEST_CASE("cross-check including infeasible and unbounded instances") {
  ccrci::testing::Rng rng(22);
  int counts[4] = {0, 0, 0, 0};
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + rng.index(5), m = 1 + rng.index(6);
    auto lp = random_lp(rng, n, m, /*with_box=*/false);
    if (rng.uniform() < 0.3) {
      // Add a row contradicting a random existing one.
      const auto& row = lp.rows()[rng.index(lp.num_rows())];
      SparseRow neg = row.terms;
      if (row.sense != RowSense::GreaterEqual && !neg.empty()) lp.add_ge(neg, row.rhs + 1.0);
    }
    const auto a = solve(lp);
    const auto b = solve_dense_tableau(lp);
    INFO("trial " << trial);
    REQUIRE(a.status == b.status);
    ++counts[static_cast<int>(a.status)];
    if (a.status == Status::Optimal) {
      CHECK(std::abs(a.objective_value - b.objective_value) <= 1e-7 * (1.0 + std::abs(b.objective_value)));
    }
  }
  CHECK(counts[static_cast<int>(Status::Infeasible)] > 0);
  CHECK(counts[static_cast<int>(Status::Unbounded)] > 0);
}

TEST_CASE("weak duality spot-check") {
  ccrci::testing::Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const auto lp = random_lp(rng, 2 + rng.index(6), 1 + rng.index(8));
    for (const auto& r : {solve(lp), solve_dense_tableau(lp)}) {
      REQUIRE(r.status == Status::Optimal);
      const double dual = dual_objective(lp, r);
      CHECK(dual <= r.objective_value + 1e-6);
      CHECK(r.objective_value <= dual + 1e-6);
    }
  }
}

TEST_CASE("objective scaling doubles the optimal value") {
  ccrci::testing::Rng rng(24);
  for (int trial = 0; trial < 30; ++trial) {
    auto lp = random_lp(rng, 3 + rng.index(4), 2 + rng.index(5));
    const auto a = solve(lp);
    for (int j = 0; j < lp.num_variables(); ++j) lp.set_cost(j, 2.0 * lp.cost()[j]);
    const auto b = solve(lp);
    REQUIRE(a.status == b.status);
    CHECK(std::abs(b.objective_value - 2.0 * a.objective_value) <= 1e-9 * (1.0 + std::abs(a.objective_value)));
  }
}

TEST_CASE("solve is deterministic") {
  ccrci::testing::Rng rng(25);
  const auto lp = random_lp(rng, 8, 10);
  const auto a = solve(lp);
  const auto b = solve(lp);
  CHECK(a.status == b.status);
  CHECK(a.objective_value == b.objective_value);
  CHECK(a.x == b.x);
}

TEST_CASE("highly degenerate LP: many constraints tight at the optimum") {
  // Maximize x + y over a regular polygon described by 200 tangent lines plus
  // 200 duplicates through the origin-shifted copy; lots of ties.
  LinearProgram lp;
  const int x = lp.add_variable(-kInf, kInf, -1.0);
  const int y = lp.add_variable(-kInf, kInf, -1.0);
  for (int k = 0; k < 200; ++k) {
    const double a = 2.0 * M_PI * k / 200.0;
    lp.add_le({{x, std::cos(a)}, {y, std::sin(a)}}, 1.0);
    lp.add_le({{x, 2.0 * std::cos(a)}, {y, 2.0 * std::sin(a)}}, 2.0);
  }
  const auto r = solve(lp);
  REQUIRE(r.status == Status::Optimal);
  const auto ref = solve_dense_tableau(lp);
  CHECK(r.objective_value == doctest::Approx(ref.objective_value).epsilon(1e-9));
}

TEST_CASE("validate rejects bad indices") {
  LinearProgram lp;
  lp.add_variable();
  lp.add_le({{3, 1.0}}, 1.0);
  CHECK_THROWS_AS(lp.validate(), ccrci::Error);
}

TEST_CASE("MPS export lists every section") {
  const std::string mps = to_mps(lp_simplex_facet(), "FACET");
  CHECK(mps.find("NAME          FACET") == 0);
  for (const char* section : {"ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"}) {
    CHECK(mps.find(section) != std::string::npos);
  }
  CHECK(mps.find(" L  R0") != std::string::npos);
}
