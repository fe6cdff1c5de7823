#include <doctest.h>

#include <cmath>

#include "fraclog/verification.hpp"
#include "support.hpp"

using namespace fraclog;

namespace {

DiscreteFunction dist_power(const std::shared_ptr<const Grid>& grid, double s) {
  return DiscreteFunction(grid, grid->dist.array().pow(s).matrix());
}

}  // namespace

TEST_CASE("check_hopf") {
  const auto grid = oracle::interval_grid(20);
  const DiscreteFunction good = dist_power(grid, 0.3);
  const CheckResult ok = check_hopf(good, 0.3);
  CHECK(ok.outcome == Outcome::Pass);
  CHECK(ok.witness_value("min_ratio") == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::isnan(ok.witness_value("no_such_key")));

  Vector v = good.values();
  v[0] = 0.0;
  const CheckResult zero = check_hopf(DiscreteFunction(grid, v), 0.3);
  CHECK(zero.outcome == Outcome::Fail);
  CHECK(zero.witness_value("min_cell") == 0.0);
  CHECK(zero.notes.find("cell 0") != std::string::npos);

  // positive but a thin boundary layer
  v = good.values();
  v[19] *= 1e-3;
  const CheckResult thin = check_hopf(DiscreteFunction(grid, v), 0.3, 0.1);
  CHECK(thin.outcome == Outcome::Fail);
  CHECK(thin.notes.find("cell 19") != std::string::npos);
  CHECK(check_hopf(DiscreteFunction(grid, v), 0.3, 1e-4).outcome == Outcome::Pass);
}

TEST_CASE("check_strict_order") {
  const auto grid = oracle::interval_grid(16);
  const DiscreteFunction lo = dist_power(grid, 0.3);
  const DiscreteFunction hi(grid, 2.0 * lo.values());
  CHECK(check_strict_order(hi, lo, 0.3).outcome == Outcome::Pass);
  CHECK(check_strict_order(lo, lo, 0.3).outcome == Outcome::Fail);
  CHECK(check_strict_order(lo, hi, 0.3).outcome == Outcome::Fail);
  Vector touch = hi.values();
  touch[5] = lo[5];
  const CheckResult res = check_strict_order(DiscreteFunction(grid, touch), lo, 0.3);
  CHECK(res.outcome == Outcome::Fail);
  CHECK(res.witness_value("min_gap_cell") == 5.0);
  CHECK_THROWS_AS(check_strict_order(hi, DiscreteFunction(oracle::interval_grid(16), lo.values()), 0.3),
                  ValidationError);
}

TEST_CASE("check_nonexistence_equi") {
  const ProblemParams pp = oracle::params(0.3, 2, 2, 3);
  const KernelWeights kw = assemble(oracle::interval_grid(24), pp);
  const double l1 = principal_eigenpair(kw, 2.0).lambda1;
  const CheckResult below = check_nonexistence_equi(pp, kw, 0.9 * l1, l1, 4, SolveOptions{});
  CHECK(below.outcome == Outcome::Pass);
  CHECK(check_nonexistence_equi(pp, kw, 1.1 * l1, l1, 4, SolveOptions{}).outcome == Outcome::NotApplicable);
  const ProblemParams sub = oracle::params(0.3, 2, 1.5, 3);
  CHECK(check_nonexistence_equi(sub, kw, 0.5, l1, 4, SolveOptions{}).outcome == Outcome::NotApplicable);
  CHECK(to_string(Outcome::NotApplicable) == std::string("not_applicable"));
}

TEST_CASE("check_limit_branch") {
  const Vector target = Vector::Ones(4);
  std::vector<BranchSample> branch;
  for (int k = 3; k >= 0; --k) branch.push_back({1.0 + std::ldexp(1.0, k), Vector::Constant(4, 1.02 + 0.1 * k)});
  CHECK(check_limit_branch(branch, target, 0.05).outcome == Outcome::Pass);
  CHECK(check_limit_branch(branch, target, 0.01).outcome == Outcome::Fail);
  std::vector<BranchSample> bumpy = branch;
  bumpy[2].u = Vector::Constant(4, 1.5);
  CHECK(check_limit_branch(bumpy, target, 0.05).outcome == Outcome::Fail);
  branch.resize(2);
  CHECK_THROWS_AS(check_limit_branch(branch, target, 0.05), ValidationError);
}

TEST_CASE("refinement_study") {
  const ProblemParams pp = oracle::params(0.3, 2, 1.5, 3);
  RefinementOptions opts;
  const auto rows = refinement_study(pp, DomainSpec::interval(0, 1), {1, 16, 32, 64}, opts);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].lambda1 == doctest::Approx(4.0 / (0.6 * 0.4)).epsilon(1e-10));
  CHECK(std::isnan(rows[0].delta_lambda1));
  CHECK(std::isnan(rows[1].lambda_star));
  CHECK(rows[1].lambda_fixed == 1.0);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    CHECK(rows[k].n > rows[k - 1].n);
    CHECK(rows[k].sup_norm > 0.0);
  }
  CHECK(std::abs(rows[3].delta_lambda1) < std::abs(rows[2].delta_lambda1));
  CHECK(std::abs(rows[3].delta_sup) < std::abs(rows[2].delta_sup));
  CHECK_THROWS_AS(refinement_study(pp, DomainSpec::interval(0, 1), {32, 16}, opts), ValidationError);
  CHECK_THROWS_AS(refinement_study(pp, DomainSpec::interval(0, 1), {}, opts), ValidationError);
}
