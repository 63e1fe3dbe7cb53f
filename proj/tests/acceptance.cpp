// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "transverse/transverse.hpp"

using namespace transverse;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "failed: ";
      else detail << "; ";
      detail << what;
      pass = false;
    }
  }
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::vector<HamiltonianModel> builtin_models() {
  return {make_neumann(1.0, 2.0),
          make_neumann(1.0, 3.0),
          make_neumann(1.75, 2.0),
          make_neumann(0.5, 1.5),
          make_pendula_identical(CosineSeries{{0.0}}),
          make_pendula_identical(CosineSeries{{0.1}}),
          make_pendula_identical(CosineSeries{{0.25, -0.125}}),
          make_pendula_weak(1.0),
          make_pendula_weak(2.0),
          make_pendula_weak(3.0)};
}

double comparison_point(const HamiltonianModel& m) { return m.periodic ? kPi : 2.0; }

void neumann_closed_form(Outcome& o) {
  double worst = 0.0, slowest = 0.0;
  for (auto [l1, l2] : {std::pair{1.0, 2.0}, {1.0, 3.0}, {1.75, 2.0}, {0.5, 1.5}}) {
    const auto t0 = std::chrono::steady_clock::now();
    const double Tu = solve_riccati(make_neumann(l1, l2), 2.0).final_value();
    slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    worst = std::max(worst, std::abs(Tu - oracle::neumann_Tu2(l1, l2)));
  }
  o.require(worst < 1e-6, "T^u(2) error " + num(worst));
  o.require(slowest < 1.0, "slowest run " + num(slowest) + " s");
  o.detail << "max |T^u(2) - closed form| = " << num(worst) << ", slowest " << num(slowest) << " s";
}

void neumann_verdict(Outcome& o) {
  const std::vector<double> values{0.5, 1.0, 1.5, 2.0, 3.0};
  double worst = 0.0;
  int pairs = 0;
  for (double l1 : values) {
    for (double l2 : values) {
      if (!(l2 > l1)) continue;
      ++pairs;
      const HamiltonianModel m = make_neumann(l1, l2);
      const TransversalityReport r = jet_route_transversality(m, m, neumann_transition(), 2.0);
      o.require(r.verdict == Verdict::transversal && r.gap > 0.0, "not transversal at " + num(l1) + "," + num(l2));
      worst = std::max(worst, std::abs(r.gap - oracle::neumann_gap(l1, l2)));
    }
  }
  o.require(worst < 1e-6, "gap error " + num(worst));
  o.detail << pairs << " pairs, max |gap - closed form| = " << num(worst);
}

void initial_conditions(Outcome& o) {
  double worst_pendula = 0.0;
  for (double l2 : {1.5, 2.0, 2.5, 3.0, 4.0}) {
    const HamiltonianModel m = make_neumann(1.0, l2);
    const double T0 = riccati_initial(riccati_coefficients(m, loop_profile(m))).T0;
    o.require(T0 == l2, "Neumann T0 " + num(T0) + " != " + num(l2));
  }
  for (double f0 : {0.0, 0.05, 0.1, 0.2, 0.4}) {
    const HamiltonianModel m = make_pendula_identical(CosineSeries{{f0}});
    const double T0 = riccati_initial(riccati_coefficients(m, loop_profile(m))).T0;
    worst_pendula = std::max(worst_pendula, std::abs(T0 - 0.5 * (1.0 + std::sqrt(1.0 - 2.0 * f0))));
  }
  o.require(worst_pendula <= 1e-14, "pendula T0 error " + num(worst_pendula));
  o.detail << "Neumann exact, pendula max error " << num(worst_pendula);
}

void pendula_constant_coupling(Outcome& o) {
  double worst = 0.0;
  for (double b : {0.3, 0.6, 0.9}) {
    const double f0 = 0.5 * (1.0 - b * b);
    const RiccatiSolution s = solve_riccati(make_pendula_identical(CosineSeries{{f0}}), kPi);
    const double x_hi = std::min(0.0, b - 0.1);
    for (double x : linspace(-1.0 + 1e-3, x_hi, 200)) {
      const double q = 2.0 * std::acos(-x);
      const double Tbar = 2.0 * s.at(q) + x;
      worst = std::max(worst, std::abs(Tbar - oracle::pendula_Tbar(b, x)));
    }
  }
  o.require(worst < 1e-6, "Tbar error " + num(worst));
  o.detail << "max |Tbar - b + (1-x^2)/(b-x)| = " << num(worst);
}

void separable_tangency(Outcome& o) {
  const TransversalityReport r = torus_transversality(make_pendula_identical(CosineSeries{{0.0}}));
  o.require(std::abs(r.Tu) < 1e-8, "|T^u(pi)| = " + num(std::abs(r.Tu)));
  o.require(r.verdict == Verdict::tangent, std::string("verdict ") + verdict_name(r.verdict));
  o.detail << "|T^u(pi)| = " << num(std::abs(r.Tu)) << ", verdict " << verdict_name(r.verdict);
}

void bracketing(Outcome& o) {
  const HamiltonianModel m = make_pendula_identical(CosineSeries{{0.25, -0.125}});
  const RiccatiSolution s = solve_riccati(m, kPi);
  const double bc = std::sqrt(1.0 - 2.0 * 0.125), bd = std::sqrt(1.0 - 2.0 * 0.375);
  double worst = -1e300;  // largest excursion outside the bracket
  for (double q : linspace(0.0, kPi, 400)) {
    const double x = -std::cos(0.5 * q);
    const double Tbar = 2.0 * s.at(q) + x;
    const double lo = std::min(oracle::pendula_Tbar(bc, x), oracle::pendula_Tbar(bd, x));
    const double hi = std::max(oracle::pendula_Tbar(bc, x), oracle::pendula_Tbar(bd, x));
    worst = std::max({worst, lo - Tbar, Tbar - hi});
  }
  o.require(worst <= 1e-9, "outside bracket by " + num(worst));
  const TransversalityReport r = torus_transversality(m);
  o.require(r.Tu < 0.0, "T^u(pi) = " + num(r.Tu));
  o.require(r.verdict == Verdict::transversal, std::string("verdict ") + verdict_name(r.verdict));
  o.detail << "bracket excursion " << num(worst) << ", T^u(pi) = " << num(r.Tu) << ", " << verdict_name(r.verdict);
}

void oracle_equivalence(Outcome& o) {
  std::vector<HamiltonianModel> models = builtin_models();
  std::mt19937 rng(7);
  for (const auto& p : oracle::random_neumann(rng, 10)) models.push_back(make_neumann(p.l1, p.l2));
  for (const auto& f : oracle::random_couplings(rng, 10)) models.push_back(make_pendula_identical(CosineSeries{f}));
  double worst = 0.0;
  for (const auto& m : models) {
    const double q = comparison_point(m);
    const double d = std::abs(solve_riccati(m, q).final_value() - riccati_to_linear_oracle(m, q));
    o.require(d < 1e-6, m.name + " differs by " + num(d));
    worst = std::max(worst, d);
  }
  o.detail << models.size() << " models, max |direct - linear| = " << num(worst);
}

void restriction_residuals(Outcome& o) {
  double worst = 0.0;
  for (const auto& m : builtin_models()) {
    const LoopProfile p = loop_profile(m);
    const auto grid = linspace(p.interval.lo, p.interval.hi, 200);
    for (double q : grid) worst = std::max(worst, std::abs(restriction_residual(p, m, q)));
  }
  o.require(worst < 1e-8, "residual " + num(worst));
  o.detail << "max residual " << num(worst);
}

void linear_algebra(Outcome& o) {
  double worst = 0.0;
  for (const auto& m : builtin_models()) {
    const Linearization lin = linearize(m);
    worst = std::max(worst, generating_identity_residual(lin));
    o.require(check_positive_definite(lin.Eu), m.name + " Eu not positive definite");
  }
  o.require(worst < 1e-10, "residual " + num(worst));
  o.detail << "max |Eu B Eu - A| = " << num(worst);
}

void reversibility(Outcome& o) {
  double worst = 0.0;
  for (const auto& m : {make_pendula_identical(CosineSeries{{0.1}}), make_pendula_identical(CosineSeries{{0.25, -0.125}}),
                        make_pendula_weak(1.0), make_pendula_weak(2.0)}) {
    const RiccatiSolution u = solve_riccati(m, kPi);
    const RiccatiSolution s = solve_riccati(m, -kPi, {}, Branch::stable);
    worst = std::max(worst, std::abs(s.final_value() - stable_from_reversibility(u, m).Ts_hat(kPi)));
  }
  o.require(worst < 1e-8, "difference " + num(worst));
  o.detail << "max |direct stable - reflected| = " << num(worst);
}

void melnikov_lambda_one(Outcome& o) {
  const PerturbationModel p = make_pendula_weak_perturbation(1.0);
  double worst = 0.0;
  for (double s : {-3.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 3.0}) {
    worst = std::max(worst, std::abs(reduced_potential_at(p, s) - oracle::melnikov_lambda1(s)));
  }
  const MelnikovDerivatives d = melnikov_derivatives(p);
  o.require(worst < 1e-6, "L error " + num(worst));
  o.require(std::abs(d.dL) < 1e-9, "L'(0) = " + num(d.dL));
  o.require(std::abs(d.ddL + 8.0) <= 1e-5, "L''(0) = " + num(d.ddL));
  o.detail << "max |L - closed form| = " << num(worst) << ", L'(0) = " << num(d.dL) << ", L''(0) + 8 = "
           << num(d.ddL + 8.0);
}

void lambda_zero(Outcome& o) {
  const double l0 = lambda0_threshold();
  o.require(std::abs(l0 - 3.68078) <= 1e-4, "lambda0 = " + num(l0));
  char buf[64];
  std::snprintf(buf, sizeof buf, "lambda0 = %.10f", l0);
  o.detail << buf;
}

void nondegeneracy_band(Outcome& o) {
  for (double lambda : {1.0, 1.5, 2.0, 3.0, 3.6}) {
    const MelnikovResult r = perturbed_loop_verdict(make_pendula_weak_perturbation(lambda), {-1.0, 0.0, 1.0});
    o.require(r.ddL0 < 0.0, "ddL0 = " + num(r.ddL0) + " at lambda " + num(lambda));
    o.require(r.verdict == PerturbedVerdict::perturbed_loop_transversal,
              std::string(perturbed_verdict_name(r.verdict)) + " at lambda " + num(lambda));
    o.detail << (lambda == 1.0 ? "" : ", ") << "ddL0(" << lambda << ") = " << num(r.ddL0);
  }
}

void melnikov_properties(Outcome& o) {
  // Constancy along a loop of the family, from the flow route.
  const PerturbationModel p = make_pendula_weak_perturbation(1.5);
  double lo = 1e300, hi = -1e300;
  for (double tau : {-1.0, 0.0, 1.0}) {
    const PhasePoint x = p.loop_family(tau, 0.7);
    const double L = melnikov_potential_flow(p, {x[0], x[1]});
    lo = std::min(lo, L);
    hi = std::max(hi, L);
  }
  o.require(hi - lo < 1e-8, "first-integral spread " + num(hi - lo));
  double odd = 0.0;
  for (double lambda : {1.0, 2.0, 3.0}) {
    const PerturbationModel q = make_pendula_weak_perturbation(lambda);
    for (double s : {0.5, 1.5, 3.0}) odd = std::max(odd, std::abs(reduced_potential_at(q, s) - reduced_potential_at(q, -s)));
  }
  o.require(odd < 1e-8, "evenness defect " + num(odd));
  o.detail << "first-integral spread " << num(hi - lo) << ", evenness defect " << num(odd);
}

void stability(Outcome& o) {
  double halving = 0.0, offset = 0.0;
  for (const auto& m : {make_neumann(1.0, 2.0), make_pendula_identical(CosineSeries{{0.25, -0.125}})}) {
    const double q = comparison_point(m);
    RiccatiOptions tight;
    tight.rtol = 1e-12;
    tight.atol = 1e-14;
    const RiccatiSolution a = solve_riccati(m, q, tight);
    tight.epsilon = 0.5 * a.epsilon_start;
    halving = std::max(halving, std::abs(solve_riccati(m, q, tight).final_value() - a.final_value()));
    const double base = solve_riccati(m, q).final_value();
    for (double d : {1e-4, -1e-4}) {
      RiccatiOptions shifted;
      shifted.start_offset = d;
      offset = std::max(offset, std::abs(solve_riccati(m, q, shifted).final_value() - base));
    }
  }
  o.require(halving < 1e-8, "epsilon halving changes result by " + num(halving));
  o.require(offset < 1e-6, "start perturbation changes result by " + num(offset));
  o.detail << "epsilon halving " << num(halving) << ", start perturbation " << num(offset);
}

}  // namespace

int main() {
  const std::vector<std::function<void(Outcome&)>> criteria{
      neumann_closed_form, neumann_verdict,      initial_conditions, pendula_constant_coupling, separable_tangency,
      bracketing,          oracle_equivalence,   restriction_residuals, linear_algebra,         reversibility,
      melnikov_lambda_one, lambda_zero,          nondegeneracy_band, melnikov_properties,       stability};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i](o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    std::printf("criterion %zu: %s  %s\n", i + 1, o.pass ? "PASS" : "FAIL", o.detail.str().c_str());
    failures += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
