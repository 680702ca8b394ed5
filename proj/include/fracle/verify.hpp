#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "fracle/kinetics.hpp"

namespace fracle {

struct VerifyItem {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Knobs for the self-test. The Jacobian hook lets tests inject a faulty
/// implementation and confirm the finite-difference check catches it.
struct VerifyOptions {
  std::function<JacobianSummary(const SystemParams&)> jacobian = jacobian_summary;
  double power_rule_dt = 1e-3;
};

/// Built-in oracle suite: power rule and L1 order, Lemma 2 margins, equilibrium,
/// Jacobian against finite differences, Turing band against bisection, and the
/// δ = 1 stepper against an integer-order reference.
std::vector<VerifyItem> run_verify(const VerifyOptions& options = {});

/// Prints one PASS/FAIL line per item; returns 0 when all pass, 5 otherwise.
int cmd_verify(std::ostream& out, const VerifyOptions& options = {});

}  // namespace fracle
