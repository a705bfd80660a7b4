#pragma once

// CNF formulas and exact model counting.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace lifestate {

using BigInt = boost::multiprecision::cpp_int;

/// Variables are 1..num_vars; a literal is +v or -v.
struct Cnf {
  int num_vars = 0;
  std::vector<std::vector<int>> clauses;

  int new_var() { return ++num_vars; }
  void add(std::vector<int> clause) { clauses.push_back(std::move(clause)); }
  void add_unit(int lit) { clauses.push_back({lit}); }
  void add_equiv(int a, int b) {
    clauses.push_back({-a, b});
    clauses.push_back({a, -b});
  }
};

/// DIMACS text: "p cnf V C" followed by zero-terminated clauses.
std::string to_dimacs(const Cnf& cnf);
void write_dimacs(const Cnf& cnf, std::ostream& out);

struct CountOptions {
  int max_vars = 50'000;
};

/// Number of assignments to variables 1..num_vars satisfying every clause.
/// DPLL with unit propagation, connected-component decomposition and a
/// component cache. Throws Error{VariableBudgetExceeded} above the cap.
BigInt count_models(const Cnf& cnf, const CountOptions& options = {});

}  // namespace lifestate
