#include "lifestate/cnf.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "lifestate/error.hpp"

namespace lifestate {

std::string to_dimacs(const Cnf& cnf) {
  std::ostringstream out;
  write_dimacs(cnf, out);
  return out.str();
}

void write_dimacs(const Cnf& cnf, std::ostream& out) {
  out << "p cnf " << cnf.num_vars << ' ' << cnf.clauses.size() << '\n';
  for (const auto& c : cnf.clauses) {
    for (int lit : c) out << lit << ' ';
    out << "0\n";
  }
}

namespace {

using Clause = std::vector<int>;
using Clauses = std::vector<Clause>;

BigInt pow2(std::size_t n) {
  BigInt r = 1;
  r <<= n;
  return r;
}

class Counter {
 public:
  BigInt count(Clauses cls, std::size_t scope) {
    std::size_t assigned = 0;
    if (!propagate(cls, assigned)) return 0;

    std::unordered_map<int, int> index;  // variable -> dense index
    std::vector<int> vars;
    for (const auto& c : cls) {
      for (int lit : c) {
        int v = std::abs(lit);
        if (index.emplace(v, static_cast<int>(vars.size())).second) vars.push_back(v);
      }
    }
    BigInt result = pow2(scope - assigned - vars.size());
    if (cls.empty()) return result;

    std::vector<int> parent(vars.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const auto& c : cls) {
      int root = find(index[std::abs(c.front())]);
      for (int lit : c) {
        int r = find(index[std::abs(lit)]);
        if (r != root) parent[r] = root;
      }
    }
    std::unordered_map<int, std::size_t> comp_of_root;
    std::vector<Clauses> comps;
    std::vector<std::size_t> comp_vars;
    for (auto& c : cls) {
      int root = find(index[std::abs(c.front())]);
      auto [it, fresh] = comp_of_root.emplace(root, comps.size());
      if (fresh) {
        comps.emplace_back();
        comp_vars.push_back(0);
      }
      comps[it->second].push_back(std::move(c));
    }
    for (std::size_t i = 0; i < vars.size(); ++i) ++comp_vars[comp_of_root.at(find(static_cast<int>(i)))];

    for (std::size_t i = 0; i < comps.size(); ++i) {
      BigInt c = component(std::move(comps[i]), comp_vars[i]);
      if (c == 0) return 0;
      result *= c;
    }
    return result;
  }

 private:
  // Assigns every unit literal, simplifies, and repeats. `assigned` counts
  // the variables fixed along the way.
  static bool propagate(Clauses& cls, std::size_t& assigned) {
    std::unordered_map<int, bool> value;
    for (;;) {
      value.clear();
      for (const auto& c : cls) {
        if (c.size() != 1) continue;
        int v = std::abs(c[0]);
        bool b = c[0] > 0;
        auto [it, fresh] = value.emplace(v, b);
        if (!fresh && it->second != b) return false;
      }
      if (value.empty()) return true;
      assigned += value.size();
      Clauses next;
      next.reserve(cls.size());
      for (auto& c : cls) {
        bool satisfied = false;
        Clause kept;
        for (int lit : c) {
          auto it = value.find(std::abs(lit));
          if (it == value.end()) {
            kept.push_back(lit);
          } else if (it->second == (lit > 0)) {
            satisfied = true;
            break;
          }
        }
        if (satisfied) continue;
        if (kept.empty()) return false;
        next.push_back(std::move(kept));
      }
      cls = std::move(next);
    }
  }

  BigInt component(Clauses cls, std::size_t nvars) {
    std::sort(cls.begin(), cls.end());
    std::string key;
    key.reserve(cls.size() * 12);
    for (const auto& c : cls) {
      for (int lit : c) {
        key += std::to_string(lit);
        key += ' ';
      }
      key += '|';
    }
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;

    std::unordered_map<int, std::size_t> occurrences;
    for (const auto& c : cls) {
      for (int lit : c) ++occurrences[std::abs(lit)];
    }
    int branch = 0;
    std::size_t best = 0;
    for (const auto& [v, n] : occurrences) {
      if (n > best || (n == best && v < branch)) {
        best = n;
        branch = v;
      }
    }
    Clauses pos = cls;
    pos.push_back({branch});
    cls.push_back({-branch});
    BigInt r = count(std::move(pos), nvars) + count(std::move(cls), nvars);
    cache_.emplace(std::move(key), r);
    return r;
  }

  std::unordered_map<std::string, BigInt> cache_;
};

}  // namespace

BigInt count_models(const Cnf& cnf, const CountOptions& options) {
  if (cnf.num_vars < 0) throw Error(ErrorCode::InvalidArgument, "negative variable count");
  if (cnf.num_vars > options.max_vars) {
    throw Error(ErrorCode::VariableBudgetExceeded, std::to_string(cnf.num_vars) + " variables exceed the budget of " +
                                                       std::to_string(options.max_vars) + "; chunk the trace");
  }
  Clauses cls;
  cls.reserve(cnf.clauses.size());
  for (const auto& c : cnf.clauses) {
    Clause k;
    bool tautology = false;
    for (int lit : c) {
      if (lit == 0 || std::abs(lit) > cnf.num_vars) {
        throw Error(ErrorCode::InvalidArgument, "literal " + std::to_string(lit) + " out of range");
      }
      k.push_back(lit);
    }
    std::sort(k.begin(), k.end());
    k.erase(std::unique(k.begin(), k.end()), k.end());
    for (std::size_t i = 0; i + 1 < k.size() && !tautology; ++i) {
      tautology = std::binary_search(k.begin() + i + 1, k.end(), -k[i]);
    }
    if (k.empty()) return 0;
    if (!tautology) cls.push_back(std::move(k));
  }
  return Counter().count(std::move(cls), static_cast<std::size_t>(cnf.num_vars));
}

}  // namespace lifestate
