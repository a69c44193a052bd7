#pragma once
// Sparse multivariate polynomials over complex coefficients, plus the
// parameterized-system container consumed by the continuation engine.
//
// A polynomial lives in a fixed variable space of `nvars` symbols; terms map
// exponent vectors to coefficients. The representation is deliberately plain:
// systems here are small (tens of variables, hundreds of terms) and all hot
// evaluation happens in the compiled family layer, not on MultiPoly itself.

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "singdist/core.hpp"

namespace singdist {

/// Exponent vector; entry i is the exponent of variable i.
using ExpVec = std::vector<std::uint8_t>;

struct ExpVecHash {
  std::size_t operator()(const ExpVec& e) const {
    std::size_t h = 1469598103934665603ull;  // FNV-1a
    for (std::uint8_t v : e) {
      h ^= v;
      h *= 1099511628211ull;
    }
    return h;
  }
};

class MultiPoly {
 public:
  using TermMap = std::unordered_map<ExpVec, Complex, ExpVecHash>;

  explicit MultiPoly(int nvars = 0) : nvars_(nvars) {}

  static MultiPoly constant(int nvars, Complex c) {
    MultiPoly p(nvars);
    if (c != Complex{}) p.terms_.emplace(ExpVec(nvars, 0), c);
    return p;
  }

  static MultiPoly variable(int nvars, int v) {
    if (v < 0 || v >= nvars) throw UnknownVariable("variable index " + std::to_string(v));
    MultiPoly p(nvars);
    ExpVec e(nvars, 0);
    e[v] = 1;
    p.terms_.emplace(std::move(e), Complex{1.0});
    return p;
  }

  int nvars() const { return nvars_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t term_count() const { return terms_.size(); }
  const TermMap& terms() const { return terms_; }

  void add_term(const ExpVec& e, Complex c) {
    if (static_cast<int>(e.size()) != nvars_) throw ArityMismatch("exponent vector size");
    auto it = terms_.find(e);
    if (it == terms_.end()) {
      if (c != Complex{}) terms_.emplace(e, c);
    } else {
      it->second += c;
      if (it->second == Complex{}) terms_.erase(it);
    }
  }

  MultiPoly& operator+=(const MultiPoly& o) {
    check_same_space(o);
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }

  MultiPoly& operator-=(const MultiPoly& o) {
    check_same_space(o);
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
  }

  MultiPoly& operator*=(Complex s) {
    if (s == Complex{}) {
      terms_.clear();
    } else {
      for (auto& [e, c] : terms_) c *= s;
    }
    return *this;
  }

  friend MultiPoly operator+(MultiPoly a, const MultiPoly& b) { return a += b; }
  friend MultiPoly operator-(MultiPoly a, const MultiPoly& b) { return a -= b; }
  friend MultiPoly operator*(MultiPoly a, Complex s) { return a *= s; }
  friend MultiPoly operator*(Complex s, MultiPoly a) { return a *= s; }

  friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
    a.check_same_space(b);
    MultiPoly r(a.nvars_);
    ExpVec e(a.nvars_);
    for (const auto& [ea, ca] : a.terms_) {
      for (const auto& [eb, cb] : b.terms_) {
        for (int i = 0; i < a.nvars_; ++i) e[i] = static_cast<std::uint8_t>(ea[i] + eb[i]);
        r.add_term(e, ca * cb);
      }
    }
    return r;
  }

  /// Partial derivative with respect to variable v.
  MultiPoly differentiate(int v) const {
    if (v < 0 || v >= nvars_) throw UnknownVariable("derivative variable " + std::to_string(v));
    MultiPoly r(nvars_);
    for (const auto& [e, c] : terms_) {
      if (e[v] == 0) continue;
      ExpVec d = e;
      d[v] -= 1;
      r.add_term(d, c * static_cast<double>(e[v]));
    }
    return r;
  }

  /// Full evaluation; `vals` must assign every variable.
  Complex evaluate(std::span<const Complex> vals) const {
    if (static_cast<int>(vals.size()) != nvars_) throw ArityMismatch("evaluate expects one value per variable");
    Complex sum{};
    for (const auto& [e, c] : terms_) {
      Complex m = c;
      for (int i = 0; i < nvars_; ++i) {
        for (int k = 0; k < e[i]; ++k) m *= vals[i];
      }
      sum += m;
    }
    return sum;
  }

  /// Evaluation from a sparse assignment; every variable actually appearing
  /// in the polynomial must be assigned.
  Complex evaluate(const std::map<int, Complex>& vals) const {
    Complex sum{};
    for (const auto& [e, c] : terms_) {
      Complex m = c;
      for (int i = 0; i < nvars_; ++i) {
        if (e[i] == 0) continue;
        auto it = vals.find(i);
        if (it == vals.end()) throw MissingAssignment("variable " + std::to_string(i));
        for (int k = 0; k < e[i]; ++k) m *= it->second;
      }
      sum += m;
    }
    return sum;
  }

  /// Substitutes `expr` (same variable space) for variable v.
  MultiPoly substitute(int v, const MultiPoly& expr) const {
    if (v < 0 || v >= nvars_) throw UnknownVariable("substitute variable " + std::to_string(v));
    check_same_space(expr);
    std::vector<MultiPoly> pow{MultiPoly::constant(nvars_, 1.0)};
    MultiPoly r(nvars_);
    for (const auto& [e, c] : terms_) {
      while (static_cast<int>(pow.size()) <= e[v]) pow.push_back(pow.back() * expr);
      ExpVec base = e;
      base[v] = 0;
      MultiPoly mono(nvars_);
      mono.terms_.emplace(std::move(base), c);
      r += mono * pow[e[v]];
    }
    return r;
  }

  int total_degree() const {
    int d = 0;
    for (const auto& [e, c] : terms_) {
      int s = 0;
      for (std::uint8_t x : e) s += x;
      d = std::max(d, s);
    }
    return d;
  }

  int degree_in(int v) const {
    if (v < 0 || v >= nvars_) throw UnknownVariable("degree variable " + std::to_string(v));
    int d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, static_cast<int>(e[v]));
    return d;
  }

  /// Human-readable rendering, deterministic term order (graded lex).
  std::string to_string(const std::vector<std::string>& names) const {
    if (static_cast<int>(names.size()) != nvars_) throw ArityMismatch("one name per variable");
    std::vector<const std::pair<const ExpVec, Complex>*> order;
    order.reserve(terms_.size());
    for (const auto& t : terms_) order.push_back(&t);
    std::sort(order.begin(), order.end(), [](auto* a, auto* b) {
      int da = 0, db = 0;
      for (auto v : a->first) da += v;
      for (auto v : b->first) db += v;
      if (da != db) return da > db;
      return a->first > b->first;
    });
    std::string out;
    for (auto* t : order) {
      if (!out.empty()) out += " + ";
      out += "(" + fmt9(t->second.real());
      if (t->second.imag() != 0.0) out += (t->second.imag() < 0 ? "" : "+") + fmt9(t->second.imag()) + "i";
      out += ")";
      for (int i = 0; i < nvars_; ++i) {
        if (t->first[i] == 0) continue;
        out += "*" + names[i];
        if (t->first[i] > 1) out += "^" + std::to_string(t->first[i]);
      }
    }
    return out.empty() ? "0" : out;
  }

 private:
  void check_same_space(const MultiPoly& o) const {
    if (o.nvars_ != nvars_) throw ArityMismatch("polynomials live in different variable spaces");
  }

  int nvars_;
  TermMap terms_;
};

/// A square (or rectangular) polynomial system where variables
/// [0, n_unknowns) are unknowns and the remainder are parameters. The
/// continuation layer treats parameters as the deformation space.
struct ParameterizedSystem {
  std::vector<MultiPoly> equations;
  int n_unknowns = 0;
  std::vector<std::string> names;  ///< unknown names first, then parameter names

  int n_vars() const { return static_cast<int>(names.size()); }
  int n_params() const { return n_vars() - n_unknowns; }
};

/// Jacobian of `eqs` with respect to the first `n_unknowns` variables.
inline std::vector<std::vector<MultiPoly>> jacobian(const std::vector<MultiPoly>& eqs, int n_unknowns) {
  std::vector<std::vector<MultiPoly>> J;
  J.reserve(eqs.size());
  for (const auto& f : eqs) {
    std::vector<MultiPoly> row;
    row.reserve(n_unknowns);
    for (int v = 0; v < n_unknowns; ++v) row.push_back(f.differentiate(v));
    J.push_back(std::move(row));
  }
  return J;
}

}  // namespace singdist
