#pragma once
// Compiled evaluation of a ParameterizedSystem.
//
// A system's equations are polynomials over [unknowns; parameters]. For path
// tracking we need fast residual/Jacobian evaluation at complex points while
// the parameters move along a homotopy. Compilation splits every term into a
// monomial in the unknowns times a coefficient polynomial in the parameters:
//
//   F_e(x; p) = sum_k  coef_{e,k}(p) * mono_{e,k}(x)
//
// Coefficient slots and monomials are interned, the Jacobian reuses the same
// slots with lowered monomials, and a homotopy only has to blend coefficient
// vectors: a segment between two parameter points is tracked as the straight
// line between their coefficient vectors (bent by the usual complex-arc
// factor), whose endpoints are exactly the two member systems.

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "singdist/core.hpp"
#include "singdist/poly.hpp"

namespace singdist {

/// Scratch buffers reused across evaluations to keep the hot path free of
/// allocation; each tracking thread owns one.
struct EvalWorkspace {
  std::vector<Complex> mono_vals;
};

class CompiledFamily {
 public:
  explicit CompiledFamily(const ParameterizedSystem& ps)
      : nu_(ps.n_unknowns), ne_(static_cast<int>(ps.equations.size())), np_(ps.n_params()) {
    // Stable term order: sort each equation's exponent vectors lexicographically
    // so the compiled layout is identical run to run.
    std::map<ExpVec, int> mono_ids, pmono_ids;
    intern_empty(mono_ids, mono_off_, mono_ent_, nu_);
    intern_empty(pmono_ids, pmono_off_, pmono_ent_, np_);

    for (int e = 0; e < ne_; ++e) {
      std::map<ExpVec, std::vector<std::pair<ExpVec, Complex>>> grouped;
      for (const auto& [exp, c] : ps.equations[e].terms()) {
        ExpVec xe(exp.begin(), exp.begin() + nu_);
        ExpVec pe(exp.begin() + nu_, exp.end());
        grouped[std::move(xe)].emplace_back(std::move(pe), c);
      }
      for (auto& [xe, pterms] : grouped) {
        int mono = intern(mono_ids, mono_off_, mono_ent_, xe);
        int slot = static_cast<int>(coef_off_.size()) - 1;
        std::sort(pterms.begin(), pterms.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto& [pe, c] : pterms)
          coef_ent_.emplace_back(intern(pmono_ids, pmono_off_, pmono_ent_, pe), c);
        coef_off_.push_back(static_cast<int>(coef_ent_.size()));
        rterms_.push_back({e, mono, slot});
        // Jacobian: lower the monomial once per variable present in it.
        for (int i = mono_off_[mono]; i < mono_off_[mono + 1]; ++i) {
          auto [var, pow] = mono_ent_[i];
          ExpVec low = xe;
          low[var] -= 1;
          int lowered = intern(mono_ids, mono_off_, mono_ent_, low);
          jterms_.push_back({e, static_cast<int>(var), lowered, slot, static_cast<double>(pow)});
        }
      }
    }
  }

  int n_unknowns() const { return nu_; }
  int n_equations() const { return ne_; }
  int n_parameters() const { return np_; }
  int n_coefficients() const { return static_cast<int>(coef_off_.size()) - 1; }

  /// Coefficient vector of the member system at a concrete parameter point.
  Eigen::VectorXcd coefficients(std::span<const Complex> params) const {
    if (static_cast<int>(params.size()) != np_) throw ArityMismatch("parameter count");
    std::vector<Complex> pv(pmono_count());
    eval_monos(pmono_off_, pmono_ent_, params, pv);
    Eigen::VectorXcd out(n_coefficients());
    for (int s = 0; s < n_coefficients(); ++s) {
      Complex acc{};
      for (int i = coef_off_[s]; i < coef_off_[s + 1]; ++i)
        acc += coef_ent_[i].second * pv[coef_ent_[i].first];
      out(s) = acc;
    }
    return out;
  }

  /// Residual only. `coefs` is a coefficient vector (or any blend of them).
  void residual(const Eigen::VectorXcd& coefs, const Eigen::VectorXcd& x, Eigen::VectorXcd& r,
                EvalWorkspace& ws) const {
    prepare(x, ws);
    r.setZero(ne_);
    for (const auto& t : rterms_) r(t.eq) += coefs(t.slot) * ws.mono_vals[t.mono];
  }

  /// Residual and Jacobian with respect to the unknowns.
  void residual_jacobian(const Eigen::VectorXcd& coefs, const Eigen::VectorXcd& x, Eigen::VectorXcd& r,
                         Eigen::MatrixXcd& J, EvalWorkspace& ws) const {
    prepare(x, ws);
    r.setZero(ne_);
    J.setZero(ne_, nu_);
    for (const auto& t : rterms_) r(t.eq) += coefs(t.slot) * ws.mono_vals[t.mono];
    for (const auto& t : jterms_) J(t.eq, t.var) += t.mult * coefs(t.slot) * ws.mono_vals[t.mono];
  }

 private:
  struct RTerm {
    int eq, mono, slot;
  };
  struct JTerm {
    int eq, var, mono, slot;
    double mult;
  };

  static void intern_empty(std::map<ExpVec, int>& ids, std::vector<int>& off,
                           std::vector<std::pair<std::uint8_t, std::uint8_t>>& ent, int nvars) {
    off = {0};
    ids.emplace(ExpVec(nvars, 0), 0);
    off.push_back(0);  // empty monomial has no entries and value 1
    (void)ent;
  }

  static int intern(std::map<ExpVec, int>& ids, std::vector<int>& off,
                    std::vector<std::pair<std::uint8_t, std::uint8_t>>& ent, const ExpVec& e) {
    auto [it, fresh] = ids.emplace(e, static_cast<int>(off.size()) - 1);
    if (!fresh) return it->second;
    for (std::size_t v = 0; v < e.size(); ++v)
      if (e[v] > 0) ent.emplace_back(static_cast<std::uint8_t>(v), e[v]);
    off.push_back(static_cast<int>(ent.size()));
    return it->second;
  }

  int pmono_count() const { return static_cast<int>(pmono_off_.size()) - 1; }

  template <class Vec>
  static void eval_monos(const std::vector<int>& off,
                         const std::vector<std::pair<std::uint8_t, std::uint8_t>>& ent, const Vec& x,
                         std::vector<Complex>& out) {
    int n = static_cast<int>(off.size()) - 1;
    out.resize(n);
    for (int m = 0; m < n; ++m) {
      Complex v{1.0};
      for (int i = off[m]; i < off[m + 1]; ++i) {
        Complex base = x[ent[i].first];
        int p = ent[i].second;
        while (p-- > 0) v *= base;
      }
      out[m] = v;
    }
  }

  void prepare(const Eigen::VectorXcd& x, EvalWorkspace& ws) const {
    eval_monos(mono_off_, mono_ent_, x, ws.mono_vals);
  }

  int nu_, ne_, np_;
  std::vector<int> mono_off_, pmono_off_;
  std::vector<std::pair<std::uint8_t, std::uint8_t>> mono_ent_, pmono_ent_;
  std::vector<int> coef_off_{0};
  std::vector<std::pair<int, Complex>> coef_ent_;
  std::vector<RTerm> rterms_;
  std::vector<JTerm> jterms_;
};

}  // namespace singdist
