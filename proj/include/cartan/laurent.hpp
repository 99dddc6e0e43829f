#pragma once
// Exact Laurent-polynomial arithmetic for torus characters.
//
// Weights live in (1/2)Z^rank and are stored as integer vectors of half-units:
// the stored vector n represents the weight n/2.  A root "2" on a rank-1 torus
// is stored as {4}, its half as {2}, and genuinely half-integral spinor
// weights come out as odd entries.  Coefficients are 64-bit integers, so sums,
// products and exact quotients of characters carry no rounding at all; the
// only floating point happens at evaluation time.

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace cartan {

using WeightVec = std::vector<int>;  // half-units: stored n <-> weight n/2

inline WeightVec weight_add(const WeightVec& a, const WeightVec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("weight rank mismatch");
  WeightVec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline WeightVec weight_sub(const WeightVec& a, const WeightVec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("weight rank mismatch");
  WeightVec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline WeightVec weight_neg(const WeightVec& a) {
  WeightVec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = -a[i];
  return r;
}

// e^{i <w, theta>} with w in half-units.
inline std::complex<double> weight_eval(const WeightVec& w,
                                        const std::vector<double>& angles) {
  if (w.size() != angles.size())
    throw std::invalid_argument("weight/angle rank mismatch");
  double phase = 0.0;
  for (size_t i = 0; i < w.size(); ++i) phase += 0.5 * double(w[i]) * angles[i];
  return {std::cos(phase), std::sin(phase)};
}

struct FormalCharacter {
  int rank = 0;
  std::map<WeightVec, std::int64_t> terms;  // sorted; zero coefficients never stored

  static FormalCharacter zero(int rank) { return FormalCharacter{rank, {}}; }

  static FormalCharacter monomial(int rank, const WeightVec& w,
                                  std::int64_t c = 1) {
    if (int(w.size()) != rank) throw std::invalid_argument("weight rank mismatch");
    FormalCharacter f{rank, {}};
    if (c != 0) f.terms[w] = c;
    return f;
  }

  static FormalCharacter one(int rank) {
    return monomial(rank, WeightVec(rank, 0), 1);
  }

  bool is_zero() const { return terms.empty(); }

  void add_term(const WeightVec& w, std::int64_t c) {
    if (int(w.size()) != rank) throw std::invalid_argument("weight rank mismatch");
    auto it = terms.find(w);
    if (it == terms.end()) {
      if (c != 0) terms[w] = c;
    } else {
      it->second += c;
      if (it->second == 0) terms.erase(it);
    }
  }

  std::complex<double> evaluate(const std::vector<double>& angles) const {
    std::complex<double> s{0.0, 0.0};
    for (const auto& [w, c] : terms) s += double(c) * weight_eval(w, angles);
    return s;
  }

  bool operator==(const FormalCharacter& o) const {
    return rank == o.rank && terms == o.terms;
  }
};

inline FormalCharacter operator+(const FormalCharacter& a,
                                 const FormalCharacter& b) {
  if (a.rank != b.rank) throw std::invalid_argument("character rank mismatch");
  FormalCharacter r = a;
  for (const auto& [w, c] : b.terms) r.add_term(w, c);
  return r;
}

inline FormalCharacter operator-(const FormalCharacter& a,
                                 const FormalCharacter& b) {
  if (a.rank != b.rank) throw std::invalid_argument("character rank mismatch");
  FormalCharacter r = a;
  for (const auto& [w, c] : b.terms) r.add_term(w, -c);
  return r;
}

inline FormalCharacter operator*(const FormalCharacter& a,
                                 const FormalCharacter& b) {
  if (a.rank != b.rank) throw std::invalid_argument("character rank mismatch");
  FormalCharacter r = FormalCharacter::zero(a.rank);
  for (const auto& [wa, ca] : a.terms)
    for (const auto& [wb, cb] : b.terms) r.add_term(weight_add(wa, wb), ca * cb);
  return r;
}

inline FormalCharacter operator*(std::int64_t c, const FormalCharacter& a) {
  FormalCharacter r = FormalCharacter::zero(a.rank);
  for (const auto& [w, cw] : a.terms) r.add_term(w, c * cw);
  return r;
}

// Exact quotient a/b in the Laurent ring.  Cancels against the lex-largest
// term of b; throws if b does not divide a exactly.  Lex order on the weight
// lattice is translation invariant, so for an exact quotient the iteration
// count equals the number of quotient terms.
inline FormalCharacter divide_exact(const FormalCharacter& a,
                                    const FormalCharacter& b) {
  if (a.rank != b.rank) throw std::invalid_argument("character rank mismatch");
  if (b.is_zero()) throw std::invalid_argument("division by zero character");
  FormalCharacter q = FormalCharacter::zero(a.rank);
  FormalCharacter r = a;
  const auto lead = *b.terms.rbegin();  // lex-largest term of the divisor
  size_t guard = 16 * (a.terms.size() + b.terms.size()) + 64;
  while (!r.is_zero()) {
    if (guard-- == 0) throw std::runtime_error("character division does not terminate: not divisible");
    const auto top = *r.terms.rbegin();
    if (top.second % lead.second != 0)
      throw std::runtime_error("character division: coefficient not divisible");
    WeightVec w = weight_sub(top.first, lead.first);
    std::int64_t c = top.second / lead.second;
    q.add_term(w, c);
    FormalCharacter piece = FormalCharacter::monomial(a.rank, w, c) * b;
    r = r - piece;
  }
  return q;
}

inline std::string weight_to_string(const WeightVec& w) {
  std::string s = "(";
  char buf[32];
  for (size_t i = 0; i < w.size(); ++i) {
    if (i) s += ",";
    if (w[i] % 2 == 0) {
      std::snprintf(buf, sizeof buf, "%d", w[i] / 2);
    } else {
      std::snprintf(buf, sizeof buf, "%d/2", w[i]);
    }
    s += buf;
  }
  return s + ")";
}

// Sorted term list, stable across runs; meant for snapshot tests.
inline std::string to_string(const FormalCharacter& f) {
  if (f.is_zero()) return "0";
  std::string s;
  char buf[32];
  for (const auto& [w, c] : f.terms) {
    if (!s.empty()) s += " ";
    std::snprintf(buf, sizeof buf, "%+lld*e", static_cast<long long>(c));
    s += buf;
    s += weight_to_string(w);
  }
  return s;
}

}  // namespace cartan
