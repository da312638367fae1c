#include "diagcert/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

namespace diagcert {

namespace {
struct VarPool {
  std::mutex mu;
  std::vector<std::string> names;
  std::unordered_map<std::string, VarId> ids;
};
VarPool& pool() {
  static VarPool p;
  return p;
}
}  // namespace

VarId var_id(std::string_view name) {
  auto& p = pool();
  std::lock_guard lock(p.mu);
  auto it = p.ids.find(std::string(name));
  if (it != p.ids.end()) return it->second;
  VarId id = static_cast<VarId>(p.names.size());
  p.names.emplace_back(name);
  p.ids.emplace(p.names.back(), id);
  return id;
}

const std::string& var_name(VarId id) {
  auto& p = pool();
  std::lock_guard lock(p.mu);
  return p.names.at(id);
}

std::size_t var_pool_size() {
  auto& p = pool();
  std::lock_guard lock(p.mu);
  return p.names.size();
}

UnboundVariableError::UnboundVariableError(VarId id)
    : std::runtime_error("unbound variable: " + var_name(id)) {}

void Env::set(VarId id, double v) {
  if (id >= vals_.size()) {
    vals_.resize(id + 1, 0.0);
    bound_.resize(id + 1, false);
  }
  vals_[id] = v;
  bound_[id] = true;
}

double Env::get(VarId id) const {
  if (id >= vals_.size() || !bound_[id]) throw UnboundVariableError(id);
  return vals_[id];
}

bool Env::has(VarId id) const { return id < vals_.size() && bound_[id]; }

void IntervalEnv::set(VarId id, Interval iv) {
  if (id >= vals_.size()) {
    vals_.resize(id + 1);
    bound_.resize(id + 1, false);
  }
  vals_[id] = iv;
  bound_[id] = true;
}

const Interval& IntervalEnv::get(VarId id) const {
  if (id >= vals_.size() || !bound_[id]) throw UnboundVariableError(id);
  return vals_[id];
}

bool IntervalEnv::has(VarId id) const { return id < vals_.size() && bound_[id]; }

Monomial Monomial::var(VarId id, std::uint32_t e) {
  Monomial m;
  if (e > 0) m.exps = {{id, e}};
  return m;
}

unsigned Monomial::degree() const {
  unsigned d = 0;
  for (auto& [v, e] : exps) d += e;
  return d;
}

bool Monomial::operator<(const Monomial& o) const {
  if (degree() != o.degree()) return degree() < o.degree();
  return exps < o.exps;
}

double Monomial::eval(const Env& env) const {
  double r = 1.0;
  for (auto& [v, e] : exps) {
    const double x = env.get(v);
    for (std::uint32_t i = 0; i < e; ++i) r *= x;
  }
  return r;
}

Interval Monomial::interval_eval(const IntervalEnv& env) const {
  Interval r = Interval::point(1.0);
  for (auto& [v, e] : exps) r = r * ipow(env.get(v), e);
  return r;
}

std::string Monomial::str() const {
  if (exps.empty()) return "1";
  std::ostringstream os;
  bool first = true;
  for (auto& [v, e] : exps) {
    if (!first) os << "*";
    first = false;
    os << var_name(v);
    if (e > 1) os << "^" << e;
  }
  return os.str();
}

Polynomial Polynomial::constant(double c) {
  Polynomial p;
  if (c != 0.0) p.terms_ = {{Monomial::one(), c}};
  return p;
}

Polynomial Polynomial::var(VarId id, std::uint32_t e) {
  Polynomial p;
  p.terms_ = {{Monomial::var(id, e), 1.0}};
  return p;
}

Polynomial Polynomial::from_terms(std::vector<std::pair<Monomial, double>> terms) {
  Polynomial p;
  p.terms_ = std::move(terms);
  p.normalize();
  return p;
}

void Polynomial::normalize() {
  for (auto& [m, c] : terms_) {
    std::sort(m.exps.begin(), m.exps.end());
    // merge duplicate variables within a monomial
    std::vector<std::pair<VarId, std::uint32_t>> merged;
    for (auto& ve : m.exps) {
      if (!merged.empty() && merged.back().first == ve.first)
        merged.back().second += ve.second;
      else if (ve.second > 0)
        merged.push_back(ve);
    }
    m.exps = std::move(merged);
  }
  std::sort(terms_.begin(), terms_.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<Monomial, double>> out;
  for (auto& t : terms_) {
    if (!out.empty() && out.back().first == t.first)
      out.back().second += t.second;
    else
      out.push_back(t);
  }
  std::erase_if(out, [](const auto& t) { return t.second == 0.0; });
  terms_ = std::move(out);
}

unsigned Polynomial::degree() const {
  unsigned d = 0;
  for (auto& [m, c] : terms_) d = std::max(d, m.degree());
  return d;
}

std::vector<VarId> Polynomial::vars() const {
  std::vector<VarId> vs;
  for (auto& [m, c] : terms_)
    for (auto& [v, e] : m.exps) vs.push_back(v);
  std::sort(vs.begin(), vs.end());
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
  return vs;
}

double Polynomial::coeff(const Monomial& m) const {
  for (auto& [tm, c] : terms_)
    if (tm == m) return c;
  return 0.0;
}

double Polynomial::eval(const Env& env) const {
  double r = 0.0;
  for (auto& [m, c] : terms_) r += c * m.eval(env);
  return r;
}

Interval Polynomial::interval_eval(const IntervalEnv& env) const {
  Interval r = Interval::point(0.0);
  for (auto& [m, c] : terms_) r = r + c * m.interval_eval(env);
  return r;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  std::vector<std::pair<Monomial, double>> ts = terms_;
  ts.insert(ts.end(), o.terms_.begin(), o.terms_.end());
  return from_terms(std::move(ts));
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + (-o); }

Polynomial Polynomial::operator-() const {
  Polynomial p = *this;
  for (auto& t : p.terms_) t.second = -t.second;
  return p;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  std::vector<std::pair<Monomial, double>> ts;
  ts.reserve(terms_.size() * o.terms_.size());
  for (auto& [ma, ca] : terms_)
    for (auto& [mb, cb] : o.terms_) {
      Monomial m = ma;
      m.exps.insert(m.exps.end(), mb.exps.begin(), mb.exps.end());
      ts.emplace_back(std::move(m), ca * cb);
    }
  return from_terms(std::move(ts));
}

Polynomial Polynomial::operator*(double c) const {
  Polynomial p = *this;
  for (auto& t : p.terms_) t.second *= c;
  p.normalize();
  return p;
}

Polynomial Polynomial::pow(std::uint32_t e) const {
  Polynomial r = constant(1.0);
  for (std::uint32_t i = 0; i < e; ++i) r = r * (*this);
  return r;
}

Polynomial Polynomial::substitute(
    const std::unordered_map<VarId, Polynomial>& subst) const {
  Polynomial out;
  for (auto& [m, c] : terms_) {
    Polynomial term = constant(c);
    for (auto& [v, e] : m.exps) {
      auto it = subst.find(v);
      term = term * (it == subst.end() ? var(v, e) : it->second.pow(e));
    }
    out = out + term;
  }
  return out;
}

Polynomial Polynomial::rename(const std::unordered_map<VarId, VarId>& names) const {
  Polynomial p = *this;
  for (auto& [m, c] : p.terms_)
    for (auto& ve : m.exps) {
      auto it = names.find(ve.first);
      if (it != names.end()) ve.first = it->second;
    }
  p.normalize();
  return p;
}

std::string Polynomial::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto& [m, c] : terms_) {
    if (!first) os << (c >= 0 ? " + " : " - ");
    else if (c < 0) os << "-";
    first = false;
    os << std::abs(c);
    if (!m.exps.empty()) os << "*" << m.str();
  }
  return os.str();
}

CompiledPoly::CompiledPoly(const Polynomial& p, std::span<const VarId> slots) {
  std::unordered_map<VarId, std::uint32_t> slot_of;
  for (std::uint32_t i = 0; i < slots.size(); ++i) slot_of[slots[i]] = i;
  for (auto& [m, c] : p.terms()) {
    Term t;
    t.coeff = c;
    for (auto& [v, e] : m.exps) {
      auto it = slot_of.find(v);
      if (it == slot_of.end()) throw UnboundVariableError(v);
      t.slot_exps.emplace_back(it->second, e);
    }
    terms_.push_back(std::move(t));
  }
}

double CompiledPoly::eval(std::span<const double> point) const {
  double r = 0.0;
  for (auto& t : terms_) {
    double v = t.coeff;
    for (auto& [s, e] : t.slot_exps) {
      const double x = point[s];
      for (std::uint32_t i = 0; i < e; ++i) v *= x;
    }
    r += v;
  }
  return r;
}

Interval CompiledPoly::interval_eval(std::span<const Interval> box) const {
  Interval r = Interval::point(0.0);
  for (auto& t : terms_) {
    Interval v = Interval::point(t.coeff);
    for (auto& [s, e] : t.slot_exps) v = v * ipow(box[s], e);
    r = r + v;
  }
  return r;
}

Env make_env(std::span<const VarId> vars, std::span<const double> vals) {
  Env env;
  for (std::size_t i = 0; i < vars.size(); ++i) env.set(vars[i], vals[i]);
  return env;
}

}  // namespace diagcert
