#include "diagcert/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace diagcert {

std::string rel_str(Rel r) {
  switch (r) {
    case Rel::Ge: return ">= 0";
    case Rel::Gt: return "> 0";
    case Rel::Le: return "<= 0";
    case Rel::Lt: return "< 0";
  }
  return "?";
}

RelStatus rel_check(double v, Rel rel, double m) {
  switch (rel) {
    case Rel::Ge: return v >= -m ? RelStatus::Pass : RelStatus::Fail;
    case Rel::Le: return v <= m ? RelStatus::Pass : RelStatus::Fail;
    case Rel::Gt:
      if (v >= m) return RelStatus::Pass;
      return v <= 0.0 ? RelStatus::Fail : RelStatus::Undecided;
    case Rel::Lt:
      if (v <= -m) return RelStatus::Pass;
      return v >= 0.0 ? RelStatus::Fail : RelStatus::Undecided;
  }
  return RelStatus::Undecided;
}

bool rel_definitely_pass(const Interval& v, Rel rel, double m) {
  switch (rel) {
    case Rel::Ge: return v.lo >= -m;
    case Rel::Le: return v.hi <= m;
    case Rel::Gt: return v.lo >= m;
    case Rel::Lt: return v.hi <= -m;
  }
  return false;
}

bool rel_definitely_fail(const Interval& v, Rel rel, double m) {
  switch (rel) {
    case Rel::Ge: return v.hi < -m;
    case Rel::Le: return v.lo > m;
    case Rel::Gt: return v.hi <= 0.0;
    case Rel::Lt: return v.lo >= 0.0;
  }
  return false;
}

bool Box::contains(std::span<const double> p) const {
  for (std::size_t i = 0; i < ranges.size(); ++i)
    if (!ranges[i].contains(p[i])) return false;
  return true;
}

double Box::max_width() const {
  double w = 0.0;
  for (auto& r : ranges) w = std::max(w, r.width());
  return w;
}

std::size_t Box::widest_dim() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < ranges.size(); ++i)
    if (ranges[i].width() > ranges[best].width()) best = i;
  return best;
}

std::pair<Box, Box> Box::split(std::size_t d) const {
  Box a = *this, b = *this;
  const double m = ranges[d].mid();
  a.ranges[d].hi = m;
  b.ranges[d].lo = m;
  return {a, b};
}

std::vector<double> Box::center() const {
  std::vector<double> c(ranges.size());
  for (std::size_t i = 0; i < ranges.size(); ++i) c[i] = ranges[i].mid();
  return c;
}

std::vector<double> Box::sample(std::mt19937_64& rng) const {
  std::vector<double> p(ranges.size());
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    std::uniform_real_distribution<double> d(ranges[i].lo, ranges[i].hi);
    p[i] = d(rng);
  }
  return p;
}

IntervalEnv Box::interval_env() const {
  IntervalEnv env;
  for (std::size_t i = 0; i < vars.size(); ++i) env.set(vars[i], ranges[i]);
  return env;
}

Box Box::product(const Box& a, const Box& b) {
  Box r = a;
  r.vars.insert(r.vars.end(), b.vars.begin(), b.vars.end());
  r.ranges.insert(r.ranges.end(), b.ranges.begin(), b.ranges.end());
  return r;
}

Box make_box(std::vector<VarId> vars, std::vector<Interval> ranges) {
  if (vars.size() != ranges.size())
    throw std::invalid_argument("box: dimension mismatch");
  for (std::size_t i = 0; i < ranges.size(); ++i)
    if (!(ranges[i].lo <= ranges[i].hi))
      throw std::invalid_argument("box: lo > hi in dimension " + var_name(vars[i]));
  return Box{std::move(vars), std::move(ranges)};
}

bool box_subset(const Box& inner, const Box& outer) {
  for (std::size_t i = 0; i < inner.ranges.size(); ++i)
    if (inner.ranges[i].lo < outer.ranges[i].lo ||
        inner.ranges[i].hi > outer.ranges[i].hi)
      return false;
  return true;
}

bool SemiAlgebraicSet::contains(std::span<const double> p) const {
  if (!base.contains(p)) return false;
  if (constraints.empty()) return true;
  const Env env = make_env(base.vars, p);
  for (auto& c : constraints) {
    const double v = c.poly.eval(env);
    switch (c.rel) {
      case Rel::Ge: if (!(v >= 0)) return false; break;
      case Rel::Gt: if (!(v > 0)) return false; break;
      case Rel::Le: if (!(v <= 0)) return false; break;
      case Rel::Lt: if (!(v < 0)) return false; break;
    }
  }
  return true;
}

bool SemiAlgebraicSet::definitely_excludes(std::span<const Interval> box) const {
  if (constraints.empty()) return false;
  IntervalEnv env;
  for (std::size_t i = 0; i < base.vars.size(); ++i) env.set(base.vars[i], box[i]);
  for (auto& c : constraints) {
    const Interval v = c.poly.interval_eval(env);
    const bool excluded = (c.rel == Rel::Ge && v.hi < 0) ||
                          (c.rel == Rel::Gt && v.hi <= 0) ||
                          (c.rel == Rel::Le && v.lo > 0) ||
                          (c.rel == Rel::Lt && v.lo >= 0);
    if (excluded) return true;
  }
  return false;
}

bool SemiAlgebraicSet::definitely_contains(std::span<const Interval> box) const {
  IntervalEnv env;
  for (std::size_t i = 0; i < base.vars.size(); ++i) env.set(base.vars[i], box[i]);
  for (auto& c : constraints) {
    const Interval v = c.poly.interval_eval(env);
    const bool inside = (c.rel == Rel::Ge && v.lo >= 0) ||
                        (c.rel == Rel::Gt && v.lo > 0) ||
                        (c.rel == Rel::Le && v.hi <= 0) ||
                        (c.rel == Rel::Lt && v.hi < 0);
    if (!inside) return false;
  }
  return true;
}

bool SetUnion::contains(std::span<const double> p) const {
  for (auto& b : branches)
    if (b.contains(p)) return true;
  return false;
}

const std::vector<VarId>& SetUnion::vars() const {
  static const std::vector<VarId> kEmpty;
  return branches.empty() ? kEmpty : branches.front().base.vars;
}

}  // namespace diagcert
