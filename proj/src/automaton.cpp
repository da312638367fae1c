#include "diagcert/automaton.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace diagcert {

std::string symbol_name(Symbol s) {
  switch (s) {
    case Symbol::s1: return "sigma1";
    case Symbol::s2: return "sigma2";
    case Symbol::s3: return "sigma3";
  }
  return "?";
}

DeltaKDfa::DeltaKDfa(double delta, int K) : delta_(delta), K_(K) {
  if (!(delta > 0)) throw std::invalid_argument("delta must be positive");
  if (K < 0) throw std::invalid_argument("K must be nonnegative");
  trans_.assign(num_states(), {});
  const int F = fbar(), T = trap();
  auto set = [&](int q, Symbol s, int to) { trans_[q][static_cast<int>(s)] = to; };
  // q̄0
  set(0, Symbol::s1, 0);
  set(0, Symbol::s2, T);
  set(0, Symbol::s3, K == 0 ? F : 1);
  // chain q_1..q_K
  for (int i = 1; i <= K; ++i) {
    const int adv = (i == K) ? F : i + 1;
    set(i, Symbol::s1, adv);
    set(i, Symbol::s3, adv);
    set(i, Symbol::s2, T);
  }
  for (Symbol s : {Symbol::s1, Symbol::s2, Symbol::s3}) {
    set(F, s, F);
    set(T, s, T);
  }
}

int DeltaKDfa::step(int q, Symbol s) const {
  if (q < 0 || q >= num_states()) throw std::invalid_argument("bad DFA state");
  return trans_[q][static_cast<int>(s)];
}

std::vector<int> DeltaKDfa::nxt(int q) const {
  std::vector<int> out;
  for (Symbol s : {Symbol::s1, Symbol::s2, Symbol::s3}) out.push_back(step(q, s));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Symbol> DeltaKDfa::symbols_between(int q, int q2) const {
  std::vector<Symbol> out;
  for (Symbol s : {Symbol::s1, Symbol::s2, Symbol::s3})
    if (step(q, s) == q2) out.push_back(s);
  return out;
}

std::string DeltaKDfa::state_name(int q) const {
  if (q == 0) return "q0";
  if (q == fbar()) return "F";
  if (q == trap()) return "trap";
  return "q" + std::to_string(q);
}

nlohmann::json DeltaKDfa::to_json() const {
  nlohmann::json j;
  j["delta"] = delta_;
  j["K"] = K_;
  nlohmann::json states = nlohmann::json::array();
  nlohmann::json didx = nlohmann::json::object();
  for (int q = 0; q < num_states(); ++q) {
    states.push_back(state_name(q));
    didx[state_name(q)] = delta_index(q);
  }
  j["states"] = states;
  j["accepting"] = {state_name(fbar())};
  j["delta_index"] = didx;
  nlohmann::json tr = nlohmann::json::array();
  for (int q = 0; q < num_states(); ++q)
    for (Symbol s : {Symbol::s1, Symbol::s2, Symbol::s3})
      tr.push_back({{"from", state_name(q)},
                    {"symbol", symbol_name(s)},
                    {"to", state_name(step(q, s))}});
  j["transitions"] = tr;
  return j;
}

DeltaKDfa build_dfa(double delta, int K) { return DeltaKDfa(delta, K); }

LabelPartition::LabelPartition(const SystemModel& model, double delta)
    : model_(&model), delta_(delta) {
  if (!(delta > 0)) throw std::invalid_argument("delta must be positive");
  tie_eps_ = 1e-9 * std::max(1.0, delta * delta);
  if (!is_finite(model)) build_continuous();
}

bool LabelPartition::within_delta(std::span<const double> y1,
                                  std::span<const double> y2) const {
  double d2 = 0.0;
  for (std::size_t i = 0; i < y1.size(); ++i) {
    const double d = y1[i] - y2[i];
    d2 += d * d;
  }
  return d2 <= delta_ * delta_ + tie_eps_;
}

bool LabelPartition::in_fault_set(std::span<const double> x) const {
  if (is_finite(*model_)) {
    const auto& fm = as_finite(*model_);
    const auto si = fm.find_state(x);
    if (!si) throw DomainError("pair outside the augmented state set");
    return fm.faulty[*si];
  }
  const auto& cm = as_continuous(*model_);
  if (!cm.X.contains(x)) throw DomainError("pair outside the augmented state set");
  return cm.XF.contains(x);
}

Symbol LabelPartition::label(std::span<const double> x,
                             std::span<const double> xh) const {
  const auto y = output_of(*model_, x);
  const auto yh = output_of(*model_, xh);
  const bool p1 = within_delta(y, yh);
  const bool p2 = in_fault_set(x);
  const bool p3 = in_fault_set(xh);
  if (p1 && !p2 && !p3) return Symbol::s1;
  if (!p1 || p3) return Symbol::s2;
  return Symbol::s3;  // p1 && p2 && !p3
}

namespace {

// Slabs covering the complement of `inner` inside `outer` along one state
// copy. Each slab is returned as (dim, side, range): side=false means below.
struct Slab {
  std::size_t dim;
  bool above;
  Interval range;
};

std::vector<Slab> complement_slabs(const Box& outer, const Box& inner) {
  std::vector<Slab> out;
  for (std::size_t d = 0; d < outer.dim(); ++d) {
    if (inner.ranges[d].lo > outer.ranges[d].lo)
      out.push_back({d, false, {outer.ranges[d].lo, inner.ranges[d].lo}});
    if (inner.ranges[d].hi < outer.ranges[d].hi)
      out.push_back({d, true, {inner.ranges[d].hi, outer.ranges[d].hi}});
  }
  return out;
}

}  // namespace

void LabelPartition::build_continuous() {
  const auto& cm = as_continuous(*model_);
  const auto xv = state_vars(cm.n);
  const auto xhv = hatted_state_vars(cm.n);
  std::unordered_map<VarId, VarId> to_hat;
  for (std::size_t i = 0; i < cm.n; ++i) to_hat[xv[i]] = xhv[i];

  // P1 polynomial: delta^2 + tie - sum_j (h_j(x) - h_j(x̂))^2
  Polynomial dist2;
  for (const auto& hj : cm.h) {
    const Polynomial diff = hj - hj.rename(to_hat);
    dist2 = dist2 + diff * diff;
  }
  p1_poly_ = Polynomial::constant(delta_ * delta_ + tie_eps_) - dist2;

  Box xbox = cm.X;
  Box xhbox = cm.X;
  xhbox.vars = xhv;
  const Box R = Box::product(xbox, xhbox);

  Box xfx = cm.XF;                 // XF on the x copy
  Box xfxh = cm.XF;                // XF on the x̂ copy
  xfxh.vars = xhv;

  auto base_with = [&](std::optional<Slab> sx, bool x_in_xf,
                       std::optional<Slab> sxh, bool xh_in_xf) {
    SemiAlgebraicSet s;
    s.base = R;
    // restrict the base box where membership is a closed condition
    if (x_in_xf)
      for (std::size_t d = 0; d < cm.n; ++d) s.base.ranges[d] = cm.XF.ranges[d];
    if (xh_in_xf)
      for (std::size_t d = 0; d < cm.n; ++d)
        s.base.ranges[cm.n + d] = cm.XF.ranges[d];
    auto add_slab = [&](const Slab& sl, bool hat) {
      const std::size_t off = hat ? cm.n : 0;
      s.base.ranges[off + sl.dim] = sl.range;
      // strict outside-XF constraint on the slab's inner face
      const VarId v = hat ? xhv[sl.dim] : xv[sl.dim];
      const double bound = sl.above ? sl.range.lo : sl.range.hi;
      Polynomial p = Polynomial::var(v) - Polynomial::constant(bound);
      s.constraints.push_back({sl.above ? p : -p, Rel::Gt});
    };
    if (sx) add_slab(*sx, false);
    if (sxh) add_slab(*sxh, true);
    return s;
  };

  const auto slabs_x = complement_slabs(cm.X, cm.XF);

  // sigma1 = P1 & x notin XF & x̂ notin XF
  SetUnion s1;
  for (const auto& sx : slabs_x)
    for (const auto& sxh : slabs_x) {
      auto s = base_with(sx, false, sxh, false);
      s.constraints.push_back({p1_poly_, Rel::Ge});
      s1.branches.push_back(std::move(s));
    }
  // sigma2 = !P1 | (P1 & x̂ in XF)
  SetUnion s2;
  {
    SemiAlgebraicSet far;
    far.base = R;
    far.constraints.push_back({-p1_poly_, Rel::Gt});  // dist^2 > delta^2+tie
    s2.branches.push_back(std::move(far));
    auto close_hatf = base_with(std::nullopt, false, std::nullopt, true);
    close_hatf.constraints.push_back({p1_poly_, Rel::Ge});
    s2.branches.push_back(std::move(close_hatf));
  }
  // sigma3 = P1 & x in XF & x̂ notin XF
  SetUnion s3;
  for (const auto& sxh : slabs_x) {
    auto s = base_with(std::nullopt, true, sxh, false);
    s.constraints.push_back({p1_poly_, Rel::Ge});
    s3.branches.push_back(std::move(s));
  }
  preimages_ = {std::move(s1), std::move(s2), std::move(s3)};
}

const SetUnion& LabelPartition::preimage(Symbol s) const {
  if (is_finite(*model_))
    throw ModelKindError("semi-algebraic preimages exist for continuous models only");
  return preimages_[static_cast<int>(s)];
}

const Polynomial& LabelPartition::p1_poly() const {
  if (is_finite(*model_))
    throw ModelKindError("P1 polynomial exists for continuous models only");
  return p1_poly_;
}

SetUnion LabelPartition::guard(const DeltaKDfa& dfa, int q, int q2) const {
  SetUnion out;
  for (Symbol s : dfa.symbols_between(q, q2)) {
    const SetUnion& pre = preimage(s);
    out.branches.insert(out.branches.end(), pre.branches.begin(),
                        pre.branches.end());
  }
  return out;
}

std::optional<Symbol> LabelPartition::classify_box(
    std::span<const Interval> xbox, std::span<const Interval> xhbox) const {
  const auto& cm = as_continuous(*model_);
  IntervalEnv env;
  const auto xv = state_vars(cm.n);
  const auto xhv = hatted_state_vars(cm.n);
  for (std::size_t i = 0; i < cm.n; ++i) {
    env.set(xv[i], xbox[i]);
    env.set(xhv[i], xhbox[i]);
  }
  const Interval p1v = p1_poly_.interval_eval(env);
  std::optional<bool> p1;
  if (p1v.lo >= 0) p1 = true;
  else if (p1v.hi < 0) p1 = false;

  auto box_in = [&](std::span<const Interval> b) -> std::optional<bool> {
    bool inside = true, outside = false;
    for (std::size_t d = 0; d < cm.n; ++d) {
      const auto& xf = cm.XF.ranges[d];
      if (!(b[d].lo >= xf.lo && b[d].hi <= xf.hi)) inside = false;
      if (b[d].hi < xf.lo || b[d].lo > xf.hi) outside = true;
    }
    if (inside) return true;
    if (outside) return false;
    return std::nullopt;
  };
  const auto p2 = box_in(xbox);
  const auto p3 = box_in(xhbox);

  if (p3 && *p3) return Symbol::s2;   // P3 alone forces sigma2
  if (p1 && !*p1) return Symbol::s2;  // so does !P1
  if (!p1 || !p3) return std::nullopt;
  // p1 true and p3 false from here
  if (!p2) return std::nullopt;
  return *p2 ? Symbol::s3 : Symbol::s1;
}

}  // namespace diagcert
