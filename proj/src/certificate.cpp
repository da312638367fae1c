#include "diagcert/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace diagcert {

double Certificate::eval(int delta_index, std::span<const double> x,
                         std::span<const double> xh) const {
  const std::size_t n = x.size();
  Env env;
  const auto xv = state_vars(n);
  const auto xhv = hatted_state_vars(n);
  for (std::size_t i = 0; i < n; ++i) {
    env.set(xv[i], x[i]);
    env.set(xhv[i], xh[i]);
  }
  return locations.at(delta_index).eval(env);
}

Certificate certificate_from_json(const nlohmann::json& doc) {
  Certificate c;
  const std::string kind = doc.at("kind").get<std::string>();
  if (kind != "B" && kind != "V") throw SpecError("certificate kind must be B or V");
  c.kind = kind[0];
  c.delta = doc.at("delta").get<double>();
  c.K = doc.at("K").get<int>();
  if (c.K < 0) throw SpecError("certificate K must be nonnegative");
  c.locations.assign(c.K + 3, Polynomial{});
  std::vector<bool> seen(c.K + 3, false);
  for (const auto& loc : doc.at("locations")) {
    const int r = loc.at("delta_index").get<int>();
    if (r < 0 || r > c.K + 2) throw SpecError("delta_index out of range");
    if (seen[r]) throw SpecError("duplicate delta_index " + std::to_string(r));
    seen[r] = true;
    c.locations[r] = polynomial_from_json(loc.at("terms"));
  }
  for (int r = 0; r <= c.K + 2; ++r)
    if (!seen[r])
      throw SpecError("certificate is missing location " + std::to_string(r));
  return c;
}

nlohmann::json certificate_to_json(const Certificate& c) {
  nlohmann::json j;
  j["kind"] = std::string(1, c.kind);
  j["delta"] = c.delta;
  j["K"] = c.K;
  nlohmann::json locs = nlohmann::json::array();
  for (int r = 0; r < static_cast<int>(c.locations.size()); ++r)
    locs.push_back({{"delta_index", r},
                    {"terms", polynomial_to_json(c.locations[r])}});
  j["locations"] = locs;
  return j;
}

Certificate load_certificate_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw SpecError("invalid JSON in " + path.string() + ": " + e.what());
  }
  return certificate_from_json(doc);
}

CertTemplate CertTemplate::uniform_degree(char kind, int K, std::size_t n,
                                          int degree) {
  CertTemplate t;
  t.kind = kind;
  t.K = K;
  const auto xv = state_vars(n);
  const auto xhv = hatted_state_vars(n);
  std::vector<VarId> vars = xv;
  vars.insert(vars.end(), xhv.begin(), xhv.end());

  std::vector<Monomial> monos;
  std::vector<std::uint32_t> exps(vars.size(), 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t d, int left) {
    if (d == vars.size()) {
      Monomial m;
      for (std::size_t i = 0; i < vars.size(); ++i)
        if (exps[i] > 0) m.exps.emplace_back(vars[i], exps[i]);
      monos.push_back(std::move(m));
      return;
    }
    for (int e = 0; e <= left; ++e) {
      exps[d] = static_cast<std::uint32_t>(e);
      rec(d + 1, left - e);
    }
    exps[d] = 0;
  };
  rec(0, degree);
  std::sort(monos.begin(), monos.end());
  t.monomials.assign(K + 3, monos);
  return t;
}

std::size_t CertTemplate::num_coeffs() const {
  std::size_t s = 0;
  for (auto& m : monomials) s += m.size();
  return s;
}

std::size_t CertTemplate::coeff_offset(int delta_index) const {
  std::size_t s = 0;
  for (int r = 0; r < delta_index; ++r) s += monomials[r].size();
  return s;
}

Certificate CertTemplate::instantiate(double delta,
                                      std::span<const double> coeffs) const {
  Certificate c;
  c.kind = kind;
  c.delta = delta;
  c.K = K;
  std::size_t at = 0;
  for (auto& ms : monomials) {
    std::vector<std::pair<Monomial, double>> terms;
    for (auto& m : ms) terms.emplace_back(m, coeffs[at++]);
    c.locations.push_back(Polynomial::from_terms(std::move(terms)));
  }
  return c;
}

namespace cond_detail {

std::vector<Polynomial> hatted_dynamics(const ContinuousModel& m) {
  std::unordered_map<VarId, VarId> ren;
  const auto xv = state_vars(m.n);
  const auto xhv = hatted_state_vars(m.n);
  const auto uv = input_vars(m.m);
  const auto uhv = hatted_input_vars(m.m);
  for (std::size_t i = 0; i < m.n; ++i) ren[xv[i]] = xhv[i];
  for (std::size_t i = 0; i < m.m; ++i) ren[uv[i]] = uhv[i];
  std::vector<Polynomial> out;
  for (auto& f : m.f) out.push_back(f.rename(ren));
  return out;
}

std::unordered_map<VarId, Polynomial> successor_subst(const ContinuousModel& m) {
  std::unordered_map<VarId, Polynomial> subst;
  const auto xv = state_vars(m.n);
  const auto xhv = hatted_state_vars(m.n);
  const auto fh = hatted_dynamics(m);
  for (std::size_t i = 0; i < m.n; ++i) {
    subst[xv[i]] = m.f[i];
    subst[xhv[i]] = fh[i];
  }
  return subst;
}

namespace {
Box quad_box(const ContinuousModel& m) {
  Box xb = m.X;
  Box xhb = m.X;
  xhb.vars = hatted_state_vars(m.n);
  Box ub = m.U;
  Box uhb = m.U;
  uhb.vars = hatted_input_vars(m.m);
  return Box::product(Box::product(xb, xhb), Box::product(ub, uhb));
}
}  // namespace

SetUnion compose_guard_with_dynamics(const ContinuousModel& m,
                                     const SetUnion& guard) {
  const auto subst = successor_subst(m);
  const Box base = quad_box(m);
  const auto fh = hatted_dynamics(m);
  SetUnion out;
  for (const auto& br : guard.branches) {
    SemiAlgebraicSet s;
    s.base = base;
    // successor-pair membership in the branch's base box
    for (std::size_t d = 0; d < br.base.dim(); ++d) {
      const Polynomial& succ = d < m.n ? m.f[d] : fh[d - m.n];
      const auto& r = br.base.ranges[d];
      s.constraints.push_back({succ - Polynomial::constant(r.lo), Rel::Ge});
      s.constraints.push_back({Polynomial::constant(r.hi) - succ, Rel::Ge});
    }
    for (const auto& c : br.constraints)
      s.constraints.push_back({c.poly.substitute(subst), c.rel});
    out.branches.push_back(std::move(s));
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> finite_pairs(const FiniteModel& m) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(m.states.size() * m.states.size());
  for (std::size_t i = 0; i < m.states.size(); ++i)
    for (std::size_t j = 0; j < m.states.size(); ++j) out.emplace_back(i, j);
  return out;
}

}  // namespace cond_detail

namespace {

std::vector<VarId> pair_vars(std::size_t n) {
  auto v = state_vars(n);
  const auto hv = hatted_state_vars(n);
  v.insert(v.end(), hv.begin(), hv.end());
  return v;
}

std::vector<VarId> quad_vars(std::size_t n, std::size_t m) {
  auto v = pair_vars(n);
  const auto uv = input_vars(m);
  const auto uhv = hatted_input_vars(m);
  v.insert(v.end(), uv.begin(), uv.end());
  v.insert(v.end(), uhv.begin(), uhv.end());
  return v;
}

std::vector<double> concat(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

// Base box X0 x X0 over (x, x̂) for the initial conditions (Theorem 2/3
// constrain B/V on X̃0, i.e. initial pairs only).
Box initial_pair_box(const ContinuousModel& m) {
  Box a = m.X0;
  Box b = m.X0;
  b.vars = hatted_state_vars(m.n);
  return Box::product(a, b);
}

SetUnion initial_guard_domain(const ContinuousModel& m, const LabelPartition& part,
                              const DeltaKDfa& dfa, int q) {
  const Box init = initial_pair_box(m);
  SetUnion out;
  for (Symbol s : dfa.symbols_between(dfa.q0(), q)) {
    for (const auto& br : part.preimage(s).branches) {
      SemiAlgebraicSet piece = br;
      bool feasible = true;
      for (std::size_t d = 0; d < piece.base.dim(); ++d) {
        const Interval clipped{std::max(piece.base.ranges[d].lo, init.ranges[d].lo),
                               std::min(piece.base.ranges[d].hi, init.ranges[d].hi)};
        if (clipped.lo > clipped.hi) {
          feasible = false;
          break;
        }
        piece.base.ranges[d] = clipped;
      }
      if (feasible) out.branches.push_back(std::move(piece));
    }
  }
  return out;
}

Box full_pair_box(const ContinuousModel& m) {
  Box a = m.X;
  Box b = m.X;
  b.vars = hatted_state_vars(m.n);
  return Box::product(a, b);
}

}  // namespace

std::vector<UniversalConstraint> b_conditions(const SystemModel& model,
                                              const DeltaKDfa& dfa,
                                              const LabelPartition& part,
                                              const Certificate& cert,
                                              const ConditionOptions& opt) {
  if (cert.kind != 'B') throw SpecError("b_conditions requires a B certificate");
  std::vector<UniversalConstraint> out;
  const int K = dfa.K();

  if (is_finite(model)) {
    const auto& fm = as_finite(model);
    // (15): initial product states
    std::map<int, UniversalConstraint> init;
    for (int q : dfa.nxt(dfa.q0())) {
      UniversalConstraint c;
      c.name = "init[" + dfa.state_name(q) + "]";
      c.vars = pair_vars(fm.n);
      c.rel = Rel::Le;
      c.margin = opt.strict_margin;
      c.finite_points.emplace();
      c.finite_values.emplace();
      init.emplace(q, std::move(c));
    }
    for (auto i : fm.initial)
      for (auto j : fm.initial) {
        const Symbol s = part.label(fm.states[i], fm.states[j]);
        const int q = dfa.step(dfa.q0(), s);
        auto& c = init.at(q);
        c.finite_points->push_back(concat(fm.states[i], fm.states[j]));
        c.finite_values->push_back(
            cert.eval(dfa.delta_index(q), fm.states[i], fm.states[j]));
      }
    for (auto& [q, c] : init) out.push_back(std::move(c));

    // (16): positivity at F̄ over all pairs
    {
      UniversalConstraint c;
      c.name = "positivity[F]";
      c.vars = pair_vars(fm.n);
      c.rel = Rel::Gt;
      c.margin = opt.strict_margin;
      c.finite_points.emplace();
      c.finite_values.emplace();
      for (auto& [i, j] : cond_detail::finite_pairs(fm)) {
        c.finite_points->push_back(concat(fm.states[i], fm.states[j]));
        c.finite_values->push_back(
            cert.eval(dfa.delta_index(dfa.fbar()), fm.states[i], fm.states[j]));
      }
      out.push_back(std::move(c));
    }

    // (17): non-increase along every edge
    for (int q = 0; q < dfa.num_states(); ++q) {
      if (q == dfa.trap()) continue;
      if (opt.exclude_accepting_decrease && q == dfa.fbar()) continue;
      std::map<int, UniversalConstraint> per_edge;
      for (int q2 : dfa.nxt(q)) {
        UniversalConstraint c;
        c.name = "noninc[" + dfa.state_name(q) + "->" + dfa.state_name(q2) + "]";
        c.vars = quad_vars(fm.n, fm.inputs.empty() ? 0 : fm.inputs[0].size());
        c.rel = Rel::Le;
        c.margin = opt.strict_margin;
        c.finite_points.emplace();
        c.finite_values.emplace();
        per_edge.emplace(q2, std::move(c));
      }
      for (auto& [i, j] : cond_detail::finite_pairs(fm))
        for (std::size_t u = 0; u < fm.inputs.size(); ++u)
          for (std::size_t uh = 0; uh < fm.inputs.size(); ++uh) {
            const std::size_t ni = fm.trans[i][u], nj = fm.trans[j][uh];
            const Symbol s = part.label(fm.states[ni], fm.states[nj]);
            const int q2 = dfa.step(q, s);
            auto& c = per_edge.at(q2);
            auto pt = concat(fm.states[i], fm.states[j]);
            auto uu = concat(fm.inputs[u], fm.inputs[uh]);
            pt.insert(pt.end(), uu.begin(), uu.end());
            c.finite_points->push_back(std::move(pt));
            c.finite_values->push_back(
                cert.eval(dfa.delta_index(q2), fm.states[ni], fm.states[nj]) -
                cert.eval(dfa.delta_index(q), fm.states[i], fm.states[j]));
          }
      for (auto& [q2, c] : per_edge) out.push_back(std::move(c));
    }
    return out;
  }

  const auto& cm = as_continuous(model);
  const auto pv = pair_vars(cm.n);
  const auto hatf = cond_detail::hatted_dynamics(cm);
  const auto subst = cond_detail::successor_subst(cm);

  // (15)
  for (int q : dfa.nxt(dfa.q0())) {
    UniversalConstraint c;
    c.name = "init[" + dfa.state_name(q) + "]";
    c.vars = pv;
    c.domain = initial_guard_domain(cm, part, dfa, q);
    c.body = cert.locations[dfa.delta_index(q)];
    c.rel = Rel::Le;
    c.margin = opt.strict_margin;
    out.push_back(std::move(c));
  }
  // (16): all of R
  {
    UniversalConstraint c;
    c.name = "positivity[F]";
    c.vars = pv;
    SemiAlgebraicSet whole;
    whole.base = full_pair_box(cm);
    c.domain.branches.push_back(whole);
    c.body = cert.locations[dfa.delta_index(dfa.fbar())];
    c.rel = Rel::Gt;
    c.margin = opt.strict_margin;
    out.push_back(std::move(c));
  }
  // (17)
  for (int q = 0; q < dfa.num_states(); ++q) {
    if (q == dfa.trap()) continue;
    if (opt.exclude_accepting_decrease && q == dfa.fbar()) continue;
    for (int q2 : dfa.nxt(q)) {
      UniversalConstraint c;
      c.name = "noninc[" + dfa.state_name(q) + "->" + dfa.state_name(q2) + "]";
      c.vars = quad_vars(cm.n, cm.m);
      c.domain = cond_detail::compose_guard_with_dynamics(
          cm, part.guard(dfa, q, q2));
      c.body = cert.locations[dfa.delta_index(q2)].substitute(subst) -
               cert.locations[dfa.delta_index(q)];
      c.rel = Rel::Le;
      c.margin = opt.strict_margin;
      out.push_back(std::move(c));
    }
  }
  return out;
}

VConditions v_conditions(const SystemModel& model, const DeltaKDfa& dfa,
                         const LabelPartition& part, const Certificate& cert,
                         const std::optional<VDomainInfo>& vdom,
                         const ConditionOptions& opt) {
  if (cert.kind != 'V') throw SpecError("v_conditions requires a V certificate");
  VConditions out;

  if (is_finite(model)) {
    const auto& fm = as_finite(model);
    // (24)
    std::map<int, UniversalConstraint> init;
    for (int q : dfa.nxt(dfa.q0())) {
      UniversalConstraint c;
      c.name = "vinit[" + dfa.state_name(q) + "]";
      c.vars = pair_vars(fm.n);
      c.rel = Rel::Le;
      c.margin = opt.strict_margin;
      c.finite_points.emplace();
      c.finite_values.emplace();
      init.emplace(q, std::move(c));
    }
    for (auto i : fm.initial)
      for (auto j : fm.initial) {
        const Symbol s = part.label(fm.states[i], fm.states[j]);
        const int q = dfa.step(dfa.q0(), s);
        auto& c = init.at(q);
        c.finite_points->push_back(concat(fm.states[i], fm.states[j]));
        c.finite_values->push_back(
            cert.eval(dfa.delta_index(q), fm.states[i], fm.states[j]));
      }
    for (auto& [q, c] : init) out.universal.push_back(std::move(c));

    // (25): P̃(R) \ R is empty for finite models (successors stay in the
    // state set), so the condition is vacuous; emit it with no points so the
    // report still shows it.
    for (int q = 0; q < dfa.num_states(); ++q) {
      if (q == dfa.fbar()) continue;
      UniversalConstraint c;
      c.name = "vshell[" + dfa.state_name(q) + "]";
      c.vars = pair_vars(fm.n);
      c.rel = Rel::Gt;
      c.margin = opt.strict_margin;
      c.finite_points.emplace();
      c.finite_values.emplace();
      out.universal.push_back(std::move(c));
    }

    // (26): strict decrease, existential over inputs and edges
    for (int q = 0; q < dfa.num_states(); ++q) {
      if (q == dfa.fbar()) continue;
      ForallExistsConstraint c;
      c.name = "vdec[" + dfa.state_name(q) + "]";
      c.outer_vars = pair_vars(fm.n);
      c.margin = opt.strict_margin;
      c.finite_outer.emplace();
      c.finite_values.emplace();
      for (auto& [i, j] : cond_detail::finite_pairs(fm)) {
        std::vector<double> vals;
        for (std::size_t u = 0; u < fm.inputs.size(); ++u)
          for (std::size_t uh = 0; uh < fm.inputs.size(); ++uh) {
            const std::size_t ni = fm.trans[i][u], nj = fm.trans[j][uh];
            const Symbol s = part.label(fm.states[ni], fm.states[nj]);
            const int q2 = dfa.step(q, s);
            vals.push_back(
                cert.eval(dfa.delta_index(q2), fm.states[ni], fm.states[nj]) -
                cert.eval(dfa.delta_index(q), fm.states[i], fm.states[j]));
          }
        c.finite_outer->push_back(concat(fm.states[i], fm.states[j]));
        c.finite_values->push_back(std::move(vals));
      }
      out.decrease.push_back(std::move(c));
    }
    return out;
  }

  const auto& cm = as_continuous(model);
  if (!vdom)
    throw SpecError("v_conditions on a continuous model needs a VDomainInfo");
  const auto pv = pair_vars(cm.n);
  const auto subst = cond_detail::successor_subst(cm);

  // (24)
  for (int q : dfa.nxt(dfa.q0())) {
    UniversalConstraint c;
    c.name = "vinit[" + dfa.state_name(q) + "]";
    c.vars = pv;
    c.domain = initial_guard_domain(cm, part, dfa, q);
    c.body = cert.locations[dfa.delta_index(q)];
    c.rel = Rel::Le;
    c.margin = opt.strict_margin;
    out.universal.push_back(std::move(c));
  }
  // (25)
  for (int q = 0; q < dfa.num_states(); ++q) {
    if (q == dfa.fbar()) continue;
    UniversalConstraint c;
    c.name = "vshell[" + dfa.state_name(q) + "]";
    c.vars = pv;
    c.domain = vdom->pre_complement;
    c.body = cert.locations[dfa.delta_index(q)];
    c.rel = Rel::Gt;
    c.margin = opt.strict_margin;
    out.universal.push_back(std::move(c));
  }
  // (26)
  for (int q = 0; q < dfa.num_states(); ++q) {
    if (q == dfa.fbar()) continue;
    ForallExistsConstraint c;
    c.name = "vdec[" + dfa.state_name(q) + "]";
    c.outer_vars = pv;
    c.inner_vars = input_vars(cm.m);
    const auto uhv = hatted_input_vars(cm.m);
    c.inner_vars.insert(c.inner_vars.end(), uhv.begin(), uhv.end());
    SemiAlgebraicSet whole;
    whole.base = full_pair_box(cm);
    c.outer_domain.branches.push_back(whole);
    Box ub = cm.U;
    Box uhb = cm.U;
    uhb.vars = uhv;
    c.inner_box = Box::product(ub, uhb);
    c.margin = opt.strict_margin;
    for (int q2 : dfa.nxt(q)) {
      FEEdge e;
      e.q_to = q2;
      e.guard = cond_detail::compose_guard_with_dynamics(cm, part.guard(dfa, q, q2));
      e.body = cert.locations[dfa.delta_index(q2)].substitute(subst) -
               cert.locations[dfa.delta_index(q)];
      c.edges.push_back(std::move(e));
    }
    out.decrease.push_back(std::move(c));
  }
  return out;
}

VDomainInfo compute_pre_complement(const ContinuousModel& model, double resolution) {
  if (!(resolution > 0)) throw std::invalid_argument("resolution must be positive");
  const std::size_t n = model.n;
  std::string note = "computed";

  // Per-dimension inflation radius: start from the interval-image overhang of
  // f over X x U and double until an outer ring provably cannot map into X.
  IntervalEnv env;
  for (std::size_t d = 0; d < n; ++d) env.set(model.X.vars[d], model.X.ranges[d]);
  for (std::size_t d = 0; d < model.m; ++d)
    env.set(model.U.vars[d], model.U.ranges[d]);
  std::vector<double> radius(n, resolution);
  for (std::size_t d = 0; d < n; ++d) {
    const Interval img = model.f[d].interval_eval(env);
    radius[d] = std::max({radius[d], model.X.ranges[d].lo - img.lo,
                          img.hi - model.X.ranges[d].hi});
  }
  auto inflated = [&](double mult) {
    Box b = model.X;
    for (std::size_t d = 0; d < n; ++d) {
      b.ranges[d].lo -= mult * radius[d];
      b.ranges[d].hi += mult * radius[d];
    }
    return b;
  };
  // ring check: no point in inflate(2r) \ inflate(r) maps into X
  auto ring_maps_in = [&](double mult) {
    const Box outer = inflated(2 * mult), innr = inflated(mult);
    for (std::size_t d = 0; d < n; ++d)
      for (int side = 0; side < 2; ++side) {
        Box slab = outer;
        if (side == 0)
          slab.ranges[d] = {outer.ranges[d].lo, innr.ranges[d].lo};
        else
          slab.ranges[d] = {innr.ranges[d].hi, outer.ranges[d].hi};
        IntervalEnv se;
        for (std::size_t k = 0; k < n; ++k) se.set(model.X.vars[k], slab.ranges[k]);
        for (std::size_t k = 0; k < model.m; ++k)
          se.set(model.U.vars[k], model.U.ranges[k]);
        bool can_map_in = true;
        for (std::size_t k = 0; k < n; ++k) {
          const Interval img = model.f[k].interval_eval(se);
          if (!img.intersects(model.X.ranges[k])) {
            can_map_in = false;
            break;
          }
        }
        if (can_map_in) return true;
      }
    return false;
  };
  double mult = 1.0;
  int doublings = 0;
  while (ring_maps_in(mult) && doublings < 8) {
    mult *= 2;
    ++doublings;
  }
  if (doublings == 8) note = "computed (best effort: ring check did not converge)";
  const Box shell_box = inflated(mult);

  // Grid the shell (inflated \ X) and keep cells whose interval image under
  // the full input box intersects X. Cells adjacent to X carry a strict
  // outside constraint so the region never meets R.
  struct Cell {
    std::vector<Interval> r;
    std::optional<std::pair<std::size_t, bool>> face;  // (dim, above)
  };
  std::vector<Cell> kept;
  std::vector<std::size_t> counts(n);
  std::vector<std::vector<double>> ticks(n);
  for (std::size_t d = 0; d < n; ++d) {
    const double lo = shell_box.ranges[d].lo, hi = shell_box.ranges[d].hi;
    const std::size_t k = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil((hi - lo) / resolution)));
    counts[d] = k;
    for (std::size_t i = 0; i <= k; ++i) ticks[d].push_back(lo + (hi - lo) * i / k);
  }
  std::vector<std::size_t> idx(n, 0);
  while (true) {
    Cell cell;
    bool inside_X = true;
    for (std::size_t d = 0; d < n; ++d) {
      const Interval r{ticks[d][idx[d]], ticks[d][idx[d] + 1]};
      cell.r.push_back(r);
      if (r.lo < model.X.ranges[d].lo || r.hi > model.X.ranges[d].hi)
        inside_X = false;
    }
    if (!inside_X) {
      // identify a face certificate: some dim where the cell sits outside X
      for (std::size_t d = 0; d < n && !cell.face; ++d) {
        if (cell.r[d].lo >= model.X.ranges[d].hi)
          cell.face = {d, true};
        else if (cell.r[d].hi <= model.X.ranges[d].lo)
          cell.face = {d, false};
      }
      if (cell.face) {  // cells straddling the boundary are skipped (inside R)
        IntervalEnv ce;
        for (std::size_t d = 0; d < n; ++d) ce.set(model.X.vars[d], cell.r[d]);
        for (std::size_t d = 0; d < model.m; ++d)
          ce.set(model.U.vars[d], model.U.ranges[d]);
        bool maps_in = true;
        for (std::size_t d = 0; d < n; ++d) {
          const Interval img = model.f[d].interval_eval(ce);
          if (!img.intersects(model.X.ranges[d])) {
            maps_in = false;
            break;
          }
        }
        if (maps_in) kept.push_back(std::move(cell));
      }
    }
    std::size_t d = 0;
    while (d < n && ++idx[d] == counts[d]) idx[d++] = 0;
    if (d == n) break;
  }

  // Merge cells into runs along dimension 0 to keep the branch count small.
  std::sort(kept.begin(), kept.end(), [](const Cell& a, const Cell& b) {
    for (std::size_t d = a.r.size(); d-- > 1;) {
      if (a.r[d].lo != b.r[d].lo) return a.r[d].lo < b.r[d].lo;
    }
    return a.r[0].lo < b.r[0].lo;
  });
  std::vector<Cell> merged;
  for (auto& c : kept) {
    if (!merged.empty()) {
      Cell& last = merged.back();
      bool same = last.face == c.face;
      for (std::size_t d = 1; d < n && same; ++d)
        same = last.r[d].lo == c.r[d].lo && last.r[d].hi == c.r[d].hi;
      if (same && std::abs(last.r[0].hi - c.r[0].lo) < 1e-12) {
        last.r[0].hi = c.r[0].hi;
        continue;
      }
    }
    merged.push_back(c);
  }

  // Assemble pairs: (cell on the x side) x hull and hull x (cell on x̂ side).
  VDomainInfo info;
  info.provenance = note;
  const auto xv = state_vars(n);
  const auto xhv = hatted_state_vars(n);
  Box hull = shell_box;
  Box hull_h = shell_box;
  hull_h.vars = xhv;
  for (const auto& c : merged) {
    for (int hat = 0; hat < 2; ++hat) {
      SemiAlgebraicSet s;
      Box cell_box{hat ? xhv : xv, c.r};
      s.base = hat ? Box::product(hull, cell_box) : Box::product(cell_box, hull_h);
      if (c.face) {
        const auto [d, above] = *c.face;
        const VarId v = hat ? xhv[d] : xv[d];
        const double bound = above ? model.X.ranges[d].hi : model.X.ranges[d].lo;
        // strict only when the cell touches the face
        const bool touches = above ? (c.r[d].lo <= bound) : (c.r[d].hi >= bound);
        if (touches) {
          Polynomial p = Polynomial::var(v) - Polynomial::constant(bound);
          s.constraints.push_back({above ? p : -p, Rel::Gt});
        }
      }
      info.pre_complement.branches.push_back(std::move(s));
    }
  }
  return info;
}

std::string verdict_str(CheckVerdict v) {
  switch (v) {
    case CheckVerdict::Valid: return "VALID";
    case CheckVerdict::Invalid: return "INVALID";
    case CheckVerdict::Unknown: return "UNKNOWN";
  }
  return "?";
}

CertificateReport check_certificate(const SystemModel& model, const DeltaKDfa& dfa,
                                    const LabelPartition& part,
                                    const Certificate& cert, CheckMode mode,
                                    const FalsifierConfig& cfg,
                                    const std::optional<VDomainInfo>& vdom,
                                    const ConditionOptions& opt_in) {
  ConditionOptions opt = opt_in;
  opt.strict_margin = cfg.margin;
  CertificateReport rep;
  rep.margin = cfg.margin;
  rep.resolution = cfg.eps_box;
  rep.exhaustive = is_finite(model);

  std::vector<UniversalConstraint> univ;
  std::vector<ForallExistsConstraint> fes;
  if (cert.kind == 'B') {
    univ = b_conditions(model, dfa, part, cert, opt);
  } else {
    std::optional<VDomainInfo> vd = vdom;
    if (!vd && !is_finite(model))
      vd = compute_pre_complement(as_continuous(model), 0.25);
    auto vc = v_conditions(model, dfa, part, cert, vd, opt);
    univ = std::move(vc.universal);
    fes = std::move(vc.decrease);
    rep.grid_validated = true;
  }

  // Verdict: INVALID on any counterexample; VALID when every condition was
  // proved or exhaustively enumerated; UNKNOWN otherwise.
  bool any_fail = false, all_complete = true;
  auto account = [&](const FalsifyOutcome& o, bool exhaustive_possible) {
    if (o.tag == OutcomeTag::Counterexample) {
      any_fail = true;
      return;
    }
    const bool complete =
        o.tag == OutcomeTag::Proved ||
        (exhaustive_possible && o.undecided == 0 && !o.budget_exhausted);
    if (!complete) all_complete = false;
  };

  for (auto& c : univ) {
    ConditionReport cr;
    cr.name = c.name;
    cr.outcome = mode == CheckMode::Certify ? certify(c, cfg.eps_box, cfg)
                                            : falsify(c, cfg);
    account(cr.outcome, c.finite_points.has_value());
    rep.conditions.push_back(std::move(cr));
    if (any_fail && mode == CheckMode::Falsify) break;
  }
  if (!(any_fail && mode == CheckMode::Falsify)) {
    for (auto& c : fes) {
      ConditionReport cr;
      cr.name = c.name;
      cr.grid_checked = true;
      cr.outcome = mode == CheckMode::Certify
                       ? certify_forall_exists(c, cfg.eps_box, cfg)
                       : falsify_forall_exists(c, cfg);
      account(cr.outcome, c.finite_outer.has_value());
      rep.conditions.push_back(std::move(cr));
      if (any_fail && mode == CheckMode::Falsify) break;
    }
  }

  if (any_fail) rep.verdict = CheckVerdict::Invalid;
  else if (all_complete) rep.verdict = CheckVerdict::Valid;
  else rep.verdict = CheckVerdict::Unknown;
  return rep;
}

}  // namespace diagcert
