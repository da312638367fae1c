#include "diagcert/cegis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

namespace diagcert {

std::vector<std::vector<double>> latin_hypercube(const Box& box, std::size_t count,
                                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t dim = box.dim();
  std::vector<std::vector<double>> pts(count, std::vector<double>(dim));
  std::vector<std::size_t> perm(count);
  for (std::size_t d = 0; d < dim; ++d) {
    for (std::size_t i = 0; i < count; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::uniform_real_distribution<double> jitter(0.0, 1.0);
    const auto& r = box.ranges[d];
    for (std::size_t i = 0; i < count; ++i) {
      const double frac = (perm[i] + jitter(rng)) / count;
      pts[i][d] = r.lo + frac * (r.hi - r.lo);
    }
  }
  return pts;
}

namespace {

struct RowBuilder {
  std::vector<SparseRow> rows;
  std::vector<double> rhs;
  std::vector<std::map<std::uint32_t, double>> scratch;

  void add(std::map<std::uint32_t, double> entries, double rhs_value) {
    double scale = 1.0;
    for (auto& [j, v] : entries) scale = std::max(scale, std::abs(v));
    SparseRow r;
    for (auto& [j, v] : entries)
      if (v != 0.0) r.entries.emplace_back(j, v / scale);
    rows.push_back(std::move(r));
    rhs.push_back(rhs_value / scale);
  }
};

// Monomial values of one location's basis at a pair point.
void accumulate(std::map<std::uint32_t, double>& row, const CertTemplate& tmpl,
                int delta_index, const Env& env, double sign) {
  const std::size_t off = tmpl.coeff_offset(delta_index);
  const auto& monos = tmpl.monomials[delta_index];
  for (std::size_t k = 0; k < monos.size(); ++k) {
    const double v = sign * monos[k].eval(env);
    if (v != 0.0) row[static_cast<std::uint32_t>(off + k)] += v;
  }
}

Env pair_env(std::span<const double> x, std::span<const double> xh) {
  const std::size_t n = x.size();
  Env env;
  const auto xv = state_vars(n);
  const auto xhv = hatted_state_vars(n);
  for (std::size_t i = 0; i < n; ++i) {
    env.set(xv[i], x[i]);
    env.set(xhv[i], xh[i]);
  }
  return env;
}

bool in_box(const Box& b, std::span<const double> p) { return b.contains(p); }

// Shared fit driver once rows are built.
FitResult run_lp(RowBuilder& rb, const CertTemplate& tmpl, const CegisConfig& cfg) {
  FitResult fr;
  fr.rows = rb.rows.size();
  const auto lp = solve_margin_lp(rb.rows, rb.rhs, tmpl.num_coeffs(),
                                  cfg.coeff_bound);
  fr.iteration_limit = lp.status == MarginLpResult::Status::IterationLimit;
  fr.coeffs = lp.coeffs;
  fr.margin = lp.margin;
  fr.feasible = !fr.iteration_limit && lp.margin >= -1e-9;
  return fr;
}

// Exhaustive bank for finite models: all state pairs and all input pairs.
void seed_finite_bank(const FiniteModel& fm, SampleBank& bank,
                      const CegisConfig& cfg) {
  if (fm.states.size() * fm.states.size() > cfg.max_exhaustive_pairs)
    throw SpecError("finite model too large for the exhaustive CEGIS bank");
  for (std::size_t i = 0; i < fm.states.size(); ++i)
    for (std::size_t j = 0; j < fm.states.size(); ++j) {
      bank.d_x.emplace_back(fm.states[i], fm.states[j]);
      bank.d_x_v.emplace_back(fm.states[i], fm.states[j]);
    }
  for (std::size_t u = 0; u < fm.inputs.size(); ++u)
    for (std::size_t uh = 0; uh < fm.inputs.size(); ++uh)
      bank.d_u.emplace_back(fm.inputs[u], fm.inputs[uh]);
}

void seed_continuous_bank(const ContinuousModel& cm, SampleBank& bank,
                          const CegisConfig& cfg, bool vloop) {
  const std::size_t n = cm.n, m = cm.m;
  const std::size_t ns = cfg.state_samples ? cfg.state_samples : 50 * 2 * n;
  const std::size_t us = cfg.input_samples ? cfg.input_samples : 20 * 2 * m;
  const std::size_t vs = cfg.vloop_samples ? cfg.vloop_samples : 50 * 2 * n;

  Box xb = cm.X;
  Box xhb = cm.X;
  xhb.vars = hatted_state_vars(n);
  const Box pr = Box::product(xb, xhb);
  Box x0b = cm.X0;
  Box x0hb = cm.X0;
  x0hb.vars = hatted_state_vars(n);
  const Box pr0 = Box::product(x0b, x0hb);
  Box ub = cm.U;
  Box uhb = cm.U;
  uhb.vars = hatted_input_vars(m);
  const Box pu = Box::product(ub, uhb);

  auto split_pair = [&](const std::vector<double>& p, std::size_t half) {
    return PointPair{std::vector<double>(p.begin(), p.begin() + half),
                     std::vector<double>(p.begin() + half, p.end())};
  };
  if (!vloop) {
    for (auto& p : latin_hypercube(pr, ns, cfg.seed + 1))
      bank.d_x.push_back(split_pair(p, n));
    // a slice of initial pairs so condition (15) is populated from the start
    for (auto& p : latin_hypercube(pr0, std::max<std::size_t>(16, ns / 5),
                                   cfg.seed + 2))
      bank.d_x.push_back(split_pair(p, n));
    for (auto& p : latin_hypercube(pu, us, cfg.seed + 3))
      bank.d_u.push_back(split_pair(p, m));
  } else {
    for (auto& p : latin_hypercube(pr, vs, cfg.seed + 4))
      bank.d_x_v.push_back(split_pair(p, n));
    for (auto& p : latin_hypercube(pr0, std::max<std::size_t>(16, vs / 5),
                                   cfg.seed + 5))
      bank.d_x_v.push_back(split_pair(p, n));
  }
}

// ---------------------------------------------------------------------------
// B loop
// ---------------------------------------------------------------------------

struct BRowContext {
  const SystemModel& model;
  const DeltaKDfa& dfa;
  const LabelPartition& part;
  const CertTemplate& tmpl;
  const CegisConfig& cfg;
};

void add_b_rows_for_quad(RowBuilder& rb, const BRowContext& ctx,
                         std::span<const double> x, std::span<const double> xh,
                         std::span<const double> u, std::span<const double> uh) {
  std::vector<double> nx, nxh;
  try {
    nx = successor(ctx.model, x, u);
    nxh = successor(ctx.model, xh, uh);
  } catch (const DomainError&) {
    return;
  }
  if (!is_finite(ctx.model)) {
    const auto& cm = as_continuous(ctx.model);
    if (!in_box(cm.X, nx) || !in_box(cm.X, nxh)) return;  // successor left R
  }
  const Symbol s = ctx.part.label(nx, nxh);
  const Env cur = pair_env(x, xh);
  const Env nxt = pair_env(nx, nxh);
  for (int q = 0; q < ctx.dfa.num_states(); ++q) {
    if (q == ctx.dfa.trap()) continue;
    const int q2 = ctx.dfa.step(q, s);
    std::map<std::uint32_t, double> row;
    accumulate(row, ctx.tmpl, ctx.dfa.delta_index(q2), nxt, 1.0);
    accumulate(row, ctx.tmpl, ctx.dfa.delta_index(q), cur, -1.0);
    rb.add(std::move(row), 0.0);
  }
}

RowBuilder build_b_rows(const BRowContext& ctx, const SampleBank& bank) {
  RowBuilder rb;
  const auto& dfa = ctx.dfa;

  auto is_initial_pair = [&](const PointPair& p) {
    if (is_finite(ctx.model)) {
      const auto& fm = as_finite(ctx.model);
      const auto i = fm.find_state(p.first);
      const auto j = fm.find_state(p.second);
      auto init = [&](std::size_t s) {
        return std::find(fm.initial.begin(), fm.initial.end(), s) !=
               fm.initial.end();
      };
      return i && j && init(*i) && init(*j);
    }
    const auto& cm = as_continuous(ctx.model);
    return in_box(cm.X0, p.first) && in_box(cm.X0, p.second);
  };

  for (const auto& p : bank.d_x) {
    const Env env = pair_env(p.first, p.second);
    // (16): B at F̄ strictly positive everywhere
    std::map<std::uint32_t, double> pos;
    accumulate(pos, ctx.tmpl, dfa.delta_index(dfa.fbar()), env, -1.0);
    rb.add(std::move(pos), -ctx.cfg.eps_pos);
    // (15): B at the entry location of an initial pair
    if (is_initial_pair(p)) {
      const Symbol s = ctx.part.label(p.first, p.second);
      const int q = dfa.step(dfa.q0(), s);
      std::map<std::uint32_t, double> row;
      accumulate(row, ctx.tmpl, dfa.delta_index(q), env, 1.0);
      rb.add(std::move(row), 0.0);
    }
  }
  // (17): sampled quadruples
  const std::size_t stride =
      bank.d_u.empty()
          ? 1
          : std::max<std::size_t>(1, bank.d_u.size() / std::max<std::size_t>(
                                                           1, ctx.cfg.cross_inputs));
  const bool full_cross = is_finite(ctx.model);
  for (std::size_t pi = 0; pi < bank.d_x.size(); ++pi) {
    const auto& p = bank.d_x[pi];
    for (std::size_t ui = full_cross ? 0 : pi % stride; ui < bank.d_u.size();
         ui += full_cross ? 1 : stride)
      add_b_rows_for_quad(rb, ctx, p.first, p.second, bank.d_u[ui].first,
                          bank.d_u[ui].second);
  }
  for (const auto& quad : bank.cex_quads) {
    const std::size_t n = state_dim(ctx.model);
    const std::size_t m = (quad.size() - 2 * n) / 2;
    add_b_rows_for_quad(
        rb, ctx, std::span(quad).subspan(0, n), std::span(quad).subspan(n, n),
        std::span(quad).subspan(2 * n, m), std::span(quad).subspan(2 * n + m, m));
  }
  return rb;
}

}  // namespace

FitResult fit_b_coefficients(const SystemModel& model, const DeltaKDfa& dfa,
                             const LabelPartition& part, const CertTemplate& tmpl,
                             const SampleBank& bank, const CegisConfig& cfg) {
  BRowContext ctx{model, dfa, part, tmpl, cfg};
  RowBuilder rb = build_b_rows(ctx, bank);
  return run_lp(rb, tmpl, cfg);
}

namespace {

std::string fmt_point(std::span<const double> p) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? "," : "") << p[i];
  os << ")";
  return os.str();
}

// Appends a counterexample point to the right bank lists; returns false when
// it was already present (no growth).
bool append_unique(std::vector<PointPair>& list, PointPair pp) {
  for (auto& e : list)
    if (e == pp) return false;
  list.push_back(std::move(pp));
  return true;
}

}  // namespace

SynthResult synthesize_b(const SystemModel& model, const DeltaKDfa& dfa,
                         const LabelPartition& part, const CertTemplate& tmpl,
                         const CegisConfig& cfg) {
  SynthResult res;
  if (is_finite(model))
    seed_finite_bank(as_finite(model), res.bank, cfg);
  else
    seed_continuous_bank(as_continuous(model), res.bank, cfg, /*vloop=*/false);

  ConditionOptions opt;
  opt.strict_margin = cfg.falsifier.margin;
  const std::size_t n = state_dim(model);

  for (std::size_t iter = 1; iter <= cfg.max_iterations; ++iter) {
    res.iterations = iter;
    const FitResult fit = fit_b_coefficients(model, dfa, part, tmpl, res.bank, cfg);
    {
      std::ostringstream os;
      os << "iter " << iter << ": |D_x|=" << res.bank.d_x.size()
         << " |D_u|=" << res.bank.d_u.size() << " rows=" << fit.rows
         << " lp_margin=" << fit.margin;
      if (fit.iteration_limit) os << " lp_iteration_limit";
      res.log.push_back(os.str());
    }
    if (!fit.feasible) {
      res.status = SynthStatus::TemplateInfeasible;
      return res;
    }
    Certificate cand = tmpl.instantiate(dfa.delta(), fit.coeffs);
    cand.kind = 'B';

    const auto conds = b_conditions(model, dfa, part, cand, opt);
    bool found_cex = false, grew = false;
    for (const auto& c : conds) {
      const FalsifyOutcome o = falsify(c, cfg.falsifier);
      if (o.tag != OutcomeTag::Counterexample) continue;
      found_cex = true;
      const auto& pt = o.cex->point;
      res.log.push_back("  cex " + c.name + " at " + fmt_point(pt) +
                        " value=" + std::to_string(o.cex->value));
      if (pt.size() == 2 * n) {
        grew |= append_unique(res.bank.d_x,
                              {std::vector<double>(pt.begin(), pt.begin() + n),
                               std::vector<double>(pt.begin() + n, pt.end())});
      } else {
        const std::size_t m = (pt.size() - 2 * n) / 2;
        grew |= append_unique(res.bank.d_x,
                              {std::vector<double>(pt.begin(), pt.begin() + n),
                               std::vector<double>(pt.begin() + n, pt.begin() + 2 * n)});
        grew |= append_unique(
            res.bank.d_u,
            {std::vector<double>(pt.begin() + 2 * n, pt.begin() + 2 * n + m),
             std::vector<double>(pt.begin() + 2 * n + m, pt.end())});
        res.bank.cex_quads.push_back(pt);
        grew = true;
      }
    }
    if (!found_cex) {
      res.certificate = cand;
      res.report = check_certificate(model, dfa, part, cand, CheckMode::Certify,
                                     cfg.falsifier, std::nullopt, opt);
      if (res.report->verdict == CheckVerdict::Invalid) {
        // certify explored deeper and found a violation; bank it and continue
        res.log.push_back("  certify pass found a counterexample; continuing");
        for (auto& cr : res.report->conditions)
          if (cr.outcome.tag == OutcomeTag::Counterexample) {
            const auto& pt = cr.outcome.cex->point;
            if (pt.size() == 2 * n)
              append_unique(res.bank.d_x,
                            {std::vector<double>(pt.begin(), pt.begin() + n),
                             std::vector<double>(pt.begin() + n, pt.end())});
            else
              res.bank.cex_quads.push_back(pt);
          }
        res.certificate.reset();
        res.report.reset();
        continue;
      }
      res.status = SynthStatus::Certified;
      res.at_resolution = !is_finite(model);
      return res;
    }
    if (!grew) {
      res.log.push_back("  counterexamples did not grow the bank; stopping");
      res.status = SynthStatus::Budget;
      return res;
    }
  }
  res.status = SynthStatus::Budget;
  return res;
}

// ---------------------------------------------------------------------------
// V loop
// ---------------------------------------------------------------------------

namespace {

struct VContext {
  const SystemModel& model;
  const DeltaKDfa& dfa;
  const LabelPartition& part;
  const CertTemplate& tmpl;
  const CegisConfig& cfg;
  std::vector<std::vector<double>> input_grid;         // single-input grid
  std::optional<VDomainInfo> vdom;
};

// Cached successor data for one V sample pair under every grid input.
struct VSample {
  PointPair pair;
  std::vector<std::optional<std::vector<double>>> succ_x, succ_xh;  // per input
};

VSample make_vsample(const VContext& ctx, PointPair p) {
  VSample s;
  s.pair = std::move(p);
  const std::size_t g = ctx.input_grid.size();
  s.succ_x.resize(g);
  s.succ_xh.resize(g);
  const bool finite = is_finite(ctx.model);
  const auto* cm = finite ? nullptr : &as_continuous(ctx.model);
  for (std::size_t i = 0; i < g; ++i) {
    try {
      auto nx = successor(ctx.model, s.pair.first, ctx.input_grid[i]);
      if (!finite && !cm->X.contains(nx)) continue;
      s.succ_x[i] = std::move(nx);
    } catch (const DomainError&) {
    }
  }
  for (std::size_t i = 0; i < g; ++i) {
    try {
      auto nxh = successor(ctx.model, s.pair.second, ctx.input_grid[i]);
      if (!finite && !cm->X.contains(nxh)) continue;
      s.succ_xh[i] = std::move(nxh);
    } catch (const DomainError&) {
    }
  }
  return s;
}

// Assignment: per (sample, location) the chosen (u index, û index).
using Assignment = std::vector<std::vector<std::pair<int, int>>>;

bool valid_choice(const VSample& s, int ui, int uj) {
  return s.succ_x[ui].has_value() && s.succ_xh[uj].has_value();
}

std::optional<std::pair<int, int>> first_valid(const VSample& s) {
  for (std::size_t i = 0; i < s.succ_x.size(); ++i)
    for (std::size_t j = 0; j < s.succ_xh.size(); ++j)
      if (valid_choice(s, static_cast<int>(i), static_cast<int>(j)))
        return std::make_pair(static_cast<int>(i), static_cast<int>(j));
  return std::nullopt;
}

RowBuilder build_v_rows(const VContext& ctx, const std::vector<VSample>& samples,
                        const Assignment& assign,
                        const std::vector<PointPair>& shell_pts) {
  RowBuilder rb;
  const auto& dfa = ctx.dfa;

  auto is_initial_pair = [&](const PointPair& p) {
    if (is_finite(ctx.model)) {
      const auto& fm = as_finite(ctx.model);
      const auto i = fm.find_state(p.first);
      const auto j = fm.find_state(p.second);
      auto init = [&](std::size_t s) {
        return std::find(fm.initial.begin(), fm.initial.end(), s) !=
               fm.initial.end();
      };
      return i && j && init(*i) && init(*j);
    }
    const auto& cm = as_continuous(ctx.model);
    return in_box(cm.X0, p.first) && in_box(cm.X0, p.second);
  };

  for (std::size_t si = 0; si < samples.size(); ++si) {
    const auto& s = samples[si];
    const Env cur = pair_env(s.pair.first, s.pair.second);
    // (27): initial pairs
    if (is_initial_pair(s.pair)) {
      const Symbol sym = ctx.part.label(s.pair.first, s.pair.second);
      const int q = dfa.step(dfa.q0(), sym);
      std::map<std::uint32_t, double> row;
      accumulate(row, ctx.tmpl, dfa.delta_index(q), cur, 1.0);
      rb.add(std::move(row), 0.0);
    }
    // (29): chosen disjunct per location
    for (int q = 0; q < dfa.num_states(); ++q) {
      if (q == dfa.fbar()) continue;
      const auto [ui, uj] = assign[si][q];
      if (ui < 0) continue;  // no admissible input at this sample
      const auto& nx = *s.succ_x[ui];
      const auto& nxh = *s.succ_xh[uj];
      const Symbol sym = ctx.part.label(nx, nxh);
      const int q2 = dfa.step(q, sym);
      std::map<std::uint32_t, double> row;
      accumulate(row, ctx.tmpl, dfa.delta_index(q2), pair_env(nx, nxh), 1.0);
      accumulate(row, ctx.tmpl, dfa.delta_index(q), cur, -1.0);
      rb.add(std::move(row), -ctx.cfg.eps_dec);
    }
  }
  // (28): shell positivity for every non-accepting location
  for (const auto& p : shell_pts) {
    const Env env = pair_env(p.first, p.second);
    for (int q = 0; q < ctx.dfa.num_states(); ++q) {
      if (q == ctx.dfa.fbar()) continue;
      std::map<std::uint32_t, double> row;
      accumulate(row, ctx.tmpl, dfa.delta_index(q), env, -1.0);
      rb.add(std::move(row), -ctx.cfg.eps_pos);
    }
  }
  return rb;
}

// Re-picks, for every (sample, location), the input pair maximizing the
// decrease under the given certificate. Returns true when anything changed.
bool reassign(const VContext& ctx, const std::vector<VSample>& samples,
              const Certificate& cert, Assignment& assign) {
  bool changed = false;
  for (std::size_t si = 0; si < samples.size(); ++si) {
    const auto& s = samples[si];
    for (int q = 0; q < ctx.dfa.num_states(); ++q) {
      if (q == ctx.dfa.fbar()) continue;
      const double vq =
          cert.eval(ctx.dfa.delta_index(q), s.pair.first, s.pair.second);
      double best = std::numeric_limits<double>::infinity();
      std::pair<int, int> pick{-1, -1};
      for (std::size_t i = 0; i < s.succ_x.size(); ++i) {
        if (!s.succ_x[i]) continue;
        for (std::size_t j = 0; j < s.succ_xh.size(); ++j) {
          if (!s.succ_xh[j]) continue;
          const Symbol sym = ctx.part.label(*s.succ_x[i], *s.succ_xh[j]);
          const int q2 = ctx.dfa.step(q, sym);
          const double v =
              cert.eval(ctx.dfa.delta_index(q2), *s.succ_x[i], *s.succ_xh[j]) - vq;
          if (v < best - 1e-15) {
            best = v;
            pick = {static_cast<int>(i), static_cast<int>(j)};
          }
        }
      }
      if (pick != assign[si][q]) {
        assign[si][q] = pick;
        changed = true;
      }
    }
  }
  return changed;
}

}  // namespace

SynthResult synthesize_v(const SystemModel& model, const DeltaKDfa& dfa,
                         const LabelPartition& part, const CertTemplate& tmpl,
                         const std::optional<VDomainInfo>& vdom_in,
                         const CegisConfig& cfg) {
  SynthResult res;
  VContext ctx{model, dfa, part, tmpl, cfg, {}, vdom_in};
  const std::size_t n = state_dim(model);

  if (is_finite(model)) {
    seed_finite_bank(as_finite(model), res.bank, cfg);
    for (const auto& u : as_finite(model).inputs) ctx.input_grid.push_back(u);
  } else {
    seed_continuous_bank(as_continuous(model), res.bank, cfg, /*vloop=*/true);
    ctx.input_grid =
        input_grid_points(as_continuous(model).U, cfg.assign_grid);
    if (!ctx.vdom) ctx.vdom = compute_pre_complement(as_continuous(model), 0.25);
    // seed shell samples so condition (28) binds from the first fit
    std::mt19937_64 rng(cfg.seed + 77);
    std::size_t want = std::min<std::size_t>(
        300, std::max<std::size_t>(50, ctx.vdom->pre_complement.branches.size()));
    std::size_t guard = 0;
    while (res.bank.shell.size() < want && guard < 50 * want) {
      ++guard;
      const auto& branches = ctx.vdom->pre_complement.branches;
      if (branches.empty()) break;
      const auto& br = branches[guard % branches.size()];
      const auto p = br.base.sample(rng);
      if (!br.contains(p)) continue;
      res.bank.shell.emplace_back(std::vector<double>(p.begin(), p.begin() + n),
                                  std::vector<double>(p.begin() + n, p.end()));
    }
  }

  ConditionOptions opt;
  opt.strict_margin = cfg.falsifier.margin;

  std::vector<VSample> samples;
  for (const auto& p : res.bank.d_x_v) samples.push_back(make_vsample(ctx, p));

  Assignment assign(samples.size(),
                    std::vector<std::pair<int, int>>(dfa.num_states(), {-1, -1}));
  for (std::size_t si = 0; si < samples.size(); ++si) {
    const auto fv = first_valid(samples[si]);
    for (int q = 0; q < dfa.num_states(); ++q)
      if (q != dfa.fbar() && fv) assign[si][q] = *fv;
  }

  for (std::size_t iter = 1; iter <= cfg.max_iterations; ++iter) {
    res.iterations = iter;
    // fit / reassign alternation until fixpoint
    std::optional<Certificate> cand;
    for (std::size_t alt = 0; alt < cfg.max_alternations; ++alt) {
      RowBuilder rb = build_v_rows(ctx, samples, assign, res.bank.shell);
      const FitResult fit = run_lp(rb, tmpl, cfg);
      if (!fit.feasible) {
        if (!cand) {
          std::ostringstream os;
          os << "iter " << iter << ": LP infeasible (rows=" << fit.rows
             << ", margin=" << fit.margin << ")";
          res.log.push_back(os.str());
          res.status = SynthStatus::TemplateInfeasible;
          return res;
        }
        break;  // keep the previous candidate, go falsify
      }
      Certificate c = tmpl.instantiate(dfa.delta(), fit.coeffs);
      c.kind = 'V';
      cand = std::move(c);
      {
        std::ostringstream os;
        os << "iter " << iter << "." << alt << ": |D'_x|=" << res.bank.d_x_v.size()
           << " |shell|=" << res.bank.shell.size() << " rows=" << fit.rows
           << " lp_margin=" << fit.margin;
        res.log.push_back(os.str());
      }
      if (!reassign(ctx, samples, *cand, assign)) break;
    }
    if (!cand) {
      res.status = SynthStatus::TemplateInfeasible;
      return res;
    }

    const auto vc = v_conditions(model, dfa, part, *cand, ctx.vdom, opt);
    bool found_cex = false, grew = false;
    auto bank_pair_cex = [&](const std::vector<double>& pt, bool to_shell) {
      PointPair pp{std::vector<double>(pt.begin(), pt.begin() + n),
                   std::vector<double>(pt.begin() + n, pt.end())};
      if (to_shell) return append_unique(res.bank.shell, std::move(pp));
      const bool added = append_unique(res.bank.d_x_v, pp);
      if (added) {
        samples.push_back(make_vsample(ctx, pp));
        const auto fv = first_valid(samples.back());
        assign.emplace_back(dfa.num_states(), std::pair<int, int>{-1, -1});
        for (int q = 0; q < dfa.num_states(); ++q)
          if (q != dfa.fbar() && fv) assign.back()[q] = *fv;
      }
      return added;
    };
    for (const auto& c : vc.universal) {
      const FalsifyOutcome o = falsify(c, cfg.falsifier);
      if (o.tag != OutcomeTag::Counterexample) continue;
      found_cex = true;
      res.log.push_back("  cex " + c.name + " at " + fmt_point(o.cex->point) +
                        " value=" + std::to_string(o.cex->value));
      grew |= bank_pair_cex(o.cex->point, c.name.rfind("vshell", 0) == 0);
    }
    for (const auto& c : vc.decrease) {
      const FalsifyOutcome o = falsify_forall_exists(c, cfg.falsifier);
      if (o.tag != OutcomeTag::Counterexample) continue;
      found_cex = true;
      res.log.push_back("  cex " + c.name + " at " + fmt_point(o.cex->point) +
                        " best_decrease=" + std::to_string(o.cex->value));
      grew |= bank_pair_cex(o.cex->point, false);
    }

    if (!found_cex) {
      res.certificate = cand;
      res.report = check_certificate(model, dfa, part, *cand, CheckMode::Certify,
                                     cfg.falsifier, ctx.vdom, opt);
      if (res.report->verdict == CheckVerdict::Invalid) {
        res.log.push_back("  certify pass found a counterexample; continuing");
        for (auto& cr : res.report->conditions)
          if (cr.outcome.tag == OutcomeTag::Counterexample)
            bank_pair_cex(cr.outcome.cex->point,
                          cr.name.rfind("vshell", 0) == 0);
        res.certificate.reset();
        res.report.reset();
        continue;
      }
      res.status = SynthStatus::Certified;
      res.at_resolution = !is_finite(model);
      return res;
    }
    if (!grew) {
      res.log.push_back("  counterexamples did not grow the bank; stopping");
      res.status = SynthStatus::Budget;
      return res;
    }
  }
  res.status = SynthStatus::Budget;
  return res;
}

}  // namespace diagcert
