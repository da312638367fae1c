#include "diagcert/falsifier.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <queue>
#include <random>
#include <thread>

namespace diagcert {

namespace {

// Branch with constraints compiled against the branch's variable order.
struct CompiledBranch {
  Box base;
  std::vector<std::pair<CompiledPoly, Rel>> constraints;
  CompiledPoly body;

  bool contains(std::span<const double> p) const {
    if (!base.contains(p)) return false;
    for (auto& [poly, rel] : constraints) {
      const double v = poly.eval(p);
      switch (rel) {
        case Rel::Ge: if (!(v >= 0)) return false; break;
        case Rel::Gt: if (!(v > 0)) return false; break;
        case Rel::Le: if (!(v <= 0)) return false; break;
        case Rel::Lt: if (!(v < 0)) return false; break;
      }
    }
    return true;
  }

  bool excluded(std::span<const Interval> box) const {
    for (auto& [poly, rel] : constraints) {
      const Interval v = poly.interval_eval(box);
      const bool out = (rel == Rel::Ge && v.hi < 0) || (rel == Rel::Gt && v.hi <= 0) ||
                       (rel == Rel::Le && v.lo > 0) || (rel == Rel::Lt && v.lo >= 0);
      if (out) return true;
    }
    return false;
  }
};

CompiledBranch compile_branch(const SemiAlgebraicSet& s, const Polynomial& body) {
  CompiledBranch b;
  b.base = s.base;
  for (auto& c : s.constraints)
    b.constraints.emplace_back(CompiledPoly(c.poly, s.base.vars), c.rel);
  b.body = CompiledPoly(body, s.base.vars);
  return b;
}

struct QueuedBox {
  std::vector<Interval> ranges;
  double width;
  std::uint64_t seq;
};
struct WiderFirst {
  bool operator()(const QueuedBox& a, const QueuedBox& b) const {
    if (a.width != b.width) return a.width < b.width;  // max-heap on width
    return a.seq > b.seq;                              // then FIFO
  }
};

struct BranchStats {
  std::size_t undecided = 0;
  std::size_t boxes = 0;
  bool budget = false;
};

// Serial branch-and-bound over one branch. Boxes are processed widest first
// and split along their widest dimension (tie -> lowest index).
std::optional<Counterexample> run_branch(const CompiledBranch& br, Rel rel,
                                         double margin, double eps,
                                         std::size_t max_boxes,
                                         std::uint64_t seed,
                                         std::size_t presamples,
                                         BranchStats& stats) {
  const std::size_t dim = br.base.dim();
  auto point_check = [&](std::span<const double> p) -> std::optional<Counterexample> {
    if (!br.contains(p)) return std::nullopt;
    const double v = br.body.eval(p);
    if (rel_check(v, rel, margin) == RelStatus::Fail)
      return Counterexample{std::vector<double>(p.begin(), p.end()), v};
    return std::nullopt;
  };

  // Random probes first; cheap way to surface counterexamples early.
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < presamples; ++i) {
    const auto p = br.base.sample(rng);
    if (auto cex = point_check(p)) return cex;
  }

  std::priority_queue<QueuedBox, std::vector<QueuedBox>, WiderFirst> queue;
  std::uint64_t seq = 0;
  queue.push({br.base.ranges, Box{br.base.vars, br.base.ranges}.max_width(), seq++});

  std::vector<double> center(dim);
  while (!queue.empty()) {
    if (stats.boxes >= max_boxes) {
      stats.budget = true;
      stats.undecided += queue.size();
      return std::nullopt;
    }
    const QueuedBox qb = queue.top();
    queue.pop();
    ++stats.boxes;

    for (std::size_t i = 0; i < dim; ++i) center[i] = qb.ranges[i].mid();
    if (auto cex = point_check(center)) return cex;

    if (br.excluded(qb.ranges)) continue;
    const Interval bv = br.body.interval_eval(qb.ranges);
    if (rel_definitely_pass(bv, rel, margin)) continue;

    if (qb.width < eps) {
      ++stats.undecided;
      continue;
    }
    Box box{br.base.vars, qb.ranges};
    const auto [a, b] = box.split(box.widest_dim());
    queue.push({a.ranges, a.max_width(), seq++});
    queue.push({b.ranges, b.max_width(), seq++});
  }
  return std::nullopt;
}

FalsifyOutcome run_universal(const UniversalConstraint& c, double eps,
                             const FalsifierConfig& cfg, bool prove_mode) {
  FalsifyOutcome out;
  out.resolution = eps;

  if (c.finite_points) {
    // Exhaustive, exact path for finite models.
    const auto& pts = *c.finite_points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double v = c.finite_values
                           ? (*c.finite_values)[i]
                           : c.body.eval(make_env(c.vars, pts[i]));
      ++out.boxes;
      switch (rel_check(v, c.rel, c.margin)) {
        case RelStatus::Fail:
          out.tag = OutcomeTag::Counterexample;
          out.cex = Counterexample{pts[i], v};
          return out;
        case RelStatus::Undecided: ++out.undecided; break;
        case RelStatus::Pass: break;
      }
    }
    out.tag = (prove_mode && out.undecided == 0) ? OutcomeTag::Proved
                                                 : OutcomeTag::NoneFound;
    return out;
  }

  std::vector<CompiledBranch> branches;
  for (auto& s : c.domain.branches) branches.push_back(compile_branch(s, c.body));

  const int workers = (!cfg.serial && cfg.workers > 1) ? cfg.workers : 1;
  for (std::size_t bi = 0; bi < branches.size(); ++bi) {
    // Parallel mode: pre-split the branch into chunks, one serial engine per
    // chunk. Results are merged in chunk order, so the verdict (and even the
    // returned point) does not depend on scheduling.
    std::vector<Box> chunks{branches[bi].base};
    while (chunks.size() < static_cast<std::size_t>(workers)) {
      std::vector<Box> next;
      for (auto& b : chunks) {
        auto [l, r] = b.split(b.widest_dim());
        next.push_back(std::move(l));
        next.push_back(std::move(r));
      }
      chunks = std::move(next);
    }
    std::vector<BranchStats> stats(chunks.size());
    std::vector<std::optional<Counterexample>> cexs(chunks.size());
    auto work = [&](std::size_t ci) {
      CompiledBranch sub = branches[bi];
      sub.base = chunks[ci];
      cexs[ci] = run_branch(sub, c.rel, c.margin, eps,
                            std::max<std::size_t>(1, cfg.max_boxes / chunks.size()),
                            cfg.seed + bi * 131 + ci, cfg.presamples, stats[ci]);
    };
    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::thread> threads;
      for (std::size_t ci = 0; ci < chunks.size(); ++ci)
        threads.emplace_back(work, ci);
      for (auto& t : threads) t.join();
    }
    for (std::size_t ci = 0; ci < chunks.size(); ++ci) {
      out.boxes += stats[ci].boxes;
      out.undecided += stats[ci].undecided;
      out.budget_exhausted |= stats[ci].budget;
    }
    for (std::size_t ci = 0; ci < chunks.size(); ++ci) {
      if (cexs[ci]) {
        // Counterexamples are re-verified through the exact evaluation path
        // before they are emitted.
        assert(c.domain.branches[bi].contains(cexs[ci]->point));
        out.tag = OutcomeTag::Counterexample;
        out.cex = std::move(cexs[ci]);
        return out;
      }
    }
  }
  out.tag = (prove_mode && out.undecided == 0 && !out.budget_exhausted)
                ? OutcomeTag::Proved
                : OutcomeTag::NoneFound;
  return out;
}

}  // namespace

FalsifyOutcome falsify(const UniversalConstraint& c, const FalsifierConfig& cfg) {
  return run_universal(c, cfg.eps_box, cfg, /*prove_mode=*/false);
}

FalsifyOutcome certify(const UniversalConstraint& c, double resolution,
                       const FalsifierConfig& cfg) {
  if (!(resolution > 0)) throw std::invalid_argument("resolution must be positive");
  return run_universal(c, resolution, cfg, /*prove_mode=*/true);
}

std::vector<std::vector<double>> input_grid_points(const Box& inner, int per_dim) {
  if (per_dim < 1) per_dim = 1;
  const std::size_t dim = inner.dim();
  std::vector<std::vector<double>> axes(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    const auto& r = inner.ranges[d];
    if (per_dim == 1 || r.width() == 0.0) {
      axes[d] = {r.mid()};
    } else {
      for (int i = 0; i < per_dim; ++i)
        axes[d].push_back(r.lo + (r.hi - r.lo) * i / (per_dim - 1));
    }
  }
  std::vector<std::vector<double>> grid;
  std::vector<std::size_t> idx(dim, 0);
  while (true) {
    std::vector<double> p(dim);
    for (std::size_t d = 0; d < dim; ++d) p[d] = axes[d][idx[d]];
    grid.push_back(std::move(p));
    std::size_t d = 0;
    while (d < dim && ++idx[d] == axes[d].size()) idx[d++] = 0;
    if (d == dim) break;
  }
  return grid;
}

namespace {

struct CompiledEdge {
  std::vector<CompiledBranch> guard;  // branches over (outer, inner) vars
  CompiledPoly body;
};

struct FECompiled {
  std::vector<VarId> all_vars;
  std::vector<CompiledEdge> edges;
  std::vector<std::vector<double>> grid;
};

FECompiled compile_fe(const ForallExistsConstraint& c, int grid_per_dim) {
  FECompiled fc;
  fc.all_vars = c.outer_vars;
  fc.all_vars.insert(fc.all_vars.end(), c.inner_vars.begin(), c.inner_vars.end());
  for (auto& e : c.edges) {
    CompiledEdge ce;
    for (auto& br : e.guard.branches) ce.guard.push_back(compile_branch(br, e.body));
    ce.body = CompiledPoly(e.body, fc.all_vars);
    fc.edges.push_back(std::move(ce));
  }
  fc.grid = input_grid_points(c.inner_box, grid_per_dim);
  return fc;
}

// Best (most negative) edge body at a concrete outer point over the grid;
// NaN when no grid input admits any edge.
double best_decrease_at(const FECompiled& fc, std::span<const double> outer,
                        std::size_t inner_dim) {
  std::vector<double> full(outer.begin(), outer.end());
  full.resize(outer.size() + inner_dim);
  double best = std::numeric_limits<double>::quiet_NaN();
  for (const auto& g : fc.grid) {
    for (std::size_t d = 0; d < inner_dim; ++d) full[outer.size() + d] = g[d];
    for (const auto& e : fc.edges) {
      bool in = false;
      for (const auto& br : e.guard)
        if (br.contains(full)) {
          in = true;
          break;
        }
      if (!in) continue;
      const double v = e.body.eval(full);
      if (std::isnan(best) || v < best) best = v;
      break;  // guards partition admissible quadruples; one edge applies
    }
  }
  return best;
}

RelStatus fe_point_status(double best, double margin) {
  if (std::isnan(best)) return RelStatus::Fail;  // no admissible input at all
  return rel_check(best, Rel::Lt, margin);
}

FalsifyOutcome run_fe(const ForallExistsConstraint& c, double eps,
                      const FalsifierConfig& cfg, bool prove_mode) {
  FalsifyOutcome out;
  out.resolution = eps;

  if (c.finite_outer) {
    const auto& pts = *c.finite_outer;
    const auto& vals = *c.finite_values;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      double best = std::numeric_limits<double>::quiet_NaN();
      for (double v : vals[i])
        if (!std::isnan(v) && (std::isnan(best) || v < best)) best = v;
      ++out.boxes;
      switch (fe_point_status(best, c.margin)) {
        case RelStatus::Fail:
          out.tag = OutcomeTag::Counterexample;
          out.cex = Counterexample{pts[i], best};
          return out;
        case RelStatus::Undecided: ++out.undecided; break;
        case RelStatus::Pass: break;
      }
    }
    out.tag = (prove_mode && out.undecided == 0) ? OutcomeTag::Proved
                                                 : OutcomeTag::NoneFound;
    // The existential was grid-checked, so a clean pass is still only
    // grid-valid; callers report it as such.
    return out;
  }

  const FECompiled fc = compile_fe(c, cfg.input_grid);
  const std::size_t odim = c.outer_vars.size();
  const std::size_t idim = c.inner_vars.size();

  auto point_cex = [&](std::span<const double> p) -> std::optional<Counterexample> {
    if (!c.outer_domain.contains(p)) return std::nullopt;
    const double best = best_decrease_at(fc, p, idim);
    if (fe_point_status(best, c.margin) == RelStatus::Fail)
      return Counterexample{std::vector<double>(p.begin(), p.end()),
                            std::isnan(best) ? 0.0 : best};
    return std::nullopt;
  };

  // A box is cleared when some grid input g yields a definite edge (guard
  // interval-contains box x {g}) whose body interval stays below -margin.
  std::vector<Interval> full(odim + idim);
  auto box_cleared = [&](std::span<const Interval> obox) {
    for (std::size_t i = 0; i < odim; ++i) full[i] = obox[i];
    for (const auto& g : fc.grid) {
      for (std::size_t d = 0; d < idim; ++d)
        full[odim + d] = Interval::point(g[d]);
      for (const auto& e : fc.edges) {
        bool inside = false;
        for (const auto& br : e.guard) {
          std::span<const Interval> fb(full);
          // base-box containment first, then constraint satisfaction
          bool in_base = true;
          for (std::size_t i = 0; i < fb.size(); ++i)
            if (fb[i].lo < br.base.ranges[i].lo || fb[i].hi > br.base.ranges[i].hi) {
              in_base = false;
              break;
            }
          if (!in_base) continue;
          bool ok = true;
          for (auto& [poly, rel] : br.constraints) {
            const Interval v = poly.interval_eval(fb);
            const bool sat = (rel == Rel::Ge && v.lo >= 0) || (rel == Rel::Gt && v.lo > 0) ||
                             (rel == Rel::Le && v.hi <= 0) || (rel == Rel::Lt && v.hi < 0);
            if (!sat) {
              ok = false;
              break;
            }
          }
          if (ok) {
            inside = true;
            break;
          }
        }
        if (!inside) continue;
        const Interval bv = e.body.interval_eval(full);
        if (bv.hi <= -c.margin) return true;
        break;  // the applicable edge cannot certify; try the next input
      }
    }
    return false;
  };

  for (std::size_t bi = 0; bi < c.outer_domain.branches.size(); ++bi) {
    const auto& branch = c.outer_domain.branches[bi];
    CompiledBranch dom = compile_branch(branch, Polynomial{});

    std::priority_queue<QueuedBox, std::vector<QueuedBox>, WiderFirst> queue;
    std::uint64_t seq = 0;
    queue.push({branch.base.ranges, branch.base.max_width(), seq++});

    std::mt19937_64 rng(cfg.seed + bi);
    for (std::size_t i = 0; i < cfg.presamples; ++i) {
      const auto p = branch.base.sample(rng);
      if (!dom.contains(p)) continue;
      if (auto cex = point_cex(p)) {
        out.tag = OutcomeTag::Counterexample;
        out.cex = std::move(cex);
        return out;
      }
    }

    std::vector<double> center(odim);
    while (!queue.empty()) {
      if (out.boxes >= cfg.max_boxes) {
        out.budget_exhausted = true;
        out.undecided += queue.size();
        break;
      }
      const QueuedBox qb = queue.top();
      queue.pop();
      ++out.boxes;

      for (std::size_t i = 0; i < odim; ++i) center[i] = qb.ranges[i].mid();
      if (dom.contains(center)) {
        if (auto cex = point_cex(center)) {
          out.tag = OutcomeTag::Counterexample;
          out.cex = std::move(cex);
          return out;
        }
      }
      if (dom.excluded(qb.ranges)) continue;
      if (box_cleared(qb.ranges)) continue;
      if (qb.width < eps) {
        ++out.undecided;
        continue;
      }
      Box box{branch.base.vars, qb.ranges};
      const auto [a, b] = box.split(box.widest_dim());
      queue.push({a.ranges, a.max_width(), seq++});
      queue.push({b.ranges, b.max_width(), seq++});
    }
  }
  out.tag = (prove_mode && out.undecided == 0 && !out.budget_exhausted)
                ? OutcomeTag::Proved
                : OutcomeTag::NoneFound;
  return out;
}

}  // namespace

FalsifyOutcome falsify_forall_exists(const ForallExistsConstraint& c,
                                     const FalsifierConfig& cfg) {
  return run_fe(c, cfg.eps_box, cfg, /*prove_mode=*/false);
}

FalsifyOutcome certify_forall_exists(const ForallExistsConstraint& c,
                                     double resolution, const FalsifierConfig& cfg) {
  if (!(resolution > 0)) throw std::invalid_argument("resolution must be positive");
  return run_fe(c, resolution, cfg, /*prove_mode=*/true);
}

}  // namespace diagcert
