#include "diagcert/product.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <stdexcept>

namespace diagcert {

ProductPoint product_step(const SystemModel& model, const DeltaKDfa& dfa,
                          const LabelPartition& part, const ProductPoint& s,
                          std::span<const double> u, std::span<const double> uh) {
  ProductPoint out;
  out.x = successor(model, s.x, u);
  out.xh = successor(model, s.xh, uh);
  out.q = dfa.step(s.q, part.label(out.x, out.xh));
  return out;
}

std::vector<ProductState> initial_product_states(const FiniteModel& model,
                                                 const DeltaKDfa& dfa,
                                                 const LabelPartition& part) {
  std::vector<ProductState> out;
  for (auto i : model.initial)
    for (auto j : model.initial) {
      const Symbol s = part.label(model.states[i], model.states[j]);
      out.push_back({i, j, dfa.step(dfa.q0(), s)});
    }
  return out;
}

std::vector<std::pair<SemiAlgebraicSet, int>> initial_product_regions(
    const ContinuousModel& model, const DeltaKDfa& dfa, const LabelPartition& part) {
  std::vector<std::pair<SemiAlgebraicSet, int>> out;
  Box x0 = model.X0;
  Box x0h = model.X0;
  x0h.vars = hatted_state_vars(model.n);
  const Box init = Box::product(x0, x0h);
  for (Symbol s : {Symbol::s1, Symbol::s2, Symbol::s3}) {
    const int q = dfa.step(dfa.q0(), s);
    for (const auto& branch : part.preimage(s).branches) {
      SemiAlgebraicSet piece = branch;
      bool feasible = true;
      for (std::size_t d = 0; d < piece.base.dim(); ++d) {
        const auto& a = piece.base.ranges[d];
        const auto& b = init.ranges[d];
        const Interval clipped{std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
        if (clipped.lo > clipped.hi) {
          feasible = false;
          break;
        }
        piece.base.ranges[d] = clipped;
      }
      if (feasible) out.emplace_back(std::move(piece), q);
    }
  }
  return out;
}

namespace {

struct BfsNode {
  ProductState state;
  std::size_t parent = SIZE_MAX;  // index into the node list
  std::size_t u = 0, uh = 0;      // inputs taken to reach this node
};

Witness extract_witness(const FiniteModel& fm, const std::vector<BfsNode>& nodes,
                        std::size_t goal) {
  std::vector<std::size_t> chain;
  for (std::size_t i = goal; i != SIZE_MAX; i = nodes[i].parent) chain.push_back(i);
  std::reverse(chain.begin(), chain.end());
  Witness w;
  w.x0 = fm.states[nodes[chain.front()].state.x];
  w.xh0 = fm.states[nodes[chain.front()].state.xh];
  for (std::size_t k = 1; k < chain.size(); ++k) {
    const auto& nd = nodes[chain[k]];
    w.u_run.push_back(fm.inputs[nd.u]);
    w.uh_run.push_back(fm.inputs[nd.uh]);
  }
  for (std::size_t k = 0; k < chain.size(); ++k) {
    const auto& st = nodes[chain[k]].state;
    w.x_run.push_back(fm.states[st.x]);
    w.xh_run.push_back(fm.states[st.xh]);
  }
  for (std::size_t k = 0; k < w.x_run.size(); ++k) {
    if (fm.faulty[*fm.find_state(w.x_run[k])]) {
      w.fault_step = k;
      break;
    }
  }
  return w;
}

}  // namespace

Verdict verify_exact(const SystemModel& model, double delta, int K) {
  const auto& fm = as_finite(model);  // ModelKindError for continuous
  const DeltaKDfa dfa(delta, K);
  const LabelPartition part(model, delta);

  const std::size_t S = fm.states.size();
  const int NQ = dfa.num_states();
  auto key = [&](const ProductState& p) {
    return (p.x * S + p.xh) * static_cast<std::size_t>(NQ) +
           static_cast<std::size_t>(p.q);
  };
  std::vector<char> seen(S * S * NQ, 0);
  std::vector<BfsNode> nodes;
  std::deque<std::size_t> queue;

  for (const auto& init : initial_product_states(fm, dfa, part)) {
    if (seen[key(init)]) continue;
    seen[key(init)] = 1;
    nodes.push_back({init, SIZE_MAX, 0, 0});
    queue.push_back(nodes.size() - 1);
  }

  while (!queue.empty()) {
    const std::size_t cur = queue.front();
    queue.pop_front();
    const ProductState st = nodes[cur].state;
    if (st.q == dfa.fbar()) {
      Verdict v;
      v.diagnosable = false;
      v.witness = extract_witness(fm, nodes, cur);
      return v;
    }
    if (st.q == dfa.trap()) continue;  // absorbing, cannot reach F̄
    for (std::size_t u = 0; u < fm.inputs.size(); ++u)
      for (std::size_t uh = 0; uh < fm.inputs.size(); ++uh) {
        ProductState nxt;
        nxt.x = fm.trans[st.x][u];
        nxt.xh = fm.trans[st.xh][uh];
        nxt.q = dfa.step(st.q, part.label(fm.states[nxt.x], fm.states[nxt.xh]));
        if (seen[key(nxt)]) continue;
        seen[key(nxt)] = 1;
        nodes.push_back({nxt, cur, u, uh});
        queue.push_back(nodes.size() - 1);
      }
  }
  return Verdict{true, std::nullopt};
}

Verdict definitional_check(const FiniteModel& model, double delta, int K,
                           std::size_t horizon) {
  const std::size_t S = model.states.size();
  const std::size_t needed = S * S * static_cast<std::size_t>(K + 3);
  if (horizon < needed)
    throw std::invalid_argument("horizon too small: need >= " +
                                std::to_string(needed));
  const LabelPartition part(SystemModel{model}, delta);  // for within_delta only

  // Node: (x, xh, c) with c = steps since the x-run first entered XF;
  // c == K+1 encodes "no fault yet". All Def.-2 clauses are enforced on the
  // node itself before it is enqueued.
  const int PRE = K + 1;
  struct Node {
    std::size_t x, xh;
    int c;
    std::size_t parent, u, uh;
    std::size_t depth;
  };
  auto admissible = [&](std::size_t x, std::size_t xh, int prev_c,
                        int& c_out) -> bool {
    if (model.faulty[xh]) return false;  // shadow run must avoid XF
    if (!part.within_delta(model.outputs[x], model.outputs[xh])) return false;
    if (prev_c == PRE)
      c_out = model.faulty[x] ? 0 : PRE;
    else
      c_out = prev_c + 1;
    return true;
  };

  auto key = [&](std::size_t x, std::size_t xh, int c) {
    return (x * S + xh) * static_cast<std::size_t>(K + 2) +
           static_cast<std::size_t>(c == PRE ? K + 1 : c);
  };
  std::vector<char> seen(S * S * static_cast<std::size_t>(K + 2), 0);
  std::vector<Node> nodes;
  std::deque<std::size_t> queue;

  std::size_t goal = SIZE_MAX;
  for (auto i : model.initial) {
    for (auto j : model.initial) {
      int c;
      if (!admissible(i, j, PRE, c)) continue;
      if (seen[key(i, j, c)]) continue;
      seen[key(i, j, c)] = 1;
      nodes.push_back({i, j, c, SIZE_MAX, 0, 0, 0});
      queue.push_back(nodes.size() - 1);
    }
  }

  while (!queue.empty() && goal == SIZE_MAX) {
    const std::size_t cur = queue.front();
    queue.pop_front();
    const Node nd = nodes[cur];
    if (nd.c != PRE && nd.c >= K) {
      goal = cur;  // window [0, fault+K] fully validated
      break;
    }
    if (nd.depth >= horizon) continue;
    for (std::size_t u = 0; u < model.inputs.size(); ++u)
      for (std::size_t uh = 0; uh < model.inputs.size(); ++uh) {
        const std::size_t nx = model.trans[nd.x][u];
        const std::size_t nxh = model.trans[nd.xh][uh];
        int c;
        if (!admissible(nx, nxh, nd.c, c)) continue;
        if (seen[key(nx, nxh, c)]) continue;
        seen[key(nx, nxh, c)] = 1;
        nodes.push_back({nx, nxh, c, cur, u, uh, nd.depth + 1});
        queue.push_back(nodes.size() - 1);
      }
  }

  if (goal == SIZE_MAX) return Verdict{true, std::nullopt};

  Witness w;
  std::vector<std::size_t> chain;
  for (std::size_t i = goal; i != SIZE_MAX; i = nodes[i].parent) chain.push_back(i);
  std::reverse(chain.begin(), chain.end());
  w.x0 = model.states[nodes[chain.front()].x];
  w.xh0 = model.states[nodes[chain.front()].xh];
  for (std::size_t k = 1; k < chain.size(); ++k) {
    w.u_run.push_back(model.inputs[nodes[chain[k]].u]);
    w.uh_run.push_back(model.inputs[nodes[chain[k]].uh]);
  }
  for (std::size_t k = 0; k < chain.size(); ++k) {
    w.x_run.push_back(model.states[nodes[chain[k]].x]);
    w.xh_run.push_back(model.states[nodes[chain[k]].xh]);
  }
  for (std::size_t k = 0; k < w.x_run.size(); ++k)
    if (model.faulty[*model.find_state(w.x_run[k])]) {
      w.fault_step = k;
      break;
    }
  return Verdict{false, std::move(w)};
}

bool witness_valid(const SystemModel& model, const LabelPartition& part,
                   const Witness& w, int K) {
  if (w.u_run.size() != w.uh_run.size()) return false;
  if (w.x_run.size() != w.u_run.size() + 1) return false;

  auto in_xf = [&](std::span<const double> x) {
    if (is_finite(model)) {
      const auto& fm = as_finite(model);
      const auto i = fm.find_state(x);
      return i && fm.faulty[*i];
    }
    return as_continuous(model).XF.contains(x);
  };

  // replay transitions
  for (std::size_t k = 0; k + 1 < w.x_run.size(); ++k) {
    const auto nx = successor(model, w.x_run[k], w.u_run[k]);
    const auto nxh = successor(model, w.xh_run[k], w.uh_run[k]);
    for (std::size_t d = 0; d < nx.size(); ++d)
      if (std::abs(nx[d] - w.x_run[k + 1][d]) > 1e-9 ||
          std::abs(nxh[d] - w.xh_run[k + 1][d]) > 1e-9)
        return false;
  }
  // fault step: first XF visit of the x-run
  std::size_t kf = SIZE_MAX;
  for (std::size_t k = 0; k < w.x_run.size(); ++k)
    if (in_xf(w.x_run[k])) {
      kf = k;
      break;
    }
  if (kf != w.fault_step) return false;
  const std::size_t end = kf + static_cast<std::size_t>(K);
  if (w.x_run.size() <= end) return false;  // window must be covered
  for (std::size_t k = 0; k <= end; ++k) {
    if (in_xf(w.xh_run[k])) return false;
    if (!part.within_delta(output_of(model, w.x_run[k]),
                           output_of(model, w.xh_run[k])))
      return false;
  }
  return true;
}

nlohmann::json witness_to_json(const Witness& w) {
  nlohmann::json j;
  j["x0"] = w.x0;
  j["xh0"] = w.xh0;
  j["u_run"] = w.u_run;
  j["uh_run"] = w.uh_run;
  j["x_run"] = w.x_run;
  j["xh_run"] = w.xh_run;
  j["fault_step"] = w.fault_step;
  return j;
}

}  // namespace diagcert
