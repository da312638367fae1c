#include "diagcert/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace diagcert {

namespace {
std::vector<VarId> named_vars(const char* prefix, std::size_t count) {
  std::vector<VarId> vs(count);
  for (std::size_t i = 0; i < count; ++i)
    vs[i] = var_id(std::string(prefix) + std::to_string(i + 1));
  return vs;
}

constexpr double kMatchTol = 1e-9;

bool vec_close(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > kMatchTol) return false;
  return true;
}
}  // namespace

std::vector<VarId> state_vars(std::size_t n) { return named_vars("x", n); }
std::vector<VarId> hatted_state_vars(std::size_t n) { return named_vars("xh", n); }
std::vector<VarId> input_vars(std::size_t m) { return named_vars("u", m); }
std::vector<VarId> hatted_input_vars(std::size_t m) { return named_vars("uh", m); }

std::vector<double> ContinuousModel::eval_f(std::span<const double> x,
                                            std::span<const double> u) const {
  Env env = make_env(X.vars, x);
  for (std::size_t i = 0; i < m; ++i) env.set(U.vars[i], u[i]);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = f[i].eval(env);
  return out;
}

std::vector<double> ContinuousModel::eval_h(std::span<const double> x) const {
  const Env env = make_env(X.vars, x);
  std::vector<double> out(q);
  for (std::size_t i = 0; i < q; ++i) out[i] = h[i].eval(env);
  return out;
}

std::optional<std::size_t> FiniteModel::find_state(std::span<const double> x) const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (vec_close(states[i], x)) return i;
  return std::nullopt;
}

std::optional<std::size_t> FiniteModel::find_input(std::span<const double> u) const {
  for (std::size_t i = 0; i < inputs.size(); ++i)
    if (vec_close(inputs[i], u)) return i;
  return std::nullopt;
}

bool is_finite(const SystemModel& m) {
  return std::holds_alternative<FiniteModel>(m);
}

const FiniteModel& as_finite(const SystemModel& m) {
  if (auto* f = std::get_if<FiniteModel>(&m)) return *f;
  throw ModelKindError("operation requires a finite model");
}

const ContinuousModel& as_continuous(const SystemModel& m) {
  if (auto* c = std::get_if<ContinuousModel>(&m)) return *c;
  throw ModelKindError("operation requires a continuous model");
}

std::size_t state_dim(const SystemModel& m) {
  return is_finite(m) ? as_finite(m).n : as_continuous(m).n;
}

std::size_t output_dim(const SystemModel& m) {
  return is_finite(m) ? as_finite(m).q : as_continuous(m).q;
}

std::vector<double> successor(const SystemModel& m, std::span<const double> x,
                              std::span<const double> u) {
  if (is_finite(m)) {
    const auto& fm = as_finite(m);
    const auto si = fm.find_state(x);
    if (!si) throw DomainError("state not in the finite state set");
    const auto ui = fm.find_input(u);
    if (!ui) throw DomainError("input not in the finite input set");
    return fm.states[fm.trans[*si][*ui]];
  }
  const auto& cm = as_continuous(m);
  if (!cm.X.contains(x)) throw DomainError("state outside X");
  if (!cm.U.contains(u)) throw DomainError("input outside U");
  return cm.eval_f(x, u);
}

std::vector<double> output_of(const SystemModel& m, std::span<const double> x) {
  if (is_finite(m)) {
    const auto& fm = as_finite(m);
    const auto si = fm.find_state(x);
    if (!si) throw DomainError("state not in the finite state set");
    return fm.outputs[*si];
  }
  return as_continuous(m).eval_h(x);
}

Polynomial polynomial_from_json(const nlohmann::json& terms) {
  if (!terms.is_array()) throw SpecError("polynomial must be an array of terms");
  std::vector<std::pair<Monomial, double>> ts;
  for (const auto& t : terms) {
    if (!t.contains("coeff")) throw SpecError("polynomial term missing 'coeff'");
    Monomial m;
    if (t.contains("exps")) {
      for (auto& [name, e] : t.at("exps").items()) {
        const int ei = e.get<int>();
        if (ei < 0) throw SpecError("negative exponent for variable " + name);
        if (ei > 0) m.exps.emplace_back(var_id(name), static_cast<std::uint32_t>(ei));
      }
    }
    ts.emplace_back(std::move(m), t.at("coeff").get<double>());
  }
  return Polynomial::from_terms(std::move(ts));
}

nlohmann::json polynomial_to_json(const Polynomial& p) {
  nlohmann::json arr = nlohmann::json::array();
  for (auto& [m, c] : p.terms()) {
    nlohmann::json t;
    t["coeff"] = c;
    nlohmann::json exps = nlohmann::json::object();
    for (auto& [v, e] : m.exps) exps[var_name(v)] = e;
    t["exps"] = exps;
    arr.push_back(t);
  }
  return arr;
}

namespace {

Box box_from_json(const nlohmann::json& j, const std::vector<VarId>& vars,
                  const std::string& what) {
  if (!j.is_array() || j.size() != vars.size())
    throw SpecError(what + ": expected " + std::to_string(vars.size()) +
                    " [lo,hi] pairs");
  std::vector<Interval> rs;
  for (const auto& iv : j) {
    if (!iv.is_array() || iv.size() != 2)
      throw SpecError(what + ": each dimension must be [lo,hi]");
    const double lo = iv[0].get<double>(), hi = iv[1].get<double>();
    if (lo > hi) throw SpecError(what + ": lo > hi");
    rs.emplace_back(lo, hi);
  }
  return Box{vars, std::move(rs)};
}

nlohmann::json box_to_json(const Box& b) {
  nlohmann::json arr = nlohmann::json::array();
  for (auto& r : b.ranges) arr.push_back({r.lo, r.hi});
  return arr;
}

SystemModel load_continuous(const nlohmann::json& doc) {
  ContinuousModel m;
  m.n = doc.at("n").get<std::size_t>();
  m.m = doc.at("m").get<std::size_t>();
  if (m.n == 0 || m.m == 0) throw SpecError("n and m must be positive");
  const auto xv = state_vars(m.n);
  const auto uv = input_vars(m.m);
  m.X = box_from_json(doc.at("X"), xv, "X");
  m.X0 = box_from_json(doc.at("X0"), xv, "X0");
  m.XF = box_from_json(doc.at("XF"), xv, "XF");
  m.U = box_from_json(doc.at("U"), uv, "U");
  if (!box_subset(m.X0, m.X))
    throw SpecError("initial set not contained in state set");
  if (!box_subset(m.XF, m.X))
    throw SpecError("faulty set not contained in state set");

  const auto& fj = doc.at("f");
  if (!fj.is_array() || fj.size() != m.n)
    throw SpecError("f must list n polynomials");
  for (const auto& p : fj) m.f.push_back(polynomial_from_json(p));
  const auto& hj = doc.at("h");
  if (!hj.is_array() || hj.empty()) throw SpecError("h must list >= 1 polynomial");
  for (const auto& p : hj) m.h.push_back(polynomial_from_json(p));
  m.q = m.h.size();
  if (doc.contains("q") && doc.at("q").get<std::size_t>() != m.q)
    throw SpecError("q does not match the number of output polynomials");

  // f may reference x and u only; h may reference x only
  std::vector<bool> allowed_f(var_pool_size(), false), allowed_h(var_pool_size(), false);
  for (auto v : xv) allowed_f[v] = allowed_h[v] = true;
  for (auto v : uv) allowed_f[v] = true;
  for (std::size_t i = 0; i < m.f.size(); ++i)
    for (auto v : m.f[i].vars())
      if (v >= allowed_f.size() || !allowed_f[v])
        throw SpecError("f[" + std::to_string(i) + "] references undeclared variable " +
                        var_name(v));
  for (std::size_t i = 0; i < m.h.size(); ++i)
    for (auto v : m.h[i].vars())
      if (v >= allowed_h.size() || !allowed_h[v])
        throw SpecError("h[" + std::to_string(i) + "] references undeclared variable " +
                        var_name(v));
  return m;
}

std::vector<std::vector<double>> points_from_json(const nlohmann::json& j,
                                                  const std::string& what) {
  if (!j.is_array() || j.empty()) throw SpecError(what + " must be a nonempty array");
  std::vector<std::vector<double>> pts;
  for (const auto& p : j) {
    if (!p.is_array() || p.empty())
      throw SpecError(what + " entries must be nonempty vectors");
    pts.push_back(p.get<std::vector<double>>());
    if (pts.back().size() != pts.front().size())
      throw SpecError(what + " entries must share one dimension");
  }
  return pts;
}

SystemModel load_finite(const nlohmann::json& doc) {
  FiniteModel m;
  m.states = points_from_json(doc.at("states"), "states");
  m.n = m.states.front().size();
  m.inputs = points_from_json(doc.at("inputs"), "inputs");
  m.outputs = points_from_json(doc.at("output"), "output");
  if (m.outputs.size() != m.states.size())
    throw SpecError("output must list one vector per state");
  m.q = m.outputs.front().size();

  m.faulty.assign(m.states.size(), false);
  for (const auto& i : doc.at("faulty")) {
    const auto idx = i.get<std::size_t>();
    if (idx >= m.states.size()) throw SpecError("faulty index out of range");
    m.faulty[idx] = true;
  }
  for (const auto& i : doc.at("initial")) {
    const auto idx = i.get<std::size_t>();
    if (idx >= m.states.size()) throw SpecError("initial index out of range");
    m.initial.push_back(idx);
  }
  if (m.initial.empty()) throw SpecError("initial state set is empty");

  m.trans.assign(m.states.size(),
                 std::vector<std::size_t>(m.inputs.size(), SIZE_MAX));
  for (const auto& t : doc.at("trans")) {
    if (!t.is_array() || t.size() != 3)
      throw SpecError("trans entries must be [state, input, next]");
    const auto s = t[0].get<std::size_t>(), u = t[1].get<std::size_t>(),
               nx = t[2].get<std::size_t>();
    if (s >= m.states.size() || u >= m.inputs.size() || nx >= m.states.size())
      throw SpecError("trans entry index out of range");
    if (m.trans[s][u] != SIZE_MAX && m.trans[s][u] != nx)
      throw SpecError("trans is not deterministic at state " + std::to_string(s));
    m.trans[s][u] = nx;
  }
  for (std::size_t s = 0; s < m.states.size(); ++s)
    for (std::size_t u = 0; u < m.inputs.size(); ++u)
      if (m.trans[s][u] == SIZE_MAX)
        throw SpecError("transition map not total: state " + std::to_string(s) +
                        ", input " + std::to_string(u));
  return m;
}

}  // namespace

SystemModel load_system(const nlohmann::json& doc) {
  const std::string kind = doc.value("kind", "");
  if (kind == "continuous") return load_continuous(doc);
  if (kind == "finite") return load_finite(doc);
  throw SpecError("kind must be \"continuous\" or \"finite\"");
}

SystemModel load_system_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw SpecError("invalid JSON in " + path.string() + ": " + e.what());
  }
  return load_system(doc);
}

nlohmann::json system_to_json(const SystemModel& m) {
  nlohmann::json j;
  if (is_finite(m)) {
    const auto& fm = as_finite(m);
    j["kind"] = "finite";
    j["states"] = fm.states;
    j["inputs"] = fm.inputs;
    j["output"] = fm.outputs;
    std::vector<std::size_t> faulty;
    for (std::size_t i = 0; i < fm.faulty.size(); ++i)
      if (fm.faulty[i]) faulty.push_back(i);
    j["faulty"] = faulty;
    j["initial"] = fm.initial;
    nlohmann::json tr = nlohmann::json::array();
    for (std::size_t s = 0; s < fm.states.size(); ++s)
      for (std::size_t u = 0; u < fm.inputs.size(); ++u)
        tr.push_back({s, u, fm.trans[s][u]});
    j["trans"] = tr;
    return j;
  }
  const auto& cm = as_continuous(m);
  j["kind"] = "continuous";
  j["n"] = cm.n;
  j["m"] = cm.m;
  j["q"] = cm.q;
  j["X"] = box_to_json(cm.X);
  j["X0"] = box_to_json(cm.X0);
  j["XF"] = box_to_json(cm.XF);
  j["U"] = box_to_json(cm.U);
  nlohmann::json fj = nlohmann::json::array(), hj = nlohmann::json::array();
  for (auto& p : cm.f) fj.push_back(polynomial_to_json(p));
  for (auto& p : cm.h) hj.push_back(polynomial_to_json(p));
  j["f"] = fj;
  j["h"] = hj;
  return j;
}

}  // namespace diagcert
