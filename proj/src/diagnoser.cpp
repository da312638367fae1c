#include "diagcert/diagnoser.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "diagcert/falsifier.hpp"  // input_grid_points

namespace diagcert {

namespace {

std::vector<double> ball_noise(std::size_t dim, double radius,
                               std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> v(dim);
  double norm2 = 0.0;
  for (auto& x : v) {
    x = gauss(rng);
    norm2 += x * x;
  }
  const double norm = std::sqrt(norm2);
  if (norm == 0.0) return std::vector<double>(dim, 0.0);
  // uniform in the ball: radius scaled by U^(1/dim)
  const double r = radius * std::pow(unif(rng), 1.0 / dim);
  for (auto& x : v) x *= r / norm;
  return v;
}

}  // namespace

Diagnoser::Diagnoser(const SystemModel& model, double delta, int K,
                     const Observation& y0, GridDiagnoserConfig grid_cfg)
    : model_(&model),
      part_(model, delta),
      K_(K),
      cfg_(grid_cfg),
      backend_(is_finite(model) ? Backend::Exact : Backend::Grid),
      rng_(grid_cfg.seed) {
  if (K < 0) throw std::invalid_argument("K must be nonnegative");
  if (backend_ == Backend::Exact) {
    const auto& fm = as_finite(model);
    for (auto i : fm.initial) {
      if (fm.faulty[i]) continue;
      if (!part_.within_delta(fm.outputs[i], y0.y)) continue;
      if (std::find(exact_.begin(), exact_.end(), i) == exact_.end())
        exact_.push_back(i);
    }
    if (exact_.empty()) detect(0, /*at_start=*/true);
  } else {
    const auto& cm = as_continuous(model);
    input_grid_ = input_grid_points(cm.U, cfg_.input_grid);
    // grid over X0 at the configured pitch
    std::vector<std::vector<double>> axes(cm.n);
    for (std::size_t d = 0; d < cm.n; ++d) {
      const auto& r = cm.X0.ranges[d];
      const std::size_t k = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::ceil(r.width() / cfg_.cell)));
      for (std::size_t i = 0; i <= k; ++i)
        axes[d].push_back(r.lo + (r.hi - r.lo) * i / k);
    }
    std::vector<std::size_t> idx(cm.n, 0);
    while (true) {
      std::vector<double> p(cm.n);
      for (std::size_t d = 0; d < cm.n; ++d) p[d] = axes[d][idx[d]];
      if (!cm.XF.contains(p) && part_.within_delta(cm.eval_h(p), y0.y))
        cloud_.push_back(std::move(p));
      std::size_t d = 0;
      while (d < cm.n && ++idx[d] == axes[d].size()) idx[d++] = 0;
      if (d == cm.n) break;
    }
    if (cloud_.empty()) detect(0, /*at_start=*/true);
  }
}

void Diagnoser::detect(std::size_t at_step, bool at_start) {
  verdict_.fault_detected = true;
  verdict_.inconsistent_at_start = at_start;
  verdict_.window_hi = at_step;
  verdict_.window_lo =
      at_step >= static_cast<std::size_t>(K_) ? at_step - K_ : 0;
}

std::size_t Diagnoser::estimate_size() const {
  return backend_ == Backend::Exact ? exact_.size() : cloud_.size();
}

void Diagnoser::step(const Observation& yk) {
  if (!running()) throw std::logic_error("diagnoser already reported a fault");
  ++k_;
  if (backend_ == Backend::Exact) {
    const auto& fm = as_finite(*model_);
    std::set<std::size_t> next;
    for (auto i : exact_)
      for (std::size_t u = 0; u < fm.inputs.size(); ++u) next.insert(fm.trans[i][u]);
    exact_.clear();
    for (auto i : next) {
      if (fm.faulty[i]) continue;
      if (!part_.within_delta(fm.outputs[i], yk.y)) continue;
      exact_.push_back(i);
    }
    if (exact_.empty()) detect(k_, false);
    return;
  }

  const auto& cm = as_continuous(*model_);
  auto keeps = [&](const std::vector<double>& p) {
    return cm.X.contains(p) && !cm.XF.contains(p) &&
           part_.within_delta(cm.eval_h(p), yk.y);
  };
  // forward image over the input grid, filtered, deduplicated per cell
  std::set<std::vector<long long>> cells;
  std::vector<std::vector<double>> next;
  auto cell_of = [&](const std::vector<double>& p) {
    std::vector<long long> c(p.size());
    for (std::size_t d = 0; d < p.size(); ++d)
      c[d] = static_cast<long long>(std::floor(p[d] / cfg_.cell));
    return c;
  };
  for (const auto& p : cloud_) {
    for (const auto& u : input_grid_) {
      auto np = cm.eval_f(p, u);
      if (!keeps(np)) continue;
      auto c = cell_of(np);
      if (cells.insert(std::move(c)).second) {
        next.push_back(std::move(np));
        if (next.size() >= cfg_.max_cloud) break;
      }
    }
    if (next.size() >= cfg_.max_cloud) break;
  }
  // local jitter re-densification when the cloud runs thin
  if (!next.empty() && next.size() < cfg_.floor) {
    std::uniform_real_distribution<double> off(-0.5 * cfg_.cell, 0.5 * cfg_.cell);
    const std::size_t base = next.size();
    for (std::size_t tries = 0; tries < 20 * cfg_.floor && next.size() < cfg_.floor;
         ++tries) {
      auto p = next[tries % base];
      for (auto& x : p) x += off(rng_);
      if (keeps(p)) next.push_back(std::move(p));
    }
  }
  cloud_ = std::move(next);
  if (cloud_.empty()) detect(k_, false);
}

DiagnoserTrace run_diagnoser(const SystemModel& model, double delta, int K,
                             std::span<const Observation> stream,
                             GridDiagnoserConfig grid_cfg) {
  DiagnoserTrace trace;
  if (stream.empty()) return trace;
  Diagnoser d(model, delta, K, stream[0], grid_cfg);
  trace.set_sizes.push_back(d.estimate_size());
  for (std::size_t k = 1; k < stream.size() && d.running(); ++k) {
    d.step(stream[k]);
    trace.set_sizes.push_back(d.estimate_size());
  }
  if (!d.running()) {
    trace.d_value = 1;
    trace.verdict = d.verdict();
  }
  return trace;
}

SimulationResult simulate(const SystemModel& model, std::span<const double> x0,
                          std::span<const std::vector<double>> inputs,
                          double delta, std::uint64_t noise_seed) {
  SimulationResult res;
  std::mt19937_64 rng(noise_seed);
  std::vector<double> x(x0.begin(), x0.end());
  const std::size_t q = output_dim(model);
  auto record = [&](const std::vector<double>& state) {
    res.states.push_back(state);
    res.outputs.push_back(output_of(model, state));
    Observation obs;
    obs.y = res.outputs.back();
    const auto noise = ball_noise(q, delta, rng);
    for (std::size_t i = 0; i < q; ++i) obs.y[i] += noise[i];
    res.observations.push_back(std::move(obs));
  };
  record(x);
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    try {
      x = successor(model, x, inputs[k]);
    } catch (const DomainError& e) {
      throw DomainError("simulation left the domain at step " +
                        std::to_string(k + 1) + ": " + e.what());
    }
    record(x);
  }
  return res;
}

std::vector<Observation> load_observation_stream(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw SpecError("cannot open " + p.string());
  std::vector<std::pair<long long, Observation>> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw SpecError("invalid stream line: " + std::string(e.what()));
    }
    Observation o;
    o.y = j.at("y").get<std::vector<double>>();
    entries.emplace_back(j.at("k").get<long long>(), std::move(o));
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Observation> out;
  for (auto& [k, o] : entries) out.push_back(std::move(o));
  return out;
}

void save_observation_stream(const std::filesystem::path& p,
                             std::span<const Observation> stream) {
  std::ofstream out(p);
  if (!out) throw SpecError("cannot write " + p.string());
  for (std::size_t k = 0; k < stream.size(); ++k) {
    nlohmann::json j;
    j["k"] = k;
    j["y"] = stream[k].y;
    out << j.dump() << "\n";
  }
}

}  // namespace diagcert
