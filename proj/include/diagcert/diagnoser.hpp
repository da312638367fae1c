#ifndef DIAGCERT_DIAGNOSER_HPP
#define DIAGCERT_DIAGNOSER_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "diagcert/automaton.hpp"
#include "diagcert/model.hpp"

namespace diagcert {

struct Observation {
  std::vector<double> y;
};

struct GridDiagnoserConfig {
  double cell = 0.1;          // dedup cell size (also the X0 seeding pitch)
  int input_grid = 5;         // forward-image inputs per dimension
  std::size_t floor = 32;     // re-densify when the cloud thins below this
  std::size_t max_cloud = 50000;
  std::uint64_t seed = 20240817;
};

// Online (delta,K)-diagnoser: M(k) recursion with fault detection on first
// emptiness. Exact set backend for finite models, inner-approximating point
// cloud for continuous ones.
class Diagnoser {
 public:
  enum class Backend { Exact, Grid };
  struct VerdictInfo {
    bool fault_detected = false;
    std::size_t window_lo = 0, window_hi = 0;  // [max(k-K,0), k]
    bool inconsistent_at_start = false;        // M(0) already empty
  };

  Diagnoser(const SystemModel& model, double delta, int K,
            const Observation& y0, GridDiagnoserConfig grid_cfg = {});

  void step(const Observation& yk);  // throws std::logic_error once terminated

  std::size_t k() const { return k_; }
  Backend backend() const { return backend_; }
  const VerdictInfo& verdict() const { return verdict_; }
  bool running() const { return !verdict_.fault_detected; }
  std::size_t estimate_size() const;
  // Exact backend: the current M(k) as state indices.
  const std::vector<std::size_t>& exact_set() const { return exact_; }
  const std::vector<std::vector<double>>& cloud() const { return cloud_; }

 private:
  const SystemModel* model_;
  LabelPartition part_;  // reused for the tie-tolerant delta filter
  int K_;
  GridDiagnoserConfig cfg_;
  Backend backend_;
  std::size_t k_ = 0;
  VerdictInfo verdict_;
  std::vector<std::size_t> exact_;
  std::vector<std::vector<double>> cloud_;
  std::vector<std::vector<double>> input_grid_;
  std::mt19937_64 rng_;

  void detect(std::size_t at_step, bool at_start);
};

struct DiagnoserTrace {
  std::vector<std::size_t> set_sizes;  // |M(k)| per step
  int d_value = 0;                     // Def. 5's D on the stream
  std::optional<Diagnoser::VerdictInfo> verdict;
};

DiagnoserTrace run_diagnoser(const SystemModel& model, double delta, int K,
                             std::span<const Observation> stream,
                             GridDiagnoserConfig grid_cfg = {});

struct SimulationResult {
  std::vector<std::vector<double>> states;      // length steps+1
  std::vector<std::vector<double>> outputs;     // exact h(x(k))
  std::vector<Observation> observations;        // outputs + bounded noise
};

// Exact simulation plus a deterministic delta-bounded observation run.
SimulationResult simulate(const SystemModel& model, std::span<const double> x0,
                          std::span<const std::vector<double>> inputs,
                          double delta, std::uint64_t noise_seed);

// JSON-lines stream format: one {"k": int, "y": [..]} object per line.
std::vector<Observation> load_observation_stream(const std::filesystem::path& p);
void save_observation_stream(const std::filesystem::path& p,
                             std::span<const Observation> stream);

}  // namespace diagcert

#endif
