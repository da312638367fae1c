#ifndef DIAGCERT_MODEL_HPP
#define DIAGCERT_MODEL_HPP

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "diagcert/geometry.hpp"
#include "diagcert/polynomial.hpp"

#include "json.hpp"

namespace diagcert {

struct SpecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ModelKindError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Naming convention for the variables of a system and its augmented copy:
// state x1..xn, hatted state xh1..xhn, input u1..um, hatted input uh1..uhm.
std::vector<VarId> state_vars(std::size_t n);
std::vector<VarId> hatted_state_vars(std::size_t n);
std::vector<VarId> input_vars(std::size_t m);
std::vector<VarId> hatted_input_vars(std::size_t m);

struct ContinuousModel {
  std::size_t n = 0, m = 0, q = 0;
  Box X, X0, XF, U;                 // over x-vars / u-vars
  std::vector<Polynomial> f;        // n polynomials in (x, u)
  std::vector<Polynomial> h;        // q polynomials in x

  std::vector<double> eval_f(std::span<const double> x, std::span<const double> u) const;
  std::vector<double> eval_h(std::span<const double> x) const;
};

struct FiniteModel {
  std::size_t n = 0, q = 0;
  std::vector<std::vector<double>> states;
  std::vector<std::size_t> initial;          // state indices
  std::vector<bool> faulty;                  // per state index
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<std::size_t>> trans;  // [state][input] -> state
  std::vector<std::vector<double>> outputs;     // per state

  std::optional<std::size_t> find_state(std::span<const double> x) const;
  std::optional<std::size_t> find_input(std::span<const double> u) const;
};

using SystemModel = std::variant<ContinuousModel, FiniteModel>;

bool is_finite(const SystemModel& m);
const FiniteModel& as_finite(const SystemModel& m);        // ModelKindError
const ContinuousModel& as_continuous(const SystemModel& m);  // ModelKindError
std::size_t state_dim(const SystemModel& m);
std::size_t output_dim(const SystemModel& m);

// Exact one-step transition; throws DomainError for x or u outside the domain.
std::vector<double> successor(const SystemModel& m, std::span<const double> x,
                              std::span<const double> u);
std::vector<double> output_of(const SystemModel& m, std::span<const double> x);

// Parses and validates a system-spec document. Throws SpecError with a
// descriptive message on schema or invariant violations.
SystemModel load_system(const nlohmann::json& doc);
SystemModel load_system_file(const std::filesystem::path& path);
nlohmann::json system_to_json(const SystemModel& m);

Polynomial polynomial_from_json(const nlohmann::json& terms);
nlohmann::json polynomial_to_json(const Polynomial& p);

}  // namespace diagcert

#endif
