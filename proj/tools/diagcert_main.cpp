// diagcert — decide, refute, certify, and monitor delta-approximate
// K-diagnosability of discrete-time control systems.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "diagcert/cegis.hpp"
#include "diagcert/certificate.hpp"
#include "diagcert/diagnoser.hpp"
#include "diagcert/product.hpp"

namespace {

using namespace diagcert;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUnknown = 2;

struct CommonOpts {
  std::string spec_path;
  double delta = 1.0;
  int K = 0;
  bool json_out = false;
  std::uint64_t seed = 20240817;
};

struct FalsifierOpts {
  double eps_box = 0.05;
  double margin = 1e-6;
  int input_grid = 9;
  std::size_t max_boxes = 200000;
  bool serial = true;
  int workers = 1;
};

FalsifierConfig to_config(const FalsifierOpts& o, std::uint64_t seed) {
  FalsifierConfig cfg;
  cfg.eps_box = o.eps_box;
  cfg.margin = o.margin;
  cfg.input_grid = o.input_grid;
  cfg.max_boxes = o.max_boxes;
  cfg.serial = o.serial || o.workers <= 1;
  cfg.workers = o.workers;
  cfg.seed = seed;
  return cfg;
}

void add_falsifier_flags(CLI::App* app, FalsifierOpts& o) {
  app->add_option("--eps-box", o.eps_box, "minimum box width");
  app->add_option("--margin", o.margin, "strictness margin");
  app->add_option("--input-grid", o.input_grid, "grid points per input dimension");
  app->add_option("--max-boxes", o.max_boxes, "box budget per condition");
  app->add_flag("--serial,!--parallel", o.serial, "serial falsifier (default)");
  app->add_option("--workers", o.workers, "worker threads in parallel mode");
}

nlohmann::json report_json(const std::string& subcommand,
                           const std::string& verdict, double seconds) {
  nlohmann::json j;
  j["subcommand"] = subcommand;
  j["verdict"] = verdict;
  j["seconds"] = seconds;
  return j;
}

std::string outcome_str(const FalsifyOutcome& o) {
  switch (o.tag) {
    case OutcomeTag::Proved: return "proved";
    case OutcomeTag::Counterexample: return "counterexample";
    case OutcomeTag::NoneFound: {
      std::string s = "none-found";
      if (o.undecided > 0)
        s += " (" + std::to_string(o.undecided) + " boxes unknown at resolution)";
      if (o.budget_exhausted) s += " (budget exhausted)";
      return s;
    }
  }
  return "?";
}

void print_report(const CertificateReport& rep, std::ostream& os) {
  for (const auto& c : rep.conditions) {
    os << "  " << c.name << ": " << outcome_str(c.outcome);
    if (c.grid_checked) os << " [input-grid existential]";
    if (c.outcome.cex) {
      os << "  at (";
      for (std::size_t i = 0; i < c.outcome.cex->point.size(); ++i)
        os << (i ? "," : "") << c.outcome.cex->point[i];
      os << ") value=" << c.outcome.cex->value;
    }
    os << "\n";
  }
  os << "verdict: " << verdict_str(rep.verdict);
  if (rep.exhaustive) os << " (exhaustive)";
  if (rep.grid_validated && rep.verdict == CheckVerdict::Valid)
    os << " (grid-validated existential)";
  os << " at margin " << rep.margin << "\n";
}

nlohmann::json report_to_json(const CertificateReport& rep) {
  nlohmann::json j;
  j["verdict"] = verdict_str(rep.verdict);
  j["margin"] = rep.margin;
  j["exhaustive"] = rep.exhaustive;
  j["grid_validated"] = rep.grid_validated;
  nlohmann::json conds = nlohmann::json::array();
  for (const auto& c : rep.conditions) {
    nlohmann::json cj;
    cj["name"] = c.name;
    cj["outcome"] = outcome_str(c.outcome);
    if (c.outcome.cex) {
      cj["counterexample"] = c.outcome.cex->point;
      cj["value"] = c.outcome.cex->value;
    }
    conds.push_back(cj);
  }
  j["conditions"] = conds;
  return j;
}

int cmd_dfa(double delta, int K, const std::string& dump) {
  const DeltaKDfa dfa(delta, K);
  const nlohmann::json j = dfa.to_json();
  if (dump.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(dump);
    if (!out) {
      std::cerr << "cannot write " << dump << "\n";
      return kExitError;
    }
    out << j.dump(2) << "\n";
    std::cout << "DFA with " << dfa.num_states() << " states written to " << dump
              << "\n";
  }
  return kExitOk;
}

int cmd_oracle(const CommonOpts& co, const std::string& witness_out,
               std::optional<std::size_t> horizon) {
  const SystemModel model = load_system_file(co.spec_path);
  const auto t0 = std::chrono::steady_clock::now();
  const Verdict v = verify_exact(model, co.delta, co.K);
  if (horizon) {
    const Verdict dv = definitional_check(as_finite(model), co.delta, co.K, *horizon);
    if (dv.diagnosable != v.diagnosable) {
      std::cerr << "internal disagreement between oracle and definitional check\n";
      return kExitError;
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (v.diagnosable) {
    std::cout << "DIAGNOSABLE (delta=" << co.delta << ", K=" << co.K << ")\n";
  } else {
    std::cout << "NOT DIAGNOSABLE (delta=" << co.delta << ", K=" << co.K << ")\n";
    std::cout << "witness fault step: " << v.witness->fault_step << "\n";
    if (!witness_out.empty()) {
      std::ofstream out(witness_out);
      out << witness_to_json(*v.witness).dump(2) << "\n";
      std::cout << "witness written to " << witness_out << "\n";
    }
  }
  if (co.json_out) {
    auto j = report_json("oracle",
                         v.diagnosable ? "DIAGNOSABLE" : "NOT DIAGNOSABLE", secs);
    if (v.witness) j["witness"] = witness_to_json(*v.witness);
    std::cout << j.dump(2) << "\n";
  }
  return kExitOk;
}

int cmd_check_certificate(const CommonOpts& co, const std::string& cert_path,
                          const std::string& mode_str, const FalsifierOpts& fo,
                          bool exclude_accepting, double shell_resolution) {
  const SystemModel model = load_system_file(co.spec_path);
  const Certificate cert = load_certificate_file(cert_path);
  const DeltaKDfa dfa(cert.delta, cert.K);
  const LabelPartition part(model, cert.delta);
  const CheckMode mode =
      mode_str == "certify" ? CheckMode::Certify : CheckMode::Falsify;
  ConditionOptions opt;
  opt.exclude_accepting_decrease = exclude_accepting;
  std::optional<VDomainInfo> vdom;
  if (cert.kind == 'V' && !is_finite(model))
    vdom = compute_pre_complement(as_continuous(model), shell_resolution);

  const auto rep = check_certificate(model, dfa, part, cert, mode,
                                     to_config(fo, co.seed), vdom, opt);
  print_report(rep, std::cout);
  if (co.json_out) std::cout << report_to_json(rep).dump(2) << "\n";
  return rep.verdict == CheckVerdict::Unknown ? kExitUnknown : kExitOk;
}

int cmd_synthesize(const CommonOpts& co, char kind, int degree,
                   const FalsifierOpts& fo, const CegisConfig& base,
                   const std::string& cert_out) {
  const SystemModel model = load_system_file(co.spec_path);
  const DeltaKDfa dfa(co.delta, co.K);
  const LabelPartition part(model, co.delta);
  CegisConfig cfg = base;
  cfg.degree = degree;
  cfg.falsifier = to_config(fo, co.seed);
  cfg.seed = co.seed;
  const CertTemplate tmpl =
      CertTemplate::uniform_degree(kind, co.K, state_dim(model), degree);

  const auto t0 = std::chrono::steady_clock::now();
  SynthResult res;
  if (kind == 'B') {
    res = synthesize_b(model, dfa, part, tmpl, cfg);
  } else {
    std::optional<VDomainInfo> vdom;
    if (!is_finite(model)) vdom = compute_pre_complement(as_continuous(model), 0.25);
    res = synthesize_v(model, dfa, part, tmpl, vdom, cfg);
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  for (const auto& line : res.log) std::cout << line << "\n";
  switch (res.status) {
    case SynthStatus::Certified: {
      std::cout << (kind == 'B' ? "B-HBC" : "V-HBC") << " certified";
      if (res.at_resolution) std::cout << " at resolution " << cfg.falsifier.eps_box;
      std::cout << " after " << res.iterations << " iteration(s), " << secs
                << " s\n";
      std::cout << (kind == 'B'
                        ? "system is diagnosable (Theorem-2 certificate found)\n"
                        : "system is NOT diagnosable (Theorem-3 certificate found)\n");
      if (res.report) print_report(*res.report, std::cout);
      if (!cert_out.empty()) {
        std::ofstream out(cert_out);
        out << certificate_to_json(*res.certificate).dump(2) << "\n";
        std::cout << "certificate written to " << cert_out << "\n";
      }
      return kExitOk;
    }
    case SynthStatus::TemplateInfeasible:
      std::cout << "template infeasible: no degree-" << degree
                << " certificate fits the sampled constraints\n";
      return kExitUnknown;
    case SynthStatus::Budget:
      std::cout << "iteration budget exhausted after " << res.iterations
                << " iterations\n";
      return kExitUnknown;
  }
  return kExitUnknown;
}

int cmd_diagnose(const CommonOpts& co, const std::string& stream_path,
                 const GridDiagnoserConfig& gcfg) {
  const SystemModel model = load_system_file(co.spec_path);
  const auto stream = load_observation_stream(stream_path);
  if (stream.empty()) {
    std::cerr << "empty observation stream\n";
    return kExitError;
  }
  const auto trace = run_diagnoser(model, co.delta, co.K, stream, gcfg);
  for (std::size_t k = 0; k < trace.set_sizes.size(); ++k)
    std::cout << "k=" << k << " |M(k)|=" << trace.set_sizes[k] << "\n";
  if (trace.d_value == 1) {
    std::cout << "FAULT DETECTED in window [" << trace.verdict->window_lo << ", "
              << trace.verdict->window_hi << "]";
    if (trace.verdict->inconsistent_at_start)
      std::cout << " (observation inconsistent at start)";
    std::cout << "\nD = 1\n";
  } else {
    std::cout << "no fault detected\nD = 0\n";
  }
  if (co.json_out) {
    nlohmann::json j;
    j["set_sizes"] = trace.set_sizes;
    j["D"] = trace.d_value;
    if (trace.verdict) {
      j["window"] = {trace.verdict->window_lo, trace.verdict->window_hi};
      j["inconsistent_at_start"] = trace.verdict->inconsistent_at_start;
    }
    std::cout << j.dump(2) << "\n";
  }
  return kExitOk;
}

int cmd_simulate(const CommonOpts& co, const std::string& x0_str,
                 const std::string& input_str, std::size_t steps,
                 const std::string& out_path) {
  const SystemModel model = load_system_file(co.spec_path);
  auto parse_vec = [](const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
    return v;
  };
  std::vector<double> x0;
  if (!x0_str.empty()) {
    x0 = parse_vec(x0_str);
  } else if (is_finite(model)) {
    x0 = as_finite(model).states[as_finite(model).initial.front()];
  } else {
    x0 = as_continuous(model).X0.center();
  }
  const std::vector<double> u = parse_vec(input_str);
  std::vector<std::vector<double>> inputs(steps, u);
  const auto sim = simulate(model, x0, inputs, co.delta, co.seed);
  save_observation_stream(out_path, sim.observations);
  std::cout << "simulated " << steps << " steps from (";
  for (std::size_t i = 0; i < x0.size(); ++i) std::cout << (i ? "," : "") << x0[i];
  std::cout << "); stream written to " << out_path << "\n";
  for (std::size_t k = 0; k < sim.states.size(); ++k) {
    std::cout << "k=" << k << " x=(";
    for (std::size_t i = 0; i < sim.states[k].size(); ++i)
      std::cout << (i ? "," : "") << sim.states[k][i];
    std::cout << ")\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"diagcert: delta-approximate K-diagnosability toolkit"};
  app.require_subcommand(1);

  CommonOpts co;
  FalsifierOpts fo;
  CegisConfig cegis;
  GridDiagnoserConfig gcfg;

  auto add_common = [&](CLI::App* sub, bool need_spec = true) {
    if (need_spec)
      sub->add_option("--spec", co.spec_path, "system spec JSON")->required();
    sub->add_option("--delta", co.delta, "observation precision");
    sub->add_option("--K", co.K, "detection window");
    sub->add_flag("--json", co.json_out, "also print a JSON report");
    sub->add_option("--seed", co.seed, "seed for randomized steps");
  };

  // dfa
  auto* dfa_cmd = app.add_subcommand("dfa", "build and dump a (delta,K)-DFA");
  std::string dump_path;
  dfa_cmd->add_option("--delta", co.delta, "observation precision")->required();
  dfa_cmd->add_option("--K", co.K, "detection window")->required();
  dfa_cmd->add_option("--dump", dump_path, "output JSON path");

  // oracle
  auto* oracle_cmd =
      app.add_subcommand("oracle", "exact diagnosability decision (finite models)");
  add_common(oracle_cmd);
  std::string witness_out;
  std::optional<std::size_t> horizon;
  oracle_cmd->add_option("--witness-out", witness_out, "write witness JSON here");
  std::size_t horizon_val = 0;
  auto* hopt = oracle_cmd->add_option(
      "--cross-check-horizon", horizon_val,
      "also run the definitional brute-force check at this horizon");

  // verify / refute
  int degree = 2;
  std::string cert_out;
  auto* verify_cmd =
      app.add_subcommand("verify", "synthesize a B-HBC (proves diagnosability)");
  add_common(verify_cmd);
  verify_cmd->add_option("--degree", degree, "template degree");
  verify_cmd->add_option("--cert-out", cert_out, "write the certificate here");
  verify_cmd->add_option("--max-iterations", cegis.max_iterations, "CEGIS budget");
  verify_cmd->add_option("--state-samples", cegis.state_samples, "initial |D_x|");
  verify_cmd->add_option("--input-samples", cegis.input_samples, "initial |D_u|");
  verify_cmd->add_option("--eps-pos", cegis.eps_pos, "strictness slack (16)");
  verify_cmd->add_option("--coeff-bound", cegis.coeff_bound, "LP coefficient box");
  add_falsifier_flags(verify_cmd, fo);

  auto* refute_cmd =
      app.add_subcommand("refute", "synthesize a V-HBC (refutes diagnosability)");
  add_common(refute_cmd);
  refute_cmd->add_option("--degree", degree, "template degree");
  refute_cmd->add_option("--cert-out", cert_out, "write the certificate here");
  refute_cmd->add_option("--max-iterations", cegis.max_iterations, "CEGIS budget");
  refute_cmd->add_option("--vloop-samples", cegis.vloop_samples, "initial |D'_x|");
  refute_cmd->add_option("--eps-dec", cegis.eps_dec, "decrease slack (29)");
  refute_cmd->add_option("--assign-grid", cegis.assign_grid,
                         "input grid per dimension for the disjunct assignment");
  refute_cmd->add_option("--coeff-bound", cegis.coeff_bound, "LP coefficient box");
  add_falsifier_flags(refute_cmd, fo);

  // check-certificate
  auto* check_cmd = app.add_subcommand("check-certificate",
                                       "validate a certificate document");
  check_cmd->add_option("--spec", co.spec_path, "system spec JSON")->required();
  std::string cert_path, mode_str = "certify";
  bool exclude_accepting = false;
  double shell_resolution = 0.25;
  check_cmd->add_option("--cert", cert_path, "certificate JSON")->required();
  check_cmd->add_option("--mode", mode_str, "falsify | certify")
      ->check(CLI::IsMember({"falsify", "certify"}));
  check_cmd->add_flag("--exclude-accepting-decrease", exclude_accepting,
                      "drop the F̄ row of the non-increase condition");
  check_cmd->add_option("--shell-resolution", shell_resolution,
                        "pre-complement grid resolution (V certificates)");
  check_cmd->add_flag("--json", co.json_out, "also print a JSON report");
  check_cmd->add_option("--seed", co.seed, "falsifier seed");
  add_falsifier_flags(check_cmd, fo);

  // diagnose
  auto* diag_cmd = app.add_subcommand("diagnose", "run the online diagnoser");
  add_common(diag_cmd);
  std::string stream_path;
  diag_cmd->add_option("--stream", stream_path, "JSON-lines observation stream")
      ->required();
  diag_cmd->add_option("--grid-cell", gcfg.cell, "cloud cell size (continuous)");
  diag_cmd->add_option("--grid-inputs", gcfg.input_grid,
                       "forward-image inputs per dimension");
  diag_cmd->add_option("--cloud-floor", gcfg.floor, "re-densification floor");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "simulate and emit a stream");
  add_common(sim_cmd);
  std::string x0_str, input_str = "";
  std::size_t steps = 10;
  std::string sim_out = "stream.jsonl";
  sim_cmd->add_option("--x0", x0_str, "initial state, comma separated");
  sim_cmd->add_option("--input", input_str, "constant input, comma separated")
      ->required();
  sim_cmd->add_option("--steps", steps, "number of steps");
  sim_cmd->add_option("--out", sim_out, "stream output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(dfa_cmd)) return cmd_dfa(co.delta, co.K, dump_path);
    if (app.got_subcommand(oracle_cmd)) {
      if (hopt->count() > 0) horizon = horizon_val;
      return cmd_oracle(co, witness_out, horizon);
    }
    if (app.got_subcommand(verify_cmd))
      return cmd_synthesize(co, 'B', degree, fo, cegis, cert_out);
    if (app.got_subcommand(refute_cmd))
      return cmd_synthesize(co, 'V', degree, fo, cegis, cert_out);
    if (app.got_subcommand(check_cmd))
      return cmd_check_certificate(co, cert_path, mode_str, fo, exclude_accepting,
                                   shell_resolution);
    if (app.got_subcommand(diag_cmd)) {
      gcfg.seed = co.seed;
      return cmd_diagnose(co, stream_path, gcfg);
    }
    if (app.got_subcommand(sim_cmd))
      return cmd_simulate(co, x0_str, input_str, steps, sim_out);
  } catch (const SpecError& e) {
    std::cerr << "spec error: " << e.what() << "\n";
    return kExitError;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitError;
  } catch (const ModelKindError& e) {
    std::cerr << "model kind error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
