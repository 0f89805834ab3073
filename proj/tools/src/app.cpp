#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nlsq_cli/commands.hpp"

namespace nlsq::cli {

namespace {

using nlohmann::json;

// Options that a --config file may fill. A key is applied only when the
// matching flag was not given on the command line.
class ConfigBindings {
 public:
  explicit ConfigBindings(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* option(const std::string& name, T& target, const std::string& help) {
    CLI::Option* opt = app_->add_option("--" + name, target, help);
    add(name, opt, [&target](const json& v) { target = v.get<T>(); });
    return opt;
  }

  CLI::Option* flag(const std::string& name, bool& target, const std::string& help) {
    CLI::Option* opt = app_->add_flag("--" + name, target, help);
    add(name, opt, [&target](const json& v) { target = v.get<bool>(); });
    return opt;
  }

  void apply(const std::string& path) const {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file '" + path + "'");
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) throw UsageError("config file must hold a JSON object");
    for (const auto& [raw_key, value] : doc.items()) {
      std::string key = raw_key;
      std::replace(key.begin(), key.end(), '_', '-');
      const auto it = bindings_.find(key);
      if (it == bindings_.end()) {
        throw UsageError("unknown config key '" + raw_key + "' for '" + app_->get_name() + "'");
      }
      if (it->second.option->count() > 0) continue;
      try {
        it->second.apply(value);
      } catch (const json::exception&) {
        throw UsageError("config key '" + raw_key + "' has the wrong type");
      }
    }
  }

 private:
  struct Binding {
    CLI::Option* option;
    std::function<void(const json&)> apply;
  };

  void add(const std::string& name, CLI::Option* opt, std::function<void(const json&)> fn) {
    bindings_[name] = Binding{opt, std::move(fn)};
  }

  CLI::App* app_;
  std::map<std::string, Binding> bindings_;
};

struct Emitter {
  std::ostream& stdout_stream;
  std::string path;

  void write(const std::string& text) const {
    if (path.empty()) {
      stdout_stream << text;
      return;
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file || !(file << text) || !file.flush()) {
      throw UsageError("cannot write output file '" + path + "'");
    }
  }
};

TwistingModel model_from(const std::string& name) {
  try {
    return parse_twisting_model(name);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
}

int finish(const IntegrityReport& integrity, std::ostream& err) {
  if (!integrity.flagged()) return kExitOk;
  err << "error: numerical integrity check failed";
  for (const std::string& note : integrity.notes) err << "; " << note;
  err << '\n';
  return kExitIntegrity;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Metrological nonlinear squeezing toolkit"};
  app.name("nlsq");
  app.require_subcommand(1);

  std::string model = "oat";
  std::string format;
  std::string out_path;
  std::string config_path;
  unsigned workers = 0;

  // sweep
  SweepConfig sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Squeezing coefficients along a twisting trajectory");
  ConfigBindings sweep_cfg(sweep_cmd);
  sweep_cfg.option("model", model, "oat or tat");
  sweep_cfg.option("n", sweep.n_particles, "Number of particles");
  sweep_cfg.option("kmax", sweep.k_max, "Highest monomial order K (1..6)");
  sweep_cfg.option("tau-start", sweep.tau_start, "First evolution time");
  sweep_cfg.option("tau-end", sweep.tau_end, "Last evolution time");
  sweep_cfg.option("steps", sweep.steps, "Number of grid points, endpoints included");
  sweep_cfg.flag("parity", sweep.include_parity, "Add the spin-parity coefficient");
  sweep_cfg.flag("qfi", sweep.include_qfi, "Add the quantum Fisher density f_max");
  sweep_cfg.option("out", out_path, "Output file (stdout when omitted)");
  sweep_cfg.option("format", format, "csv or json");
  sweep_cfg.option("workers", workers, "Worker threads (default: NLSQ_WORKERS or all cores)");
  sweep_cmd->add_option("--config", config_path, "JSON file with defaults for these flags");

  // fock
  FockConfig fock;
  int cutoff = 0;
  CLI::App* fock_cmd = app.add_subcommand("fock", "Optimized squeezing of a Fock state");
  ConfigBindings fock_cfg(fock_cmd);
  fock_cfg.option("n", fock.n, "Photon number");
  fock_cfg.option("order", fock.order, "Observable order (2 or 3)");
  fock_cfg.option("cutoff", cutoff, "Fock-space dimension (default N+8)");
  fock_cfg.option("phi", fock.phi, "Quadrature angle, n = (sin phi, -cos phi)");
  fock_cfg.option("out", out_path, "Output file (stdout when omitted)");
  fock_cfg.option("format", format, "text or json");
  fock_cmd->add_option("--config", config_path, "JSON file with defaults for these flags");

  // analyze
  AnalyzeConfig analyze;
  CLI::App* analyze_cmd = app.add_subcommand("analyze", "Moment matrices of one twisted state as JSON");
  ConfigBindings analyze_cfg(analyze_cmd);
  analyze_cfg.option("model", model, "oat or tat");
  analyze_cfg.option("n", analyze.n_particles, "Number of particles");
  analyze_cfg.option("tau", analyze.tau, "Evolution time");
  analyze_cfg.option("kmax", analyze.order, "Monomial order K (1..6)");
  analyze_cfg.option("out", out_path, "Output file (stdout when omitted)");
  analyze_cmd->add_option("--config", config_path, "JSON file with defaults for these flags");

  // estimate
  EstimateConfig est;
  CLI::App* est_cmd = app.add_subcommand("estimate", "Monte Carlo method-of-moments phase estimation");
  ConfigBindings est_cfg(est_cmd);
  est_cfg.option("model", model, "oat or tat");
  est_cfg.option("n", est.n_particles, "Number of particles");
  est_cfg.option("tau", est.tau, "Evolution time of the probe state");
  est_cfg.option("generator", est.generator, "x, y, z, opt or a,b,c");
  est_cfg.option("observable", est.observable, "x, y, z, parity, opt or a,b,c");
  est_cfg.option("theta", est.theta, "True phase");
  est_cfg.option("mu", est.mu, "Repetitions per estimate");
  est_cfg.option("trials", est.trials, "Number of simulated estimates");
  est_cfg.option("seed", est.seed, "Random seed");
  est_cfg.option("window", est.window, "Calibration half-width (0 chooses automatically)");
  est_cfg.option("workers", workers, "Worker threads (default: NLSQ_WORKERS or all cores)");
  est_cfg.option("out", out_path, "Output file (stdout when omitted)");
  est_cfg.option("format", format, "text or json");
  est_cmd->add_option("--config", config_path, "JSON file with defaults for these flags");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  WarningSink previous = set_warning_sink([&err](std::string_view msg) {
    err << "warning: " << msg << '\n';
  });
  struct Restore {
    WarningSink sink;
    ~Restore() { set_warning_sink(std::move(sink)); }
  } restore{std::move(previous)};

  try {
    std::ostringstream text;
    if (sweep_cmd->parsed()) {
      if (!config_path.empty()) sweep_cfg.apply(config_path);
      sweep.model = model_from(model);
      sweep.format = parse_format(format.empty() ? "csv" : format);
      sweep.output_path = out_path;
      sweep.workers = workers;
      validate(sweep);
      const SweepResult result = run_sweep(sweep);
      if (sweep.format == OutputFormat::csv) {
        write_sweep_csv(text, sweep, result);
      } else {
        write_sweep_json(text, sweep, result);
      }
      Emitter{out, out_path}.write(text.str());
      return finish(result.integrity, err);
    }
    if (fock_cmd->parsed()) {
      if (!config_path.empty()) fock_cfg.apply(config_path);
      if (cutoff != 0) fock.cutoff = cutoff;
      const FockReport rep = run_fock(fock);
      write_fock(text, rep, parse_format(format.empty() ? "text" : format));
      Emitter{out, out_path}.write(text.str());
      return finish(rep.integrity, err);
    }
    if (analyze_cmd->parsed()) {
      if (!config_path.empty()) analyze_cfg.apply(config_path);
      analyze.model = model_from(model);
      const AnalyzeReport rep = run_analyze(analyze);
      Emitter{out, out_path}.write(analyze_json(rep));
      return finish(rep.moments.integrity, err);
    }
    if (est_cmd->parsed()) {
      if (!config_path.empty()) est_cfg.apply(config_path);
      est.model = model_from(model);
      est.workers = workers;
      const EstimateOutcome o = run_estimate(est);
      write_estimate(text, o, parse_format(format.empty() ? "text" : format));
      Emitter{out, out_path}.write(text.str());
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace nlsq::cli
