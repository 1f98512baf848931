#include <CLI11.hpp>

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "kpo/cli/commands.hpp"
#include "kpo/cli/output.hpp"
#include "kpo/cli/thread_pool.hpp"
#include "kpo/error.hpp"

namespace kpo::cli {

namespace {

struct Flags {
  std::optional<std::string> config;
  std::optional<std::string> xi1, xi2, ne;
  std::optional<std::string> xi1_range, xi2_range, ne_range;
  std::optional<std::size_t> dim, levels, gap_index, resolution, samples, threads;
  std::optional<std::string> epsilon, extent, window;
  bool localize = false;
  std::optional<long> bits, initial_bits, max_bits;
  std::optional<std::string> bits_step, dim_step, gap_tol;
  std::optional<std::string> energies;
  std::optional<std::string> format, out, fit_out;
};

void add_options(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config, "JSON config file; flags override its entries");
  app.add_option("--xi1", f.xi1, "one-photon drive: expression or start:stop:count[:lin|geom]");
  app.add_option("--xi2", f.xi2, "two-photon drive: expression or range");
  app.add_option("--ne", f.ne, "classicality parameter: expression or range");
  app.add_option("--xi1-range", f.xi1_range, "sweep of xi1 as start:stop:count[:lin|geom]");
  app.add_option("--xi2-range", f.xi2_range, "sweep of xi2");
  app.add_option("--ne-range", f.ne_range, "sweep of ne");
  app.add_option("--dim", f.dim, "Fock states kept (0 chooses automatically)");
  app.add_option("--epsilon", f.epsilon, "symmetry-breaking strength for --localize (0 for the default)");
  app.add_option("--levels", f.levels, "levels reported per point");
  app.add_flag("--localize", f.localize, "diagonalize H + epsilon (Q + P) to split the doublets");
  app.add_option("--gap-index", f.gap_index, "gap Delta_j fitted by scaling");
  app.add_option("--bits", f.bits, "gaps: working precision; above 53 uses the MPFR solver");
  app.add_option("--initial-bits", f.initial_bits, "scaling: first arbitrary-precision width");
  app.add_option("--max-bits", f.max_bits, "scaling: widest precision tried");
  app.add_option("--bits-step", f.bits_step, "scaling: precision growth factor per stage");
  app.add_option("--dim-step", f.dim_step, "scaling: truncation growth factor per stage");
  app.add_option("--gap-tol", f.gap_tol, "scaling: relative agreement between stages");
  app.add_option("--energies", f.energies, "contours: comma-separated energies in units of Ne K hbar");
  app.add_option("--resolution", f.resolution, "contours: grid nodes per axis");
  app.add_option("--extent", f.extent, "contours: half-width of the phase-space window (0 for automatic)");
  app.add_option("--window", f.window, "density: Gaussian width (0 for the adaptive kernel)");
  app.add_option("--samples", f.samples, "density: energy samples");
  app.add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--out", f.out, "output path (stdout when absent)");
  app.add_option("--fit-out", f.fit_out, "scaling: fit JSON path (default derived from --out)");
  app.add_option("--threads", f.threads, "worker threads for sweeps");
}

ParamValue param_from(const std::string& text) {
  if (looks_like_range(text)) return parse_range(text);
  return evaluate(text);
}

RunConfig load_file(const std::string& path, bool& ne_given) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
  ne_given = j.is_object() && j.contains("ne");
  return from_json(j);
}

RunConfig build_config(const Flags& f, const std::optional<Command>& command) {
  bool ne_given = false;
  RunConfig c = f.config ? load_file(*f.config, ne_given) : RunConfig{};
  if (command) c.command = *command;

  if (f.xi1) c.xi1 = param_from(*f.xi1);
  if (f.xi2) c.xi2 = param_from(*f.xi2);
  if (f.ne) c.ne = param_from(*f.ne);
  if (f.xi1_range) c.xi1 = parse_range(*f.xi1_range);
  if (f.xi2_range) c.xi2 = parse_range(*f.xi2_range);
  if (f.ne_range) c.ne = parse_range(*f.ne_range);
  ne_given = ne_given || f.ne || f.ne_range;
  if (c.command == Command::scaling && !ne_given) c.ne = Range{0.5, 4.0, 8, Spacing::geometric};

  if (f.dim) c.dim = *f.dim;
  if (f.epsilon) c.epsilon = evaluate(*f.epsilon);
  if (f.levels) c.levels = *f.levels;
  if (f.localize) c.localize = true;
  if (f.gap_index) c.gap_index = *f.gap_index;
  if (f.bits) {
    if (*f.bits < 1) throw ConfigError("bits must be positive");
    c.bits = static_cast<mp::Bits>(*f.bits);
  }
  if (f.initial_bits) c.plan.initial_bits = static_cast<mp::Bits>(*f.initial_bits);
  if (f.max_bits) c.plan.max_bits = static_cast<mp::Bits>(*f.max_bits);
  if (f.bits_step) c.plan.bits_step = evaluate(*f.bits_step);
  if (f.dim_step) c.plan.dim_step = evaluate(*f.dim_step);
  if (f.gap_tol) c.plan.gap_rel_tol = evaluate(*f.gap_tol);
  if (f.energies) c.energies = parse_list(*f.energies);
  if (f.resolution) c.resolution = *f.resolution;
  if (f.extent) c.extent = evaluate(*f.extent);
  if (f.window) c.window = evaluate(*f.window);
  if (f.samples) c.samples = *f.samples;
  if (f.format) c.format = parse_format(*f.format);
  if (f.out) c.out = *f.out;
  if (f.fit_out) c.fit_out = *f.fit_out;
  if (f.threads) c.threads = *f.threads;
  return c;
}

bool write_files(const CommandResult& result, std::ostream& out, std::ostream& err) {
  for (const OutputFile& file : result.files) {
    if (file.path.empty()) {
      out << file.body;
      continue;
    }
    std::ofstream f(file.path, std::ios::binary);
    f << file.body;
    if (!f) {
      err << "kpo: cannot write " << file.path << "\n";
      return false;
    }
  }
  out.flush();
  return true;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kerr parametric oscillator spectra, observables and gap scaling", "kpo"};
  app.set_version_flag("--version", "kpo " + version());
  app.fallthrough();
  app.require_subcommand(0, 1);
  Flags flags;
  add_options(app, flags);
  const std::vector<std::pair<Command, std::string>> commands = {
      {Command::spectrum, "lowest energies over a sweep"},
      {Command::expect, "quadrature expectation values of the lowest states"},
      {Command::gaps, "adjacent-level gaps and doublet flags"},
      {Command::density, "smoothed level density with separatrix markers"},
      {Command::contours, "iso-energy curves of the classical energy surface"},
      {Command::extrema, "stationary points of the classical energy surface"},
      {Command::scaling, "gap-versus-Ne sweep with exponential fit"},
      {Command::overlap, "coherent-state overlap against its closed form"},
  };
  std::vector<std::pair<Command, CLI::App*>> subs;
  for (const auto& [cmd, help] : commands) subs.emplace_back(cmd, app.add_subcommand(to_string(cmd), help));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream message;
    const int code = app.exit(e, out, message);
    if (code == 0) return kExitOk;
    err << message.str();
    return kExitConfig;
  }

  std::optional<Command> command;
  for (const auto& [cmd, sub] : subs) {
    if (sub->parsed()) command = cmd;
  }
  if (!command && !flags.config) {
    err << "kpo: a subcommand or --config is required\n" << app.help();
    return kExitConfig;
  }

  try {
    const RunConfig config = build_config(flags, command);
    validate(config);
    ThreadPoolRunner runner(config.threads);
    const CommandResult result = execute(config, runner);
    for (const std::string& w : result.warnings) err << "kpo: warning: " << w << "\n";
    if (!write_files(result, out, err)) return kExitFailure;
    if (result.exit_code == kExitNonConverged) err << "kpo: some points did not converge; see the output header\n";
    return result.exit_code;
  } catch (const ConfigError& e) {
    err << "kpo: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvalidParameter& e) {
    err << "kpo: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ConvergenceError& e) {
    err << "kpo: " << e.what() << "\n";
    return kExitNonConverged;
  } catch (const std::exception& e) {
    err << "kpo: unexpected error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace kpo::cli
