#include "runner.hpp"

#include <specint/core.hpp>

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace specint;

int command_run(const std::string& config_path, const std::string& out, unsigned jobs) {
  nlohmann::json raw;
  RunConfig config;
  try {
    config = load_config(config_path);
    std::ifstream in(config_path);
    raw = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const ParseError& e) {
    std::cerr << "specint: parse error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "specint: invalid config: " << e.what() << '\n';
    return 2;
  }
  cli::RunOptions options;
  if (!out.empty()) options.out_dir = out;
  options.jobs = jobs;
  options.seed = cli::seed_from_environment();
  const auto report = cli::run(config, options, raw);

  std::size_t total = 0;
  std::size_t failed = 0;
  auto tally = [&](const cli::CheckRow& c) {
    ++total;
    if (!c.pass) {
      ++failed;
      std::cerr << "FAIL " << c.name << " operator=" << c.op << " N=" << c.n << " value=" << c.value
                << " bound=" << c.bound << '\n';
    }
  };
  for (const auto& cell : report.cells) {
    for (const auto& c : cell.checks) tally(c);
  }
  for (const auto& c : report.cross_checks) tally(c);
  std::cout << "specint: " << report.cells.size() << " cells, " << total << " checks, " << failed
            << " failed; reports in " << report.out_dir.string() << '\n';
  return report.success() ? 0 : 1;
}

int command_list(const std::vector<std::string>& dense_files) {
  for (const auto& e : builtin_registry()) {
    std::cout << e.name << "\n  parameters: " << e.parameters << "\n  assumption: " << e.assumption << '\n';
  }
  for (const auto& path : dense_files) {
    try {
      const auto m = load_dense_file<Complex>(path);
      std::cout << kDenseFilePrefix << path << "\n  parameters: (none)\n  assumption: "
                << "finite-dimensional dense operator of size " << m.rows() << '\n';
    } catch (const Error&) {
      try {
        const auto m = load_dense_file<double>(path);
        std::cout << kDenseFilePrefix << path << "\n  parameters: (none)\n  assumption: "
                  << "finite-dimensional dense operator of size " << m.rows() << '\n';
      } catch (const Error& e) {
        std::cerr << "specint: cannot register '" << path << "': " << e.what() << '\n';
        return 2;
      }
    }
  }
  return 0;
}

int command_check(const std::string& name, long long n, const std::string& field) {
  RunConfig config;
  OperatorRef ref;
  ref.kind = name;
  ref.field = field == "complex" ? ScalarField::complex : ScalarField::real;
  config.operators.push_back(ref);
  config.n_list.push_back(n);
  try {
    if (n < 2) throw ValidationError("N must be at least 2");
    if (ref.field == ScalarField::complex) {
      make_operator<Complex>(ref);
    } else {
      make_operator<double>(ref);
    }
  } catch (const Error& e) {
    std::cerr << "specint: " << e.what() << '\n';
    return 2;
  }
  const auto label = cli::operator_labels(config).front();
  const auto cell = cli::run_cell(config, ref, label, n, cli::cell_seed(cli::seed_from_environment(), label, n));
  if (cell.error) {
    std::cerr << "specint: " << *cell.error << '\n';
    return 1;
  }
  std::cout << cli::checks_csv(cell.checks);
  const bool ok = std::all_of(cell.checks.begin(), cell.checks.end(), [](const auto& c) { return c.pass; });
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"specint: finite-dimensional spectral construction for symmetric operators"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "sweep operators x N and write reports");
  std::string config_path;
  std::string out;
  unsigned jobs = 1;
  run->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "output directory (overrides output.dir)");
  run->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("list", "list registry operators");
  std::vector<std::string> dense_files;
  list->add_option("--register-dense", dense_files, "also list dense_file:<path>");

  auto* check = app.add_subcommand("check", "run the checks of one (operator, N) cell");
  std::string name;
  long long n = 0;
  std::string field = "real";
  check->add_option("--operator", name, "registry name")->required();
  check->add_option("--N", n, "truncation dimension")->required();
  check->add_option("--field", field, "scalar field")->check(CLI::IsMember({"real", "complex"}));

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return command_run(config_path, out, jobs);
    if (*list) return command_list(dense_files);
    return command_check(name, n, field);
  } catch (const std::exception& e) {
    std::cerr << "specint: " << e.what() << '\n';
    return 2;
  }
}
