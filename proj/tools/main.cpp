#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nsasym/nsasym.h"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

// Usage problems exit 2; numerical failures count as failed certificates.
int exit_code_for(nsasym_status s) {
  switch (s) {
  case NSASYM_OK: return kExitPass;
  case NSASYM_ERR_INVALID_ARGUMENT:
  case NSASYM_ERR_CONFIG:
  case NSASYM_ERR_IO: return kExitUsage;
  default: return kExitFail;
  }
}

int report_error(nsasym_status s) {
  std::fprintf(stderr, "nsasym: %s: %s\n", nsasym_status_name(s), nsasym_last_error());
  return exit_code_for(s);
}

void log_line(const char* message, void*) { std::fprintf(stderr, "  %s\n", message); }

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Large-time asymptotics of small-data Navier-Stokes flow: simulation, profiles and certificates"};
  app.set_version_flag("--version", nsasym_version());
  app.require_subcommand(1, 1);

  std::string config_path, out_dir = ".", input;
  std::vector<std::string> overrides;
  int dim = 0;
  bool quiet = false;

  const char* descriptions[] = {
      "write seeded initial data and its moments",
      "integrate the initial data and store a trajectory",
      "build the asymptotic profiles (and J_m when configured)",
      "compute K coefficients and the odd/even verdict",
      "compute parity certificates",
      "fit decay rates and expansion residuals",
      "run the Burgers oracle and its log check",
  };
  std::vector<CLI::App*> subs;
  for (size_t i = 0; i < nsasym_command_count(); ++i) {
    auto* sub = app.add_subcommand(nsasym_command_name(i), descriptions[i]);
    sub->add_option("--config", config_path, "configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--input", input, "IC file (simulate) or trajectory directory (analysis commands)");
    sub->add_option("--dim", dim, "override grid.dim")->check(CLI::IsMember({1, 2, 3}));
    sub->add_option("--override", overrides, "section.key=value, repeatable")->take_all();
    sub->add_flag("--quiet", quiet, "only the exit code and errors");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  std::string command;
  for (auto* sub : subs)
    if (sub->parsed()) command = sub->get_name();

  nsasym_config* config = nullptr;
  nsasym_status s = config_path.empty() ? nsasym_config_default(&config) : nsasym_config_load(config_path.c_str(), &config);
  if (s != NSASYM_OK) return report_error(s);
  if (dim != 0) overrides.insert(overrides.begin(), "grid.dim=" + std::to_string(dim));
  for (const auto& o : overrides)
    if ((s = nsasym_config_override(config, o.c_str())) != NSASYM_OK) {
      nsasym_config_free(config);
      return report_error(s);
    }

  nsasym_result* result = nullptr;
  s = nsasym_run(config, command.c_str(), out_dir.c_str(), input.empty() ? nullptr : input.c_str(),
                 quiet ? nullptr : log_line, nullptr, &result);
  nsasym_config_free(config);
  if (s != NSASYM_OK) return report_error(s);

  if (!quiet) {
    for (size_t i = 0; i < nsasym_result_row_count(result); ++i) {
      nsasym_verdict_row r;
      nsasym_result_row(result, i, &r);
      std::printf("%s  %s: measured %.6g, expected %s (tol %.3g)\n", r.pass ? "PASS" : "FAIL", r.claim, r.measured,
                  r.expected, r.tol);
    }
    std::printf("%s: %s, %zu files in %s\n", command.c_str(), nsasym_result_pass(result) ? "pass" : "FAIL",
                nsasym_result_file_count(result), out_dir.c_str());
  }
  const int code = nsasym_result_pass(result) ? kExitPass : kExitFail;
  nsasym_result_free(result);
  return code;
}
