#include "nsasym/nsasym.h"

#include <cstring>
#include <string>

#include "nsasym/config.hpp"
#include "nsasym/errors.hpp"
#include "nsasym/pipeline.hpp"

struct nsasym_config {
  nsasym::RunConfig value;
};

struct nsasym_result {
  nsasym::CommandOutcome outcome;
};

namespace {

thread_local std::string last_error;
thread_local int last_error_line = 0;

nsasym_status fail(nsasym_status s, const std::string& message, int line = 0) {
  last_error = message;
  last_error_line = line;
  return s;
}

// Runs fn, translating exceptions into status codes.
template <class Fn> nsasym_status guarded(Fn&& fn) {
  last_error.clear();
  last_error_line = 0;
  try {
    fn();
    return NSASYM_OK;
  } catch (const nsasym::ConfigError& e) {
    return fail(NSASYM_ERR_CONFIG, e.what(), e.line());
  } catch (const nsasym::InvalidArgument& e) {
    return fail(NSASYM_ERR_INVALID_ARGUMENT, e.what());
  } catch (const nsasym::IoError& e) {
    return fail(NSASYM_ERR_IO, e.what());
  } catch (const nsasym::IllPosed& e) {
    return fail(NSASYM_ERR_ILL_POSED, e.what());
  } catch (const nsasym::ConvergenceFailure& e) {
    return fail(NSASYM_ERR_CONVERGENCE, e.what());
  } catch (const nsasym::BlowUp& e) {
    return fail(NSASYM_ERR_BLOWUP, e.what());
  } catch (const std::exception& e) {
    return fail(NSASYM_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(NSASYM_ERR_INTERNAL, "unknown error");
  }
}

nsasym_status null_argument(const char* name) {
  return fail(NSASYM_ERR_INVALID_ARGUMENT, std::string(name) + " must not be NULL");
}

} // namespace

extern "C" {

const char* nsasym_version(void) { return "1.0.0"; }

const char* nsasym_status_name(nsasym_status status) {
  switch (status) {
  case NSASYM_OK: return "ok";
  case NSASYM_ERR_INVALID_ARGUMENT: return "invalid argument";
  case NSASYM_ERR_CONFIG: return "configuration error";
  case NSASYM_ERR_IO: return "i/o error";
  case NSASYM_ERR_ILL_POSED: return "ill-posed";
  case NSASYM_ERR_CONVERGENCE: return "convergence failure";
  case NSASYM_ERR_BLOWUP: return "blow-up";
  case NSASYM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* nsasym_last_error(void) { return last_error.c_str(); }

int nsasym_last_error_line(void) { return last_error_line; }

nsasym_status nsasym_config_default(nsasym_config** out) {
  if (!out) return null_argument("out");
  return guarded([&] { *out = new nsasym_config{}; });
}

nsasym_status nsasym_config_load(const char* path, nsasym_config** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  return guarded([&] { *out = new nsasym_config{nsasym::load_config(path)}; });
}

nsasym_status nsasym_config_parse(const char* text, nsasym_config** out) {
  if (!text) return null_argument("text");
  if (!out) return null_argument("out");
  return guarded([&] { *out = new nsasym_config{nsasym::parse_config(text)}; });
}

nsasym_status nsasym_config_override(nsasym_config* config, const char* assignment) {
  if (!config) return null_argument("config");
  if (!assignment) return null_argument("assignment");
  return guarded([&] {
    nsasym::RunConfig copy = config->value;
    nsasym::apply_override(copy, assignment);
    config->value = copy;
  });
}

nsasym_status nsasym_config_validate(const nsasym_config* config) {
  if (!config) return null_argument("config");
  return guarded([&] { config->value.validate(); });
}

nsasym_status nsasym_config_to_ini(const nsasym_config* config, char* buf, size_t capacity, size_t* needed) {
  if (!config) return null_argument("config");
  return guarded([&] {
    const std::string text = nsasym::to_ini(config->value);
    if (needed) *needed = text.size() + 1;
    if (buf && capacity > 0) {
      const size_t n = std::min(capacity - 1, text.size());
      std::memcpy(buf, text.data(), n);
      buf[n] = '\0';
      if (n < text.size()) throw nsasym::InvalidArgument("buffer too small for the configuration text");
    }
  });
}

void nsasym_config_free(nsasym_config* config) { delete config; }

size_t nsasym_command_count(void) { return nsasym::command_names().size(); }

const char* nsasym_command_name(size_t index) {
  const auto& names = nsasym::command_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

nsasym_status nsasym_run(const nsasym_config* config, const char* command, const char* out_dir, const char* input,
                         nsasym_log_fn log, void* user, nsasym_result** out) {
  if (!config) return null_argument("config");
  if (!command) return null_argument("command");
  if (!out_dir) return null_argument("out_dir");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    nsasym::CommandOptions options;
    options.out_dir = out_dir;
    if (input) options.input = input;
    if (log) options.log = [log, user](const std::string& m) { log(m.c_str(), user); };
    *out = new nsasym_result{nsasym::run_command(command, config->value, options)};
  });
}

int nsasym_result_pass(const nsasym_result* result) { return result && result->outcome.verdict.pass() ? 1 : 0; }

size_t nsasym_result_row_count(const nsasym_result* result) {
  return result ? result->outcome.verdict.rows.size() : 0;
}

nsasym_status nsasym_result_row(const nsasym_result* result, size_t index, nsasym_verdict_row* out) {
  if (!result) return null_argument("result");
  if (!out) return null_argument("out");
  const auto& rows = result->outcome.verdict.rows;
  if (index >= rows.size()) return fail(NSASYM_ERR_INVALID_ARGUMENT, "row index out of range");
  const auto& r = rows[index];
  *out = {r.claim.c_str(), r.paper_ref.c_str(), r.measured, r.expected.c_str(), r.tol, r.pass ? 1 : 0};
  return NSASYM_OK;
}

size_t nsasym_result_file_count(const nsasym_result* result) { return result ? result->outcome.files.size() : 0; }

const char* nsasym_result_file(const nsasym_result* result, size_t index) {
  if (!result || index >= result->outcome.files.size()) return nullptr;
  return result->outcome.files[index].c_str();
}

void nsasym_result_free(nsasym_result* result) { delete result; }

nsasym_status nsasym_fit_decay(const double* t, const double* v, size_t n, double t_min, double t_max,
                               nsasym_decay_fit* out) {
  if (!t || !v) return null_argument("series");
  if (!out) return null_argument("out");
  return guarded([&] {
    nsasym::DecaySeries s;
    s.label = "series";
    s.t.assign(t, t + n);
    s.value.assign(v, v + n);
    const nsasym::DecayFit f = nsasym::fit_decay(s, t_min, t_max);
    *out = {f.mu,  f.a,     f.b,      f.mu_power, f.mu_log, f.b_log, f.residual_power, f.residual_log,
            f.t_min, f.t_max, f.points, f.log_detected ? 1 : 0};
  });
}

} // extern "C"
