#include "rdshift/config.hpp"

#include <unistd.h>

#include <cctype>
#include <cerrno>
#include <climits>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "rdshift/errors.hpp"

namespace rdshift::config {

namespace {

std::string strf(const char* fmt, ...) {
  va_list args;
  va_start(args, fmt);
  char buf[512];
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return buf;
}

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

/// Where a value came from, for error messages.
struct Cursor {
  const std::string& section;
  const std::string& key;
  int line;
};

[[noreturn]] void bad_value(const Cursor& c, const std::string& what) {
  throw ValidationError(strf("key \"%s\" in [%s] (line %d): %s", c.key.c_str(),
                             c.section.c_str(), c.line, what.c_str()));
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"')
    return v.substr(1, v.size() - 2);
  return v;
}

double parse_double(const Cursor& c, const std::string& v) {
  const std::string s = trim(v);
  if (s.empty()) bad_value(c, "empty value, expected a number");
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size())
    bad_value(c, strf("not a number: \"%s\"", s.c_str()));
  if (errno == ERANGE || !std::isfinite(x))
    bad_value(c, strf("value must be finite, got \"%s\"", s.c_str()));
  return x;
}

long parse_long(const Cursor& c, const std::string& v) {
  const std::string s = trim(v);
  if (s.empty()) bad_value(c, "empty value, expected an integer");
  errno = 0;
  char* end = nullptr;
  const long x = std::strtol(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size() || errno == ERANGE)
    bad_value(c, strf("not an integer: \"%s\"", s.c_str()));
  return x;
}

int parse_int(const Cursor& c, const std::string& v) {
  const long x = parse_long(c, v);
  if (x < INT_MIN || x > INT_MAX) bad_value(c, "integer out of range");
  return static_cast<int>(x);
}

std::vector<double> parse_list(const Cursor& c, const std::string& v) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(trim(v));
  while (std::getline(in, item, ',')) out.push_back(parse_double(c, item));
  if (out.empty()) bad_value(c, "empty list, expected comma-separated numbers");
  return out;
}

bool known_section(const std::string& s) {
  return s == "environment" || s == "domain" || s == "time" ||
         s == "experiment" || s == "output" || s == "sweep";
}

std::optional<ExperimentKind> find_kind(const std::string& name) {
  static const std::pair<const char*, ExperimentKind> table[] = {
      {"cstar", ExperimentKind::cstar},
      {"kpp_wave", ExperimentKind::kpp_wave},
      {"pulse_wave", ExperimentKind::pulse_wave},
      {"ivp", ExperimentKind::ivp},
      {"attraction", ExperimentKind::attraction},
      {"epidemic", ExperimentKind::epidemic},
      {"period_limits", ExperimentKind::period_limits},
      {"sweep", ExperimentKind::sweep},
  };
  for (const auto& [n, k] : table)
    if (name == n) return k;
  return std::nullopt;
}

/// Parse-time extras that merge into the config once the text is consumed.
struct Builder {
  ExperimentConfig cfg;
  std::optional<double> decay_r0;
  std::optional<int> decay_m;
};

bool apply_environment(Builder& b, const Cursor& c, const std::string& v) {
  env::EnvironmentParams& p = b.cfg.environment;
  if (c.key == "kind") {
    try {
      p.kind = env::kind_from_name(unquote(v));
    } catch (const std::exception&) {
      bad_value(c, strf("unknown environment kind \"%s\"", unquote(v).c_str()));
    }
  } else if (c.key == "period") {
    p.period = parse_double(c, v);
  } else if (c.key == "r_offset") {
    p.r_offset = parse_double(c, v);
  } else if (c.key == "s_offset") {
    p.s_offset = parse_double(c, v);
  } else if (c.key == "ell") {
    p.ell = parse_double(c, v);
  } else if (c.key == "seasonal_amp") {
    p.seasonal_amp = parse_double(c, v);
  } else if (c.key == "seasonal_phase") {
    p.seasonal_phase = parse_double(c, v);
  } else if (c.key == "tail_power") {
    p.tail_power = parse_double(c, v);
  } else if (c.key == "decay_r0") {
    b.decay_r0 = parse_double(c, v);
  } else if (c.key == "decay_m") {
    b.decay_m = parse_int(c, v);
  } else if (c.key == "birth0") {
    p.birth0 = parse_double(c, v);
  } else if (c.key == "birth_amp") {
    p.birth_amp = parse_double(c, v);
  } else if (c.key == "birth_phase") {
    p.birth_phase = parse_double(c, v);
  } else if (c.key == "mu0") {
    p.mu0 = parse_double(c, v);
  } else if (c.key == "mu1") {
    p.mu1 = parse_double(c, v);
  } else if (c.key == "l") {
    p.l = parse_double(c, v);
  } else if (c.key == "omega0") {
    p.omega0 = parse_double(c, v);
  } else if (c.key == "omega_amp") {
    p.omega_amp = parse_double(c, v);
  } else if (c.key == "omega_phase") {
    p.omega_phase = parse_double(c, v);
  } else if (c.key == "gamma0") {
    p.gamma0 = parse_double(c, v);
  } else if (c.key == "gamma_amp") {
    p.gamma_amp = parse_double(c, v);
  } else if (c.key == "gamma_phase") {
    p.gamma_phase = parse_double(c, v);
  } else {
    return false;
  }
  return true;
}

bool apply_domain(Builder& b, const Cursor& c, const std::string& v) {
  DomainSection& d = b.cfg.domain;
  if (c.key == "x_min") {
    d.x_min = parse_double(c, v);
  } else if (c.key == "x_max") {
    d.x_max = parse_double(c, v);
  } else if (c.key == "n") {
    d.n = parse_int(c, v);
  } else {
    return false;
  }
  return true;
}

bool apply_time(Builder& b, const Cursor& c, const std::string& v) {
  TimeSection& t = b.cfg.time;
  if (c.key == "dt_divisor") {
    t.dt_divisor = parse_int(c, v);
  } else if (c.key == "horizon_periods") {
    t.horizon_periods = parse_long(c, v);
  } else {
    return false;
  }
  return true;
}

bool apply_experiment(Builder& b, const Cursor& c, const std::string& v) {
  ExperimentSection& e = b.cfg.experiment;
  if (c.key == "kind") {
    const std::string name = unquote(v);
    const auto k = find_kind(name);
    if (!k) bad_value(c, strf("unknown experiment kind \"%s\"", name.c_str()));
    e.kind = *k;
    e.kind_set = true;
  } else if (c.key == "c") {
    e.c = parse_double(c, v);
  } else if (c.key == "tolerance") {
    e.tolerance = parse_double(c, v);
  } else if (c.key == "max_periods") {
    e.max_periods = parse_long(c, v);
  } else if (c.key == "shift") {
    e.shift = parse_double(c, v);
  } else if (c.key == "init") {
    e.init = unquote(v);
  } else if (c.key == "init_height") {
    e.init_height = parse_double(c, v);
  } else if (c.key == "init_center") {
    e.init_center = parse_double(c, v);
  } else if (c.key == "init_width") {
    e.init_width = parse_double(c, v);
  } else if (c.key == "init_rate") {
    e.init_rate = parse_double(c, v);
  } else if (c.key == "fit_t1") {
    e.fit_t1 = parse_double(c, v);
  } else if (c.key == "fit_t2") {
    e.fit_t2 = parse_double(c, v);
  } else if (c.key == "periods") {
    e.periods = parse_list(c, v);
  } else if (c.key == "expect_tol") {
    e.expect_tol = parse_double(c, v);
  } else if (c.key.rfind("expect_", 0) == 0) {
    const std::string name = c.key.substr(7);
    if (name.empty()) bad_value(c, "expected expect_<report-key> = value");
    e.expects.emplace_back(name, parse_double(c, v));
  } else {
    return false;
  }
  return true;
}

bool apply_output(Builder& b, const Cursor& c, const std::string& v) {
  OutputSection& o = b.cfg.output;
  if (c.key == "csv") {
    o.csv = unquote(v);
  } else if (c.key == "svg") {
    o.svg = unquote(v);
  } else if (c.key == "report") {
    o.report = unquote(v);
  } else {
    return false;
  }
  return true;
}

bool apply_sweep(Builder& b, const Cursor& c, const std::string& v) {
  SweepSection& s = b.cfg.sweep;
  if (c.key == "parameter") {
    s.parameter = unquote(v);
  } else if (c.key == "values") {
    s.values = parse_list(c, v);
  } else if (c.key == "experiment") {
    const std::string name = unquote(v);
    const auto k = find_kind(name);
    if (!k) bad_value(c, strf("unknown experiment kind \"%s\"", name.c_str()));
    s.experiment = *k;
  } else {
    return false;
  }
  return true;
}

bool apply(Builder& b, const Cursor& c, const std::string& v) {
  if (c.section == "environment") return apply_environment(b, c, v);
  if (c.section == "domain") return apply_domain(b, c, v);
  if (c.section == "time") return apply_time(b, c, v);
  if (c.section == "experiment") return apply_experiment(b, c, v);
  if (c.section == "output") return apply_output(b, c, v);
  return apply_sweep(b, c, v);
}

}  // namespace

const char* kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::cstar: return "cstar";
    case ExperimentKind::kpp_wave: return "kpp_wave";
    case ExperimentKind::pulse_wave: return "pulse_wave";
    case ExperimentKind::ivp: return "ivp";
    case ExperimentKind::attraction: return "attraction";
    case ExperimentKind::epidemic: return "epidemic";
    case ExperimentKind::period_limits: return "period_limits";
    case ExperimentKind::sweep: return "sweep";
  }
  return "?";
}

ExperimentKind kind_from_name(const std::string& name) {
  const auto k = find_kind(name);
  if (!k)
    throw ValidationError(strf("unknown experiment kind \"%s\"", name.c_str()));
  return *k;
}

std::vector<std::string> all_kind_names() {
  return {"cstar", "kpp_wave",  "pulse_wave", "ivp",
          "attraction", "epidemic", "period_limits", "sweep"};
}

ExperimentConfig parse_config(const std::string& text) {
  Builder b;
  std::set<std::string> seen;
  std::string section;
  std::string raw;
  int line_no = 0;
  std::istringstream in(text);
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3)
        throw ParseError(strf("config line %d: malformed section header \"%s\"",
                              line_no, s.c_str()));
      section = trim(s.substr(1, s.size() - 2));
      if (!known_section(section))
        throw ParseError(strf("config line %d: unknown section [%s]", line_no,
                              section.c_str()));
      if (section == "sweep") b.cfg.sweep.present = true;
      continue;
    }
    const size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ParseError(strf("config line %d: expected key = value, got \"%s\"",
                            line_no, s.c_str()));
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty())
      throw ParseError(strf("config line %d: missing key before '='", line_no));
    if (section.empty())
      throw ParseError(
          strf("config line %d: key \"%s\" appears before any [section]",
               line_no, key.c_str()));
    if (!seen.insert(section + "/" + key).second)
      throw ParseError(strf("config line %d: duplicate key \"%s\" in [%s]",
                            line_no, key.c_str(), section.c_str()));
    const Cursor cur{section, key, line_no};
    if (!apply(b, cur, value))
      throw ParseError(strf("config line %d: unknown key \"%s\" in [%s]",
                            line_no, key.c_str(), section.c_str()));
  }
  if (b.decay_r0 || b.decay_m)
    b.cfg.environment.decay =
        env::DecayMeta{b.decay_r0.value_or(1.0), b.decay_m.value_or(2)};
  b.cfg.validate();
  return b.cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ParseError(strf("cannot read config file \"%s\"", path.c_str()));
  std::ostringstream body;
  body << in.rdbuf();
  return parse_config(body.str());
}

void ExperimentConfig::validate() const {
  const auto fail = [](const char* section, const char* key,
                       const std::string& what) {
    throw ValidationError(
        strf("key \"%s\" in [%s]: %s", key, section, what.c_str()));
  };

  // [environment]
  if (environment.period <= 0)
    fail("environment", "period",
         strf("period must be positive, got %g", environment.period));
  if (environment.ell <= 0)
    fail("environment", "ell",
         strf("interface width must be positive, got %g", environment.ell));
  if (environment.decay) {
    if (environment.decay->r0 <= 0)
      fail("environment", "decay_r0", "decay exponent must be positive");
    if (environment.decay->m < 1)
      fail("environment", "decay_m", "decay order must be at least 1");
  }

  // [domain]
  if (!(domain.x_max > domain.x_min))
    fail("domain", "x_max", strf("need x_max > x_min, got [%g, %g]",
                                 domain.x_min, domain.x_max));
  if (domain.n < 3)
    fail("domain", "n",
         strf("need at least 3 grid nodes, got %d", domain.n));

  // [time]
  if (time.dt_divisor < 1)
    fail("time", "dt_divisor",
         strf("steps per period must be a positive integer, got %d",
              time.dt_divisor));
  if (time.horizon_periods < 1)
    fail("time", "horizon_periods",
         strf("horizon must be at least one period, got %ld",
              time.horizon_periods));

  // [experiment]
  if (!experiment.kind_set)
    fail("experiment", "kind", "required (no experiment kind given)");
  if (!(experiment.tolerance > 0) || !std::isfinite(experiment.tolerance))
    fail("experiment", "tolerance",
         strf("tolerance must be positive, got %g", experiment.tolerance));
  if (experiment.max_periods < 1)
    fail("experiment", "max_periods",
         strf("period cap must be at least 1, got %ld",
              experiment.max_periods));
  if (experiment.init != "bump" && experiment.init != "exp_tail" &&
      experiment.init != "front" && experiment.init != "constant")
    fail("experiment", "init",
         strf("unknown initial data \"%s\" (bump, exp_tail, front, constant)",
              experiment.init.c_str()));
  const bool has_t1 = !std::isnan(experiment.fit_t1);
  const bool has_t2 = !std::isnan(experiment.fit_t2);
  if (has_t1 != has_t2)
    fail("experiment", has_t1 ? "fit_t2" : "fit_t1",
         "fit_t1 and fit_t2 must be given together");
  if (has_t1 && !(experiment.fit_t2 > experiment.fit_t1))
    fail("experiment", "fit_t2",
         strf("need fit_t2 > fit_t1, got [%g, %g]", experiment.fit_t1,
              experiment.fit_t2));
  if (has_t1 && experiment.fit_t1 < 0)
    fail("experiment", "fit_t1", "fit window must start at t >= 0");
  for (const double T : experiment.periods)
    if (!(T > 0))
      fail("experiment", "periods",
           strf("forcing periods must be positive, got %g", T));
  if (!(experiment.expect_tol > 0))
    fail("experiment", "expect_tol",
         strf("threshold tolerance must be positive, got %g",
              experiment.expect_tol));

  // [sweep]
  if (experiment.kind == ExperimentKind::sweep) {
    if (!sweep.present)
      fail("sweep", "parameter",
           "experiment kind is sweep but there is no [sweep] section");
    if (sweep.parameter != "c")
      fail("sweep", "parameter",
           strf("only parameter \"c\" is supported, got \"%s\"",
                sweep.parameter.c_str()));
    if (sweep.values.empty())
      fail("sweep", "values", "a sweep needs at least one value");
    if (sweep.experiment == ExperimentKind::sweep)
      fail("sweep", "experiment", "sweeps cannot nest");
  } else if (sweep.present) {
    fail("sweep", "parameter",
         "[sweep] section is only valid when [experiment] kind = sweep");
  }
}

void ExperimentConfig::validate_paths() const {
  namespace fs = std::filesystem;
  const std::pair<const char*, const std::string*> paths[] = {
      {"csv", &output.csv}, {"svg", &output.svg}, {"report", &output.report}};
  for (const auto& [key, path] : paths) {
    if (path->empty()) continue;
    const fs::path p(*path);
    std::error_code ec;
    if (fs::is_directory(p, ec))
      throw ValidationError(strf("key \"%s\" in [output]: \"%s\" is a directory",
                                 key, path->c_str()));
    fs::path dir = p.parent_path();
    if (dir.empty()) dir = ".";
    if (!fs::is_directory(dir, ec))
      throw ValidationError(
          strf("key \"%s\" in [output]: directory \"%s\" does not exist", key,
               dir.string().c_str()));
    if (::access(dir.string().c_str(), W_OK) != 0)
      throw ValidationError(
          strf("key \"%s\" in [output]: directory \"%s\" is not writable", key,
               dir.string().c_str()));
  }
}

}  // namespace rdshift::config
