#include "tcd/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tcd {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const int x = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw UsageError("config: bad integer for " + key + ": '" + v + "'");
  }
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw UsageError("config: bad number for " + key + ": '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw UsageError("config: bad boolean for " + key + ": '" + v + "'");
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw UsageError("config: bad seed for " + key + ": '" + v + "'");
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void apply_config_override(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "env") c.env = value;
  else if (key == "n") c.n = parse_int(key, value);
  else if (key == "h") c.h = parse_int(key, value);
  else if (key == "sigma") c.sigma = parse_double(key, value);
  else if (key == "K") c.K = parse_int(key, value);
  else if (key == "schedule") c.schedule = value;
  else if (key == "omega") c.omega = parse_double(key, value);
  else if (key == "condition_dropout_p") c.condition_dropout_p = parse_double(key, value);
  else if (key == "clip_x0") c.clip_x0 = parse_bool(key, value);
  else if (key == "variance_scaled_noise") c.variance_scaled_noise = parse_bool(key, value);
  else if (key == "raw_rtg_condition") c.raw_rtg_condition = parse_bool(key, value);
  else if (key == "levels") c.levels = parse_int(key, value);
  else if (key == "base_width") c.base_width = parse_int(key, value);
  else if (key == "kernel") c.kernel = parse_int(key, value);
  else if (key == "embed_dim") c.embed_dim = parse_int(key, value);
  else if (key == "L") c.L = parse_int(key, value);
  else if (key == "t_hc") c.t_hc = parse_int(key, value);
  else if (key == "batch") c.batch = parse_int(key, value);
  else if (key == "discard_padded") c.discard_padded = parse_bool(key, value);
  else if (key == "lr") c.lr = parse_double(key, value);
  else if (key == "train_steps") c.train_steps = parse_int(key, value);
  else if (key == "inv_steps") c.inv_steps = parse_int(key, value);
  else if (key == "log_every") c.log_every = parse_int(key, value);
  else if (key == "episodes") c.episodes = parse_int(key, value);
  else if (key == "top_y") c.top_y = parse_int(key, value);
  else if (key == "max_return_offset") c.max_return_offset = parse_double(key, value);
  else if (key == "flags") c.flags = value;
  else if (key == "start_class") c.start_class = parse_int(key, value);
  else if (key == "gamma") c.gamma = parse_double(key, value);
  else if (key == "seed") c.seed = parse_u64(key, value);
  else throw UsageError("config: unknown key '" + key + "'");
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot open config file: " + path);
  RunConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config: line " + std::to_string(lineno) + " is not key=value");
    apply_config_override(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return c;
}

void save_config(const RunConfig& c, const std::string& path) {
  std::ostringstream os;
  os << "env = " << c.env << "\n";
  os << "n = " << c.n << "\n";
  os << "h = " << c.h << "\n";
  os << "sigma = " << fmt(c.sigma) << "\n";
  os << "K = " << c.K << "\n";
  os << "schedule = " << c.schedule << "\n";
  os << "omega = " << fmt(c.omega) << "\n";
  os << "condition_dropout_p = " << fmt(c.condition_dropout_p) << "\n";
  os << "clip_x0 = " << (c.clip_x0 ? "true" : "false") << "\n";
  os << "variance_scaled_noise = " << (c.variance_scaled_noise ? "true" : "false") << "\n";
  os << "raw_rtg_condition = " << (c.raw_rtg_condition ? "true" : "false") << "\n";
  os << "levels = " << c.levels << "\n";
  os << "base_width = " << c.base_width << "\n";
  os << "kernel = " << c.kernel << "\n";
  os << "embed_dim = " << c.embed_dim << "\n";
  os << "L = " << c.L << "\n";
  os << "t_hc = " << c.t_hc << "\n";
  os << "batch = " << c.batch << "\n";
  os << "discard_padded = " << (c.discard_padded ? "true" : "false") << "\n";
  os << "lr = " << fmt(c.lr) << "\n";
  os << "train_steps = " << c.train_steps << "\n";
  os << "inv_steps = " << c.inv_steps << "\n";
  os << "log_every = " << c.log_every << "\n";
  os << "episodes = " << c.episodes << "\n";
  os << "top_y = " << c.top_y << "\n";
  os << "max_return_offset = " << fmt(c.max_return_offset) << "\n";
  os << "flags = " << c.flags << "\n";
  os << "start_class = " << c.start_class << "\n";
  os << "gamma = " << fmt(c.gamma) << "\n";
  os << "seed = " << c.seed << "\n";
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write config file: " + path);
  out << os.str();
}

void RunConfig::validate() const {
  try {
    env_kind_from_string(env);
    schedule_kind_from_string(schedule);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (n < 1) throw UsageError("config: n must be positive");
  if (h < 1) throw UsageError("config: h must be positive");
  if (sigma < 0) throw UsageError("config: sigma must be non-negative");
  if (K < 1) throw UsageError("config: K must be >= 1");
  if (omega < 0) throw UsageError("config: omega must be non-negative");
  if (condition_dropout_p < 0 || condition_dropout_p > 1)
    throw UsageError("config: condition_dropout_p must lie in [0,1]");
  if (levels < 1) throw UsageError("config: levels must be >= 1");
  if (base_width < 1) throw UsageError("config: base_width must be >= 1");
  if (kernel < 1 || kernel % 2 == 0) throw UsageError("config: kernel must be odd and positive");
  if (embed_dim < 2 || embed_dim % 2 != 0) throw UsageError("config: embed_dim must be even and >= 2");
  if (L < 2) throw UsageError("config: L must be >= 2");
  if (t_hc < 1 || t_hc >= L) throw UsageError("config: T_HC must satisfy 1 <= T_HC < L");
  if (L % (1 << (levels - 1)) != 0)
    throw UsageError("config: L must be divisible by 2^(levels-1)");
  if (batch < 1) throw UsageError("config: batch must be >= 1");
  if (lr <= 0) throw UsageError("config: lr must be positive");
  if (train_steps < 1 || inv_steps < 1) throw UsageError("config: training steps must be >= 1");
  if (log_every < 1) throw UsageError("config: log_every must be >= 1");
  if (episodes < 1) throw UsageError("config: episodes must be >= 1");
  if (top_y < 1) throw UsageError("config: top_y must be >= 1");
  if (start_class < 0) throw UsageError("config: start_class must be >= 0");
  const EnvKind kind = env_kind_from_string(env);
  if (kind == EnvKind::Historical && n % 3 != 0)
    throw UsageError("config: historical env needs n divisible by 3");
  if (kind != EnvKind::Historical && n % 2 != 0)
    throw UsageError("config: immediate/prospective envs need even n");
}

}  // namespace tcd
