#include "mfl/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace mfl {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string fmt_double(double x) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

template <class T>
T parse_number(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  T value{};
  auto r = std::from_chars(s.data(), s.data() + s.size(), value);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw ConfigError("config: key '" + key + "' has invalid value '" + raw + "'");
  return value;
}

bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("config: key '" + key + "' expects true/false, got '" + raw + "'");
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& raw) {
  std::vector<T> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_number<T>(key, item));
  }
  return out;
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ",";
    if constexpr (std::is_floating_point_v<T>) s += fmt_double(xs[i]);
    else s += std::to_string(xs[i]);
  }
  return s;
}

struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

#define MFL_STR(sec, name, member)                                             \
  Field{sec, name, [](const ExperimentConfig& c) { return c.member; },        \
        [](ExperimentConfig& c, const std::string& v) { c.member = trim(v); }}
#define MFL_NUM(sec, name, member, T)                                          \
  Field{sec, name,                                                             \
        [](const ExperimentConfig& c) {                                        \
          if constexpr (std::is_floating_point_v<T>) return fmt_double(c.member); \
          else return std::to_string(c.member);                                \
        },                                                                     \
        [](ExperimentConfig& c, const std::string& v) { c.member = parse_number<T>(name, v); }}
#define MFL_LIST(sec, name, member, T)                                         \
  Field{sec, name, [](const ExperimentConfig& c) { return join(c.member); },  \
        [](ExperimentConfig& c, const std::string& v) { c.member = parse_list<T>(name, v); }}
#define MFL_BOOL(sec, name, member)                                            \
  Field{sec, name, [](const ExperimentConfig& c) { return std::string(c.member ? "true" : "false"); }, \
        [](ExperimentConfig& c, const std::string& v) { c.member = parse_bool(name, v); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> f{
      MFL_STR("run", "experiment", experiment),
      MFL_STR("run", "run_id", run_id),
      MFL_NUM("run", "seed", seed, std::uint64_t),
      MFL_STR("run", "out", out_dir),
      MFL_NUM("run", "workers", workers, int),

      MFL_STR("kernel", "family", kernel.family),
      MFL_NUM("kernel", "dimension", kernel.dimension, int),
      MFL_NUM("kernel", "amplitude", kernel.amplitude, double),
      MFL_NUM("kernel", "s", kernel.s, double),
      MFL_NUM("kernel", "cutoff", kernel.cutoff, int),
      MFL_STR("kernel", "table", kernel.table),

      MFL_LIST("physics", "n", n_list, int),
      MFL_NUM("physics", "beta", beta, double),
      MFL_LIST("physics", "betas", betas, double),
      MFL_NUM("physics", "t_end", t_end, double),
      MFL_NUM("physics", "dt", dt, double),
      MFL_NUM("physics", "replicas", replicas, int),
      MFL_STR("physics", "f0", f0),
      MFL_LIST("physics", "times", times, double),
      MFL_STR("physics", "psi", psi),
      MFL_STR("physics", "chi", chi),

      MFL_NUM("numerics", "grid", grid, int),
      MFL_NUM("numerics", "lambda_nodes", lambda_nodes, int),
      MFL_NUM("numerics", "bound_constant", bound_constant, double),
      MFL_NUM("numerics", "cluster_trials", cluster_trials, int),
      MFL_LIST("numerics", "riesz_cutoffs", riesz_cutoffs, int),
      MFL_NUM("numerics", "bootstrap", bootstrap, int),

      MFL_NUM("mcmc", "burn_in_sweeps", mcmc.burn_in_sweeps, int),
      MFL_NUM("mcmc", "sample_sweeps", mcmc.sample_sweeps, int),
      MFL_NUM("mcmc", "thin_sweeps", mcmc.thin_sweeps, int),
      MFL_NUM("mcmc", "initial_step", mcmc.initial_step, double),
      MFL_NUM("mcmc", "target_acceptance", mcmc.target_acceptance, double),
      MFL_NUM("mcmc", "batches", mcmc.n_batches, int),

      MFL_NUM("ensemble", "chains", ensemble.chains, int),
      MFL_NUM("ensemble", "burn_in_sweeps", ensemble.burn_in_sweeps, int),
      MFL_NUM("ensemble", "thin_sweeps", ensemble.thin_sweeps, int),

      MFL_NUM("vlasov", "k_modes", k_modes, int),
      MFL_NUM("vlasov", "n_hermite", n_hermite, int),
      MFL_NUM("vlasov", "n_hermite_free", n_hermite_free, int),
      MFL_BOOL("vlasov", "filter", filter),
      MFL_NUM("vlasov", "t_end", vlasov_t_end, double),

      Field{"meanfield", "V", [](const ExperimentConfig& c) { return to_string(c.meanfield.confining); },
            [](ExperimentConfig& c, const std::string& v) {
              try {
                c.meanfield.confining = parse_confining(trim(v));
              } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("config: ") + e.what());
              }
            }},
      Field{"meanfield", "W", [](const ExperimentConfig& c) { return to_string(c.meanfield.interaction); },
            [](ExperimentConfig& c, const std::string& v) {
              try {
                c.meanfield.interaction = parse_interaction(trim(v));
              } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("config: ") + e.what());
              }
            }},
      MFL_NUM("meanfield", "L", meanfield.half_width, double),
      MFL_NUM("meanfield", "grid_points", meanfield.grid_points, int),
      MFL_NUM("meanfield", "beta", meanfield.beta, double),
      MFL_NUM("meanfield", "amplitude", meanfield.amplitude, double),
      MFL_NUM("meanfield", "width", meanfield.width, double),
      MFL_NUM("meanfield", "tol", tol, double),
      MFL_NUM("meanfield", "max_iter", max_iter, int),
      MFL_NUM("meanfield", "q", q, double),
      MFL_LIST("meanfield", "eta_betas", eta_betas, double),
  };
  return f;
}

#undef MFL_STR
#undef MFL_NUM
#undef MFL_LIST
#undef MFL_BOOL

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError("config: " + msg);
}

}  // namespace

FourierKernel build_kernel(const KernelConfig& k) {
  try {
    if (k.family == "cosine") {
      if (k.dimension != 1) throw ConfigError("config: cosine kernel is one-dimensional");
      return cosine_kernel(k.amplitude);
    }
    if (k.family == "zero") return zero_kernel(k.dimension);
    if (k.family == "riesz") return riesz_kernel(k.dimension, k.s, k.cutoff);
    if (k.family == "log") return log_kernel(k.dimension, k.cutoff);
    if (k.family == "table") {
      KernelSpec spec;
      spec.dimension = k.dimension;
      spec.cutoff = k.cutoff;
      spec.family = KernelFamily::fourier_table;
      std::stringstream ss(k.table);
      std::string entry;
      while (ss >> entry) {
        const auto colon = entry.find(':');
        if (colon == std::string::npos) throw ConfigError("config: table entry '" + entry + "' lacks ':'");
        const auto comps = parse_list<int>("kernel.table", entry.substr(0, colon));
        if (comps.empty() || comps.size() > 3)
          throw ConfigError("config: table entry '" + entry + "' has a bad frequency");
        Frequency xi{};
        for (std::size_t i = 0; i < comps.size(); ++i) xi[i] = comps[i];
        const double v = parse_number<double>("kernel.table", entry.substr(colon + 1));
        spec.table[xi] = v;
        Frequency neg{-xi[0], -xi[1], -xi[2]};
        if (!spec.table.count(neg)) spec.table[neg] = v;
      }
      return FourierKernel(spec);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: invalid kernel: ") + e.what());
  }
  throw ConfigError("config: unknown kernel family '" + k.family + "'");
}

Observable build_observable(const std::string& text, double beta) {
  try {
    return parse_observable(text, std::sqrt(beta));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: invalid observable '") + text + "': " + e.what());
  }
}

void validate(const ExperimentConfig& c) {
  const auto& names = experiment_names();
  require(std::find(names.begin(), names.end(), c.experiment) != names.end(),
          "unknown experiment '" + c.experiment + "'");
  require(!c.run_id.empty() && c.run_id.find_first_of("/\\ ") == std::string::npos,
          "run_id must be a nonempty name without spaces or slashes");
  require(c.workers >= 0, "workers must be >= 0");
  require(!c.n_list.empty(), "physics.n must list at least one N");
  for (int n : c.n_list) require(n >= 1, "physics.n entries must be >= 1");
  require(c.beta >= 0 && std::isfinite(c.beta), "physics.beta must be finite and >= 0");
  for (double b : c.betas) require(b >= 0 && std::isfinite(b), "physics.betas entries must be >= 0");
  require(c.dt > 0, "physics.dt must be positive");
  require(c.t_end >= 0, "physics.t_end must be >= 0");
  require(c.replicas >= 2, "physics.replicas must be >= 2");
  const bool timed = c.experiment == "theorem1" || c.experiment == "correlations-decay";
  for (double t : timed ? c.times : std::vector<double>{}) {
    require(t >= 0 && t <= c.t_end + 1e-12, "physics.times must lie in [0, t_end]");
    require(std::abs(std::round(t / c.dt) * c.dt - t) < 1e-9 * std::max(1.0, t),
            "physics.times must be multiples of dt");
  }
  require(c.grid >= 8, "numerics.grid must be >= 8");
  require(c.lambda_nodes >= 1, "numerics.lambda_nodes must be >= 1");
  require(c.bound_constant > 0, "numerics.bound_constant must be positive");
  require(c.cluster_trials >= 1, "numerics.cluster_trials must be >= 1");
  require(c.bootstrap >= 2, "numerics.bootstrap must be >= 2");
  require(c.mcmc.burn_in_sweeps >= 0 && c.mcmc.sample_sweeps >= 1 && c.mcmc.thin_sweeps >= 1,
          "mcmc sweep counts must be positive");
  require(c.mcmc.initial_step > 0 && c.mcmc.target_acceptance > 0 && c.mcmc.target_acceptance < 1,
          "mcmc step and target acceptance out of range");
  require(c.mcmc.n_batches >= 2, "mcmc.batches must be >= 2");
  require(c.ensemble.chains >= 1 && c.ensemble.burn_in_sweeps >= 0 && c.ensemble.thin_sweeps >= 10,
          "ensemble needs chains >= 1 and thin_sweeps >= 10");
  require(c.k_modes >= 1 && c.n_hermite >= 2 && c.n_hermite_free >= 2,
          "vlasov k_modes and Hermite counts out of range");
  require(c.vlasov_t_end >= 0, "vlasov.t_end must be >= 0");
  require(c.meanfield.half_width > 0 && c.meanfield.grid_points >= 3,
          "meanfield L and grid_points out of range");
  require(c.meanfield.beta > 0 && c.meanfield.width > 0, "meanfield beta and width must be positive");
  require(c.tol > 0 && c.max_iter >= 1, "meanfield tol and max_iter out of range");
  require(c.q >= 1, "meanfield.q must be >= 1");
  for (std::size_t i = 0; i < c.eta_betas.size(); ++i)
    require(c.eta_betas[i] > 0 && (i == 0 || c.eta_betas[i] > c.eta_betas[i - 1]),
            "meanfield.eta_betas must be positive and increasing");
  build_kernel(c.kernel);
  build_observable(c.f0, std::max(c.beta, 1e-300));
  build_observable(c.psi, std::max(c.beta, 1e-300));
  build_observable(c.chi, std::max(c.beta, 1e-300));
}

ExperimentConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  std::map<std::string, std::map<std::string, const Field*>> index;
  for (const auto& f : fields()) index[f.section][f.key] = &f;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError("config: key '" + section + "' outside a section");
    auto sec = index.find(section);
    if (sec == index.end()) throw ConfigError("config: unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      auto f = sec->second.find(key);
      if (f == sec->second.end())
        throw ConfigError("config: unknown key '" + key + "' in [" + section + "]");
      f->second->set(c, value.data());
    }
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out, current;
  for (const auto& f : fields()) {
    if (f.section != current) {
      if (!current.empty()) out += "\n";
      out += "[" + f.section + "]\n";
      current = f.section;
    }
    out += f.key + " = " + f.get(config) + "\n";
  }
  return out;
}

}  // namespace mfl
