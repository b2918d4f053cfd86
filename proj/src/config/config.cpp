#include "windbid/config.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>

#include <openssl/evp.h>

#include "windbid/errors.hpp"
#include "windbid/text.hpp"

namespace windbid {

namespace {

struct Field {
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

double to_double(const std::string& key, const std::string& v) {
  const auto d = parse_double(v);
  if (!d || !std::isfinite(*d)) throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  return *d;
}

long long to_integer(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
    throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
  return out;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
    throw ConfigError("'" + key + "' expects a nonnegative integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

// Builds the key table once; order here is the order of config_entries.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const auto table = [] {
    std::vector<std::pair<std::string, Field>> t;
    auto add = [&](std::string key, std::function<std::string(const RunConfig&)> get,
                   std::function<void(RunConfig&, const std::string&, const std::string&)> set) {
      t.emplace_back(key, Field{std::move(get), [key, set](RunConfig& c, const std::string& v) { set(c, key, v); }});
    };
    auto dbl = [&](std::string key, auto ref) {
      add(key, [ref](const RunConfig& c) { return format_double(ref(const_cast<RunConfig&>(c))); },
          [ref](RunConfig& c, const std::string& k, const std::string& v) { ref(c) = to_double(k, v); });
    };
    auto integer = [&](std::string key, auto ref) {
      add(key, [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); },
          [ref](RunConfig& c, const std::string& k, const std::string& v) {
            ref(c) = static_cast<std::remove_reference_t<decltype(ref(c))>>(to_integer(k, v));
          });
    };
    auto range = [&](const std::string& key, auto ref) {
      dbl(key + "_lo", [ref](RunConfig& c) -> double& { return ref(c).lo; });
      dbl(key + "_hi", [ref](RunConfig& c) -> double& { return ref(c).hi; });
    };

    add("seed", [](const RunConfig& c) { return std::to_string(c.seed); },
        [](RunConfig& c, const std::string& k, const std::string& v) { c.seed = to_unsigned(k, v); });
    integer("threads", [](RunConfig& c) -> int& { return c.threads; });

    add("data.prices", [](const RunConfig& c) { return c.data.prices; },
        [](RunConfig& c, const std::string&, const std::string& v) { c.data.prices = v; });
    add("data.wind", [](const RunConfig& c) { return c.data.wind; },
        [](RunConfig& c, const std::string&, const std::string& v) { c.data.wind = v; });
    integer("data.synth_days", [](RunConfig& c) -> int& { return c.data.synth_days; });
    add("data.synth_seed", [](const RunConfig& c) { return std::to_string(c.data.synth_seed); },
        [](RunConfig& c, const std::string& k, const std::string& v) { c.data.synth_seed = to_unsigned(k, v); });

    add("market.discharge",
        [](const RunConfig& c) { return c.market.discharge == DischargeConvention::Multiply ? "multiply" : "divide"; },
        [](RunConfig& c, const std::string& k, const std::string& v) {
          if (v == "multiply") c.market.discharge = DischargeConvention::Multiply;
          else if (v == "divide") c.market.discharge = DischargeConvention::Divide;
          else throw ConfigError("'" + k + "' expects multiply or divide, got '" + v + "'");
        });
    dbl("solver.feasibility_tol", [](RunConfig& c) -> double& { return c.market.simplex.feasibility_tol; });
    dbl("solver.optimality_tol", [](RunConfig& c) -> double& { return c.market.simplex.optimality_tol; });
    dbl("solver.pivot_tol", [](RunConfig& c) -> double& { return c.market.simplex.pivot_tol; });
    integer("solver.refactor_interval", [](RunConfig& c) -> int& { return c.market.simplex.refactor_interval; });
    integer("solver.max_iterations", [](RunConfig& c) -> long& { return c.market.simplex.max_iterations; });

    integer("scenario.count", [](RunConfig& c) -> int& { return c.episode.n_scenarios; });
    integer("scenario.price_p", [](RunConfig& c) -> int& { return c.fit.price_p; });
    integer("scenario.price_q", [](RunConfig& c) -> int& { return c.fit.price_q; });
    integer("scenario.wind_p", [](RunConfig& c) -> int& { return c.fit.wind_p; });
    integer("scenario.wind_q", [](RunConfig& c) -> int& { return c.fit.wind_q; });
    add("scenario.residuals",
        [](const RunConfig& c) {
          return c.fit.residuals == ResidualDistribution::Kind::Empirical ? "empirical" : "gaussian";
        },
        [](RunConfig& c, const std::string& k, const std::string& v) {
          if (v == "empirical") c.fit.residuals = ResidualDistribution::Kind::Empirical;
          else if (v == "gaussian") c.fit.residuals = ResidualDistribution::Kind::Gaussian;
          else throw ConfigError("'" + k + "' expects empirical or gaussian, got '" + v + "'");
        });
    dbl("penalty.kappa_up", [](RunConfig& c) -> double& { return c.episode.penalty.kappa_up; });
    dbl("penalty.floor_up", [](RunConfig& c) -> double& { return c.episode.penalty.floor_up; });
    dbl("penalty.kappa_op", [](RunConfig& c) -> double& { return c.episode.penalty.kappa_op; });
    add("penalty.cover_da", [](const RunConfig& c) { return c.episode.penalty.cover_da ? "true" : "false"; },
        [](RunConfig& c, const std::string& k, const std::string& v) { c.episode.penalty.cover_da = to_bool(k, v); });

    dbl("curve.cut_in", [](RunConfig& c) -> double& { return c.curve.cut_in; });
    dbl("curve.rated_speed", [](RunConfig& c) -> double& { return c.curve.rated_speed; });
    dbl("curve.cut_out", [](RunConfig& c) -> double& { return c.curve.cut_out; });
    dbl("curve.rated_power", [](RunConfig& c) -> double& { return c.curve.rated_power; });

    range("battery.e_max_factor", [](RunConfig& c) -> Range& { return c.episode.e_max_factor; });
    dbl("battery.e_min", [](RunConfig& c) -> double& { return c.episode.e_min; });
    range("battery.e_init_fraction", [](RunConfig& c) -> Range& { return c.episode.e_init_fraction; });
    range("battery.e_final_fraction", [](RunConfig& c) -> Range& { return c.episode.e_final_fraction; });
    range("battery.p_max_factor", [](RunConfig& c) -> Range& { return c.episode.p_max_factor; });
    range("battery.eta_ch", [](RunConfig& c) -> Range& { return c.episode.eta_ch; });
    range("battery.eta_dis", [](RunConfig& c) -> Range& { return c.episode.eta_dis; });

    dbl("agent.actor_lr", [](RunConfig& c) -> double& { return c.agent.actor_lr; });
    dbl("agent.critic_lr", [](RunConfig& c) -> double& { return c.agent.critic_lr; });
    dbl("agent.tau", [](RunConfig& c) -> double& { return c.agent.tau; });
    integer("agent.batch_size", [](RunConfig& c) -> int& { return c.agent.batch_size; });
    integer("agent.buffer_capacity", [](RunConfig& c) -> int& { return c.agent.buffer_capacity; });
    dbl("agent.noise_sigma", [](RunConfig& c) -> double& { return c.agent.noise_sigma; });
    dbl("agent.noise_decay", [](RunConfig& c) -> double& { return c.agent.noise_decay; });
    add("agent.hidden",
        [](const RunConfig& c) {
          std::string s;
          for (std::size_t i = 0; i < c.agent.hidden.size(); ++i) s += (i ? "," : "") + std::to_string(c.agent.hidden[i]);
          return s;
        },
        [](RunConfig& c, const std::string& k, const std::string& v) {
          std::vector<int> h;
          std::istringstream in(v);
          std::string cell;
          while (std::getline(in, cell, ',')) h.push_back(static_cast<int>(to_integer(k, trim(cell))));
          c.agent.hidden = h;
        });
    add("agent.target_networks", [](const RunConfig& c) { return c.agent.target_networks ? "true" : "false"; },
        [](RunConfig& c, const std::string& k, const std::string& v) { c.agent.target_networks = to_bool(k, v); });

    integer("train.steps", [](RunConfig& c) -> long& { return c.train.steps; });
    integer("train.short_steps", [](RunConfig& c) -> long& { return c.train.short_steps; });
    integer("train.log_interval", [](RunConfig& c) -> long& { return c.train.log_interval; });
    integer("train.checkpoint_interval", [](RunConfig& c) -> long& { return c.train.checkpoint_interval; });
    integer("eval.episodes", [](RunConfig& c) -> int& { return c.eval_episodes; });
    return t;
  }();
  return table;
}

}  // namespace

void RunConfig::validate() const {
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (data.prices.empty() != data.wind.empty()) throw ConfigError("data.prices and data.wind must be given together");
  if (data.synth_days < 1) throw ConfigError("data.synth_days must be >= 1");
  const auto& s = market.simplex;
  if (!(s.feasibility_tol > 0) || !(s.optimality_tol > 0) || !(s.pivot_tol > 0))
    throw ConfigError("solver tolerances must be positive");
  if (s.refactor_interval < 1 || s.max_iterations < 1) throw ConfigError("solver iteration limits must be positive");
  if (fit.price_p < 0 || fit.price_q < 0 || fit.wind_p < 0 || fit.wind_q < 0)
    throw ConfigError("ARMA orders must be nonnegative");
  if (episode.penalty.kappa_up < 0 || episode.penalty.kappa_op < 0 || episode.penalty.floor_up < 0)
    throw ConfigError("penalty coefficients must be nonnegative");
  try {
    curve.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  episode.validate();
  agent.validate();
  if (train.steps < 0 || train.short_steps < 0) throw ConfigError("train steps must be nonnegative");
  if (train.log_interval < 1 || train.checkpoint_interval < 0) throw ConfigError("train intervals out of range");
  if (eval_episodes < 1) throw ConfigError("eval.episodes must be >= 1");
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  for (const auto& [k, f] : fields())
    if (k == key) {
      f.set(config, value);
      return;
    }
  throw ConfigError("unknown configuration key '" + key + "'");
}

RunConfig parse_config(std::istream& in, const std::string& name) {
  RunConfig c;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = trim(line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(name + ":" + std::to_string(line_no) + ": expected key = value");
    try {
      set_config_value(c, trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(name + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  return parse_config(in, path);
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [k, f] : fields()) out.emplace_back(k, f.get(config));
  return out;
}

void write_config(const RunConfig& config, std::ostream& out) {
  for (const auto& [k, v] : config_entries(config)) out << k << " = " << v << '\n';
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot hash " + path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 unavailable");
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

void write_manifest(const std::string& path, const std::string& command, const RunConfig& config,
                    const nlohmann::json& seeds, const std::vector<std::string>& artifacts) {
  nlohmann::json j;
  j["format"] = "windbid.manifest";
  j["version"] = 1;
  j["command"] = command;
  auto& cfg = j["config"] = nlohmann::json::object();
  for (const auto& [k, v] : config_entries(config)) cfg[k] = v;
  j["seeds"] = seeds;
  auto& files = j["artifacts"] = nlohmann::json::object();
  for (const auto& a : artifacts) files[std::filesystem::path(a).filename().string()] = sha256_file(a);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest " + path);
  out << j.dump(2) << '\n';
}

}  // namespace windbid
