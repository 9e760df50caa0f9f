#include "blab/scenario.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "blab/toml_min.hpp"

namespace blab {

namespace {

[[noreturn]] void toml_fail(std::size_t line, const std::string& what) {
  throw Error("toml parse error at line " + std::to_string(line) + ": " + what);
}

std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string strip_comment(const std::string& s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

std::vector<std::string> split_dotted(const std::string& key, std::size_t line) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : key) {
    if (c == '.') {
      if (cur.empty()) toml_fail(line, "empty key segment in '" + key + "'");
      parts.push_back(cur);
      cur.clear();
    } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
      cur += c;
    } else {
      toml_fail(line, "invalid key character in '" + key + "'");
    }
  }
  if (cur.empty()) toml_fail(line, "empty key segment in '" + key + "'");
  parts.push_back(cur);
  return parts;
}

nlohmann::ordered_json parse_scalar(const std::string& raw, std::size_t line) {
  const std::string v = strip(raw);
  if (v.empty()) toml_fail(line, "missing value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"')
      toml_fail(line, "unterminated string");
    return v.substr(1, v.size() - 2);
  }
  if (v == "true") return true;
  if (v == "false") return false;
  // Integer or float.
  try {
    std::size_t pos = 0;
    if (v.find_first_of(".eEinf") == std::string::npos) {
      const long long i = std::stoll(v, &pos);
      if (pos == v.size()) return i;
    }
    const double d = std::stod(v, &pos);
    if (pos == v.size()) return d;
  } catch (...) {
  }
  toml_fail(line, "cannot parse value '" + v + "'");
}

nlohmann::ordered_json parse_value(const std::string& raw, std::size_t line) {
  const std::string v = strip(raw);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') toml_fail(line, "unterminated array");
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    std::string inner = v.substr(1, v.size() - 2);
    std::string item;
    bool in_string = false;
    for (char c : inner) {
      if (c == '"') in_string = !in_string;
      if (c == ',' && !in_string) {
        if (!strip(item).empty()) arr.push_back(parse_scalar(item, line));
        item.clear();
      } else {
        item += c;
      }
    }
    if (!strip(item).empty()) arr.push_back(parse_scalar(item, line));
    return arr;
  }
  return parse_scalar(v, line);
}

void insert_value(nlohmann::ordered_json& root,
                  const std::vector<std::string>& path,
                  nlohmann::ordered_json value, std::size_t line) {
  nlohmann::ordered_json* node = &root;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (!node->contains(path[i])) (*node)[path[i]] = nlohmann::ordered_json::object();
    node = &(*node)[path[i]];
    if (!node->is_object()) toml_fail(line, "key '" + path[i] + "' is not a table");
  }
  if (node->contains(path.back()))
    toml_fail(line, "duplicate key '" + path.back() + "'");
  (*node)[path.back()] = std::move(value);
}

}  // namespace

nlohmann::ordered_json parse_toml_subset(const std::string& text) {
  nlohmann::ordered_json root = nlohmann::ordered_json::object();
  std::vector<std::string> table;
  std::istringstream in(text);
  std::string rawline;
  std::size_t lineno = 0;
  while (std::getline(in, rawline)) {
    ++lineno;
    const std::string line = strip(strip_comment(rawline));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') toml_fail(lineno, "unterminated table header");
      table = split_dotted(strip(line.substr(1, line.size() - 2)), lineno);
      // Materialize the table so empty tables are visible.
      nlohmann::ordered_json* node = &root;
      for (const auto& part : table) {
        if (!node->contains(part)) (*node)[part] = nlohmann::ordered_json::object();
        node = &(*node)[part];
        if (!node->is_object()) toml_fail(lineno, "key '" + part + "' is not a table");
      }
      continue;
    }
    const std::size_t eq = [&] {
      bool in_string = false;
      for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '=' && !in_string) return i;
      }
      return std::string::npos;
    }();
    if (eq == std::string::npos) toml_fail(lineno, "expected key = value");
    std::vector<std::string> path = table;
    for (auto& part : split_dotted(strip(line.substr(0, eq)), lineno))
      path.push_back(part);
    insert_value(root, path, parse_value(line.substr(eq + 1), lineno), lineno);
  }
  return root;
}

namespace {

class StrictReader {
 public:
  StrictReader(const nlohmann::ordered_json& obj, std::string context)
      : obj_(obj), context_(std::move(context)) {
    if (!obj.is_object())
      throw Error("scenario: '" + context_ + "' must be a table/object");
  }

  ~StrictReader() = default;

  bool has(const std::string& key) const { return obj_.contains(key); }

  template <typename T>
  T require(const std::string& key) {
    if (!obj_.contains(key))
      throw Error("scenario: missing required key '" + context_ + key + "'");
    return get<T>(key);
  }

  template <typename T>
  T optional(const std::string& key, T fallback) {
    if (!obj_.contains(key)) return fallback;
    return get<T>(key);
  }

  const nlohmann::ordered_json& sub(const std::string& key) {
    if (!obj_.contains(key))
      throw Error("scenario: missing required key '" + context_ + key + "'");
    seen_.push_back(key);
    return obj_.at(key);
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      bool known = false;
      for (const auto& s : seen_)
        if (s == it.key()) known = true;
      if (!known)
        throw Error("scenario: unknown key '" + context_ + it.key() + "'");
    }
  }

 private:
  template <typename T>
  T get(const std::string& key) {
    seen_.push_back(key);
    try {
      return obj_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw Error("scenario: key '" + context_ + key + "' has the wrong type");
    }
  }

  const nlohmann::ordered_json& obj_;
  std::string context_;
  std::vector<std::string> seen_;
};

std::map<std::string, double> read_params(const nlohmann::ordered_json& obj,
                                          const std::string& context) {
  if (!obj.is_object())
    throw Error("scenario: '" + context + "' must be a table of numbers");
  std::map<std::string, double> out;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!it.value().is_number())
      throw Error("scenario: parameter '" + context + it.key() +
                  "' must be a number");
    out[it.key()] = it.value().get<double>();
  }
  return out;
}

}  // namespace

Scenario scenario_from_json(const nlohmann::ordered_json& j) {
  Scenario sc;
  StrictReader top(j, "");
  sc.name = top.require<std::string>("name");
  if (sc.name.empty()) throw Error("scenario: name must not be empty");
  sc.seed = top.optional<std::uint64_t>("seed", 0);

  {
    StrictReader field(top.sub("field"), "field.");
    sc.field_name = field.require<std::string>("name");
    if (field.has("params"))
      sc.field_params = read_params(field.sub("params"), "field.params.");
    field.finish();
  }

  if (top.has("lattice")) {
    StrictReader lat(top.sub("lattice"), "lattice.");
    sc.n_q = lat.optional<std::size_t>("n_q", sc.n_q);
    sc.n_p = lat.optional<std::size_t>("n_p", sc.n_p);
    sc.p_max = lat.optional<double>("p_max", sc.p_max);
    lat.finish();
  }

  {
    StrictReader rho(top.sub("rho"), "rho.");
    const bool use_default = rho.optional<bool>("default", false);
    if (use_default) {
      sc.rho_value = 2.0;
    } else {
      sc.rho_value = rho.require<double>("value");
    }
    rho.finish();
  }

  {
    StrictReader energy(top.sub("energy"), "energy.");
    const bool use_default = energy.optional<bool>("default", false);
    if (use_default) {
      sc.e_planck = 1.0;
      sc.e_obs = sc.e_planck / 100.0;
    } else {
      sc.e_obs = energy.require<double>("e_obs");
      sc.e_planck = energy.require<double>("e_planck");
    }
    energy.finish();
  }

  if (top.has("initial")) {
    StrictReader initial(top.sub("initial"), "initial.");
    if (initial.has("phi")) {
      StrictReader phi(initial.sub("phi"), "initial.phi.");
      sc.phi_name = phi.require<std::string>("name");
      if (phi.has("params"))
        sc.phi_params = read_params(phi.sub("params"), "initial.phi.params.");
      phi.finish();
    }
    if (initial.has("chi")) {
      StrictReader chi(initial.sub("chi"), "initial.chi.");
      sc.chi_name = chi.require<std::string>("name");
      if (chi.has("params"))
        sc.chi_params = read_params(chi.sub("params"), "initial.chi.params.");
      chi.finish();
    }
    initial.finish();
  }

  {
    StrictReader time(top.sub("time"), "time.");
    sc.t_final = time.require<double>("t_final");
    sc.n_outputs = time.optional<std::size_t>("n_outputs", sc.n_outputs);
    time.finish();
  }

  if (top.has("tolerances")) {
    StrictReader tol(top.sub("tolerances"), "tolerances.");
    sc.born_tol = tol.optional<double>("born_tol", sc.born_tol);
    sc.subspace_threshold =
        tol.optional<double>("subspace_threshold", sc.subspace_threshold);
    tol.finish();
  }

  if (top.has("ensemble")) {
    StrictReader ens(top.sub("ensemble"), "ensemble.");
    sc.ensemble_samples = ens.optional<std::size_t>("n_samples", sc.ensemble_samples);
    sc.ensemble_dt = ens.optional<double>("dt", sc.ensemble_dt);
    sc.ensemble_l1_tol = ens.optional<double>("l1_tol", sc.ensemble_l1_tol);
    ens.finish();
  }

  if (top.has("kernel")) {
    StrictReader ker(top.sub("kernel"), "kernel.");
    sc.kernel_delta_t = ker.optional<double>("delta_t", sc.kernel_delta_t);
    sc.kernel_steps = ker.optional<int>("n_steps", sc.kernel_steps);
    sc.kernel_order = ker.optional<std::string>("order", sc.kernel_order);
    sc.kernel_l1_tol = ker.optional<double>("l1_tol", sc.kernel_l1_tol);
    ker.finish();
  }
  top.finish();

  // Parse-time validation of module preconditions.
  if (sc.n_q < 8 || sc.n_p < 8 || sc.n_q % 2 != 0 || sc.n_p % 2 != 0 ||
      sc.n_q > 4096 || sc.n_p > 4096)
    throw Error("scenario: lattice sizes must be even, >= 8 and <= 4096");
  if (!(sc.p_max > 0.0)) throw Error("scenario: p_max must be positive");
  if (sc.ensemble_samples < 1000)
    throw Error("scenario: ensemble.n_samples must be >= 1000");
  if (sc.n_outputs > 100000)
    throw Error("scenario: time.n_outputs is implausibly large");
  if (!(sc.e_obs > 0.0) || sc.e_obs > sc.e_planck) {
    std::ostringstream msg;
    msg << "scenario: require 0 < e_obs <= e_planck, got e_obs = " << sc.e_obs
        << ", e_planck = " << sc.e_planck;
    throw Error(msg.str());
  }
  if (!(sc.rho_value >= 1e-8)) throw Error("scenario: rho must be >= 1e-8");
  if (!(sc.t_final >= 0.0)) throw Error("scenario: t_final must be >= 0");
  if (sc.n_outputs < 1) throw Error("scenario: n_outputs must be >= 1");
  if (sc.kernel_order != "linear" && sc.kernel_order != "nearest")
    throw Error("scenario: kernel.order must be 'linear' or 'nearest'");
  (void)sc.field();  // validates the catalog name and parameters
  return sc;
}

FlowField Scenario::field() const {
  std::map<std::string, double> params = field_params;
  // Friendly defaults for the catalog so minimal files work.
  if (field_name == "uniform" && !params.count("omega")) params["omega"] = 1.0;
  if ((field_name == "shifted_sine" || field_name == "double_well_drift")) {
    if (!params.count("a")) params["a"] = 1.5;
    if (!params.count("b")) params["b"] = 1.0;
  }
  return catalog_field(field_name, params);
}

std::vector<double> Scenario::output_times() const {
  std::vector<double> times;
  times.reserve(n_outputs + 1);
  for (std::size_t k = 0; k <= n_outputs; ++k)
    times.push_back(t_final * static_cast<double>(k) /
                    static_cast<double>(n_outputs));
  return times;
}

Scenario parse_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("parse_scenario: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), path.extension().string());
}

Scenario parse_scenario_text(const std::string& text,
                             const std::string& extension) {
  nlohmann::ordered_json j;
  if (extension == ".json") {
    try {
      j = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw Error(std::string("parse_scenario: invalid JSON: ") + e.what());
    }
  } else if (extension == ".toml") {
    j = parse_toml_subset(text);
  } else {
    throw Error("parse_scenario: unsupported extension '" + extension +
                "' (use .toml or .json)");
  }
  return scenario_from_json(j);
}

Scenario parse_scenario_with_overrides(
    const std::filesystem::path& path,
    const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw Error("parse_scenario: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string ext = path.extension().string();
  nlohmann::ordered_json j;
  if (ext == ".json") {
    try {
      j = nlohmann::ordered_json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
      throw Error(std::string("parse_scenario: invalid JSON: ") + e.what());
    }
  } else if (ext == ".toml") {
    j = parse_toml_subset(buf.str());
  } else {
    throw Error("parse_scenario: unsupported extension '" + ext +
                "' (use .toml or .json)");
  }
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos)
      throw Error("override must look like key=value: " + ov);
    const std::string key = ov.substr(0, eq);
    const std::string val = ov.substr(eq + 1);
    nlohmann::ordered_json parsed;
    try {
      parsed = nlohmann::ordered_json::parse(val);
    } catch (...) {
      parsed = val;  // bare strings allowed
    }
    nlohmann::ordered_json* node = &j;
    std::string cur;
    std::vector<std::string> parts;
    for (char c : key) {
      if (c == '.') {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    parts.push_back(cur);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      if (!node->contains(parts[i]))
        (*node)[parts[i]] = nlohmann::ordered_json::object();
      node = &(*node)[parts[i]];
    }
    (*node)[parts.back()] = parsed;
  }
  return scenario_from_json(j);
}

}  // namespace blab
