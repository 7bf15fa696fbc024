#include "cli_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace jdcli {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    while (used < text.size() && std::isspace((unsigned char)text[used]))
      ++used;
    if (used != text.size()) throw std::invalid_argument("trailing text");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("cannot parse " + what + " from '" + text + "'");
  }
}

void parse_complex(const std::string& text, double* re, double* im) {
  std::string s;
  for (char ch : text)
    if (!std::isspace((unsigned char)ch)) s.push_back(ch);
  if (s.empty()) throw std::runtime_error("empty complex literal");
  if (!s.empty() && s.front() == '(' && s.back() == ')')
    s = s.substr(1, s.size() - 2);
  std::size_t comma = s.find(',');
  if (comma != std::string::npos) {
    *re = parse_double(s.substr(0, comma), "real part");
    *im = parse_double(s.substr(comma + 1), "imaginary part");
    return;
  }
  if (s.back() == 'i' || s.back() == 'I') {
    s.pop_back();
    // Split at the sign that separates the two parts, skipping exponent
    // signs and a leading sign.
    std::size_t split = std::string::npos;
    for (std::size_t k = s.size(); k-- > 1;) {
      if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
        split = k;
        break;
      }
    }
    if (split == std::string::npos) {
      *re = 0.0;
      *im = s.empty() || s == "+" ? 1.0 : (s == "-" ? -1.0 : parse_double(s, "imaginary part"));
    } else {
      *re = parse_double(s.substr(0, split), "real part");
      std::string imag = s.substr(split);
      if (imag == "+") *im = 1.0;
      else if (imag == "-") *im = -1.0;
      else *im = parse_double(imag, "imaginary part");
    }
    return;
  }
  *re = parse_double(s, "number");
  *im = 0.0;
}

std::string MapSpec::text() const {
  std::ostringstream os;
  auto pairs = [&os](const std::vector<double>& v) {
    os << '[';
    for (std::size_t k = 0; k + 1 < v.size(); k += 2) {
      if (k) os << ';';
      os << format_double(v[k]) << ',' << format_double(v[k + 1]);
    }
    os << ']';
  };
  if (kind == "unicritical") {
    os << "unicritical:" << degree << ":(" << format_double(c_re) << ','
       << format_double(c_im) << ')';
  } else if (kind == "polynomial") {
    os << "polynomial:";
    pairs(coeffs);
  } else {
    os << "rational:";
    pairs(num);
    os << '/';
    pairs(den);
  }
  return os.str();
}

const std::vector<std::string>& estimator_ids() {
  static const std::vector<std::string> ids = {
      "tree-plain",     "tree-fuzzy",          "tree-restricted",
      "tree-msample",   "pullback",            "mcm-plain",
      "mcm-fuzzy",      "mcm-restricted",      "mcm-restricted-fuzzy",
      "mcm-double",     "mcm-multiple"};
  return ids;
}

bool estimator_is_tree(const std::string& id) {
  return id.rfind("tree-", 0) == 0;
}

bool estimator_is_mcm(const std::string& id) {
  return id.rfind("mcm-", 0) == 0;
}

std::string mcm_matrix_mode(const std::string& id) {
  if (id == "mcm-plain") return "plain";
  if (id == "mcm-fuzzy") return "fuzzy";
  if (id == "mcm-restricted") return "restricted";
  if (id == "mcm-restricted-fuzzy") return "restricted-fuzzy";
  if (id == "mcm-double") return "double-sample";
  if (id == "mcm-multiple") return "multiple";
  throw std::runtime_error("estimator '" + id + "' has no matrix mode");
}

void RunConfig::validate() {
  const auto& ids = estimator_ids();
  if (std::find(ids.begin(), ids.end(), estimator) == ids.end()) {
    std::string list;
    for (const auto& id : ids) {
      if (!list.empty()) list += ", ";
      list += id;
    }
    throw std::runtime_error("unknown estimator '" + estimator +
                             "'; valid ids: " + list);
  }
  if (map.kind != "unicritical" && map.kind != "polynomial" &&
      map.kind != "rational")
    throw std::runtime_error("map.kind must be unicritical, polynomial, or "
                             "rational");
  if (map.kind == "unicritical" && map.degree < 2)
    throw std::runtime_error("unicritical degree must be at least 2");
  if (depth < 1) throw std::runtime_error("depth n must be at least 1");
  if (puzzle_depth < 0)
    throw std::runtime_error("puzzle depth N must be nonnegative");
  if (puzzle_depth_min < 0 || puzzle_depth_min > puzzle_depth)
    throw std::runtime_error("puzzle depth range is empty (N-min > N)");
  if (samples < 1) throw std::runtime_error("sample count m must be >= 1");
  if (radius <= 0) throw std::runtime_error("radius r must be positive");
  if (kappa < 1) throw std::runtime_error("kappa must be >= 1");
  if (eta <= 0) throw std::runtime_error("eta must be positive");
  if (t_step <= 0) throw std::runtime_error("t-step must be positive");
  if (!(t_min < t_max))
    throw std::runtime_error("t-grid needs t-min < t-max");
  if (tol_t <= 0) throw std::runtime_error("tol-t must be positive");
  if (node_budget < 1) throw std::runtime_error("node budget must be >= 1");
  if (threads < 1) throw std::runtime_error("thread count must be >= 1");
  if (format != "csv" && format != "json")
    throw std::runtime_error("format must be csv or json");
  if (a_schedule != "linear" && a_schedule != "constant")
    throw std::runtime_error("A-schedule must be linear or a number");
  if (a_schedule == "constant" && a_value < 0)
    throw std::runtime_error("constant A value must be nonnegative");

  if (delta < 0 && big_delta > 0) delta = big_delta / 10.0;
  if (delta == 0)
    throw std::runtime_error("delta must be positive");
  if (delta > 0 && big_delta > 0 && delta > big_delta / 10.0 * (1 + 1e-12))
    throw std::runtime_error("delta must be at most Delta/10");
}

std::vector<double> RunConfig::t_grid() const {
  int count = static_cast<int>(std::floor((t_max - t_min) / t_step + 1e-9)) + 1;
  std::vector<double> ts(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) ts[static_cast<std::size_t>(k)] = t_min + k * t_step;
  return ts;
}

std::string RunConfig::canonical() const {
  std::ostringstream os;
  os << "map=" << map.text() << '\n'
     << "estimator=" << estimator << '\n'
     << "n=" << depth << '\n'
     << "N=" << puzzle_depth << '\n'
     << "N-min=" << puzzle_depth_min << '\n'
     << "delta=" << format_double(delta) << '\n'
     << "Delta=" << format_double(big_delta) << '\n'
     << "m=" << samples << '\n'
     << "r=" << format_double(radius) << '\n'
     << "kappa=" << format_double(kappa) << '\n'
     << "eta=" << format_double(eta) << '\n'
     << "angles=" << angles << '\n'
     << "A=" << (a_schedule == "linear"
                     ? std::string("linear")
                     : "constant:" + format_double(a_value))
     << '\n'
     << "t=[" << format_double(t_min) << ',' << format_double(t_max) << ','
     << format_double(t_step) << "]\n"
     << "tol-t=" << format_double(tol_t) << '\n'
     << "budget=" << node_budget << '\n'
     << "seed=" << seed << '\n';
  if (has_base)
    os << "base=(" << format_double(base_re) << ',' << format_double(base_im)
       << ")\n";
  else
    os << "base=ray:" << base_angle << '\n';
  return os.str();
}

namespace {

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace

std::string RunConfig::hash() const { return fnv1a_hex(canonical()); }

std::string RunConfig::puzzle_hash() const {
  std::ostringstream os;
  os << "map=" << map.text() << '\n'
     << "eta=" << format_double(eta) << '\n'
     << "angles=" << angles << '\n'
     << "seed=" << seed << '\n';
  return fnv1a_hex(os.str());
}

namespace {

void reject_unknown(const json& obj, const std::string& prefix,
                    const std::vector<std::string>& known) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw std::runtime_error("unknown key '" + prefix + it.key() +
                               "' in config");
  }
}

void read_pair(const json& v, const std::string& path, double* re,
               double* im) {
  if (v.is_number()) {
    *re = v.get<double>();
    *im = 0.0;
  } else if (v.is_string()) {
    parse_complex(v.get<std::string>(), re, im);
  } else if (v.is_array() && v.size() == 2 && v[0].is_number() &&
             v[1].is_number()) {
    *re = v[0].get<double>();
    *im = v[1].get<double>();
  } else {
    throw std::runtime_error("config key '" + path +
                             "' must be a number, [re, im], or a string");
  }
}

std::vector<double> read_coeff_list(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty())
    throw std::runtime_error("config key '" + path +
                             "' must be a nonempty array");
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    double re = 0, im = 0;
    read_pair(v[k], path + "[" + std::to_string(k) + "]", &re, &im);
    out.push_back(re);
    out.push_back(im);
  }
  return out;
}

void load_map_spec(const json& m, MapSpec& spec) {
  if (!m.is_object())
    throw std::runtime_error("config key 'map' must be an object");
  reject_unknown(m, "map.", {"kind", "degree", "c", "coeffs", "num", "den"});
  if (m.contains("kind")) spec.kind = m.at("kind").get<std::string>();
  if (m.contains("degree")) spec.degree = m.at("degree").get<int>();
  if (m.contains("c")) read_pair(m.at("c"), "map.c", &spec.c_re, &spec.c_im);
  if (m.contains("coeffs"))
    spec.coeffs = read_coeff_list(m.at("coeffs"), "map.coeffs");
  if (m.contains("num")) spec.num = read_coeff_list(m.at("num"), "map.num");
  if (m.contains("den")) spec.den = read_coeff_list(m.at("den"), "map.den");
}

}  // namespace

void load_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error("config file '" + path +
                             "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object())
    throw std::runtime_error("config file must hold a JSON object");

  static const std::vector<std::string> known = {
      "map",      "estimator", "n",         "N",        "N-min",
      "delta",    "Delta",     "m",         "r",        "kappa",
      "eta",      "angles",    "A",         "t-grid",   "tol-t",
      "node-budget", "threads", "seed",     "base",     "base-angle",
      "out",      "format",    "plot",      "cache-dir"};
  reject_unknown(doc, "", known);

  try {
    if (doc.contains("map")) load_map_spec(doc.at("map"), cfg.map);
    if (doc.contains("estimator"))
      cfg.estimator = doc.at("estimator").get<std::string>();
    if (doc.contains("n")) cfg.depth = doc.at("n").get<int>();
    if (doc.contains("N")) cfg.puzzle_depth = doc.at("N").get<int>();
    if (doc.contains("N-min"))
      cfg.puzzle_depth_min = doc.at("N-min").get<int>();
    if (doc.contains("delta")) cfg.delta = doc.at("delta").get<double>();
    if (doc.contains("Delta")) cfg.big_delta = doc.at("Delta").get<double>();
    if (doc.contains("m")) cfg.samples = doc.at("m").get<int>();
    if (doc.contains("r")) cfg.radius = doc.at("r").get<double>();
    if (doc.contains("kappa")) cfg.kappa = doc.at("kappa").get<double>();
    if (doc.contains("eta")) cfg.eta = doc.at("eta").get<double>();
    if (doc.contains("angles")) {
      const json& a = doc.at("angles");
      if (a.is_string()) {
        cfg.angles = a.get<std::string>();
      } else if (a.is_array()) {
        std::string joined;
        for (const auto& item : a) {
          if (!joined.empty()) joined += ",";
          joined += item.get<std::string>();
        }
        cfg.angles = joined;
      } else {
        throw std::runtime_error(
            "config key 'angles' must be a string or an array of strings");
      }
    }
    if (doc.contains("A")) {
      const json& a = doc.at("A");
      if (a.is_string() && a.get<std::string>() == "linear") {
        cfg.a_schedule = "linear";
      } else if (a.is_number()) {
        cfg.a_schedule = "constant";
        cfg.a_value = a.get<double>();
      } else {
        throw std::runtime_error(
            "config key 'A' must be \"linear\" or a number");
      }
    }
    if (doc.contains("t-grid")) {
      const json& g = doc.at("t-grid");
      if (!g.is_object())
        throw std::runtime_error("config key 't-grid' must be an object");
      reject_unknown(g, "t-grid.", {"min", "max", "step"});
      if (g.contains("min")) cfg.t_min = g.at("min").get<double>();
      if (g.contains("max")) cfg.t_max = g.at("max").get<double>();
      if (g.contains("step")) cfg.t_step = g.at("step").get<double>();
    }
    if (doc.contains("tol-t")) cfg.tol_t = doc.at("tol-t").get<double>();
    if (doc.contains("node-budget"))
      cfg.node_budget = doc.at("node-budget").get<std::uint64_t>();
    if (doc.contains("threads")) cfg.threads = doc.at("threads").get<int>();
    if (doc.contains("seed")) cfg.seed = doc.at("seed").get<unsigned>();
    if (doc.contains("base")) {
      read_pair(doc.at("base"), "base", &cfg.base_re, &cfg.base_im);
      cfg.has_base = true;
    }
    if (doc.contains("base-angle"))
      cfg.base_angle = doc.at("base-angle").get<std::string>();
    if (doc.contains("out")) cfg.out = doc.at("out").get<std::string>();
    if (doc.contains("format"))
      cfg.format = doc.at("format").get<std::string>();
    if (doc.contains("plot")) cfg.plot = doc.at("plot").get<bool>();
    if (doc.contains("cache-dir"))
      cfg.cache_dir = doc.at("cache-dir").get<std::string>();
  } catch (const json::exception& e) {
    throw std::runtime_error("config file '" + path +
                             "' has a badly typed value: " + e.what());
  }
}

int env_threads() {
  const char* raw = std::getenv("JULIADIM_THREADS");
  if (!raw || !*raw) return 0;
  char* end = nullptr;
  long v = std::strtol(raw, &end, 10);
  if (end == raw || *end != '\0' || v < 1 || v > 4096) return 0;
  return static_cast<int>(v);
}

}  // namespace jdcli
