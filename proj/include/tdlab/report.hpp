// Experiment configuration and reporting: flat key=value configs, structured
// reports with tables/fits/assertions, and deterministic CSV/JSON/SVG output.
#ifndef TDLAB_REPORT_HPP
#define TDLAB_REPORT_HPP

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "tdlab/nlss.hpp"

namespace tdlab {

inline constexpr const char* kVersion = "tdlab 0.1.0";

// ---- configuration ------------------------------------------------------

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using ConfigMap = std::map<std::string, std::string>;

namespace detail {
inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}
}  // namespace detail

// Flat "key = value" lines; '#' starts a comment; unknown keys are rejected
// against each experiment's declared key set at merge time.
inline ConfigMap parse_config_text(const std::string& text) {
  ConfigMap cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    cfg[key] = value;
  }
  return cfg;
}

inline ConfigMap parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

inline std::string serialize_config(const ConfigMap& cfg) {
  std::ostringstream out;
  for (const auto& [k, v] : cfg) out << k << " = " << v << "\n";
  return out.str();
}

// defaults merged with user overrides; user keys outside the defaults reject
inline ConfigMap merge_config(const ConfigMap& defaults, const ConfigMap& user) {
  ConfigMap merged = defaults;
  for (const auto& [k, v] : user) {
    auto it = merged.find(k);
    if (it == merged.end()) throw ConfigError("unknown config key: " + k);
    it->second = v;
  }
  return merged;
}

inline int cfg_int(const ConfigMap& c, const std::string& key) {
  try {
    return std::stoi(c.at(key));
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": expected an integer");
  }
}
inline double cfg_double(const ConfigMap& c, const std::string& key) {
  const std::string& v = c.at(key);
  if (v == "inf") return std::numeric_limits<double>::infinity();
  try {
    return std::stod(v);
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": expected a number");
  }
}
inline std::uint64_t cfg_seed(const ConfigMap& c, const std::string& key = "seed") {
  try {
    return static_cast<std::uint64_t>(std::stoull(c.at(key)));
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": expected an unsigned integer");
  }
}
template <typename T, typename Parse>
inline std::vector<T> cfg_list_impl(const ConfigMap& c, const std::string& key, Parse parse) {
  std::vector<T> out;
  std::istringstream in(c.at(key));
  std::string item;
  while (std::getline(in, item, ',')) {
    item = detail::trim(item);
    if (item.empty()) continue;
    out.push_back(parse(item));
  }
  if (out.empty()) throw ConfigError("config key " + key + ": empty list");
  return out;
}
inline std::vector<int> cfg_int_list(const ConfigMap& c, const std::string& key) {
  return cfg_list_impl<int>(c, key, [&](const std::string& s) {
    try {
      return std::stoi(s);
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": expected integers");
    }
  });
}
inline std::vector<double> cfg_double_list(const ConfigMap& c, const std::string& key) {
  return cfg_list_impl<double>(c, key, [&](const std::string& s) -> double {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    try {
      return std::stod(s);
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": expected numbers");
    }
  });
}

// ---- report structure ---------------------------------------------------

inline std::string fmt_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct FitRow {
  std::string name;
  double exponent = 0.0;
  double residual_rms = 0.0;
  int points = 0;
  std::vector<std::pair<double, double>> data;  // (N, value), for the SVG
};

inline FitRow to_fit_row(const std::string& name, const ScalingFit& fit,
                         const std::vector<std::pair<double, double>>& data) {
  return FitRow{name, fit.exponent, fit.residual_rms, fit.points, data};
}

// value judged against [lo, hi] at the stated tolerance
struct Assertion {
  std::string name;
  double value = 0.0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  double tolerance = 0.0;
  bool passed = false;
};

inline Assertion assert_le(const std::string& name, double value, double bound, double tol = 0.0) {
  Assertion a{name, value, -std::numeric_limits<double>::infinity(), bound, tol, false};
  a.passed = value <= bound + tol;
  return a;
}
inline Assertion assert_ge(const std::string& name, double value, double bound, double tol = 0.0) {
  Assertion a{name, value, bound, std::numeric_limits<double>::infinity(), tol, false};
  a.passed = value >= bound - tol;
  return a;
}
inline Assertion assert_in(const std::string& name, double value, double lo, double hi,
                           double tol = 0.0) {
  Assertion a{name, value, lo, hi, tol, false};
  a.passed = value >= lo - tol && value <= hi + tol;
  return a;
}
inline Assertion assert_close(const std::string& name, double value, double target, double tol) {
  return assert_in(name, value, target, target, tol);
}

struct ExperimentReport {
  std::string experiment;
  std::string version = kVersion;
  ConfigMap config;
  std::vector<Table> tables;
  std::vector<FitRow> fits;
  std::vector<Assertion> assertions;
  std::vector<std::string> notes;
  double wall_seconds = 0.0;  // stdout only, never emitted to files

  bool all_passed() const {
    for (const Assertion& a : assertions)
      if (!a.passed) return false;
    return true;
  }
  int exit_code() const { return all_passed() ? 0 : 1; }
};

struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BudgetGuard {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double limit_seconds = 0.0;  // 0: unlimited

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  void check(const std::string& where) const {
    if (limit_seconds > 0.0 && elapsed() > limit_seconds)
      throw BudgetExceeded("budget of " + fmt_double(limit_seconds) + " s exceeded at " + where +
                           " (elapsed " + fmt_double(elapsed()) + " s)");
  }
};

// ---- emission -----------------------------------------------------------

namespace detail {
inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failure: " + path.string());
}
}  // namespace detail

inline std::vector<std::filesystem::path> emit_csv(const ExperimentReport& rep,
                                                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const Table& t : rep.tables) {
    std::ostringstream out;
    for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << t.columns[c];
    out << "\n";
    for (const auto& row : t.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << fmt_double(row[c]);
      out << "\n";
    }
    auto path = dir / (rep.experiment + "__" + t.name + ".csv");
    detail::write_file(path, out.str());
    written.push_back(path);
  }
  if (!rep.assertions.empty()) {
    std::ostringstream out;
    out << "name,value,lo,hi,tolerance,passed\n";
    for (const Assertion& a : rep.assertions)
      out << a.name << "," << fmt_double(a.value) << "," << fmt_double(a.lo) << ","
          << fmt_double(a.hi) << "," << fmt_double(a.tolerance) << "," << (a.passed ? 1 : 0)
          << "\n";
    auto path = dir / (rep.experiment + "__assertions.csv");
    detail::write_file(path, out.str());
    written.push_back(path);
  }
  if (!rep.fits.empty()) {
    std::ostringstream out;
    out << "name,exponent,residual_rms,points\n";
    for (const FitRow& f : rep.fits)
      out << f.name << "," << fmt_double(f.exponent) << "," << fmt_double(f.residual_rms) << ","
          << f.points << "\n";
    auto path = dir / (rep.experiment + "__fits.csv");
    detail::write_file(path, out.str());
    written.push_back(path);
  }
  return written;
}

inline std::filesystem::path emit_json(const ExperimentReport& rep,
                                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json j;
  j["experiment"] = rep.experiment;
  j["version"] = rep.version;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : rep.config) cfg[k] = v;
  j["config"] = cfg;
  j["tables"] = nlohmann::ordered_json::array();
  for (const Table& t : rep.tables) {
    nlohmann::ordered_json jt;
    jt["name"] = t.name;
    jt["columns"] = t.columns;
    jt["rows"] = t.rows;
    j["tables"].push_back(jt);
  }
  j["fits"] = nlohmann::ordered_json::array();
  for (const FitRow& f : rep.fits) {
    nlohmann::ordered_json jf;
    jf["name"] = f.name;
    jf["exponent"] = f.exponent;
    jf["residual_rms"] = f.residual_rms;
    jf["points"] = f.points;
    j["fits"].push_back(jf);
  }
  j["assertions"] = nlohmann::ordered_json::array();
  for (const Assertion& a : rep.assertions) {
    nlohmann::ordered_json ja;
    ja["name"] = a.name;
    ja["value"] = a.value;
    ja["lo"] = fmt_double(a.lo);
    ja["hi"] = fmt_double(a.hi);
    ja["tolerance"] = a.tolerance;
    ja["passed"] = a.passed;
    j["assertions"].push_back(ja);
  }
  j["notes"] = rep.notes;
  auto path = dir / (rep.experiment + ".json");
  detail::write_file(path, j.dump(2) + "\n");
  return path;
}

// log-log scatter with the fitted line; the fitted slope is embedded as text
inline std::vector<std::filesystem::path> emit_svg(const ExperimentReport& rep,
                                                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const FitRow& f : rep.fits) {
    if (f.data.size() < 2) continue;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& [x, y] : f.data) {
      if (!(x > 0.0) || !(y > 0.0)) continue;
      xmin = std::min(xmin, std::log10(x));
      xmax = std::max(xmax, std::log10(x));
      ymin = std::min(ymin, std::log10(y));
      ymax = std::max(ymax, std::log10(y));
    }
    if (!(xmax > xmin)) xmax = xmin + 1.0;
    if (!(ymax > ymin)) {
      ymin -= 0.5;
      ymax += 0.5;
    }
    const double W = 640, H = 480, L = 70, B = 50, T = 30, R = 30;
    auto px = [&](double lx) { return L + (lx - xmin) / (xmax - xmin) * (W - L - R); };
    auto py = [&](double ly) { return H - B - (ly - ymin) / (ymax - ymin) * (H - T - B); };
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n";
    // fitted line through the data extremes
    {
      double lx0 = xmin, lx1 = xmax;
      double c = 0.0;
      // recover the intercept in log10 space from the fit
      // (mean of log10 y - slope * log10 x over the data)
      int n = 0;
      for (const auto& [x, y] : f.data) {
        if (!(x > 0.0) || !(y > 0.0)) continue;
        c += std::log10(y) - f.exponent * std::log10(x);
        ++n;
      }
      c /= std::max(1, n);
      out << "<line x1=\"" << fmt_double(px(lx0)) << "\" y1=\"" << fmt_double(py(f.exponent * lx0 + c))
          << "\" x2=\"" << fmt_double(px(lx1)) << "\" y2=\"" << fmt_double(py(f.exponent * lx1 + c))
          << "\" stroke=\"#888\" stroke-dasharray=\"5,4\"/>\n";
    }
    for (const auto& [x, y] : f.data) {
      if (!(x > 0.0) || !(y > 0.0)) continue;
      out << "<circle cx=\"" << fmt_double(px(std::log10(x))) << "\" cy=\""
          << fmt_double(py(std::log10(y))) << "\" r=\"4\" fill=\"#1f77b4\"/>\n";
    }
    out << "<text x=\"" << L + 10 << "\" y=\"" << T + 10 << "\" font-family=\"monospace\" font-size=\"14\">"
        << rep.experiment << " / " << f.name << ": slope = " << fmt_double(f.exponent)
        << "</text>\n";
    out << "<text x=\"" << (W - R - 120) << "\" y=\"" << H - B + 35
        << "\" font-family=\"monospace\" font-size=\"12\">log10 N</text>\n";
    out << "</svg>\n";
    auto path = dir / (rep.experiment + "__" + f.name + ".svg");
    detail::write_file(path, out.str());
    written.push_back(path);
  }
  return written;
}

// ---- trajectory export --------------------------------------------------

// JSON manifest (mesh, tolerances, contraction log) + one operator container
// per snapshot.
inline void export_trajectory(const NlssTrajectory& traj, const NlssTolerances& tol,
                              const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json j;
  j["format"] = "tdlab-trajectory 1";
  j["times"] = traj.times;
  j["grid_size"] = traj.grid_size;
  j["solver_cutoff"] = traj.solver_cutoff;
  j["trace0"] = traj.trace0;
  j["fixed_point_residual"] = traj.fixed_point_residual;
  j["tolerances"] = {{"picard_tol", tol.picard_tol},
                     {"max_picard", tol.max_picard},
                     {"min_window", tol.min_window},
                     {"initial_window", tol.initial_window},
                     {"mesh_points", tol.mesh_points},
                     {"substeps", tol.substeps}};
  j["windows"] = nlohmann::ordered_json::array();
  for (const NlssWindowLog& w : traj.windows) {
    nlohmann::ordered_json jw;
    jw["from"] = w.from;
    jw["to"] = w.to;
    jw["iterations"] = w.iterations;
    jw["diffs"] = w.diffs;
    jw["converged"] = w.converged;
    j["windows"].push_back(jw);
  }
  j["snapshots"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "snapshot_%04zu.op", i);
    save_operator(traj.snapshots[i], (dir / name).string());
    j["snapshots"].push_back(name);
  }
  detail::write_file(dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace tdlab

#endif
