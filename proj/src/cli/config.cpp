// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "diffpir/error.hpp"

namespace diffpir::cli {
namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::kInvalidConfig, what); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const std::string t = trim(v);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    bad("'" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const std::string t = trim(v);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    bad("'" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  try {
    std::size_t used = 0;
    const double out = std::stod(t, &used);
    if (used == t.size()) return out;
  } catch (const std::exception&) {
  }
  bad("'" + key + "' expects a number, got '" + v + "'");
}

bool parse_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  bad("'" + key + "' expects a boolean, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  if (trim(v).empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

}  // namespace

const std::vector<KeySpec>& key_specs() {
  using T = ValueType;
  static const std::vector<KeySpec> specs = {
      {"task", T::kString, "deblur-gauss",
       "deblur-gauss | deblur-motion | inpaint-box | inpaint-random | sr"},
      {"sampler", T::kString, "diffpir", "diffpir | ddpm | ddim | dps-y0 | dps-yt"},
      {"steps", T::kInt, "100", "sampling steps (NFE for diffpir)"},
      {"t_start", T::kInt, "1000", "starting timestep"},
      {"lambda", T::kDouble, "1.0", "guidance weight"},
      {"zeta", T::kDouble, "0.3", "fresh-noise fraction in [0,1]"},
      {"eta", T::kDouble, "0.0", "DDIM stochasticity in [0,1]"},
      {"sigma_n", T::kDouble, "0.05", "measurement noise std"},
      {"sigma_floor", T::kDouble, "0.001", "lower clamp on sigma_n inside rho"},
      {"seed", T::kUnsigned, "0", "random seed"},
      {"n_train", T::kInt, "1000", "schedule length N"},
      {"beta_start", T::kDouble, "0.0001", "first beta of the linear schedule"},
      {"beta_end", T::kDouble, "0.02", "last beta of the linear schedule"},
      {"kernel_size", T::kInt, "61", "blur kernel size"},
      {"kernel_std", T::kDouble, "3.0", "Gaussian blur std"},
      {"motion_intensity", T::kDouble, "0.5", "motion kernel intensity in [0,1]"},
      {"box", T::kInt, "128", "box mask side"},
      {"box_top", T::kInt, "-1", "box mask top row (-1 centres it)"},
      {"box_left", T::kInt, "-1", "box mask left column (-1 centres it)"},
      {"drop_ratio", T::kDouble, "0.5", "random mask drop fraction"},
      {"sf", T::kInt, "4", "super-resolution scale factor"},
      {"sr_solver", T::kString, "closed", "closed | ibp"},
      {"ibp_gamma", T::kDouble, "1.0", "back-projection step"},
      {"ibp_iters", T::kInt, "5", "back-projection iterations per step"},
      {"initializer", T::kString, "pseudo-inverse", "pseudo-inverse | zeros (t_start < N)"},
      {"denoiser", T::kString, "gaussian", "gaussian | gmm | oracle | extern:<endpoint>"},
      {"prior_mean", T::kDouble, "0.5", "Gaussian prior mean"},
      {"prior_var", T::kDouble, "0.05", "Gaussian prior variance"},
      {"gmm_weights", T::kString, "0.5,0.5", "GMM weights"},
      {"gmm_means", T::kString, "0.3,0.7", "GMM scalar means"},
      {"gmm_vars", T::kString, "0.02,0.02", "GMM variances"},
      {"timeout_ms", T::kInt, "30000", "bridge request deadline"},
      {"fd_step", T::kDouble, "0.001", "finite-difference probe size for dps-y0"},
      {"in", T::kString, "", "input image (png or f64)"},
      {"gt", T::kString, "", "ground-truth image"},
      {"out", T::kString, "", "output path"},
      {"report", T::kString, "", "JSON report path"},
      {"kernel", T::kString, "", "kernel file (k2d or png)"},
      {"mask", T::kString, "", "mask png"},
      {"dump_trajectory", T::kString, "", "directory for per-step frames"},
      {"preset", T::kString, "", "hyperparameter preset name"},
      {"metrics", T::kBool, "true", "compute PSNR when a ground truth is given"},
      {"workers", T::kInt, "1", "bench worker threads"},
      {"runs", T::kInt, "20", "bench runs per cell on the toy"},
      {"toy_task", T::kString, "noisy-sr", "bench toy task: deblur | noisy-sr"},
  };
  return specs;
}

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

Settings::Settings() {
  for (const auto& s : key_specs()) values_[s.key] = s.default_value;
}

const KeySpec& Settings::spec(const std::string& key) const {
  const std::string k = normalize_key(key);
  for (const auto& s : key_specs()) {
    if (k == s.key) return s;
  }
  bad("unknown configuration key '" + key + "'");
}

void Settings::set(const std::string& key, const std::string& value) {
  const KeySpec& s = spec(key);
  switch (s.type) {
    case ValueType::kInt:
      if (!trim(value).empty() && value.find(',') == std::string::npos) parse_int(s.key, value);
      break;
    case ValueType::kUnsigned: parse_unsigned(s.key, value); break;
    case ValueType::kDouble:
      if (!trim(value).empty() && value.find(',') == std::string::npos) {
        parse_double(s.key, value);
      }
      break;
    case ValueType::kBool: parse_bool(s.key, value); break;
    case ValueType::kString: break;
  }
  values_[s.key] = value;
  explicit_.insert(s.key);
}

bool Settings::explicitly_set(const std::string& key) const {
  return explicit_.count(spec(key).key) != 0;
}

void Settings::reset(const std::string& key) {
  const KeySpec& s = spec(key);
  values_[s.key] = s.default_value;
  explicit_.erase(s.key);
}

const std::string& Settings::str(const std::string& key) const {
  return values_.at(spec(key).key);
}

long long Settings::integer(const std::string& key) const { return parse_int(key, str(key)); }
double Settings::real(const std::string& key) const { return parse_double(key, str(key)); }
bool Settings::boolean(const std::string& key) const { return parse_bool(key, str(key)); }

std::uint64_t Settings::seed() const {
  return parse_unsigned("seed", str("seed"));
}

std::vector<double> Settings::real_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(str(key))) out.push_back(parse_double(key, item));
  return out;
}

std::vector<long long> Settings::integer_list(const std::string& key) const {
  std::vector<long long> out;
  for (const auto& item : split_list(str(key))) out.push_back(parse_int(key, item));
  return out;
}

nlohmann::json Settings::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& s : key_specs()) {
    const std::string& v = values_.at(s.key);
    const bool scalar = !trim(v).empty() && v.find(',') == std::string::npos;
    switch (s.type) {
      case ValueType::kInt:
        j[s.key] = scalar ? nlohmann::json(parse_int(s.key, v)) : nlohmann::json(v);
        break;
      case ValueType::kUnsigned: j[s.key] = parse_unsigned(s.key, v); break;
      case ValueType::kDouble:
        j[s.key] = scalar ? nlohmann::json(parse_double(s.key, v)) : nlohmann::json(v);
        break;
      case ValueType::kBool: j[s.key] = parse_bool(s.key, v); break;
      case ValueType::kString: j[s.key] = v; break;
    }
  }
  return j;
}

void load_config_text(const std::string& text, Settings& settings) {
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) bad("config line " + std::to_string(lineno) + ": expected key = value");
    settings.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void load_config_file(const std::string& path, Settings& settings) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos || text[first] != '{') {
    load_config_text(text, settings);
    return;
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    bad("config " + path + ": " + e.what());
  }
  if (!j.is_object()) bad("config " + path + " must be a JSON object");
  if (j.contains("config") && j["config"].is_object()) j = j["config"];
  for (const auto& [key, value] : j.items()) {
    if (value.is_string()) {
      settings.set(key, value.get<std::string>());
    } else if (value.is_boolean()) {
      settings.set(key, value.get<bool>() ? "true" : "false");
    } else if (value.is_number_unsigned()) {
      settings.set(key, std::to_string(value.get<std::uint64_t>()));
    } else if (value.is_number_integer()) {
      settings.set(key, std::to_string(value.get<long long>()));
    } else if (value.is_number()) {
      std::ostringstream os;
      os.precision(17);
      os << value.get<double>();
      settings.set(key, os.str());
    } else {
      bad("config key '" + key + "' must be a scalar");
    }
  }
}

}  // namespace diffpir::cli
