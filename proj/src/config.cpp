#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "taillight/pipeline.hpp"

namespace taillight::pipeline {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ConfigError(where + ": expected a boolean, got '" + v + "'");
}

double parse_real(const std::string& v, const std::string& where) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return out;
  } catch (...) {
    throw ConfigError(where + ": expected a number, got '" + v + "'");
  }
}

long long parse_int(const std::string& v, const std::string& where) {
  try {
    std::size_t used = 0;
    const long long out = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return out;
  } catch (...) {
    throw ConfigError(where + ": expected an integer, got '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& v, const std::string& where) {
  try {
    std::size_t used = 0;
    const auto out = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return out;
  } catch (...) {
    throw ConfigError(where + ": expected an unsigned integer, got '" + v +
                      "'");
  }
}

using Setter = std::function<void(PipelineConfig&, const std::string&,
                                  const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"dataset.images",
       [](auto& c, const auto& v, const auto&) { c.dataset_images = v; }},
      {"dataset.labels",
       [](auto& c, const auto& v, const auto&) { c.dataset_labels = v; }},
      {"dataset.manifest",
       [](auto& c, const auto& v, const auto&) { c.dataset_manifest = v; }},
      {"toy.enabled",
       [](auto& c, const auto& v, const auto& w) {
         c.toy_enabled = parse_bool(v, w);
       }},
      {"toy.per_class",
       [](auto& c, const auto& v, const auto& w) {
         c.toy_per_class = static_cast<int>(parse_int(v, w));
       }},
      {"toy.canvas",
       [](auto& c, const auto& v, const auto& w) {
         c.toy_canvas = static_cast<int>(parse_int(v, w));
       }},
      {"toy.jitter",
       [](auto& c, const auto& v, const auto& w) {
         c.toy_jitter = parse_real(v, w);
       }},
      {"toy.seed",
       [](auto& c, const auto& v, const auto& w) {
         c.toy_seed = parse_u64(v, w);
       }},
      {"split.train",
       [](auto& c, const auto& v, const auto& w) {
         c.split_ratios.train = parse_real(v, w);
       }},
      {"split.validation",
       [](auto& c, const auto& v, const auto& w) {
         c.split_ratios.validation = parse_real(v, w);
       }},
      {"split.test",
       [](auto& c, const auto& v, const auto& w) {
         c.split_ratios.test = parse_real(v, w);
       }},
      {"split.seed",
       [](auto& c, const auto& v, const auto& w) {
         c.split_seed = parse_u64(v, w);
       }},
      {"night.enabled",
       [](auto& c, const auto& v, const auto& w) {
         c.night_enabled = parse_bool(v, w);
       }},
      {"night.params",
       [](auto& c, const auto& v, const auto&) { c.night_params_file = v; }},
      {"corrupt.enabled",
       [](auto& c, const auto& v, const auto& w) {
         c.corrupt_enabled = parse_bool(v, w);
       }},
      {"corrupt.kinds",
       [](auto& c, const auto& v, const auto&) { c.corrupt_kinds = v; }},
      {"corrupt.severities",
       [](auto& c, const auto& v, const auto&) { c.corrupt_severities = v; }},
      {"corrupt.seed",
       [](auto& c, const auto& v, const auto& w) {
         c.corrupt_seed = parse_u64(v, w);
       }},
      {"attention.conspicuity",
       [](auto& c, const auto& v, const auto& w) {
         c.conspicuity_enabled = parse_bool(v, w);
       }},
      {"attention.alpha",
       [](auto& c, const auto& v, const auto& w) {
         c.conspicuity_alpha = parse_real(v, w);
       }},
      {"attention.maskfuse",
       [](auto& c, const auto& v, const auto& w) {
         c.maskfuse_enabled = parse_bool(v, w);
       }},
      {"attention.omega",
       [](auto& c, const auto& v, const auto& w) {
         c.mask_omega = parse_real(v, w);
       }},
      {"attention.omega_prime",
       [](auto& c, const auto& v, const auto& w) {
         c.mask_omega_prime = parse_real(v, w);
       }},
      {"attention.w_high",
       [](auto& c, const auto& v, const auto& w) {
         c.mask_w_high = parse_real(v, w);
       }},
      {"attention.geometry",
       [](auto& c, const auto& v, const auto&) { c.mask_geometry_file = v; }},
      {"features.tap",
       [](auto& c, const auto& v, const auto&) { c.feature_tap = v; }},
      {"features.weights",
       [](auto& c, const auto& v, const auto&) { c.feature_weights = v; }},
      {"pca.enabled",
       [](auto& c, const auto& v, const auto& w) {
         c.pca_enabled = parse_bool(v, w);
       }},
      {"pca.k",
       [](auto& c, const auto& v, const auto& w) {
         c.pca_k = static_cast<int>(parse_int(v, w));
       }},
      {"pca.fit_on",
       [](auto& c, const auto& v, const auto&) { c.pca_fit_on = v; }},
      {"svm.c", [](auto& c, const auto& v, const auto&) { c.svm_c = v; }},
      {"svm.epochs",
       [](auto& c, const auto& v, const auto& w) {
         c.svm_epochs = static_cast<int>(parse_int(v, w));
       }},
      {"svm.seed",
       [](auto& c, const auto& v, const auto& w) {
         c.svm_seed = parse_u64(v, w);
       }},
      {"svm.margin_scale",
       [](auto& c, const auto& v, const auto& w) {
         c.svm_margin_scale = parse_real(v, w);
       }},
      {"output.dir",
       [](auto& c, const auto& v, const auto&) { c.output_dir = v; }},
      {"output.export_test",
       [](auto& c, const auto& v, const auto& w) {
         c.export_test = parse_bool(v, w);
       }},
  };
  return table;
}

}  // namespace

PipelineConfig parse_config_text(const std::string& text,
                                 const std::string& where) {
  PipelineConfig config;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string at = where + ":" + std::to_string(line_no);
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(at + ": expected 'key = value'");
    const std::string key =
        (section.empty() ? "" : section + ".") + trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end())
      throw ConfigError(at + ": unknown config key '" + key + "'");
    it->second(config, value, at);
  }
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.string());
}

std::string format_config(const PipelineConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "[dataset]\n";
  out << "images = " << c.dataset_images << "\n";
  out << "labels = " << c.dataset_labels << "\n";
  out << "manifest = " << c.dataset_manifest << "\n";
  out << "[toy]\n";
  out << "enabled = " << (c.toy_enabled ? "true" : "false") << "\n";
  out << "per_class = " << c.toy_per_class << "\n";
  out << "canvas = " << c.toy_canvas << "\n";
  out << "jitter = " << c.toy_jitter << "\n";
  out << "seed = " << c.toy_seed << "\n";
  out << "[split]\n";
  out << "train = " << c.split_ratios.train << "\n";
  out << "validation = " << c.split_ratios.validation << "\n";
  out << "test = " << c.split_ratios.test << "\n";
  out << "seed = " << c.split_seed << "\n";
  out << "[night]\n";
  out << "enabled = " << (c.night_enabled ? "true" : "false") << "\n";
  out << "params = " << c.night_params_file << "\n";
  out << "[corrupt]\n";
  out << "enabled = " << (c.corrupt_enabled ? "true" : "false") << "\n";
  out << "kinds = " << c.corrupt_kinds << "\n";
  out << "severities = " << c.corrupt_severities << "\n";
  out << "seed = " << c.corrupt_seed << "\n";
  out << "[attention]\n";
  out << "conspicuity = " << (c.conspicuity_enabled ? "true" : "false") << "\n";
  out << "alpha = " << c.conspicuity_alpha << "\n";
  out << "maskfuse = " << (c.maskfuse_enabled ? "true" : "false") << "\n";
  out << "omega = " << c.mask_omega << "\n";
  out << "omega_prime = " << c.mask_omega_prime << "\n";
  out << "w_high = " << c.mask_w_high << "\n";
  out << "geometry = " << c.mask_geometry_file << "\n";
  out << "[features]\n";
  out << "tap = " << c.feature_tap << "\n";
  out << "weights = " << c.feature_weights << "\n";
  out << "[pca]\n";
  out << "enabled = " << (c.pca_enabled ? "true" : "false") << "\n";
  out << "k = " << c.pca_k << "\n";
  out << "fit_on = " << c.pca_fit_on << "\n";
  out << "[svm]\n";
  out << "c = " << c.svm_c << "\n";
  out << "epochs = " << c.svm_epochs << "\n";
  out << "seed = " << c.svm_seed << "\n";
  out << "margin_scale = " << c.svm_margin_scale << "\n";
  out << "[output]\n";
  out << "dir = " << c.output_dir << "\n";
  out << "export_test = " << (c.export_test ? "true" : "false") << "\n";
  return out.str();
}

void validate_config(const PipelineConfig& c) {
  namespace fs = std::filesystem;
  if (!c.toy_enabled && (c.dataset_images.empty() || c.dataset_labels.empty()))
    throw ConfigError("config: dataset.images/labels required unless the toy "
                      "generator is enabled");
  // Referenced paths must exist before any stage starts.
  auto require_dir = [](const std::string& path, const char* key) {
    if (!path.empty() && !fs::is_directory(path))
      throw ConfigError(std::string("config: ") + key + " is not a directory: " +
                        path);
  };
  auto require_file = [](const std::string& path, const char* key) {
    if (!path.empty() && !fs::is_regular_file(path))
      throw ConfigError(std::string("config: ") + key + " does not exist: " +
                        path);
  };
  if (!c.toy_enabled) {
    require_dir(c.dataset_images, "dataset.images");
    require_dir(c.dataset_labels, "dataset.labels");
  }
  require_file(c.dataset_manifest, "dataset.manifest");
  require_file(c.night_params_file, "night.params");
  require_file(c.mask_geometry_file, "attention.geometry");
  if (c.feature_weights.rfind("random:", 0) != 0)
    require_file(c.feature_weights, "features.weights");
  if (c.toy_enabled && c.toy_per_class < 1)
    throw ConfigError("config: toy.per_class must be at least 1");
  if (c.toy_enabled && c.toy_canvas < 16)
    throw ConfigError("config: toy.canvas must be at least 16");
  const double ratio_sum = c.split_ratios.train + c.split_ratios.validation +
                           c.split_ratios.test;
  if (std::abs(ratio_sum - 1.0) > 1e-9)
    throw ConfigError("config: split ratios must sum to 1");
  if (c.feature_tap != "fc1" && c.feature_tap != "fc2")
    throw ConfigError("config: features.tap must be fc1 or fc2");
  if (c.pca_fit_on != "train" && c.pca_fit_on != "all")
    throw ConfigError("config: pca.fit_on must be train or all");
  if (c.pca_enabled && c.pca_k < 1)
    throw ConfigError("config: pca.k must be positive");
  if (c.svm_epochs < 1) throw ConfigError("config: svm.epochs must be >= 1");
  if (c.svm_margin_scale <= 0)
    throw ConfigError("config: svm.margin_scale must be positive");
  if (c.svm_c != "auto") {
    try {
      if (std::stod(c.svm_c) <= 0.0) throw std::invalid_argument("");
    } catch (...) {
      throw ConfigError("config: svm.c must be 'auto' or a positive number");
    }
  }
  if (c.conspicuity_alpha < 0.0 || c.conspicuity_alpha > 1.0)
    throw ConfigError("config: attention.alpha outside [0,1]");
  if (!(c.mask_omega < c.mask_omega_prime &&
        c.mask_omega_prime < c.mask_w_high))
    throw ConfigError("config: mask weights must satisfy omega < omega' < "
                      "w_high");
  if (c.output_dir.empty()) throw ConfigError("config: output.dir is empty");

  // Training-stage corruption kinds must come from the train partition.
  if (c.corrupt_enabled && c.corrupt_kinds != "train") {
    if (c.corrupt_kinds == "test")
      throw ConfigError("config: corrupt.kinds=test names held-out benchmark "
                        "masks; training corruption must use the train "
                        "partition");
    std::istringstream kinds(c.corrupt_kinds);
    std::string name;
    while (std::getline(kinds, name, ',')) {
      name = trim(name);
      if (name.empty()) continue;
      corrupt::Kind kind;
      try {
        kind = corrupt::kind_from_name(name);
      } catch (const DataError& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
      if (corrupt::kind_partition(kind) != corrupt::Partition::train)
        throw ConfigError("config: corruption kind '" + name +
                          "' belongs to the held-out test partition and "
                          "cannot augment training data");
    }
  }
  if (c.corrupt_severities != "all") {
    std::istringstream sev(c.corrupt_severities);
    std::string name;
    while (std::getline(sev, name, ',')) {
      name = trim(name);
      if (!name.empty()) corrupt::severity_from_name(name);  // validates
    }
  }
}

}  // namespace taillight::pipeline
