#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cacheopt.hpp"

namespace cacheopt::io {

using json = nlohmann::ordered_json;

/// Instance after ingestion: files sorted by popularity, with the caller's original indices.
struct LoadedInstance {
  Instance instance;
  std::vector<std::size_t> order;  // order[i] = caller's 0-based index of sorted file i
};

/// Raw instance description as given on the command line or in a JSON file.
struct InstanceSpec {
  std::optional<std::size_t> files;
  std::optional<std::size_t> users;
  std::optional<double> cache;
  std::optional<double> zipf;
  std::optional<std::vector<double>> popularity;
  std::optional<std::vector<double>> sizes;
};

inline json parse_json_text(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidInput, std::string(what) + " is not valid JSON: " + e.what());
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InvalidInput, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path.c_str());
}

inline std::vector<double> number_list(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) fail(ErrorKind::InvalidInput, std::string(what) + " must be a nonempty array");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) fail(ErrorKind::InvalidInput, std::string(what) + " must contain only numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

/// Parses a popularity argument: a JSON array or the keyword "step".
inline std::vector<double> parse_popularity_arg(const std::string& arg) {
  if (arg == "step") return step_popularity();
  return number_list(parse_json_text(arg, "--popularity"), "popularity");
}

/// Fills unset fields of `spec` from an instance JSON object.
inline void merge_instance_json(InstanceSpec& spec, const json& j) {
  if (!j.is_object()) fail(ErrorKind::InvalidInput, "instance JSON must be an object");
  auto count = [](const json& v, const char* what) {
    if (!v.is_number_integer() || v.get<long long>() < 1) {
      fail(ErrorKind::InvalidInput, std::string(what) + " must be a positive integer");
    }
    return static_cast<std::size_t>(v.get<long long>());
  };
  auto real = [](const json& v, const char* what) {
    if (!v.is_number()) fail(ErrorKind::InvalidInput, std::string(what) + " must be a number");
    return v.get<double>();
  };
  if (j.contains("users") && !spec.users) spec.users = count(j["users"], "users");
  if (j.contains("files") && !spec.files) spec.files = count(j["files"], "files");
  if (j.contains("cache") && !spec.cache) spec.cache = real(j["cache"], "cache");
  if (j.contains("zipf_theta") && !spec.zipf) spec.zipf = real(j["zipf_theta"], "zipf_theta");
  if (j.contains("popularity") && !spec.popularity) {
    spec.popularity = j["popularity"].is_string() && j["popularity"] == "step"
                          ? step_popularity()
                          : number_list(j["popularity"], "popularity");
  }
  if (j.contains("sizes") && !spec.sizes) spec.sizes = number_list(j["sizes"], "sizes");
}

inline LoadedInstance build_instance(const InstanceSpec& spec) {
  if (!spec.users) fail(ErrorKind::InvalidInput, "number of users is required (--users)");
  if (!spec.cache) fail(ErrorKind::InvalidInput, "cache size is required (--cache)");
  std::vector<double> p;
  if (spec.popularity) {
    if (spec.zipf) fail(ErrorKind::InvalidInput, "give either a popularity vector or a Zipf parameter");
    p = *spec.popularity;
    if (spec.files && *spec.files != p.size()) {
      fail(ErrorKind::InvalidInput, "--files disagrees with the popularity vector length");
    }
  } else if (spec.zipf) {
    if (!spec.files) fail(ErrorKind::InvalidInput, "a Zipf popularity needs the number of files (--files)");
    p = zipf_popularity(*spec.files, *spec.zipf);
  } else if (spec.files) {
    p = zipf_popularity(*spec.files, 0.0);
  } else {
    fail(ErrorKind::InvalidInput, "no popularity given (--popularity, --zipf or --files)");
  }
  for (double x : p) {
    if (!std::isfinite(x) || x < 0.0) fail(ErrorKind::InvalidInput, "popularity entries must be nonnegative");
  }
  SortedFiles sorted = sort_by_popularity(p, spec.sizes.value_or(std::vector<double>{}));
  return {Instance(*spec.users, *spec.cache, sorted.popularity, sorted.file_sizes), sorted.order};
}

/// Rounds to the 6 decimal places used in every report.
inline double round6(double x) {
  const double r = std::round(x * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;
}

inline json placement_json(const Placement& a) {
  json rows = json::array();
  for (const auto& r : a.rows()) {
    json row = json::array();
    for (double x : r) row.push_back(round6(x));
    rows.push_back(row);
  }
  return rows;
}

/// Accepts either a bare [N][K+1] matrix or an object with a "placement" member.
inline Placement placement_from_json(const json& j) {
  const json& m = j.is_object() && j.contains("placement") ? j["placement"] : j;
  if (!m.is_array() || m.empty()) fail(ErrorKind::InvalidInput, "placement must be a nonempty [N][K+1] matrix");
  std::vector<PlacementVector> rows;
  for (const auto& r : m) rows.push_back(number_list(r, "placement row"));
  return Placement(std::move(rows));
}

inline json order_json(const std::vector<std::size_t>& order) {
  json o = json::array();
  for (std::size_t i : order) o.push_back(i + 1);
  return o;
}

/// Parses a comma-separated 1-based demand such as "1,1,2".
inline Demand parse_demand(const std::string& text) {
  Demand d;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    long v = 0;
    try {
      v = std::stol(item, &pos);
    } catch (const std::exception&) {
      fail(ErrorKind::InvalidInput, "demand entry '" + item + "' is not an integer");
    }
    if (pos != item.size() && item.find_first_not_of(" \t", pos) != std::string::npos) {
      fail(ErrorKind::InvalidInput, "demand entry '" + item + "' is not an integer");
    }
    if (v < 1) fail(ErrorKind::InvalidInput, "demand indices are 1-based");
    d.requests.push_back(static_cast<std::size_t>(v - 1));
  }
  if (d.requests.empty()) fail(ErrorKind::InvalidInput, "empty demand");
  return d;
}

inline std::string fixed6(double x) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(6);
  os << round6(x);
  return os.str();
}

}  // namespace cacheopt::io
