// Run outputs: a frozen-column CSV table, a JSON summary carrying the same
// rows, and the run manifest that makes byte-identical replay possible.
#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdelab/config.hpp"

namespace sdelab {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Tabular result with a frozen column order. Floats are printed with 17
// significant digits so the CSV round-trips bit-exactly.
class RunTable {
 public:
  explicit RunTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add_row(std::vector<nlohmann::json> cells) {
    if (cells.size() != columns_.size())
      throw ConfigInvalid("RunTable: row width does not match the column set");
    rows_.push_back(std::move(cells));
  }

  std::string to_csv() const {
    std::string out;
    for (size_t c = 0; c < columns_.size(); ++c) {
      if (c) out.push_back(',');
      out += columns_[c];
    }
    out.push_back('\n');
    for (const auto& row : rows_) {
      for (size_t c = 0; c < row.size(); ++c) {
        if (c) out.push_back(',');
        const auto& cell = row[c];
        if (cell.is_number_float())
          out += format_double(cell.get<double>());
        else if (cell.is_string())
          out += cell.get<std::string>();
        else
          out += cell.dump();
      }
      out.push_back('\n');
    }
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["columns"] = columns_;
    j["rows"] = rows_;
    return j;
  }

  size_t row_count() const { return rows_.size(); }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<nlohmann::json>>& rows() const { return rows_; }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<nlohmann::json>> rows_;
};

struct RunManifest {
  std::string subcommand;
  std::string config_text;  // verbatim input; replay re-runs exactly this
  uint64_t master_seed = 0;
  std::string tool_version;
  std::string build_id;
  std::vector<std::pair<std::string, double>> timings;
  std::vector<std::string> warnings;
  std::vector<std::string> outputs;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["subcommand"] = subcommand;
    j["config_text"] = config_text;
    j["master_seed"] = master_seed;
    j["tool_version"] = tool_version;
    j["build_id"] = build_id;
    nlohmann::json t = nlohmann::json::object();
    for (const auto& [k, v] : timings) t[k] = v;
    j["timings"] = t;
    j["warnings"] = warnings;
    j["outputs"] = outputs;
    return j;
  }
};

class StageTimer {
 public:
  explicit StageTimer(RunManifest& manifest) : manifest_(manifest) {}

  template <typename F>
  auto stage(const std::string& name, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      record(name, start);
    } else {
      auto result = f();
      record(name, start);
      return result;
    }
  }

 private:
  void record(const std::string& name, std::chrono::steady_clock::time_point start) {
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest_.timings.emplace_back(name, sec);
  }
  RunManifest& manifest_;
};

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigInvalid("cannot open output file '" + path + "'");
  out << content;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigInvalid("cannot read file '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace sdelab
