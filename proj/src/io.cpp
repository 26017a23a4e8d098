#include "ssid/io.hpp"

#include <charconv>
#include <cstdio>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ssid/errors.hpp"

namespace ssid {

namespace {

using nlohmann::json;

json row_major(const Matrix& m) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) arr.push_back(m(i, j));
  }
  return arr;
}

int read_count(const json& j, const char* key) {
  if (!j.contains(key)) throw FormatError(std::string("model: missing field '") + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw FormatError(std::string("model: field '") + key +
                      "' must be a non-negative integer");
  }
  return v.get<int>();
}

Matrix read_matrix(const json& j, const char* key, int rows, int cols) {
  if (!j.contains(key)) throw FormatError(std::string("model: missing field '") + key + "'");
  const auto& v = j.at(key);
  if (!v.is_array()) throw FormatError(std::string("model: field '") + key + "' must be an array");
  if (v.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw FormatError(std::string("model: field '") + key + "' has " +
                      std::to_string(v.size()) + " entries, expected " +
                      std::to_string(rows * cols));
  }
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int c = 0; c < cols; ++c) {
      const auto& e = v[static_cast<std::size_t>(i * cols + c)];
      if (!e.is_number()) {
        throw FormatError(std::string("model: field '") + key + "' entry " +
                          std::to_string(i * cols + c) + " is not a number");
      }
      m(i, c) = e.get<double>();
    }
  }
  return m;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, std::size_t line, const std::string& column) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || s.empty()) {
    throw FormatError("line " + std::to_string(line) + ", column '" + column +
                      "': not a number ('" + s + "')");
  }
  return v;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable read_table(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    if (table.header.empty()) {
      table.header = split_csv(line);
      continue;
    }
    const auto fields = split_csv(line);
    if (fields.size() != table.header.size()) {
      throw FormatError("line " + std::to_string(lineno) + ": expected " +
                        std::to_string(table.header.size()) + " fields, found " +
                        std::to_string(fields.size()));
    }
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      row[c] = parse_number(fields[c], lineno, table.header[c]);
    }
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw FormatError("empty CSV file");
  return table;
}

std::optional<double> sidecar_ts(const std::string& path) {
  const std::string side = path + ".json";
  if (!std::filesystem::exists(side)) return std::nullopt;
  std::ifstream f(side);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw FormatError(side + ": " + e.what());
  }
  if (!j.contains("ts") || !j.at("ts").is_number()) {
    throw FormatError(side + ": missing numeric field 'ts'");
  }
  return j.at("ts").get<double>();
}

std::ifstream open_input(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("cannot open '" + path + "'");
  return f;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw FormatError("cannot write '" + path + "'");
  return f;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

nlohmann::json model_to_json(const StateSpaceModel& model) {
  json j;
  j["n"] = model.n();
  j["nu"] = model.nu();
  j["ny"] = model.ny();
  j["ts"] = model.domain.ts();
  j["A"] = row_major(model.A);
  j["B"] = row_major(model.B);
  j["C"] = row_major(model.C);
  j["D"] = row_major(model.D);
  return j;
}

StateSpaceModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("model: expected a JSON object");
  const int n = read_count(j, "n");
  const int nu = read_count(j, "nu");
  const int ny = read_count(j, "ny");
  if (!j.contains("ts") || !j.at("ts").is_number()) {
    throw FormatError("model: missing numeric field 'ts'");
  }
  const double ts = j.at("ts").get<double>();
  if (!(ts >= 0.0) || !std::isfinite(ts)) {
    throw FormatError("model: field 'ts' must be >= 0");
  }
  const Domain dom = ts > 0.0 ? Domain::discrete(ts) : Domain::continuous();
  return StateSpaceModel(read_matrix(j, "A", n, n), read_matrix(j, "B", n, nu),
                         read_matrix(j, "C", ny, n), read_matrix(j, "D", ny, nu),
                         dom);
}

StateSpaceModel read_model(const std::string& path) {
  auto f = open_input(path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  return model_from_json(j);
}

void write_model(const std::string& path, const StateSpaceModel& model) {
  auto f = open_output(path);
  f << model_to_json(model).dump(2) << '\n';
}

TimeSeriesData parse_time_series_csv(std::istream& in, std::optional<double> ts) {
  const CsvTable table = read_table(in);
  const auto& h = table.header;
  if (h.empty() || h[0] != "t") throw FormatError("time series: first column must be 't'");
  int nu = 0, ny = 0;
  for (std::size_t c = 1; c < h.size(); ++c) {
    if (h[c] == "u" + std::to_string(nu + 1) && ny == 0) {
      ++nu;
    } else if (h[c] == "y" + std::to_string(ny + 1)) {
      ++ny;
    } else {
      throw FormatError("time series: unexpected column '" + h[c] + "'");
    }
  }
  if (ny == 0) throw FormatError("time series: no output columns 'y1..'");
  const auto N = static_cast<Eigen::Index>(table.rows.size());
  if (N == 0) throw FormatError("time series: no data rows");
  Matrix u(N, nu), y(N, ny);
  for (Eigen::Index t = 0; t < N; ++t) {
    const auto& r = table.rows[static_cast<std::size_t>(t)];
    for (int j = 0; j < nu; ++j) u(t, j) = r[1 + j];
    for (int i = 0; i < ny; ++i) y(t, i) = r[1 + nu + i];
  }
  double sample = 0.0;
  if (ts) {
    sample = *ts;
  } else if (N >= 2) {
    sample = table.rows[1][0] - table.rows[0][0];
  }
  if (!(sample > 0.0)) {
    throw FormatError("time series: field 'ts' missing or not positive");
  }
  return TimeSeriesData(std::move(u), std::move(y), sample);
}

TimeSeriesData read_time_series_csv(const std::string& path, std::optional<double> ts) {
  if (!ts) ts = sidecar_ts(path);
  auto f = open_input(path);
  try {
    return parse_time_series_csv(f, ts);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_time_series_csv(std::ostream& out, const TimeSeriesData& data) {
  out << 't';
  for (int j = 0; j < data.nu(); ++j) out << ",u" << j + 1;
  for (int i = 0; i < data.ny(); ++i) out << ",y" << i + 1;
  out << '\n';
  for (int t = 0; t < data.N(); ++t) {
    out << format_double(data.ts * t);
    for (int j = 0; j < data.nu(); ++j) out << ',' << format_double(data.u(t, j));
    for (int i = 0; i < data.ny(); ++i) out << ',' << format_double(data.y(t, i));
    out << '\n';
  }
}

void write_time_series_csv(const std::string& path, const TimeSeriesData& data) {
  auto f = open_output(path);
  write_time_series_csv(f, data);
}

FrequencyData parse_frf_csv(std::istream& in, const Domain& domain) {
  const CsvTable table = read_table(in);
  const auto& h = table.header;
  if (h.empty() || h[0] != "omega") throw FormatError("FRF: first column must be 'omega'");
  if ((h.size() - 1) % 2 != 0 || h.size() < 3) {
    throw FormatError("FRF: expected pairs of reG_i_j,imG_i_j columns");
  }
  // Dimensions from the last column name.
  int ny = 0, nu = 0;
  if (std::sscanf(h.back().c_str(), "imG_%d_%d", &ny, &nu) != 2 || ny < 1 || nu < 1) {
    throw FormatError("FRF: cannot read dimensions from column '" + h.back() + "'");
  }
  if (h.size() != 1 + 2 * static_cast<std::size_t>(ny * nu)) {
    throw FormatError("FRF: column count does not match " + std::to_string(ny) +
                      " x " + std::to_string(nu));
  }
  std::size_t c = 1;
  for (int i = 1; i <= ny; ++i) {
    for (int j = 1; j <= nu; ++j) {
      const std::string tag = std::to_string(i) + "_" + std::to_string(j);
      if (h[c] != "reG_" + tag) throw FormatError("FRF: expected column 'reG_" + tag + "', found '" + h[c] + "'");
      if (h[c + 1] != "imG_" + tag) throw FormatError("FRF: expected column 'imG_" + tag + "', found '" + h[c + 1] + "'");
      c += 2;
    }
  }
  const auto K = static_cast<Eigen::Index>(table.rows.size());
  if (K == 0) throw FormatError("FRF: no data rows");
  Vector omega(K);
  std::vector<ComplexMatrix> G(static_cast<std::size_t>(K), ComplexMatrix(ny, nu));
  for (Eigen::Index k = 0; k < K; ++k) {
    const auto& r = table.rows[static_cast<std::size_t>(k)];
    omega[k] = r[0];
    std::size_t col = 1;
    for (int i = 0; i < ny; ++i) {
      for (int j = 0; j < nu; ++j) {
        G[static_cast<std::size_t>(k)](i, j) = {r[col], r[col + 1]};
        col += 2;
      }
    }
  }
  try {
    return FrequencyData(std::move(omega), std::move(G), domain);
  } catch (const DimensionError& e) {
    throw FormatError(std::string("FRF: column 'omega': ") + e.what());
  }
}

FrequencyData read_frf_csv(const std::string& path, std::optional<double> ts) {
  if (!ts) ts = sidecar_ts(path);
  const double value = ts.value_or(0.0);
  if (!(value >= 0.0)) throw FormatError(path + ": field 'ts' must be >= 0");
  const Domain dom = value > 0.0 ? Domain::discrete(value) : Domain::continuous();
  auto f = open_input(path);
  try {
    return parse_frf_csv(f, dom);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_frf_csv(std::ostream& out, const FrequencyData& fd) {
  out << "omega";
  for (int i = 1; i <= fd.ny(); ++i) {
    for (int j = 1; j <= fd.nu(); ++j) out << ",reG_" << i << '_' << j << ",imG_" << i << '_' << j;
  }
  out << '\n';
  for (int k = 0; k < fd.K(); ++k) {
    out << format_double(fd.omega[k]);
    const auto& g = fd.G[static_cast<std::size_t>(k)];
    for (int i = 0; i < fd.ny(); ++i) {
      for (int j = 0; j < fd.nu(); ++j) {
        out << ',' << format_double(g(i, j).real()) << ',' << format_double(g(i, j).imag());
      }
    }
    out << '\n';
  }
}

void write_frf_csv(const std::string& path, const FrequencyData& fd) {
  auto f = open_output(path);
  write_frf_csv(f, fd);
}

nlohmann::json report_to_json(const RefinementReport& report) {
  json j;
  j["method"] = to_string(report.method);
  j["converged"] = report.converged;
  j["sweeps"] = report.sweeps;
  j["wall_time_s"] = report.wall_time_s;
  j["cost_trajectory"] = report.cost_trajectory;
  j["sweep_costs"] = report.sweep_costs;
  j["rank_deficient_steps"] = report.rank_deficient_steps;
  return j;
}

}  // namespace ssid
