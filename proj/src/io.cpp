#include "vie/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace vie::io {

std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError(path.parent_path(), "cannot create directory");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path, "cannot open for writing");
  out << text;
  if (!out.flush()) throw IoError(path, "write failed");
}

std::string read_text(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError(path, "missing file");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end) throw FormatError("not a number: '" + s + "'");
  return v;
}

std::vector<std::vector<std::string>> parse_rows(const std::string& text,
                                                 const std::string& header) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw FormatError("expected header '" + header + "'");
  }
  const auto width = split(header, ',').size();
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (cells.size() != width) throw FormatError("wrong column count in row '" + line + "'");
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

std::string trajectory_csv(const Trajectory& traj) {
  std::string s = "t,x\n";
  for (std::size_t i = 0; i < traj.values.size(); ++i) {
    s += format_double(traj.grid.node(i)) + ',' + format_double(traj.values[i]) + '\n';
  }
  return s;
}

std::string ensemble_csv(const Ensemble& ens) {
  std::string s = "t,mean";
  for (std::size_t p = 0; p < ens.paths.size(); ++p) s += ",p" + std::to_string(p);
  s += '\n';
  for (std::size_t i = 0; i < ens.mean.values.size(); ++i) {
    s += format_double(ens.mean.grid.node(i)) + ',' + format_double(ens.mean.values[i]);
    for (const auto& p : ens.paths) s += ',' + format_double(p.values[i]);
    s += '\n';
  }
  return s;
}

std::string measurements_csv(const MeasurementSet& data) {
  std::string s = "t,u\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    s += format_double(data.times[i]) + ',' + format_double(data.values[i]) + '\n';
  }
  return s;
}

MeasurementSet parse_measurements_csv(const std::string& text) {
  MeasurementSet data;
  for (const auto& row : parse_rows(text, "t,u")) {
    data.times.push_back(parse_double(row[0]));
    data.values.push_back(parse_double(row[1]));
  }
  data.validate();
  return data;
}

std::string loss_history_csv(const FitResult& fit) {
  std::string s = "iter,mse_m,mse_g,mse_o,mse_i,w_g,w_o,total,theta\n";
  for (std::size_t k = 0; k < fit.history.size(); ++k) {
    const auto& h = fit.history[k];
    s += std::to_string(k + 1);
    for (const double v : {h.mse_m, h.mse_g, h.mse_o, h.mse_i, h.weights.w_g, h.weights.w_o,
                           h.total, fit.theta_history[k]}) {
      s += ',' + format_double(v);
    }
    s += '\n';
  }
  return s;
}

std::string band_csv(const ConfidenceBand& band) {
  std::string s = "t,lower,upper,mean\n";
  for (std::size_t k = 0; k < band.lower.size(); ++k) {
    s += format_double(band.grid.node(k)) + ',' + format_double(band.lower[k]) + ',' +
         format_double(band.upper[k]) + ',' + format_double(band.mean[k]) + '\n';
  }
  return s;
}

std::string band_long_csv(const ConfidenceBand& band, std::span<const Trajectory> truth) {
  std::string s = "t,series,value\n";
  const auto nodes = band.grid.nodes();
  auto emit = [&](const std::string& name, auto&& value_at) {
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      s += format_double(nodes[k]) + ',' + name + ',' + format_double(value_at(k)) + '\n';
    }
  };
  emit("lower", [&](std::size_t k) { return band.lower[k]; });
  emit("upper", [&](std::size_t k) { return band.upper[k]; });
  emit("mean", [&](std::size_t k) { return band.mean[k]; });
  for (std::size_t p = 0; p < truth.size(); ++p) {
    emit("truth" + std::to_string(p), [&](std::size_t k) { return interpolate(truth[p], nodes[k]); });
  }
  return s;
}

std::string summary_csv(std::span<const FitSummary> rows) {
  std::string s = "lambda,theta_true,theta_pred,relative_error,abs_error_sum,abs_error_mean\n";
  for (const auto& r : rows) {
    s += format_double(r.lambda) + ',' + format_double(r.theta_true) + ',' +
         format_double(r.theta_pred) + ',' + format_double(r.relative_error) + ',' +
         format_double(r.abs_error_sum) + ',' + format_double(r.abs_error_mean) + '\n';
  }
  return s;
}

std::vector<FitSummary> parse_summary_csv(const std::string& text) {
  std::vector<FitSummary> out;
  for (const auto& row :
       parse_rows(text, "lambda,theta_true,theta_pred,relative_error,abs_error_sum,abs_error_mean")) {
    FitSummary r;
    r.lambda = parse_double(row[0]);
    r.theta_true = parse_double(row[1]);
    r.theta_pred = parse_double(row[2]);
    r.relative_error = parse_double(row[3]);
    r.abs_error_sum = parse_double(row[4]);
    r.abs_error_mean = parse_double(row[5]);
    out.push_back(r);
  }
  return out;
}

nlohmann::json to_json(const MlpConfig& config) {
  return {{"widths", config.widths}, {"init_seed", config.init_seed}};
}

MlpConfig mlp_config_from_json(const nlohmann::json& j) {
  MlpConfig c;
  c.widths = j.at("widths").get<std::vector<std::size_t>>();
  c.init_seed = j.at("init_seed").get<std::uint64_t>();
  c.validate();
  return c;
}

nlohmann::json to_json(const ParameterSet& params) {
  return {{"network", to_json(params.config)}, {"theta", params.theta}, {"flat", params.flatten()}};
}

ParameterSet parameters_from_json(const nlohmann::json& j) {
  const auto config = mlp_config_from_json(j.at("network"));
  const auto flat = j.at("flat").get<std::vector<double>>();
  return ParameterSet::unflatten(flat, config);
}

nlohmann::json to_json(const FitSummary& s) {
  return {{"lambda", s.lambda},
          {"theta_true", s.theta_true},
          {"theta_pred", s.theta_pred},
          {"relative_error", s.relative_error},
          {"abs_error_sum", s.abs_error_sum},
          {"abs_error_mean", s.abs_error_mean}};
}

nlohmann::json to_json(const CoverageReport& report) {
  return {{"trajectories", report.per_trajectory.size()},
          {"per_trajectory", report.per_trajectory},
          {"overall", report.overall},
          {"nodes_checked", report.nodes_checked},
          {"pass", report.pass},
          {"strict_pass", report.strict_pass}};
}

}  // namespace vie::io
