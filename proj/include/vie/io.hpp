#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vie/fit.hpp"
#include "vie/loss.hpp"
#include "vie/network.hpp"
#include "vie/prediction.hpp"
#include "vie/simulator.hpp"

namespace vie::io {

/// File-system failure; the message names the offending path.
class IoError : public std::runtime_error {
 public:
  IoError(const std::filesystem::path& path, const std::string& what)
      : std::runtime_error(what + ": " + path.string()), path_(path) {}
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

/// Malformed file contents.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest text that round-trips the double.
std::string format_double(double v);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// `t,x`
std::string trajectory_csv(const Trajectory& traj);
/// `t,mean,p0,p1,...`
std::string ensemble_csv(const Ensemble& ens);
/// `t,u`
std::string measurements_csv(const MeasurementSet& data);
MeasurementSet parse_measurements_csv(const std::string& text);
/// `iter,mse_m,mse_g,mse_o,mse_i,w_g,w_o,total,theta`
std::string loss_history_csv(const FitResult& fit);
/// `t,lower,upper,mean`
std::string band_csv(const ConfidenceBand& band);
/// Long format `t,series,value` with series lower, upper, mean, truth<k>.
std::string band_long_csv(const ConfidenceBand& band, std::span<const Trajectory> truth);
/// `lambda,theta_true,theta_pred,relative_error,abs_error_sum,abs_error_mean`
std::string summary_csv(std::span<const FitSummary> rows);
std::vector<FitSummary> parse_summary_csv(const std::string& text);

nlohmann::json to_json(const MlpConfig& config);
MlpConfig mlp_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ParameterSet& params);
ParameterSet parameters_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FitSummary& s);
nlohmann::json to_json(const CoverageReport& report);

}  // namespace vie::io
