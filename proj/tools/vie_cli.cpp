// Command-line front end: simulate -> fit -> predict -> report.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vie/experiment.hpp"
#include "vie/io.hpp"

#ifndef VIE_VERSION
#define VIE_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string case_name;
  std::vector<double> lambdas;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON experiment config");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--case", f.case_name, "case1 | case2 | case3");
  cmd->add_option("--lambda", f.lambdas, "noise levels, comma separated")->delimiter(',');
}

vie::ExperimentConfig load_config(const CommonFlags& f) {
  json j = json::object();
  if (!f.config_path.empty()) {
    const auto text = vie::io::read_text(f.config_path);
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw vie::ConfigError(f.config_path + ": " + e.what());
    }
  }
  if (!f.case_name.empty()) {
    if (j.contains("case") && j["case"] != f.case_name) {
      // Case-specific defaults (horizon, lambdas) must follow the override.
      j.erase("lambdas");
    }
    j["case"] = f.case_name;
  }
  if (f.seed) j["seed"] = *f.seed;
  if (!f.out.empty()) j["out"] = f.out;
  if (!f.lambdas.empty()) j["lambdas"] = f.lambdas;
  return vie::config_from_json(j);
}

fs::path case_dir(const vie::ExperimentConfig& c) { return c.out / vie::to_string(c.case_name); }

fs::path lambda_path(const vie::ExperimentConfig& c, double lambda) {
  return case_dir(c) / vie::lambda_dir(lambda);
}

/// Read-modify-write of a manifest.json (per case, or at the output root for
/// the report stage).
class Manifest {
 public:
  Manifest(const vie::ExperimentConfig& c, fs::path path) : path_(std::move(path)) {
    if (fs::exists(path_)) {
      try {
        data_ = json::parse(vie::io::read_text(path_));
      } catch (const json::parse_error&) {
        data_ = json::object();
      }
    }
    data_["version"] = VIE_VERSION;
    data_["config"] = vie::to_json(c);
    data_["seeds"] = {{"master", c.seed},
                      {"fit_ensemble", c.seed + vie::kFitStream},
                      {"network_init", c.seed},
                      {"prediction", c.seed + vie::kPredictStream},
                      {"truth", c.seed + vie::kTruthStream}};
  }

  void record(const std::string& stage, const std::vector<fs::path>& files, double seconds) {
    json list = json::array();
    for (const auto& f : files) list.push_back(f.string());
    data_["stages"][stage] = {{"files", list}, {"wall_seconds", seconds}};
    vie::io::write_text(path_, data_.dump(2) + "\n");
  }

 private:
  fs::path path_;
  json data_ = json::object();
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void write(std::vector<fs::path>& files, const fs::path& path, const std::string& text) {
  vie::io::write_text(path, text);
  files.push_back(path);
}

void cmd_simulate(const vie::ExperimentConfig& cfg) {
  Stopwatch clock;
  const auto c = vie::make_case(cfg.case_name);
  std::vector<fs::path> files;
  for (const double lambda : cfg.lambda_list()) {
    const auto dir = lambda_path(cfg, lambda);
    const auto ens = vie::simulate_fit_ensemble(c, lambda, cfg);
    write(files, dir / "ensemble.csv", vie::io::ensemble_csv(ens));
    write(files, dir / "mean.csv", vie::io::trajectory_csv(ens.mean));
    write(files, dir / "measurements.csv",
          vie::io::measurements_csv(vie::measurements_from(ens, cfg.n_measurements)));
    std::cout << "simulate " << c.name << " lambda=" << lambda << " -> " << dir.string() << "\n";
  }
  Manifest(cfg, case_dir(cfg) / "manifest.json").record("simulate", files, clock.seconds());
}

std::string read_input(const fs::path& path, const char* producer) {
  if (!fs::exists(path)) {
    throw vie::io::IoError(path, std::string("missing input (run `vie ") + producer + "` first)");
  }
  return vie::io::read_text(path);
}

void cmd_fit(const vie::ExperimentConfig& cfg) {
  Stopwatch clock;
  const auto c = vie::make_case(cfg.case_name);
  std::vector<fs::path> files;
  std::vector<vie::FitSummary> rows;
  for (const double lambda : cfg.lambda_list()) {
    const auto dir = lambda_path(cfg, lambda);
    const auto data =
        vie::io::parse_measurements_csv(read_input(dir / "measurements.csv", "simulate"));
    const auto fit = vie::fit_case(c, data, cfg.fit, cfg.seed);
    const auto summary = vie::summarize_fit(fit, data, c.true_theta, lambda);
    rows.push_back(summary);

    const auto grid = vie::make_grid(c.t0, c.t_end, cfg.n);
    std::string pred = "t,u,v\n";
    for (const double t : grid.nodes()) {
      const auto out = vie::forward_value(fit.params, t);
      pred += vie::io::format_double(t) + ',' + vie::io::format_double(out.u) + ',' +
              vie::io::format_double(out.v) + '\n';
    }
    write(files, dir / "loss_history.csv", vie::io::loss_history_csv(fit));
    write(files, dir / "prediction_fit.csv", pred);
    json j = {{"case", c.name},
              {"lambda", lambda},
              {"theta_hat", fit.theta_hat},
              {"theta_initial", fit.theta_initial},
              {"termination", vie::to_string(fit.reason)},
              {"iterations", fit.iterations},
              {"evaluations", fit.evaluations},
              {"seed", fit.seed},
              {"loss_history", "loss_history.csv"},
              {"summary", vie::io::to_json(summary)},
              {"config", vie::to_json(cfg)},
              {"parameters", vie::io::to_json(fit.params)}};
    write(files, dir / "fit.json", j.dump(2) + "\n");
    std::cout << "fit " << c.name << " lambda=" << lambda << " theta_hat=" << fit.theta_hat
              << " (" << vie::to_string(fit.reason) << ", " << fit.iterations << " iterations)\n";
  }
  write(files, case_dir(cfg) / "summary.csv", vie::io::summary_csv(rows));
  Manifest(cfg, case_dir(cfg) / "manifest.json").record("fit", files, clock.seconds());
}

void cmd_predict(const vie::ExperimentConfig& cfg) {
  Stopwatch clock;
  const auto c = vie::make_case(cfg.case_name);
  std::vector<fs::path> files;
  for (const double lambda : cfg.lambda_list()) {
    const auto dir = lambda_path(cfg, lambda);
    json fit_json;
    try {
      fit_json = json::parse(read_input(dir / "fit.json", "fit"));
    } catch (const json::parse_error& e) {
      throw vie::io::FormatError((dir / "fit.json").string() + ": " + e.what());
    }
    const auto params = vie::io::parameters_from_json(fit_json.at("parameters"));
    const auto band = vie::predict_band(c, params.theta, lambda, cfg.horizon_start,
                                        cfg.horizon_end, cfg.predict,
                                        cfg.seed + vie::kPredictStream);
    const auto truth = vie::simulate_truth(c, lambda, cfg.horizon_end, cfg.truth_steps,
                                           cfg.truth_paths, cfg.seed + vie::kTruthStream);
    const auto report = vie::coverage_check(band, truth);
    write(files, dir / "band.csv", vie::io::band_csv(band));
    write(files, dir / "band_long.csv", vie::io::band_long_csv(band, truth));
    json j = vie::io::to_json(report);
    j["theta_hat"] = params.theta;
    j["lambda"] = lambda;
    j["horizon"] = {cfg.horizon_start, cfg.horizon_end};
    j["level"] = band.level;
    write(files, dir / "coverage.json", j.dump(2) + "\n");
    std::cout << "predict " << c.name << " lambda=" << lambda << " coverage=" << report.overall
              << (report.pass ? " pass" : " fail") << "\n";
  }
  Manifest(cfg, case_dir(cfg) / "manifest.json").record("predict", files, clock.seconds());
}

void cmd_report(const vie::ExperimentConfig& cfg) {
  Stopwatch clock;
  std::string table =
      "case,lambda,theta_true,theta_pred,relative_error,abs_error_sum,abs_error_mean\n";
  std::size_t found = 0;
  for (const auto name : {vie::CaseName::case1, vie::CaseName::case2, vie::CaseName::case3}) {
    const auto path = cfg.out / vie::to_string(name) / "summary.csv";
    if (!fs::exists(path)) continue;
    ++found;
    for (const auto& r : vie::io::parse_summary_csv(vie::io::read_text(path))) {
      table += vie::to_string(name);
      for (const double v : {r.lambda, r.theta_true, r.theta_pred, r.relative_error,
                             r.abs_error_sum, r.abs_error_mean}) {
        table += ',' + vie::io::format_double(v);
      }
      table += '\n';
    }
  }
  if (found == 0) {
    throw vie::io::IoError(cfg.out / "<case>" / "summary.csv",
                           "no summaries found (run `vie fit` first)");
  }
  std::vector<fs::path> files;
  write(files, cfg.out / "table.csv", table);
  std::cout << table;
  Manifest(cfg, cfg.out / "manifest.json").record("report", files, clock.seconds());
}

int fail(const char* category, const std::string& message, int code) {
  std::string one_line = message;
  for (auto& ch : one_line) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  std::cerr << "error: " << category << ": " << one_line << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parameter identification for stochastic Volterra integral equations"};
  app.set_version_flag("--version", VIE_VERSION);
  app.require_subcommand(1);
  CommonFlags flags;
  auto* simulate = app.add_subcommand("simulate", "simulate ensembles and measurement sets");
  auto* fit = app.add_subcommand("fit", "train the network and recover theta");
  auto* predict = app.add_subcommand("predict", "confidence band and coverage check");
  auto* report = app.add_subcommand("report", "aggregate summaries into table.csv");
  for (auto* cmd : {simulate, fit, predict, report}) add_common(cmd, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    const auto cfg = load_config(flags);
    if (*simulate) cmd_simulate(cfg);
    if (*fit) cmd_fit(cfg);
    if (*predict) cmd_predict(cfg);
    if (*report) cmd_report(cfg);
  } catch (const vie::ConfigError& e) {
    return fail("config", e.what(), 3);
  } catch (const vie::io::IoError& e) {
    return fail("io", e.what(), 4);
  } catch (const vie::io::FormatError& e) {
    return fail("input", e.what(), 5);
  } catch (const json::exception& e) {
    return fail("input", e.what(), 5);
  } catch (const vie::NumericalBlowup& e) {
    return fail("numeric", e.what(), 6);
  } catch (const std::invalid_argument& e) {
    return fail("input", e.what(), 5);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return 0;
}
