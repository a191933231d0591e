// Copyright 2026 The Tutorlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// tutorlab: command-line driver for packages, simulated studies, log replay
// and learning analytics.

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "tutorlab/analytics/afm.hpp"
#include "tutorlab/analytics/census.hpp"
#include "tutorlab/common/error.hpp"
#include "tutorlab/common/strings.hpp"
#include "tutorlab/harness/experiment.hpp"
#include "tutorlab/harness/replay.hpp"
#include "tutorlab/log/log_store.hpp"
#include "tutorlab/service/api.hpp"
#include "tutorlab/service/http.hpp"

namespace {

using namespace tutorlab;
using nlohmann::json;

constexpr int kOk = 0;
constexpr int kFindings = 1;

int cmd_validate(const std::string& dir) {
  const auto package = service::load_package_dir(dir);
  const auto diagnostics = service::validate_package(package);
  for (const auto& d : diagnostics) std::cout << d.code << "\t" << d.subject << "\t" << d.message << "\n";
  std::cerr << package.name << ": " << package.problems.size() << " problems, " << package.curricula.size()
            << " curricula, " << diagnostics.size() << " diagnostics\n";
  return diagnostics.empty() ? kOk : kFindings;
}

int cmd_simulate(const std::string& script_path, const std::string& out, bool http) {
  const auto script = harness::load_script(script_path);
  const auto result = harness::run_experiment(script, out, {http});
  std::cout << std::left << std::setw(16) << "condition" << std::setw(10) << "students" << std::setw(12)
            << "accuracy" << std::setw(12) << "problems" << "mastered\n";
  for (const auto& c : result.conditions) {
    std::cout << std::setw(16) << c.condition << std::setw(10) << c.students << std::setw(12)
              << format_double(std::round(c.first_attempt_accuracy * 1000) / 1000) << std::setw(12)
              << format_double(std::round(c.problems_completed * 100) / 100)
              << format_double(std::round(c.mastered_kcs * 100) / 100) << "\n";
  }
  std::cerr << "log: " << result.log_path.string() << "\nsummary: " << result.summary_path.string() << "\n";
  if (result.transactions_submitted != result.records_exported) {
    std::cerr << "submitted " << result.transactions_submitted << " transactions but exported "
              << result.records_exported << "\n";
    return kFindings;
  }
  return kOk;
}

int cmd_replay(const std::string& log_path, const std::string& package_dir, bool as_json) {
  const auto store = log::import_tsv(log_path);
  const auto report = harness::replay(store, service::load_package_dir(package_dir));
  if (as_json) {
    std::cout << harness::to_json(report).dump(2) << "\n";
  } else {
    std::cout << harness::to_tsv(report);
  }
  std::cerr << report.replayed << " records replayed, " << report.divergences.size() << " divergences\n";
  return report.divergences.empty() ? kOk : kFindings;
}

int cmd_fit_afm(const std::string& log_path, double lambda, double tol, int max_iter) {
  const auto table = analytics::build_opportunity_table(log::import_tsv(log_path));
  analytics::AfmConfig config;
  config.lambda_theta = lambda;
  config.tol = tol;
  config.max_iter = max_iter;
  const auto fit = analytics::fit_afm(table, config);
  json kcs = json::array();
  for (const auto& [kc, beta] : fit.model.beta) {
    kcs.push_back({{"kc", kc}, {"beta", beta}, {"gamma", fit.model.gamma.at(kc)}});
  }
  json out{{"converged", fit.converged},
           {"iterations", fit.iterations},
           {"log_likelihood", fit.data_log_likelihood},
           {"penalized_log_likelihood", fit.log_likelihood},
           {"observations", table.rows.size()},
           {"kcs", kcs},
           {"students", fit.model.theta},
           {"degenerate_kcs", fit.degenerate_kcs}};
  std::cout << out.dump(2) << "\n";
  return fit.converged ? kOk : kFindings;
}

int cmd_learning_curve(const std::string& log_path, const std::string& kc, const std::string& format) {
  const auto table = analytics::build_opportunity_table(log::import_tsv(log_path));
  const auto curve = kc.empty() ? analytics::aggregate_learning_curve(table) : analytics::learning_curve(table, kc);
  if (format == "json") {
    json points = json::array();
    for (const auto& p : curve.points) {
      points.push_back({{"opportunity", p.opportunity}, {"error_rate", p.error_rate}, {"n", p.n}});
    }
    std::cout << json{{"kc", curve.kc}, {"points", points}}.dump(2) << "\n";
  } else {
    std::cout << "opportunity\terror_rate\tn\n";
    for (const auto& p : curve.points) {
      std::cout << p.opportunity << "\t" << format_double(p.error_rate) << "\t" << p.n << "\n";
    }
  }
  return kOk;
}

int cmd_compare_kc(const std::string& log_path, const std::string& models_path) {
  std::ifstream in(models_path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot read " + models_path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, models_path + ": " + e.what());
  }
  const auto comparison =
      analytics::compare_kc_models(log::import_tsv(log_path), analytics::kc_models_from_json(doc));
  std::cout << "rank\tmodel\tlog_likelihood\tparameters\tobservations\taic\tbic\tconverged\n";
  int rank = 0;
  for (const auto i : comparison.by_bic) {
    const auto& s = comparison.scores[i];
    std::cout << ++rank << "\t" << s.name << "\t" << format_double(s.log_likelihood) << "\t" << s.parameters << "\t"
              << s.observations << "\t" << format_double(s.aic) << "\t" << format_double(s.bic) << "\t"
              << (s.converged ? "yes" : "no") << "\n";
  }
  return kOk;
}

int cmd_census(const std::string& registry_path) {
  std::ifstream in(registry_path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot read " + registry_path);
  const auto result = analytics::census_filter(analytics::parse_registry_tsv(in));
  analytics::write_registry_tsv(result.kept, std::cout);
  std::cerr << result.count << " datasets kept\n";
  return kOk;
}

service::HttpServer* g_server = nullptr;

int cmd_serve(const std::string& data_dir, const std::string& host, int port) {
  SystemClock clock;
  service::Tutorshop shop(service::ServiceConfig{data_dir}, clock);
  service::ApiRouter router(shop);
  service::HttpServer server(router);
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::cerr << "serving " << data_dir << " on http://" << host << ":" << port << "\n";
  server.run(host, port);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tutorlab: example-tracing tutors, simulated studies and learning analytics"};
  app.require_subcommand(1);

  std::string package_dir, script, out_dir, log_path, kc, format = "tsv", models, registry;
  std::string data_dir = "tutorshop-data", host = "127.0.0.1";
  double lambda = 1.0, tol = 1e-6;
  int max_iter = 200, port = 8080;
  bool http = false, as_json = false;

  auto* validate = app.add_subcommand("validate", "Check a package's graphs and curricula");
  validate->add_option("--package", package_dir, "Package directory")->required();

  auto* simulate = app.add_subcommand("simulate", "Run a simulated study from an experiment script");
  simulate->add_option("--script", script, "Experiment script")->required();
  simulate->add_option("--out", out_dir, "Output directory")->required();
  simulate->add_flag("--http", http, "Talk to the service over loopback HTTP");

  auto* replay = app.add_subcommand("replay", "Re-trace a transaction log against a package");
  replay->add_option("--log", log_path, "Transaction TSV")->required();
  replay->add_option("--package", package_dir, "Package directory")->required();
  replay->add_flag("--json", as_json, "Print the report as JSON");

  auto* fit = app.add_subcommand("fit-afm", "Fit the Additive Factors Model to a log");
  fit->add_option("--log", log_path, "Transaction TSV")->required();
  fit->add_option("--lambda", lambda, "L2 weight on student proficiencies");
  fit->add_option("--tol", tol, "Convergence tolerance");
  fit->add_option("--max-iter", max_iter, "Iteration cap");

  auto* curve = app.add_subcommand("learning-curve", "Error rate by opportunity");
  curve->add_option("--log", log_path, "Transaction TSV")->required();
  curve->add_option("--kc", kc, "Knowledge component (all KCs when omitted)");
  curve->add_option("--out", format, "Output format")->check(CLI::IsMember({"tsv", "json"}));

  auto* compare = app.add_subcommand("compare-kc", "Rank KC models by AIC and BIC");
  compare->add_option("--log", log_path, "Transaction TSV")->required();
  compare->add_option("--models", models, "KC models JSON")->required();

  auto* census = app.add_subcommand("census", "Count datasets in a registry");
  census->add_option("--registry", registry, "Registry TSV")->required();

  auto* serve = app.add_subcommand("serve", "Serve the Tutorshop API over HTTP");
  serve->add_option("--data", data_dir, "Data directory");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*validate) return cmd_validate(package_dir);
    if (*simulate) return cmd_simulate(script, out_dir, http);
    if (*replay) return cmd_replay(log_path, package_dir, as_json);
    if (*fit) return cmd_fit_afm(log_path, lambda, tol, max_iter);
    if (*curve) return cmd_learning_curve(log_path, kc, format);
    if (*compare) return cmd_compare_kc(log_path, models);
    if (*census) return cmd_census(registry);
    if (*serve) return cmd_serve(data_dir, host, port);
  } catch (const tutorlab::Error& e) {
    std::cerr << "error: " << tutorlab::error_code_name(e.code()) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
