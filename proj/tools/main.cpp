#include <CLI11.hpp>

#include <iostream>
#include <map>

#include "bench.hpp"
#include "commands.hpp"

using namespace odmwatch;

int main(int argc, char** argv) {
  CLI::App app{"odmwatch: anomaly detection on origin-destination matrices"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value configuration file (flags take precedence)");

  cli::RunConfig config;
  std::string stride = "weekly";
  std::string bounds_mode = "clamped";
  std::string format = "jsonl";
  std::string store_root = config.store_root.string();

  app.add_option("--th", config.th, "eligibility threshold on the moving average")->capture_default_str();
  app.add_option("--p", config.p, "number of history periods")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--quantile", config.quantile, "quantile level of the daily threshold")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--stride", stride, "history stride")->capture_default_str()->check(CLI::IsMember({"daily", "weekly"}));
  app.add_option("--bounds-mode,--bounds_mode", bounds_mode, "lower bound rule")
      ->capture_default_str()
      ->check(CLI::IsMember({"clamped", "paper_literal"}));
  app.add_option("--store-root,--store_root", store_root, "history store directory")->capture_default_str();
  app.add_option("--output", config.output, "report path, - for stdout")->capture_default_str();
  app.add_option("--format", format, "report format")->capture_default_str()->check(CLI::IsMember({"jsonl", "csv"}));
  app.add_option("--workers", config.workers, "worker threads, 0 = all cores")->capture_default_str();
  app.add_option("--windows-per-day,--windows_per_day", config.windows_per_day,
                 "expected windows per day (enables window validation)");
  app.add_flag("--full-day-window,--full_day_window", config.full_day_window,
               "the schedule includes a 00:00:00-23:59:59 window");
  app.add_option("--retention-days,--retention_days", config.retention_days, "store retention in days");

  auto* ingest = app.add_subcommand("ingest", "parse ODM CSV files and persist them in the store");
  std::string source_id;
  std::vector<std::filesystem::path> files;
  ingest->add_option("--source", source_id, "source identifier")->required();
  ingest->add_option("files", files, "CSV or CSV.gz files")->required()->check(CLI::ExistingFile);

  auto* detect = app.add_subcommand("detect", "run detection for one stored date");
  std::string date;
  detect->add_option("--source", source_id, "source identifier")->required();
  detect->add_option("--date", date, "YYYY-MM-DD")->required();

  auto* generate = app.add_subcommand("generate", "write a synthetic ODM history with labelled anomalies");
  std::filesystem::path spec_file, out_dir;
  generate->add_option("--spec", spec_file, "synthetic spec JSON")->required()->check(CLI::ExistingFile);
  generate->add_option("--out", out_dir, "output directory")->required();

  auto* bench = app.add_subcommand("bench", "time the detection stages on an in-memory workload");
  cli::BenchParams params;
  bench->add_option("--areas", params.areas)->capture_default_str();
  bench->add_option("--nonzeros", params.nonzeros, "stored cells per window (overrides --density)");
  bench->add_option("--density", params.density)->capture_default_str();
  bench->add_option("--windows", params.windows)->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--seed", params.seed)->capture_default_str();
  bench->add_option("--noise", params.noise)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; any other usage error maps to the generic error code.
    return app.exit(e) == 0 ? cli::kOk : cli::kError;
  }

  config.stride = *parse_stride(stride);
  config.bounds_mode = *parse_bounds_mode(bounds_mode);
  config.format = *parse_report_format(format);
  config.store_root = store_root;

  if (*ingest) return cli::cmd_ingest(files, source_id, config, std::cout, std::cerr);
  if (*detect) return cli::cmd_detect(source_id, date, config, std::cout, std::cerr);
  if (*generate) return cli::cmd_generate(spec_file, out_dir, std::cout, std::cerr);
  if (*bench) {
    params.detector = config.detector();
    const auto result = cli::run_bench(params);
    cli::print_bench(std::cout, params, result);
    return cli::kOk;
  }
  return cli::kError;
}
