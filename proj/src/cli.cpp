#include "linkemu/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <vector>

#include "CLI11.hpp"
#include "linkemu/csv.hpp"
#include "linkemu/emulator.hpp"
#include "linkemu/netdesc.hpp"
#include "linkemu/telemetry.hpp"
#include "linkemu/verify.hpp"

namespace linkemu::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kMetricFiles[] = {"throughput.csv", "delays.csv", "drops.csv", "allocations.csv",
                                        "verification.csv", "summary.txt", "trace.log"};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void print_parse_error(const ParseError& e, std::ostream& err) { err << "error: " << e.what() << "\n"; }

void write_summary(const Emulator& emu, const RunOptions& opts, const RunSummary& run, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  const auto& desc = emu.description();
  out << "scenario=" << fs::path(opts.scenario_path).filename().string() << "\n";
  out << "seed=" << opts.seed << "\n";
  out << "horizon_s=" << format_seconds(emu.horizon()) << "\n";
  out << "events=" << run.events << "\n";
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(run.trace_hash));
  out << "trace_hash=" << hash << "\n";
  out << "runtime_failures=" << run.runtime_failures << "\n";
  if (desc.dama) {
    out << "dama_epoch_s=" << fixed(desc.dama->epoch_s, 6) << "\n";
    out << "dama_policy=" << to_string(desc.dama->policy) << "\n";
  }

  std::map<std::pair<std::string, Direction>, std::pair<std::int64_t, std::int64_t>> bytes;
  for (const auto& d : emu.metrics().deliveries()) {
    auto& b = bytes[{d.link, d.dir}];
    b.first += d.frame_bytes;
    b.second += d.payload_bytes;
  }
  for (const auto& l : desc.links) {
    for (auto dir : {Direction::forward, Direction::reverse}) {
      const auto& s = emu.state(l.id, dir);
      const auto b = bytes[{l.id, dir}];
      out << "direction link=" << l.id << " dir=" << to_string(dir) << " bandwidth_bps=" << s.params().bandwidth_bps
          << " offered=" << s.offered() << " admitted=" << s.admitted() << " dropped=" << s.drops()
          << " delivered=" << s.delivered() << " in_flight=" << s.in_flight() << " wire_bytes=" << b.first
          << " payload_bytes=" << b.second << "\n";
    }
  }
  for (const auto& p : plateau_means(emu.metrics(), 1.0, 2.0)) {
    if (bytes[{p.link, p.dir}].first == 0) continue;
    out << "plateau link=" << p.link << " dir=" << to_string(p.dir) << " start_s=" << format_seconds(p.start)
        << " end_s=" << format_seconds(p.end) << " bandwidth_bps=" << p.bandwidth_bps
        << " payload_mbps=" << fixed(p.payload_mbps, 6) << " windows=" << p.windows << "\n";
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_verification(const VerificationReport& static_report, const std::vector<VerificationReport>& runtime,
                        const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << kVerificationCsvHeader << "\n";
  render_csv_rows(static_report, out);
  for (const auto& r : runtime) render_csv_rows(r, out);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  }
};

std::optional<CsvTable> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) return t;
  t.header = csv::split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(csv::split(line));
  }
  return t;
}

bool row_matches(const std::vector<std::string>& row, const CsvTable& t, const ReportOptions& o) {
  const auto check = [&](const char* col, const std::optional<std::string>& want) {
    if (!want) return true;
    const int c = t.column(col);
    return c >= 0 && static_cast<std::size_t>(c) < row.size() && row[c] == *want;
  };
  return check("link", o.link) && check("dir", o.dir) && check("flow", o.flow);
}

double summary_epoch_s(const fs::path& dir) {
  std::ifstream in(dir / "summary.txt");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("dama_epoch_s=", 0) == 0) return std::stod(line.substr(13));
  }
  return 1.0;
}

int report_throughput(const ReportOptions& o, std::ostream& out, std::ostream& err) {
  const fs::path dir(o.metrics_dir);
  const auto tp = read_csv(dir / "throughput.csv");
  const auto alloc = read_csv(dir / "allocations.csv");
  if (!tp || !alloc) {
    err << "error: " << dir.string() << " lacks throughput.csv or allocations.csv\n";
    return kInputError;
  }
  const int c_start = tp->column("window_start_s"), c_link = tp->column("link"), c_dir = tp->column("dir"),
            c_payload = tp->column("payload_mbps");
  const int a_epoch = alloc->column("epoch"), a_link = alloc->column("link"), a_dir = alloc->column("dir"),
            a_demand = alloc->column("demand_bps");
  if (c_start < 0 || c_link < 0 || c_dir < 0 || c_payload < 0 || a_epoch < 0 || a_link < 0 || a_dir < 0 ||
      a_demand < 0) {
    err << "error: unexpected CSV headers in " << dir.string() << "\n";
    return kInputError;
  }
  std::map<std::tuple<std::string, std::string, long long>, double> demand;
  for (const auto& r : alloc->rows) demand[{r[a_link], r[a_dir], std::stoll(r[a_epoch])}] = std::stod(r[a_demand]);

  const double epoch_s = summary_epoch_s(dir);
  out << "time_s,link,dir,demand_mbps,observed_mbps\n";
  for (const auto& r : tp->rows) {
    if (!row_matches(r, *tp, o)) continue;
    const double t = std::stod(r[c_start]);
    const auto epoch = static_cast<long long>(std::floor(t / epoch_s + 1e-9));
    const auto it = demand.find({r[c_link], r[c_dir], epoch});
    out << r[c_start] << ',' << r[c_link] << ',' << r[c_dir] << ','
        << (it == demand.end() ? std::string() : fixed(it->second / 1e6, 6)) << ',' << r[c_payload] << '\n';
  }
  return kOk;
}

int report_histogram(const ReportOptions& o, std::ostream& out, std::ostream& err) {
  const fs::path dir(o.metrics_dir);
  const auto delays = read_csv(dir / "delays.csv");
  if (!delays) {
    err << "error: " << (dir / "delays.csv").string() << " not found\n";
    return kInputError;
  }
  const int c_delay = delays->column("delay_ms");
  if (c_delay < 0) {
    err << "error: delays.csv has no delay_ms column\n";
    return kInputError;
  }
  std::vector<double> samples;
  for (const auto& r : delays->rows) {
    if (row_matches(r, *delays, o)) samples.push_back(std::stod(r[c_delay]));
  }
  if (samples.empty()) {
    err << "error: no delay samples in " << (dir / "delays.csv").string() << "\n";
    return kInputError;
  }
  if (!(o.bin_ms > 0)) {
    err << "error: --bin-ms must be positive\n";
    return kInputError;
  }
  const auto h = delay_histogram(samples, o.bin_ms);
  out << "bin_center_ms,count,normal_fit\n";
  const double n = static_cast<double>(h.samples);
  for (const auto& b : h.bins) {
    double fit = 0.0;
    if (h.std_ms > 0) {
      const double z = (b.center_ms - h.mean_ms) / h.std_ms;
      fit = n * h.bin_width_ms * std::exp(-0.5 * z * z) / (h.std_ms * std::sqrt(2.0 * std::numbers::pi));
    } else if (std::fabs(b.center_ms - h.mean_ms) <= h.bin_width_ms / 2) {
      fit = n;
    }
    out << fixed(b.center_ms, 3) << ',' << b.count << ',' << fixed(fit, 3) << '\n';
  }
  err << "samples=" << h.samples << " mean_ms=" << fixed(h.mean_ms, 3) << " std_ms=" << fixed(h.std_ms, 3) << "\n";
  return kOk;
}

}  // namespace

int cmd_verify(const std::string& scenario_path, std::ostream& out, std::ostream& err) {
  NetworkDescription desc;
  try {
    desc = load_description(scenario_path, ParseOptions{.resolve_references = false});
  } catch (const ParseError& e) {
    print_parse_error(e, err);
    return kInputError;
  }
  const auto report = verify_static(desc);
  render_text(report, out);
  return report.all_passed() ? kOk : kStaticVerificationFailed;
}

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  if (opts.out_dir.empty()) {
    err << "error: an output directory is required\n";
    return kInputError;
  }
  if (opts.until_s && !(*opts.until_s > 0)) {
    err << "error: --until must be positive\n";
    return kInputError;
  }
  if (opts.realtime && !(opts.speed > 0)) {
    err << "error: --speed must be positive\n";
    return kInputError;
  }

  NetworkDescription desc;
  try {
    desc = load_description(opts.scenario_path, ParseOptions{.resolve_references = false});
  } catch (const ParseError& e) {
    print_parse_error(e, err);
    return kInputError;
  }
  const auto static_report = verify_static(desc);
  if (!static_report.all_passed()) {
    render_text(static_report, err);
    return kStaticVerificationFailed;
  }

  const fs::path out_dir(opts.out_dir);
  const fs::path staging = out_dir / ".linkemu-staging";
  std::error_code ec;
  fs::create_directories(staging, ec);
  if (ec) {
    err << "error: cannot create " << staging.string() << ": " << ec.message() << "\n";
    return kInputError;
  }
  const auto discard = [&] { fs::remove_all(staging, ec); };

  std::ofstream trace_file;
  EmulatorOptions eopts;
  eopts.seed = opts.seed;
  if (opts.until_s) eopts.horizon = SimTime::from_seconds(*opts.until_s);
  if (opts.trace) {
    trace_file.open(staging / "trace.log", std::ios::binary);
    eopts.trace = &trace_file;
  }

  try {
    Emulator emu(std::move(desc), eopts);
    const auto summary = opts.realtime ? emu.realtime_drive(opts.speed) : emu.run();
    if (trace_file.is_open()) trace_file.close();

    const double window = 1.0;
    export_csv(emu.metrics(), staging, window);
    write_verification(static_report, emu.runtime_reports(), staging / "verification.csv");
    write_summary(emu, opts, summary, staging / "summary.txt");

    for (const char* name : kMetricFiles) {
      if (!fs::exists(staging / name)) continue;
      fs::rename(staging / name, out_dir / name);
    }
    discard();

    out << "run complete: " << summary.events << " events, t=" << format_seconds(summary.final_time) << "s";
    if (summary.realtime) {
      out << ", wall " << fixed(summary.wall_seconds, 3) << "s at speed " << summary.speed << ", max lateness "
          << fixed(summary.max_lateness_s * 1e3, 3) << "ms";
    }
    out << ", runtime failures " << summary.runtime_failures << "\n";
    out << "metrics written to " << out_dir.string() << "\n";
    if (summary.runtime_failures > 0) {
      for (const auto& r : emu.runtime_reports()) {
        if (!r.all_passed()) render_text(r, err);
      }
      return kRuntimeVerificationFailed;
    }
    return kOk;
  } catch (const ConfigError& e) {
    discard();
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const RunError& e) {
    discard();
    err << "run failed: " << e.what() << "\n";
    return kRunFailed;
  } catch (const std::exception& e) {
    discard();
    err << "run failed: " << e.what() << "\n";
    return kRunFailed;
  }
}

int cmd_report(const ReportOptions& options, std::ostream& out, std::ostream& err) {
  if (!fs::is_directory(options.metrics_dir)) {
    err << "error: " << options.metrics_dir << " is not a directory\n";
    return kInputError;
  }
  return options.kind == ReportKind::throughput ? report_throughput(options, out, err)
                                                : report_histogram(options, out, err);
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"linkemu: deterministic dynamic-link network emulator"};
  app.require_subcommand(1);

  std::string verify_path;
  auto* verify = app.add_subcommand("verify", "Parse a scenario and check its static constraints");
  verify->add_option("scenario", verify_path, "Scenario file")->required();

  RunOptions run_opts;
  double until = 0;
  auto* run = app.add_subcommand("run", "Run a scenario and write metrics");
  run->add_option("scenario", run_opts.scenario_path, "Scenario file")->required();
  run->add_option("--seed", run_opts.seed, "Root random seed");
  auto* until_opt = run->add_option("--until", until, "Run length in seconds");
  run->add_flag("--realtime", run_opts.realtime, "Pace events against the wall clock");
  run->add_option("--speed", run_opts.speed, "Real-time speed ratio");
  run->add_flag("--trace", run_opts.trace, "Write trace.log");
  run->add_option("--out", run_opts.out_dir, "Output directory")->required();

  ReportOptions report_opts;
  std::string kind = "throughput";
  std::string link, dir, flow;
  auto* report = app.add_subcommand("report", "Emit plot-ready CSV from a metrics directory");
  report->add_option("metrics_dir", report_opts.metrics_dir, "Metrics directory")->required();
  report->add_option("--kind", kind, "throughput or histogram")
      ->check(CLI::IsMember({"throughput", "histogram"}))
      ->required();
  report->add_option("--bin-ms", report_opts.bin_ms, "Histogram bin width in ms");
  auto* link_opt = report->add_option("--link", link, "Only this link");
  auto* dir_opt = report->add_option("--dir", dir, "Only this direction (forward/reverse)");
  auto* flow_opt = report->add_option("--flow", flow, "Only this flow (histogram)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  if (verify->parsed()) return cmd_verify(verify_path, out, err);
  if (run->parsed()) {
    if (until_opt->count() > 0) run_opts.until_s = until;
    return cmd_run(run_opts, out, err);
  }
  report_opts.kind = kind == "histogram" ? ReportKind::histogram : ReportKind::throughput;
  if (link_opt->count() > 0) report_opts.link = link;
  if (dir_opt->count() > 0) report_opts.dir = dir;
  if (flow_opt->count() > 0) report_opts.flow = flow;
  return cmd_report(report_opts, out, err);
}

}  // namespace linkemu::cli
