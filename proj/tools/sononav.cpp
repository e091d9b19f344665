// sononav command-line tool: run scripted scenarios, replay and render logs,
// serve the live engine, and summarize results.

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "sononav.hpp"
#include "sononav/net/server.hpp"

namespace fs = std::filesystem;
using namespace sononav;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

EngineConfig load_config(const std::string& path) {
  EngineConfig config = path.empty() ? EngineConfig{} : load_engine_config(path);
  apply_env_overrides(config);
  return config;
}

WavFormat parse_format(const std::string& s) {
  if (s == "pcm16") return WavFormat::Pcm16;
  if (s == "float32") return WavFormat::Float32;
  throw Error(ErrorCode::InvalidArgument, "unknown WAV format '" + s + "' (pcm16 or float32)");
}

std::string in_log_dir(const EngineConfig& config, const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute() || fs::path(path).has_parent_path()) return path;
  return (fs::path(config.log_dir) / path).string();
}

std::vector<double> read_values(const std::string& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  std::vector<double> out;
  if (column.empty()) {
    double v;
    while (in >> v) out.push_back(v);
    if (!in.eof()) throw Error(ErrorCode::ParseError, path + ": expected one number per line");
    return out;
  }
  const Table t = parse_csv(in);
  const auto c = t.find(column);
  if (!c) throw Error(ErrorCode::InvalidArgument, path + ": no column '" + column + "'");
  for (const auto& row : t.rows) {
    if (auto v = detail::parse_number(row[*c])) out.push_back(*v);
  }
  return out;
}

// ---- run ---------------------------------------------------------------------

struct RunOptions {
  std::string scenario, config, log, metrics, wav, format = "pcm16", label;
};

int cmd_run(const RunOptions& o) {
  const EngineConfig config = load_config(o.config);
  const Scenario scenario = load_scenario(o.scenario, config.thresholds);
  const ScenarioRun run = run_scenario(scenario, config);
  const std::string label = o.label.empty() ? scenario.name : o.label;

  if (!o.log.empty()) write_session(in_log_dir(config, o.log), run.log);
  const std::vector<std::string> labels(run.metrics.size(), label);
  if (!o.metrics.empty()) {
    std::ofstream out(o.metrics);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot open " + o.metrics);
    out << to_csv(metrics_table(run.metrics, labels));
  }
  if (!o.wav.empty()) write_wav(o.wav, offline_render(run.log).audio, parse_format(o.format));

  for (const auto& m : run.metrics) {
    std::cout << (m.target_label.empty() ? std::to_string(m.target_id) : m.target_label) << ": ";
    if (m.alignment_time_s) {
      std::cout << "alignment " << *m.alignment_time_s << " s";
    } else {
      std::cout << "no drill start";
    }
    std::cout << ", final d " << m.final_error.d << " mm, theta " << m.final_error.theta << " deg\n";
  }
  std::cout << report(run.metrics, labels).to_text();
  return 0;
}

// ---- replay ------------------------------------------------------------------

struct ReplayOptions {
  std::string log, wav, format = "pcm16";
  bool verify = false;
};

int cmd_replay(const ReplayOptions& o) {
  const SessionLog log = read_session(o.log);
  int status = 0;
  if (o.verify) {
    const auto replayed = replay_session(log);
    for (std::size_t i = 0; i < replayed.size(); ++i) {
      const auto& a = log.records[i];
      const auto& b = replayed[i];
      if (a.phase != b.phase || a.events != b.events) {
        std::cerr << "mismatch at record " << i << " (t=" << a.timestamp_s << "): logged "
                  << to_string(a.phase) << ", replayed " << to_string(b.phase) << '\n';
        status = 2;
        break;
      }
    }
    if (status == 0) std::cout << "verified " << replayed.size() << " records\n";
  }
  if (!o.wav.empty()) {
    const RenderedSession r = offline_render(log);
    write_wav(o.wav, r.audio, parse_format(o.format));
    std::cout << "rendered " << r.audio.samples.size() << " samples, " << r.events.size() << " events\n";
  }
  return status;
}

// ---- serve -------------------------------------------------------------------

struct ServeCli {
  std::string config, plan, scenario, log, bind, osc_out;
  int udp_port = -1, ws_port = -1;
  double duration = 0.0;
  bool audio_stdout = false;
};

int cmd_serve(const ServeCli& o) {
  EngineConfig config = load_config(o.config);
  if (!o.bind.empty()) config.network.bind_address = o.bind;
  if (o.udp_port >= 0) config.network.udp_port = static_cast<std::uint16_t>(o.udp_port);
  if (o.ws_port >= 0) config.network.ws_port = static_cast<std::uint16_t>(o.ws_port);
  if (!o.osc_out.empty()) {
    const auto colon = o.osc_out.rfind(':');
    if (colon == std::string::npos) throw Error(ErrorCode::InvalidArgument, "--osc-out expects host:port");
    config.network.osc_out_host = o.osc_out.substr(0, colon);
    config.network.osc_out_port = static_cast<std::uint16_t>(std::stoi(o.osc_out.substr(colon + 1)));
  }
  TargetPlan plan;
  if (!o.plan.empty()) {
    plan = plan_from_json(read_json_file(o.plan), config.thresholds);
  } else if (!o.scenario.empty()) {
    plan = load_scenario(o.scenario, config.thresholds).plan;
  } else {
    throw Error(ErrorCode::InvalidArgument, "serve needs --plan or --scenario");
  }

  std::mutex err_mutex;
  net::ServeOptions options;
  options.log_path = in_log_dir(config, o.log);
  options.diagnostics = [&](const std::string& m) {
    std::lock_guard lock(err_mutex);
    std::cerr << m << '\n';
  };
  if (o.audio_stdout) {
    options.audio_sink = [](const AudioBlock& b) {
      std::fwrite(b.samples.data(), sizeof(float), b.samples.size(), stdout);
      std::fflush(stdout);
    };
  }

  net::LiveServer server(plan, config, options);
  server.start();
  std::cerr << "listening: OSC udp " << config.network.bind_address << ':' << server.udp_port() << ", ws "
            << server.ws_port() << '\n';
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const auto start = std::chrono::steady_clock::now();
  while (!g_stop) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    if (o.duration > 0.0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() >= o.duration) {
      break;
    }
  }
  server.stop();
  const auto stats = server.tick_stats();
  std::cerr << "ticks " << stats.count << ", mean " << stats.mean_ms << " ms, max " << stats.max_ms << " ms\n";
  return 0;
}

// ---- report / summarize / stats ----------------------------------------------

struct ReportOptions {
  std::vector<std::string> logs, labels;
  std::string csv, trials;
  double dwell = -1.0;
};

int cmd_report(const ReportOptions& o) {
  if (!o.labels.empty() && o.labels.size() != o.logs.size()) {
    throw Error(ErrorCode::LengthMismatch, "--label must be given once per log");
  }
  std::vector<TrialMetrics> rows;
  std::vector<std::string> groups;
  for (std::size_t i = 0; i < o.logs.size(); ++i) {
    const SessionLog log = read_session(o.logs[i]);
    const double dwell = o.dwell >= 0.0 ? o.dwell : log.config.drill_dwell_s;
    const auto metrics = compute_metrics(log, dwell);
    const std::string label = o.labels.empty() ? fs::path(o.logs[i]).stem().string() : o.labels[i];
    for (const auto& m : metrics) {
      rows.push_back(m);
      groups.push_back(label);
    }
  }
  const Report r = report(rows, groups);
  if (o.csv.empty() || o.csv == "-") {
    std::cout << r.to_csv();
  } else {
    std::ofstream(o.csv) << r.to_csv();
    std::cout << r.to_text();
  }
  if (!o.trials.empty()) std::ofstream(o.trials) << to_csv(metrics_table(rows, groups));
  return 0;
}

struct SummarizeCli {
  std::string csv, out;
  std::vector<std::string> group_by, values, diffs;
  std::string exclude;
  bool text = false;
};

int cmd_summarize(const SummarizeCli& o) {
  SummarizeOptions opts;
  opts.group_by = o.group_by;
  opts.values = o.values;
  opts.exclude_column = o.exclude;
  for (const auto& d : o.diffs) {
    const auto colon = d.find(':');
    if (colon == std::string::npos) throw Error(ErrorCode::InvalidArgument, "--diff expects a:b");
    opts.differences.emplace_back(d.substr(0, colon), d.substr(colon + 1));
  }
  const Summary s = summarize(read_csv(o.csv), opts);
  const std::string body = o.text ? s.to_text() : s.to_csv();
  if (o.out.empty()) {
    std::cout << body;
  } else {
    std::ofstream(o.out) << body;
  }
  return 0;
}

struct StatsCli {
  std::string test = "welch", a, b, column;
  double ei = 0.0, alpha = 0.05;
  bool pooled = false;
};

int cmd_stats(const StatsCli& o) {
  const auto a = read_values(o.a, o.column);
  const auto b = read_values(o.b, o.column);
  const auto model = o.pooled ? stats::VarianceModel::Pooled : stats::VarianceModel::Welch;
  std::cout.precision(10);
  if (o.test == "welch") {
    const auto r = stats::welch_t(a, b, model);
    std::cout << "t=" << r.t << " df=" << r.df << " p=" << r.p << '\n';
  } else if (o.test == "paired") {
    const auto r = stats::paired_t(a, b);
    std::cout << "t=" << r.t << " df=" << r.df << " p=" << r.p << '\n';
  } else if (o.test == "tost") {
    const auto r = stats::tost(a, b, {o.ei, o.ei}, o.alpha, model);
    std::cout << "p_lower=" << r.p_lower << " p_upper=" << r.p_upper << " df=" << r.df
              << " equivalent=" << (r.equivalent ? "true" : "false") << '\n';
  } else if (o.test == "lei") {
    std::cout << "least_ei=" << stats::least_equivalence_interval(a, b, o.alpha, model) << '\n';
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown test '" + o.test + "'");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sononav: auditory 4-DOF alignment engine"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run a scripted scenario through the engine");
  run_cmd->add_option("scenario", run.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("-c,--config", run.config, "Engine config JSON")->check(CLI::ExistingFile);
  run_cmd->add_option("--log", run.log, "Write the session log (relative names go to log_dir)");
  run_cmd->add_option("--metrics", run.metrics, "Write per-target trial metrics CSV");
  run_cmd->add_option("--wav", run.wav, "Render the session to a WAV file");
  run_cmd->add_option("--format", run.format, "WAV sample format: pcm16 or float32");
  run_cmd->add_option("--label", run.label, "Group label for the metrics (default: scenario name)");

  ReplayOptions replay;
  auto* replay_cmd = app.add_subcommand("replay", "Render and/or re-verify a session log");
  replay_cmd->add_option("log", replay.log, "Session log")->required()->check(CLI::ExistingFile);
  replay_cmd->add_option("--wav", replay.wav, "Render the session to a WAV file");
  replay_cmd->add_option("--format", replay.format, "WAV sample format: pcm16 or float32");
  replay_cmd->add_flag("--verify", replay.verify, "Re-run the engine and compare phases and events");

  ServeCli serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the live engine with UDP/OSC ingress and a WebSocket bridge");
  serve_cmd->add_option("-c,--config", serve.config, "Engine config JSON")->check(CLI::ExistingFile);
  serve_cmd->add_option("--plan", serve.plan, "Target plan JSON")->check(CLI::ExistingFile);
  serve_cmd->add_option("--scenario", serve.scenario, "Take the target plan from a scenario file")
      ->check(CLI::ExistingFile);
  serve_cmd->add_option("--bind", serve.bind, "Bind address");
  serve_cmd->add_option("--udp-port", serve.udp_port, "OSC ingress port (0 = ephemeral)");
  serve_cmd->add_option("--ws-port", serve.ws_port, "WebSocket port (0 = ephemeral)");
  serve_cmd->add_option("--osc-out", serve.osc_out, "Send /sononav/params and /sononav/event to host:port");
  serve_cmd->add_option("--log", serve.log, "Write a live session log");
  serve_cmd->add_flag("--audio-stdout", serve.audio_stdout, "Stream mono float32 audio to stdout");
  serve_cmd->add_option("--duration", serve.duration, "Stop after this many seconds (0 = until signalled)");

  ReportOptions rep;
  auto* report_cmd = app.add_subcommand("report", "Summarize trial metrics from session logs as CSV");
  report_cmd->add_option("logs", rep.logs, "Session logs")->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--label", rep.labels, "Group label per log (default: file stem)");
  report_cmd->add_option("--csv", rep.csv, "Summary CSV output (default: stdout)");
  report_cmd->add_option("--trials", rep.trials, "Also write the per-trial metrics CSV");
  report_cmd->add_option("--dwell", rep.dwell, "Drill-start dwell in seconds (default: from the log config)");

  SummarizeCli sum;
  auto* sum_cmd = app.add_subcommand("summarize", "Grouped mean/sd over a CSV table");
  sum_cmd->add_option("csv", sum.csv, "Input CSV")->required()->check(CLI::ExistingFile);
  sum_cmd->add_option("-g,--group-by", sum.group_by, "Grouping column (repeatable)");
  sum_cmd->add_option("-v,--value", sum.values, "Value column (repeatable)");
  sum_cmd->add_option("--diff", sum.diffs, "Pairwise difference column a:b (repeatable)");
  sum_cmd->add_option("--exclude", sum.exclude, "Skip rows where this column is truthy");
  sum_cmd->add_option("-o,--out", sum.out, "Output file (default: stdout)");
  sum_cmd->add_flag("--text", sum.text, "Human-readable output instead of CSV");

  StatsCli st;
  auto* stats_cmd = app.add_subcommand("stats", "Two-sample tests on value files");
  stats_cmd->add_option("test", st.test, "welch, paired, tost or lei")->required();
  stats_cmd->add_option("a", st.a, "Sample A (one value per line, or CSV with --column)")->required();
  stats_cmd->add_option("b", st.b, "Sample B")->required();
  stats_cmd->add_option("--column", st.column, "CSV column holding the values");
  stats_cmd->add_option("--ei", st.ei, "Symmetric equivalence bound for tost");
  stats_cmd->add_option("--alpha", st.alpha, "Significance level");
  stats_cmd->add_flag("--pooled", st.pooled, "Pooled-variance instead of Welch");

  std::string config_path;
  auto* config_cmd = app.add_subcommand("config", "Print the effective engine config (file + environment) as JSON");
  config_cmd->add_option("-c,--config", config_path, "Engine config JSON")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(run);
    if (*replay_cmd) return cmd_replay(replay);
    if (*serve_cmd) return cmd_serve(serve);
    if (*report_cmd) return cmd_report(rep);
    if (*sum_cmd) return cmd_summarize(sum);
    if (*stats_cmd) return cmd_stats(st);
    if (*config_cmd) {
      std::cout << to_json(load_config(config_path)).dump(2) << '\n';
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
