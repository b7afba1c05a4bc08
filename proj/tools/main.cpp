#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "manifest.hpp"
#include "trinet/analysis.hpp"
#include "trinet/entropic.hpp"
#include "trinet/error.hpp"
#include "trinet/events.hpp"
#include "trinet/neural.hpp"
#include "trinet/quantum.hpp"
#include "trinet/witness.hpp"

using namespace trinet;
using cli::RunManifest;
using json = nlohmann::ordered_json;

namespace {

constexpr int kClassical = 0;
constexpr int kFailure = 1;
constexpr int kNonclassical = 10;
constexpr int kAmbiguous = 20;

std::size_t thread_count() {
  if (const char* env = std::getenv("TRINET_THREADS")) {
    try {
      const long n = std::stol(env);
      if (n > 0) return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
    }
    throw DomainError("TRINET_THREADS must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

json report_json(const WitnessReport& r) {
  json j{{"value", r.value}, {"trials", r.trials}, {"seed", r.seed}};
  if (r.std_error_defined) {
    j["std_error"] = r.std_error;
    j["sigmas"] = r.sigmas;
  }
  return j;
}

std::string csv_text(const std::function<void(std::ostream&)>& write) {
  std::ostringstream os;
  write(os);
  return os.str();
}

struct PipelineOptions {
  PipelineConfig cfg;
  std::vector<double> background{20.0};

  void add(CLI::App* app, double default_duration) {
    cfg.duration = default_duration;
    app->add_option("--duration", cfg.duration, "simulated seconds");
    app->add_option("--w1-ps", cfg.w1, "two-fold window in picoseconds");
    app->add_option("--w2-ps", cfg.w2, "six-fold window in picoseconds");
    app->add_option("--trial-rate", cfg.trial_rate, "Hz of joint emissions drawn from the distribution");
    app->add_option("--trial-spread-ps", cfg.trial_spread, "spread of a trial's emission times");
    app->add_option("--background-rate", background, "Hz of uncorrelated pairs, one value or one per source")
        ->delimiter(',')
        ->expected(1, 3);
    app->add_option("--dark-rate", cfg.dark_rate, "dark counts per detector channel in Hz");
    app->add_option("--efficiency", cfg.efficiency, "detection probability per photon");
    app->add_option("--jitter-ps", cfg.jitter, "Gaussian timing jitter");
    app->add_option("--resolution-ps", cfg.resolution, "time-tagger resolution");
    app->add_option("--chunk", cfg.chunk, "seconds synthesized per chunk");
    app->add_option("--seed", cfg.seed, "synthesis seed");
  }

  PipelineConfig resolved() const {
    auto c = cfg;
    if (background.size() == 1) c.background_rates.fill(background.front());
    else if (background.size() == 3) std::copy(background.begin(), background.end(), c.background_rates.begin());
    else throw DomainError("--background-rate takes one value or three");
    c.validate();
    return c;
  }
};

void add_oracle_options(CLI::App* app, OracleConfig& o) {
  app->add_option("--batch", o.batch, "latent samples per epoch");
  app->add_option("--epochs", o.max_epochs, "maximum epochs");
  app->add_option("--lr", o.learning_rate, "Adam learning rate");
  app->add_option("--patience", o.patience, "epochs without improvement before stopping");
  app->add_option("--eval-interval", o.eval_interval, "epochs between evaluations");
  app->add_option("--final-eval-batch", o.final_eval_batch, "latent samples behind the reported MSE");
  app->add_option("--seed", o.seed, "training seed");
}

std::vector<double> default_visibility_grid() {
  std::vector<double> g;
  for (int k = 0; k <= 10; ++k) g.push_back(k / 10.0);
  return g;
}

json sweep_summary(const SweepResult& r) {
  json j{{"grid", r.grid}, {"ensemble_min_mse", r.ensemble_min}, {"best_architecture", r.best_architecture}};
  j["knee"] = r.knee ? json(*r.knee) : json(nullptr);
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonclassicality tests for the triangle network: inflation LP, entropic witness, neural oracle, "
               "detector event pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();

  std::string manifest_path;
  std::function<int(const CLI::App&)> action;
  std::string command;
  auto add_command = [&](CLI::App* parent, const std::string& name, const std::string& help) {
    auto* sub = parent->add_subcommand(name, help);
    sub->add_option("--manifest", manifest_path, "where to write the run manifest");
    return sub;
  };

  // fritz
  double visibility = 1.0, anticorr = 0.0;
  std::string out, dist_path, cert_out, report_out, counts_path, summary_out, cert_path, events_out, counts_out,
      events_path;
  auto* fritz = add_command(&app, "fritz", "Born-rule distribution of the Fritz model");
  fritz->add_option("--visibility", visibility, "singlet visibility in [0,1]");
  fritz->add_option("--anticorr", anticorr, "anticorrelation probability of the classical sources");
  fritz->add_option("--out", out, "distribution JSON (standard output when omitted)");
  fritz->callback([&] {
    command = "fritz";
    action = [&](const CLI::App& self) {
      RunManifest m(command, self);
      const auto p = born_rule(fritz_model(visibility, anticorr));
      if (out.empty()) {
        auto j = json::parse(to_json(p));
        j["manifest_hash"] = m.hash();
        std::cout << j.dump(1) << '\n';
      } else {
        m.write_json(out, json::parse(to_json(p)));
      }
      m.finish(manifest_path);
      return kClassical;
    };
  });

  // inflation-test
  std::string mode = "adapted";
  bool allow_large = false, exact = true;
  std::size_t mc_trials = kDefaultMcTrials;
  std::uint64_t mc_seed = 0;
  double min_sigmas = 3.0;
  auto* inflation = add_command(&app, "inflation-test", "second-order inflation LP feasibility test");
  inflation->add_option("--dist", dist_path, "distribution JSON")->required()->check(CLI::ExistingFile);
  inflation->add_option("--mode", mode, "LP reduction")->check(CLI::IsMember({"full", "twirled", "adapted"}));
  inflation->add_option("--cert-out", cert_out, "certificate JSON, written when infeasible");
  inflation->add_option("--report-out", report_out, "solve report JSON (standard output when omitted)");
  inflation->add_option("--counts", counts_path, "counts JSON for a Poissonian error on V")->check(CLI::ExistingFile);
  inflation->add_option("--mc-trials", mc_trials, "Monte-Carlo resamples");
  inflation->add_option("--seed", mc_seed, "Monte-Carlo seed");
  inflation->add_flag("--allow-large,!--no-allow-large", allow_large, "permit full mode at d = 4");
  inflation->add_flag("--exact,!--no-exact", exact, "rational re-verification of the certificate");
  inflation->callback([&] {
    command = "inflation-test";
    action = [&](const CLI::App& self) {
      RunManifest m(command, self);
      const auto p = distribution_from_json(m.read_input(dist_path));
      std::optional<std::vector<std::uint64_t>> counts;
      if (!counts_path.empty()) counts = counts_from_json(m.read_input(counts_path));
      AssembleOptions assemble;
      assemble.allow_large = allow_large;
      const auto t = inflation_test(p, lp_mode_from_string(mode), assemble);
      json report{{"status", std::string(to_string(t.lp.status))},
                  {"mode", mode},
                  {"d", p.variables()[0].cardinality},
                  {"rows", t.rows},
                  {"columns", t.columns},
                  {"objective", t.lp.objective},
                  {"iterations", t.lp.iterations}};
      int code = t.lp.status == LpStatus::Feasible ? kClassical : kAmbiguous;
      if (t.certificate) {
        const auto& cert = *t.certificate;
        const double v = evaluate(cert, p);
        report["V"] = v;
        report["margin"] = cert.margin;
        report["min_slack"] = cert.min_slack;
        std::optional<ExactVerification> ev;
        if (exact) {
          ev = verify_exact(cert, p);
          report["exact_valid"] = ev->valid;
        }
        if (counts) report["poisson_mc"] = report_json(poisson_mc_error(cert, *counts, mc_trials, mc_seed));
        if (!cert_out.empty()) m.write_json(cert_out, json::parse(to_json(cert, ev ? &*ev : nullptr)));
        code = v < 0.0 ? kNonclassical : kAmbiguous;
      }
      if (report_out.empty()) {
        report["manifest_hash"] = m.hash();
        std::cout << report.dump(1) << '\n';
      } else {
        m.write_json(report_out, report);
      }
      m.finish(manifest_path);
      return code;
    };
  });

  // entropic-test
  auto* entropic = add_command(&app, "entropic-test", "entropic witness E = 2 - S_CHSH + sqrt(16 Theta / log2 e)");
  auto* ent_dist = entropic->add_option("--dist", dist_path, "distribution JSON")->check(CLI::ExistingFile);
  entropic->add_option("--counts", counts_path, "counts JSON; adds a Poissonian error")
      ->check(CLI::ExistingFile)
      ->excludes(ent_dist);
  entropic->add_option("--out", out, "report JSON (standard output when omitted)");
  entropic->add_option("--mc-trials", mc_trials, "Monte-Carlo resamples");
  entropic->add_option("--min-sigmas", min_sigmas, "sigmas required to call a violation");
  entropic->add_option("--seed", mc_seed, "Monte-Carlo seed");
  entropic->callback([&] {
    command = "entropic-test";
    action = [&](const CLI::App& self) {
      if (dist_path.empty() && counts_path.empty()) throw DomainError("entropic-test needs --dist or --counts");
      RunManifest m(command, self);
      std::optional<std::vector<std::uint64_t>> counts;
      std::optional<OutcomeDistribution> p;
      if (!counts_path.empty()) {
        counts = counts_from_json(m.read_input(counts_path));
        p = from_counts(triangle_variables(), *counts);
      } else {
        p = distribution_from_json(m.read_input(dist_path));
      }
      const auto r = entropic_witness(*p);
      auto j = json::parse(to_json(r));
      int code = r.e < 0.0 ? kNonclassical : kClassical;
      if (counts) {
        const auto mc = entropic_mc_error(*counts, mc_trials, mc_seed);
        j["poisson_mc"] = report_json(mc);
        if (r.e < 0.0 && !violates(mc, min_sigmas)) code = kAmbiguous;
      }
      if (out.empty()) {
        j["manifest_hash"] = m.hash();
        std::cout << j.dump(1) << '\n';
      } else {
        m.write_json(out, j);
      }
      m.finish(manifest_path);
      return code;
    };
  });

  // ml-test
  OracleConfig oracle;
  std::vector<double> grid;
  auto* ml = add_command(&app, "ml-test", "neural-oracle fits of mixtures of the distribution with white noise");
  ml->add_option("--dist", dist_path, "distribution JSON")->required()->check(CLI::ExistingFile);
  ml->add_option("--grid", grid, "visibilities (default 0, 0.1, ..., 1)")->delimiter(',');
  ml->add_option("--out", out, "per-architecture CSV")->required();
  ml->add_option("--summary-out", summary_out, "summary JSON with the knee");
  add_oracle_options(ml, oracle);
  ml->callback([&] {
    command = "ml-test";
    action = [&](const CLI::App& self) {
      RunManifest m(command, self);
      const auto p = distribution_from_json(m.read_input(dist_path));
      if (grid.empty()) grid = default_visibility_grid();
      const auto configs = ensemble_configs(oracle);
      const auto r = visibility_sweep(p, grid, configs, thread_count());
      m.write_csv(out, csv_text([&](std::ostream& os) { r.write_csv(os); }));
      if (!summary_out.empty()) m.write_json(summary_out, sweep_summary(r));
      std::cout << "knee: " << (r.knee ? std::to_string(*r.knee) : std::string("none")) << '\n';
      m.finish(manifest_path);
      return r.knee ? kNonclassical : kClassical;
    };
  });

  // events
  PipelineOptions pipeline;
  auto* events = app.add_subcommand("events", "detector event streams");
  events->require_subcommand(1);
  auto* simulate = add_command(events, "simulate", "synthesize time-tagged events from a distribution");
  simulate->add_option("--dist", dist_path, "distribution JSON over quaternary a, b, c")
      ->required()
      ->check(CLI::ExistingFile);
  simulate->add_option("--events-out", events_out, "event CSV (the whole run is held in memory)");
  simulate->add_option("--counts-out", counts_out, "six-fold counts JSON");
  pipeline.add(simulate, 60.0);
  simulate->callback([&] {
    command = "events simulate";
    action = [&](const CLI::App& self) {
      if (events_out.empty() && counts_out.empty()) throw DomainError("give --events-out and/or --counts-out");
      RunManifest m(command, self);
      const auto p = distribution_from_json(m.read_input(dist_path));
      const auto cfg = pipeline.resolved();
      std::vector<std::uint64_t> counts(64, 0);
      std::uint64_t sixfolds = 0;
      if (!events_out.empty()) {
        const auto streams = synthesize(p, cfg);
        m.write_csv(events_out, csv_text([&](std::ostream& os) { write_events_csv(os, streams); }));
        for (const auto& e : sixfold_coincidences(twofold_coincidences(streams, cfg.w1), cfg.w2)) {
          ++counts[e.outcome_index()];
          ++sixfolds;
        }
      } else {
        const auto run = run_pipeline(p, cfg);
        counts = run.counts;
        sixfolds = run.sixfolds;
      }
      if (!counts_out.empty())
        m.write_json(counts_out, {{"sixfolds", sixfolds}, {"counts", json::parse(counts_to_json(counts))}});
      std::cout << "six-folds: " << sixfolds << '\n';
      m.finish(manifest_path);
      return kClassical;
    };
  });
  auto* analyze = add_command(events, "analyze", "reduce an event CSV to six-fold counts");
  analyze->add_option("--events", events_path, "event CSV")->required()->check(CLI::ExistingFile);
  analyze->add_option("--w1-ps", pipeline.cfg.w1, "two-fold window in picoseconds");
  analyze->add_option("--w2-ps", pipeline.cfg.w2, "six-fold window in picoseconds");
  analyze->add_option("--counts-out", counts_out, "counts JSON (standard output when omitted)");
  analyze->callback([&] {
    command = "events analyze";
    action = [&](const CLI::App& self) {
      RunManifest m(command, self);
      std::istringstream in(m.read_input(events_path));
      const auto streams = read_events_csv(in);
      if (!(pipeline.cfg.w1 >= 0 && pipeline.cfg.w1 < pipeline.cfg.w2))
        throw DomainError("windows must satisfy 0 <= w1 < w2");
      const auto six = sixfold_coincidences(twofold_coincidences(streams, pipeline.cfg.w1), pipeline.cfg.w2);
      std::vector<std::uint64_t> counts(64, 0);
      for (const auto& e : six) ++counts[e.outcome_index()];
      const json body{{"sixfolds", six.size()}, {"counts", json::parse(counts_to_json(counts))}};
      if (counts_out.empty()) {
        auto j = body;
        j["manifest_hash"] = m.hash();
        std::cout << j.dump(1) << '\n';
      } else {
        m.write_json(counts_out, body);
      }
      m.finish(manifest_path);
      return kClassical;
    };
  });

  // sweep
  std::string kind;
  PipelineOptions sweep_pipeline;
  OracleConfig sweep_oracle;
  auto* sweep = add_command(&app, "sweep", "coincidence-window or visibility sweeps");
  sweep->add_option("--kind", kind, "w1, w2 or visibility")->required()->check(CLI::IsMember({"w1", "w2", "visibility"}));
  sweep->add_option("--dist", dist_path, "distribution JSON")->required()->check(CLI::ExistingFile);
  sweep->add_option("--grid", grid, "window values in ps, or visibilities")->delimiter(',');
  sweep->add_option("--cert", cert_path, "certificate JSON for window sweeps (default: derived from --dist)")
      ->check(CLI::ExistingFile);
  sweep->add_option("--out", out, "sweep CSV")->required();
  sweep->add_option("--summary-out", summary_out, "summary JSON");
  sweep->add_option("--mc-trials", mc_trials, "Monte-Carlo resamples per window");
  sweep->add_option("--mc-seed", mc_seed, "Monte-Carlo seed");
  sweep_pipeline.add(sweep, 3600.0);
  sweep->add_option("--batch", sweep_oracle.batch, "latent samples per epoch");
  sweep->add_option("--epochs", sweep_oracle.max_epochs, "maximum epochs");
  sweep->add_option("--lr", sweep_oracle.learning_rate, "Adam learning rate");
  sweep->add_option("--patience", sweep_oracle.patience, "epochs without improvement before stopping");
  sweep->callback([&] {
    command = "sweep";
    action = [&](const CLI::App& self) {
      RunManifest m(command, self);
      const auto p = distribution_from_json(m.read_input(dist_path));
      if (kind == "visibility") {
        if (grid.empty()) grid = default_visibility_grid();
        sweep_oracle.seed = sweep_pipeline.cfg.seed;
        const auto r = visibility_sweep(p, grid, ensemble_configs(sweep_oracle), thread_count());
        m.write_csv(out, csv_text([&](std::ostream& os) {
                      os << "v,min_mse,best_arch_id\n" << std::setprecision(10);
                      for (std::size_t g = 0; g < r.grid.size(); ++g)
                        os << r.grid[g] << ',' << r.ensemble_min[g] << ',' << r.best_architecture[g] << '\n';
                    }));
        if (!summary_out.empty()) m.write_json(summary_out, sweep_summary(r));
        std::cout << "knee: " << (r.knee ? std::to_string(*r.knee) : std::string("none")) << '\n';
        m.finish(manifest_path);
        return kClassical;
      }
      std::optional<Certificate> cert;
      if (!cert_path.empty()) cert = certificate_from_json(m.read_input(cert_path));
      const auto cfg = sweep_pipeline.resolved();
      if (!cert) {
        cert = inflation_test(p, LpMode::Adapted).certificate;
        if (!cert) throw StateError("the distribution is inflation-feasible; no certificate to sweep with");
      }
      const bool by_w1 = kind == "w1";
      if (grid.empty()) {
        grid = by_w1 ? std::vector<double>{4.1e3, 1e5, 1e6, 3e6, 6e6, 1e7, 1.5e7, 1.9e7}
                     : std::vector<double>{1e6, 2e6, 5e6, 1e7, 2e7, 5e7};
      }
      std::vector<Windows> windows;
      for (double g : grid) {
        const auto value = static_cast<Picoseconds>(std::llround(g));
        windows.push_back(by_w1 ? Windows{value, cfg.w2} : Windows{cfg.w1, value});
      }
      const auto points = window_sweep(p, cfg, windows, *cert, mc_trials, mc_seed);
      m.write_csv(out, csv_text([&](std::ostream& os) { write_window_csv(os, points); }));
      const auto v_points = inflation_points(points, by_w1);
      json summary{{"kind", kind}, {"V_trend", std::string(to_string(classify_trend(v_points)))}};
      json crossings = json::array();
      for (std::size_t i = 1; i < points.size(); ++i) {
        const auto& a = points[i - 1].entropic;
        const auto& b = points[i].entropic;
        if (a && b && (a->value < 0.0) != (b->value < 0.0)) crossings.push_back(grid[i]);
      }
      summary["E_sign_changes_at"] = crossings;
      if (!summary_out.empty()) m.write_json(summary_out, summary);
      std::cout << "V trend: " << to_string(classify_trend(v_points)) << '\n';
      m.finish(manifest_path);
      return kClassical;
    };
  });

  app.config_formatter(std::make_shared<cli::JsonConfig>(cli::command_path(app, argc, argv)));
  app.set_config("--config", "", "JSON option file or run manifest; command-line values take precedence");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    const CLI::App* leaf = &app;
    while (!leaf->get_subcommands().empty()) leaf = leaf->get_subcommands().front();
    return action(*leaf);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}
