#include "ssid/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "ssid/bench.hpp"
#include "ssid/errors.hpp"
#include "ssid/io.hpp"
#include "ssid/refine.hpp"
#include "ssid/subspace.hpp"
#include "ssid/verify.hpp"

namespace ssid {

namespace {

using nlohmann::json;

// Writes `text` to `path`, or to `out` when path is empty or "-".
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot write '" + path + "'");
  f << text;
}

struct DataArgs {
  std::string data;
  std::string frf;
  std::optional<double> ts;

  void add_to(CLI::App* app) {
    app->add_option("--data", data, "time-series CSV (t,u1..,y1..)");
    app->add_option("--frf", frf, "frequency-response CSV (omega,reG_i_j,imG_i_j..)");
    app->add_option("--ts", ts, "sample time; 0 marks continuous FRF data");
  }

  void check() const {
    if (data.empty() == frf.empty()) {
      throw CLI::ValidationError("exactly one of --data and --frf is required");
    }
  }
};

FixedMatrices parse_fixed(const std::vector<std::string>& names) {
  FixedMatrices f;
  for (const auto& n : names) {
    for (char c : n) {
      switch (c) {
        case 'A': case 'a': f.A = true; break;
        case 'B': case 'b': f.B = true; break;
        case 'C': case 'c': f.C = true; break;
        case 'D': case 'd': f.D = true; break;
        case ',': break;
        default:
          throw CLI::ValidationError("--fix", std::string("unknown matrix '") + c + "'");
      }
    }
  }
  return f;
}

RefineResult run_method(Method m, const StateSpaceModel& model, const DataArgs& d,
                        const RefineOptions& opts) {
  if (!d.data.empty()) {
    const auto data = read_time_series_csv(d.data, d.ts);
    switch (m) {
      case Method::BCD: return bcd_iterate(model, data, opts);
      case Method::GN_BCD: return gauss_newton_bcd(model, data, opts);
      case Method::GN_FULL: return gauss_newton_full(model, data, opts);
    }
  }
  const auto fd = read_frf_csv(d.frf, d.ts);
  switch (m) {
    case Method::BCD: return bcd_iterate(model, fd, opts);
    case Method::GN_BCD: return gauss_newton_bcd(model, fd, opts);
    case Method::GN_FULL: return gauss_newton_full(model, fd, opts);
  }
  throw std::logic_error("unhandled method");
}

// Config-file keys mirror the long flag names with '_' for '-'.
void apply_bench_json(const json& j, BenchConfig& c) {
  if (!j.is_object()) throw FormatError("config: expected a JSON object");
  static const std::vector<std::string> known = {
      "trials", "order", "nu", "ny", "n_samples", "n_freq", "freq_max", "noise",
      "seed", "threads", "max_sweeps", "tol", "feedthrough"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw FormatError("config: unknown field '" + key + "'");
    }
    const bool is_int = key != "freq_max" && key != "noise" && key != "tol" &&
                        key != "feedthrough";
    if (key == "feedthrough" ? !value.is_boolean()
                             : (is_int ? !value.is_number_integer() : !value.is_number())) {
      throw FormatError("config: field '" + key + "' has the wrong type");
    }
  }
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("trials", c.trials);
  get("order", c.order);
  get("nu", c.nu);
  get("ny", c.ny);
  get("n_samples", c.n_samples);
  get("n_freq", c.n_freq);
  get("freq_max", c.freq_max);
  get("noise", c.noise);
  get("seed", c.seed);
  get("threads", c.threads);
  get("max_sweeps", c.max_sweeps);
  get("tol", c.rel_tol);
  get("feedthrough", c.feedthrough);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"State-space identification by subspace fits and refinement"};
  app.require_subcommand(1);

  // fit
  auto* fit = app.add_subcommand("fit", "subspace fit, optionally refined");
  DataArgs fit_data;
  fit_data.add_to(fit);
  int fit_order = 0, fit_horizon = 0;
  std::string fit_refine = "none", fit_out, fit_report;
  fit->add_option("--order", fit_order, "model order")->required()->check(CLI::PositiveNumber);
  fit->add_option("--horizon", fit_horizon, "Hankel block rows (0 = 2n+2)");
  fit->add_option("--refine", fit_refine, "none|bcd|gn-bcd|gn-full")
      ->check(CLI::IsMember({"none", "bcd", "gn-bcd", "gn-full"}));
  fit->add_option("--out", fit_out, "model JSON output (default stdout)");
  fit->add_option("--report", fit_report, "refinement report JSON");

  // refine
  auto* refine = app.add_subcommand("refine", "refine a model against data");
  DataArgs ref_data;
  ref_data.add_to(refine);
  std::string ref_model, ref_method = "bcd", ref_out, ref_report;
  std::vector<std::string> ref_fix;
  RefineOptions ref_opts;
  refine->add_option("--model", ref_model, "initial model JSON")->required();
  refine->add_option("--method", ref_method, "bcd|gn-bcd|gn-full")
      ->check(CLI::IsMember({"bcd", "gn-bcd", "gn-full"}));
  refine->add_option("--fix", ref_fix, "matrices held fixed, e.g. A or A,D");
  refine->add_option("--max-sweeps", ref_opts.max_sweeps, "sweep limit")
      ->check(CLI::PositiveNumber);
  refine->add_option("--tol", ref_opts.rel_tol, "relative decrease tolerance")
      ->check(CLI::NonNegativeNumber);
  refine->add_option("--out", ref_out, "refined model JSON");
  refine->add_option("--report", ref_report, "report JSON");

  // bench
  auto* bench = app.add_subcommand("bench", "Monte Carlo comparison of mn, mpBC and mp");
  std::string bench_kind, bench_out, bench_summary, bench_config;
  bench->add_option("kind", bench_kind, "td (time domain) or fd (frequency domain)")
      ->required()
      ->check(CLI::IsMember({"td", "fd"}));
  bench->add_option("--config", bench_config, "JSON file with bench settings");
  BenchConfig flags;
  auto* o_trials = bench->add_option("--trials", flags.trials)->check(CLI::PositiveNumber);
  auto* o_order = bench->add_option("--order", flags.order)->check(CLI::PositiveNumber);
  auto* o_nu = bench->add_option("--nu", flags.nu)->check(CLI::PositiveNumber);
  auto* o_ny = bench->add_option("--ny", flags.ny)->check(CLI::PositiveNumber);
  auto* o_ns = bench->add_option("--n-samples", flags.n_samples)->check(CLI::PositiveNumber);
  auto* o_nf = bench->add_option("--n-freq", flags.n_freq)->check(CLI::PositiveNumber);
  auto* o_fmax = bench->add_option("--freq-max", flags.freq_max);
  auto* o_noise = bench->add_option("--noise", flags.noise,
                                    "additive std (td) or multiplicative fraction (fd)");
  auto* o_seed = bench->add_option("--seed", flags.seed);
  auto* o_threads = bench->add_option("--threads", flags.threads, "0 = all cores");
  auto* o_sweeps = bench->add_option("--max-sweeps", flags.max_sweeps)->check(CLI::PositiveNumber);
  auto* o_tol = bench->add_option("--tol", flags.rel_tol);
  bench->add_option("--out", bench_out, "records CSV (default stdout)");
  bench->add_option("--summary", bench_summary, "summary JSON");

  // verify
  auto* verify = app.add_subcommand("verify", "randomized property checks");
  std::string ver_property, ver_out;
  int ver_trials = 100;
  std::uint64_t ver_seed = 0;
  std::vector<std::string> choices = property_names();
  choices.emplace_back("all");
  verify->add_option("--property", ver_property)->required()->check(CLI::IsMember(choices));
  verify->add_option("--trials", ver_trials)->check(CLI::PositiveNumber);
  verify->add_option("--seed", ver_seed);
  verify->add_option("--out", ver_out, "JSON output (default stdout)");

  // compare
  auto* compare = app.add_subcommand("compare", "normalized cost trajectories of the three optimizers");
  DataArgs cmp_data;
  cmp_data.add_to(compare);
  std::string cmp_model, cmp_out;
  int cmp_steps = 0;
  RefineOptions cmp_opts;
  compare->add_option("--model", cmp_model, "initial model JSON")->required();
  compare->add_option("--max-sweeps", cmp_opts.max_sweeps)->check(CLI::PositiveNumber);
  compare->add_option("--tol", cmp_opts.rel_tol)->check(CLI::NonNegativeNumber);
  compare->add_option("--steps", cmp_steps, "rows in the output (default max-sweeps)");
  compare->add_option("--out", cmp_out, "trajectory CSV (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    if (fit->parsed()) fit_data.check();
    if (refine->parsed()) ref_data.check();
    if (compare->parsed()) cmp_data.check();
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (fit->parsed()) {
    SubspaceOptions sopts;
    sopts.order = fit_order;
    sopts.horizon = fit_horizon;
    StateSpaceModel model = !fit_data.data.empty()
        ? subspace_time(read_time_series_csv(fit_data.data, fit_data.ts), sopts)
        : subspace_freq(read_frf_csv(fit_data.frf, fit_data.ts), sopts);
    if (fit_refine != "none") {
      const auto res = run_method(method_from_string(fit_refine), model, fit_data, {});
      model = res.model;
      if (!fit_report.empty()) emit(fit_report, report_to_json(res.report).dump(2) + "\n", out);
    }
    emit(fit_out, model_to_json(model).dump(2) + "\n", out);
    return kExitOk;
  }

  if (refine->parsed()) {
    ref_opts.fixed = parse_fixed(ref_fix);
    const auto model = read_model(ref_model);
    const auto res = run_method(method_from_string(ref_method), model, ref_data, ref_opts);
    const auto rep = report_to_json(res.report);
    if (ref_out.empty() && ref_report.empty()) {
      emit("", json{{"model", model_to_json(res.model)}, {"report", rep}}.dump(2) + "\n", out);
    } else {
      if (!ref_out.empty()) emit(ref_out, model_to_json(res.model).dump(2) + "\n", out);
      emit(ref_report, rep.dump(2) + "\n", out);
    }
    return kExitOk;
  }

  if (bench->parsed()) {
    BenchConfig cfg = bench_kind == "td" ? BenchConfig{} : BenchConfig::frequency_defaults();
    if (!bench_config.empty()) {
      std::ifstream f(bench_config);
      if (!f) throw FormatError("cannot open '" + bench_config + "'");
      json j;
      try {
        f >> j;
      } catch (const json::exception& e) {
        throw FormatError(bench_config + ": " + e.what());
      }
      apply_bench_json(j, cfg);
    }
    if (o_trials->count()) cfg.trials = flags.trials;
    if (o_order->count()) cfg.order = flags.order;
    if (o_nu->count()) cfg.nu = flags.nu;
    if (o_ny->count()) cfg.ny = flags.ny;
    if (o_ns->count()) cfg.n_samples = flags.n_samples;
    if (o_nf->count()) cfg.n_freq = flags.n_freq;
    if (o_fmax->count()) cfg.freq_max = flags.freq_max;
    if (o_noise->count()) cfg.noise = flags.noise;
    if (o_seed->count()) cfg.seed = flags.seed;
    if (o_threads->count()) cfg.threads = flags.threads;
    if (o_sweeps->count()) cfg.max_sweeps = flags.max_sweeps;
    if (o_tol->count()) cfg.rel_tol = flags.rel_tol;
    cfg.validate();
    const auto records = run_bench(cfg);
    std::ostringstream csv;
    write_records_csv(csv, records);
    emit(bench_out, csv.str(), out);
    if (!bench_summary.empty()) {
      json s = json::object();
      try {
        s = summary_to_json(summarize(records));
      } catch (const std::invalid_argument&) {
        s = {{"medians", nullptr}, {"win_pct", nullptr},
             {"failures", static_cast<int>(records.size())}, {"successes", 0}};
      }
      emit(bench_summary, s.dump(2) + "\n", out);
    }
    return kExitOk;
  }

  if (verify->parsed()) {
    std::vector<std::string> names;
    if (ver_property == "all") {
      names = property_names();
    } else {
      names.push_back(ver_property);
    }
    json result = json::array();
    bool all_pass = true;
    for (const auto& n : names) {
      const auto rep = verify_property(n, ver_trials, ver_seed);
      all_pass = all_pass && rep.pass;
      result.push_back(property_report_to_json(rep));
    }
    const json doc = names.size() == 1 ? result[0] : result;
    emit(ver_out, doc.dump(2) + "\n", out);
    return all_pass ? kExitOk : kExitNumerical;
  }

  if (compare->parsed()) {
    const auto model = read_model(cmp_model);
    const auto cmp = !cmp_data.data.empty()
        ? compare_optimizers(model, read_time_series_csv(cmp_data.data, cmp_data.ts), cmp_opts)
        : compare_optimizers(model, read_frf_csv(cmp_data.frf, cmp_data.ts), cmp_opts);
    const int steps = cmp_steps > 0 ? cmp_steps : cmp_opts.max_sweeps;
    std::ostringstream csv;
    csv << "step,bcd,gn_bcd,gn_full\n";
    const auto rows = cmp.normalized(steps);
    for (std::size_t s = 0; s < rows.size(); ++s) {
      csv << s;
      for (double v : rows[s]) csv << ',' << format_double(v);
      csv << '\n';
    }
    emit(cmp_out, csv.str(), out);
    return kExitOk;
  }
  return kExitUsage;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return run(args, out, err);
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace ssid
