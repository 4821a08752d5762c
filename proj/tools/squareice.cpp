// Command-line front end: exact counts and probabilities, sampling, Monte
// Carlo estimates, parameter scans and the verification suites.

#include <cstdlib>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "squareice/verify.hpp"

using namespace squareice;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

std::vector<int> parse_int_list(const Json& j, const char* key) {
  if (j.is_number_integer()) return {j.get<int>()};
  if (j.is_array()) return j.get<std::vector<int>>();
  if (!j.is_string()) throw InvalidArgument(std::string(key) + " must be an integer list");
  std::vector<int> out;
  std::stringstream ss(j.get<std::string>());
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw InvalidArgument(std::string("bad integer '") + item + "' in " + key);
    }
  }
  if (out.empty()) throw InvalidArgument(std::string(key) + " is empty");
  return out;
}

/// A JSON value given as inline text or as a path to a file.
Json json_argument(const std::string& s) {
  auto first = s.find_first_not_of(" \t\n");
  if (first != std::string::npos && (s[first] == '{' || s[first] == '[')) {
    try {
      return Json::parse(s);
    } catch (const Json::parse_error& e) {
      throw InvalidArgument(std::string("invalid inline JSON: ") + e.what());
    }
  }
  return read_json_file(s);
}

Instance load_instance(const Json& cfg) {
  if (!cfg.contains("instance")) throw InvalidArgument("this command needs --instance");
  const Json& j = cfg.at("instance");
  if (j.is_string()) {
    auto s = j.get<std::string>();
    if (s.ends_with(".json") || s.find('{') != std::string::npos) return instance_from_json(json_argument(s));
    return named_instance(s);
  }
  return instance_from_json(j);
}

EventSpec load_event(const Json& cfg, const Instance& inst) {
  if (!cfg.contains("event")) throw InvalidArgument("this command needs --event");
  const Json& j = cfg.at("event");
  return event_from_json(j.is_string() ? json_argument(j.get<std::string>()) : j, inst);
}

/// Half the larger side of the bounding box (the torus period for tori).
long domain_scale(const Domain& d) {
  if (auto n = d.torus_period()) return *n;
  int x0 = INT_MAX, x1 = INT_MIN, y0 = INT_MAX, y1 = INT_MIN;
  for (auto v : d.vertices()) {
    x0 = std::min(x0, v.x);
    x1 = std::max(x1, v.x);
    y0 = std::min(y0, v.y);
    y1 = std::max(y1, v.y);
  }
  return std::max(1, (std::max(x1 - x0, y1 - y0) + 1) / 2);
}

struct Runner {
  Json cfg;
  std::string command;
  std::string target;
  int threads = 1;

  std::uint64_t seed() const { return cfg.value("seed", std::uint64_t{0}); }

  /// The chain settings for an instance of size n: `fallback(n)` with any
  /// chain keys from the config laid over it.
  ChainConfig chain_for(long n, ChainConfig (*fallback)(long, std::uint64_t)) const {
    ChainConfig c = fallback(n, seed());
    if (cfg.contains("chain")) update_chain_config(c, cfg.at("chain"));
    c.seed = seed();
    c.validate();
    return c;
  }

  RunConfig run_config(const ChainConfig& c) const {
    RunConfig rc;
    rc.chain = c;
    rc.chains = cfg.value("chains", 8);
    rc.threads = threads;
    rc.use_oracle = cfg.value("use_oracle", true);
    rc.oracle_max_free = cfg.value("oracle_max_free", 20);
    rc.validate();
    return rc;
  }

  bool json_format() const {
    auto f = cfg.value("format", std::string());
    if (f.empty()) return cfg.value("out", std::string()).ends_with(".json");
    if (f != "csv" && f != "json") throw InvalidArgument("format is csv or json");
    return f == "json";
  }

  /// Writes the artifact to --out (atomically) or to stdout.
  void emit(const CsvTable& csv, const Json& json) const {
    std::string body = json_format() ? json.dump(2) + "\n" : csv.str();
    auto out = cfg.value("out", std::string());
    if (out.empty() || out == "-") std::cout << body;
    else write_atomic(out, body);
  }

  // --- commands -------------------------------------------------------------

  int count() {
    auto inst = load_instance(cfg);
    auto bc = detail::effective_bc(*inst.domain, inst.bc);
    ExactLimits lim;
    auto n = transfer_count(inst.domain, bc, lim);
    std::cout << n << "\n";
    if (cfg.contains("out")) {
      CsvTable t({"instance", "count"});
      t.row() << inst.name << n.str();
      emit(t, Json{{"schema", kSchemaVersion}, {"instance", inst.name}, {"count", n.str()}});
    }
    return kExitOk;
  }

  int prob() {
    auto inst = load_instance(cfg);
    auto spec = load_event(cfg, inst);
    auto bc = detail::effective_bc(*inst.domain, inst.bc);
    auto p = exact_event_prob(inst.domain, bc, spec);
    std::cout << p << " (" << format_number(p.convert_to<double>()) << ")\n";
    if (cfg.contains("out")) {
      CsvTable t({"instance", "event", "probability", "decimal"});
      t.row() << inst.name << describe(spec) << detail::rational_string(p) << p.convert_to<double>();
      emit(t, Json{{"schema", kSchemaVersion},
                   {"instance", inst.name},
                   {"event", event_json(spec)},
                   {"probability", detail::rational_string(p)},
                   {"decimal", p.convert_to<double>()}});
    }
    return kExitOk;
  }

  int sample() {
    auto inst = load_instance(cfg);
    auto bc = detail::effective_bc(*inst.domain, inst.bc);
    long count = cfg.value("samples", 1L);
    if (count < 1) throw InvalidArgument("samples must be positive");
    std::vector<HeightFunction> out;
    if (cfg.value("exact", false)) {
      ExactSampler sampler(inst.domain, bc);
      std::mt19937_64 rng(derive_seed(seed(), 0, "sample"));
      for (long i = 0; i < count; ++i) out.push_back(sampler(rng));
    } else {
      auto c = chain_for(domain_scale(*inst.domain), default_chain_config);
      c.sweeps = c.burn_in + count * c.thin;
      run_chain(detail::initial_state(inst.domain, bc, InitKind::Flat), bc, c,
                [&](const HeightFunction& h, long) { out.push_back(h); });
    }
    CsvTable t({"sample", "x", "y", "h"});
    Json samples = Json::array();
    for (std::size_t s = 0; s < out.size(); ++s) {
      for (int i = 0; i < static_cast<int>(inst.domain->size()); ++i) {
        auto v = inst.domain->vertex(i);
        t.row() << s << v.x << v.y << out[s][i];
      }
      samples.push_back(heights_json(out[s]));
    }
    emit(t, Json{{"schema", kSchemaVersion}, {"instance", instance_json(inst)}, {"samples", samples}});
    return kExitOk;
  }

  static std::vector<std::string> event_columns() {
    return {"label", "trials", "hits", "p_hat", "std_err", "chain_std_err", "chains", "split_rhat", "exact", "exact_value",
            "seed"};
  }
  static void event_cells(CsvTable::Row& r, const EventStats& s) {
    r << s.label << s.trials << s.hits << s.p_hat << s.std_err << s.chain_std_err << s.chains << s.split_rhat << s.exact
      << (s.exact_value ? detail::rational_string(*s.exact_value) : std::string()) << s.seed;
  }
  static Json event_stats_json(const EventStats& s) {
    Json j{{"label", s.label},          {"trials", s.trials}, {"hits", s.hits},
           {"p_hat", s.p_hat},          {"std_err", s.std_err},
           {"chain_std_err", std::isnan(s.chain_std_err) ? Json(nullptr) : Json(s.chain_std_err)},
           {"chains", s.chains},
           {"split_rhat", std::isnan(s.split_rhat) ? Json(nullptr) : Json(s.split_rhat)},
           {"exact", s.exact},          {"seed", s.seed}};
    if (s.exact_value) j["exact_value"] = detail::rational_string(*s.exact_value);
    if (s.spec) j["event"] = event_json(*s.spec);
    return j;
  }

  int estimate() {
    auto inst = load_instance(cfg);
    auto spec = load_event(cfg, inst);
    auto rc = run_config(chain_for(domain_scale(*inst.domain), default_chain_config));
    auto s = estimate_event(inst.domain, inst.bc, spec, rc);
    auto cols = event_columns();
    cols.insert(cols.begin(), "instance");
    CsvTable t(cols);
    auto& r = t.row();
    r << inst.name;
    event_cells(r, s);
    emit(t, Json{{"schema", kSchemaVersion}, {"instance", inst.name}, {"stats", event_stats_json(s)}});
    return kExitOk;
  }

  static Json fit_json(const LinearFit& f) {
    auto num = [](double x) { return std::isnan(x) ? Json(nullptr) : Json(x); };
    return Json{{"slope", num(f.slope)}, {"intercept", num(f.intercept)}, {"slope_se", num(f.slope_se)}};
  }
  static std::string fit_text(const LinearFit& f) {
    return "slope=" + format_number(f.slope) + " se=" + format_number(f.slope_se);
  }

  int scan_variance() {
    auto ns = parse_int_list(cfg.value("n", Json("8,16,32,64")), "n");
    auto rc = run_config(chain_for(ns.front(), scalar_chain_config));
    auto scan = variance_scan(ns, rc, [&](int n) { return chain_for(n, scalar_chain_config); });
    CsvTable t({"n", "trials", "mean", "variance", "std_err", "chains", "split_rhat", "exact", "seed"});
    Json rows = Json::array();
    for (const auto& v : scan.rows) {
      t.row() << v.n << v.trials << v.mean << v.variance << v.std_err << v.chains << v.split_rhat << v.exact << v.seed;
      rows.push_back(Json{{"n", v.n},
                          {"trials", v.trials},
                          {"mean", v.mean},
                          {"variance", v.variance},
                          {"std_err", std::isnan(v.std_err) ? Json(nullptr) : Json(v.std_err)},
                          {"exact", v.exact}});
    }
    emit(t, Json{{"schema", kSchemaVersion}, {"rows", rows}, {"fit_vs_ln_n", fit_json(scan.fit)}});
    note = "variance vs ln n " + fit_text(scan.fit);
    return kExitOk;
  }

  int scan_events(const char* default_ns, long scale, EventStats (*estimator)(int, const RunConfig&), bool renorm) {
    auto ns = parse_int_list(cfg.value("n", Json(default_ns)), "n");
    std::vector<std::pair<int, EventStats>> results;
    for (int n : ns) results.emplace_back(n, estimator(n, run_config(chain_for(scale * n, default_chain_config))));
    auto cols = event_columns();
    cols.insert(cols.begin(), "n");
    if (renorm) {
      cols.push_back("a_2n");
      cols.push_back("a_2n_over_a_n_sq");
    }
    CsvTable t(cols);
    Json rows = Json::array();
    auto report = renormalization_report(results);
    for (auto& [n, s] : results) {
      auto& r = t.row();
      r << n;
      event_cells(r, s);
      if (renorm) {
        double a2 = kNaN, ratio = kNaN;
        for (auto& rr : report)
          if (rr.n == n) {
            a2 = rr.a_2n;
            ratio = rr.ratio;
          }
        r << a2 << ratio;
      }
      auto j = event_stats_json(s);
      j["n"] = n;
      rows.push_back(j);
    }
    Json out{{"schema", kSchemaVersion}, {"rows", rows}};
    if (renorm) {
      Json rep = Json::array();
      for (auto& rr : report)
        rep.push_back(Json{{"n", rr.n}, {"a_n", rr.a_n}, {"a_2n", rr.a_2n},
                           {"ratio", std::isnan(rr.ratio) ? Json(nullptr) : Json(rr.ratio)}});
      out["renormalization"] = rep;
    }
    emit(t, out);
    return kExitOk;
  }

  int scan_diameter() {
    int n = cfg.value("n", Json(8)).is_number_integer() ? cfg.value("n", 8) : parse_int_list(cfg.at("n"), "n").front();
    auto ks = parse_int_list(cfg.value("k", Json("1,2,3,4,5,6")), "k");
    int r = cfg.value("r", 11);
    auto rc = run_config(chain_for(static_cast<long>(r) * n, default_chain_config));
    auto table = diameter_decay(n, ks, rc, r);
    auto cols = event_columns();
    cols.insert(cols.begin(), {"n", "r", "k"});
    CsvTable t(cols);
    Json rows = Json::array();
    for (const auto& row : table.rows) {
      auto& cr = t.row();
      cr << table.n << table.r << row.k;
      event_cells(cr, row.stats);
      auto j = event_stats_json(row.stats);
      j["k"] = row.k;
      rows.push_back(j);
    }
    emit(t, Json{{"schema", kSchemaVersion}, {"n", table.n}, {"r", table.r}, {"rows", rows},
                 {"fit_ln_p_vs_k", fit_json(table.fit)}});
    note = "ln P vs k " + fit_text(table.fit);
    return kExitOk;
  }

  int scan_torus() {
    int n = cfg.value("n", Json(64)).is_number_integer() ? cfg.value("n", 64) : parse_int_list(cfg.at("n"), "n").front();
    auto ks = parse_int_list(cfg.value("k", Json("1,2,4,8,16")), "k");
    auto rc = run_config(chain_for(n, scalar_chain_config));
    auto scan = torus_scan(n, ks, rc);
    CsvTable t({"n", "k", "l1_distance", "trials", "mean_sq_gradient", "std_err", "chains", "split_rhat", "exact", "seed"});
    Json rows = Json::array();
    for (std::size_t i = 0; i < scan.rows.size(); ++i) {
      const auto& v = scan.rows[i];
      t.row() << n << ks[i] << 2 * ks[i] << v.trials << v.variance << v.std_err << v.chains << v.split_rhat << v.exact
              << v.seed;
      rows.push_back(Json{{"k", ks[i]}, {"l1_distance", 2 * ks[i]}, {"mean_sq_gradient", v.variance},
                          {"std_err", std::isnan(v.std_err) ? Json(nullptr) : Json(v.std_err)}});
    }
    emit(t, Json{{"schema", kSchemaVersion}, {"n", n}, {"rows", rows}, {"fit_vs_ln_distance", fit_json(scan.fit)}});
    note = "E[(h_u-h_v)^2] vs ln|u-v|_1 " + fit_text(scan.fit);
    return kExitOk;
  }

  int scan_rsw() {
    int n = cfg.value("n", Json(8)).is_number_integer() ? cfg.value("n", 8) : parse_int_list(cfg.at("n"), "n").front();
    int rho = cfg.value("rho", 2);
    auto rc = run_config(chain_for(static_cast<long>(2 * rho + 1) * n, default_chain_config));
    auto rep = rsw_spot_check(n, rho, rc);
    auto cols = event_columns();
    cols.insert(cols.begin(), {"quantity", "n", "rho"});
    CsvTable t(cols);
    Json rows = Json::array();
    for (auto [name, s] : {std::pair<const char*, const EventStats*>{"vertical_D", &rep.vertical_d},
                           {"horizontal_D", &rep.horizontal_d},
                           {"horizontal_Dbar", &rep.horizontal_dbar}}) {
      auto& r = t.row();
      r << name << n << rho;
      event_cells(r, *s);
      auto j = event_stats_json(*s);
      j["quantity"] = name;
      rows.push_back(j);
    }
    emit(t, Json{{"schema", kSchemaVersion},
                 {"rows", rows},
                 {"implication_tested", rep.implication_tested},
                 {"implication_holds", rep.implication_holds},
                 {"widening_ok", rep.widening_ok}});
    note = std::string("implication ") + (rep.implication_holds ? "holds" : "fails");
    return rep.implication_holds && rep.widening_ok ? kExitOk : kExitFailed;
  }

  int verify() {
    VerifyOptions o;
    o.seed = seed();
    o.max_size = cfg.value("max_size", o.max_size);
    o.max_free = cfg.value("max_free", o.max_free);
    o.sampler_samples = cfg.value("sampler_samples", o.sampler_samples);
    if (cfg.value("inject_fault", false)) o.duality.cross = Adjacency::NN;
    if (o.max_size < 2) throw InvalidArgument("max_size must be at least 2");
    std::vector<SuiteResult> results;
    if (target == "all") {
      results = verify_all(o);
    } else {
      results.push_back(run_suite(target, o));
    }
    CsvTable t({"suite", "passed", "checked", "failures", "detail"});
    Json rows = Json::array();
    bool ok = true;
    auto dir = cfg.value("counterexample_dir", std::string("counterexamples"));
    for (const auto& r : results) {
      std::cout << r.name << ": " << (r.passed ? "PASS" : "FAIL") << " " << r.checked << " checks in "
                << format_number(r.seconds) << " s; " << r.detail << "\n";
      t.row() << r.name << r.passed << r.checked << r.failures << r.detail;
      rows.push_back(suite_json(r));
      ok &= r.passed;
      if (r.counterexample) {
        auto path = std::filesystem::path(dir) / (r.name + "-counterexample.json");
        write_atomic(path, r.counterexample->dump(2) + "\n");
        std::cout << r.name << ": counterexample written to " << path.string() << "\n";
      }
    }
    if (cfg.contains("out")) emit(t, Json{{"schema", kSchemaVersion}, {"suites", rows}});
    note = ok ? "all suites pass" : "verification failed";
    return ok ? kExitOk : kExitFailed;
  }

  int run() {
    if (command == "count") return count();
    if (command == "prob") return prob();
    if (command == "sample") return sample();
    if (command == "estimate") return estimate();
    if (command == "scan") {
      if (target == "variance") return scan_variance();
      if (target == "crossing") return scan_events("16,32,64", 2, crossing_estimate, false);
      if (target == "an") return scan_events("4,8,16", 5, a_n_estimate, true);
      if (target == "diameter") return scan_diameter();
      if (target == "torus") return scan_torus();
      if (target == "rsw") return scan_rsw();
      throw InvalidArgument("unknown scan '" + target + "'");
    }
    if (command == "verify") return verify();
    throw InvalidArgument("unknown command '" + command + "'");
  }

  std::string note;
};

int default_threads() {
  if (const char* e = std::getenv("SQUAREICE_THREADS")) {
    try {
      int t = std::stoi(e);
      if (t >= 1) return t;
    } catch (const std::exception&) {
    }
    std::cerr << "ignoring invalid SQUAREICE_THREADS='" << e << "'\n";
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Square-ice height functions: exact counts, sampling, estimates and verification"};
  app.require_subcommand(0, 1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON config; flags override its keys");

  // every flag mirrors a config key; given flags are laid over the config
  std::string instance, event, n_list, k_list, out, format, scan_order, counterexample_dir;
  long samples = 0, sweeps = 0, burn_in = 0, thin = 0, sampler_samples = 0;
  int chains = 0, threads = 0, max_size = 0, rho = 0, r = 0, oracle_max_free = 0, max_free = 0;
  std::uint64_t seed = 0;
  bool exact = false, no_oracle = false, inject_fault = false;
  std::vector<std::pair<CLI::Option*, std::function<void(Json&)>>> flags;
  auto flag = [&](CLI::Option* o, std::function<void(Json&)> set) { flags.emplace_back(o, std::move(set)); };

  flag(app.add_option("--instance", instance, "instance name, inline JSON or JSON file"),
       [&](Json& j) { j["instance"] = instance; });
  flag(app.add_option("--event", event, "event spec as inline JSON or JSON file"), [&](Json& j) { j["event"] = event; });
  flag(app.add_option("--n", n_list, "size list, e.g. 8,16,32"), [&](Json& j) { j["n"] = n_list; });
  flag(app.add_option("--k", k_list, "level or separation list"), [&](Json& j) { j["k"] = k_list; });
  flag(app.add_option("--rho", rho, "aspect ratio for scan rsw"), [&](Json& j) { j["rho"] = rho; });
  flag(app.add_option("--r", r, "domain scale for scan diameter"), [&](Json& j) { j["r"] = r; });
  flag(app.add_option("--samples", samples, "number of samples"), [&](Json& j) { j["samples"] = samples; });
  flag(app.add_flag("--exact", exact, "sample exactly instead of by MCMC"), [&](Json& j) { j["exact"] = exact; });
  flag(app.add_option("--seed", seed, "master seed"), [&](Json& j) { j["seed"] = seed; });
  flag(app.add_option("--threads", threads, "worker threads (default $SQUAREICE_THREADS or 1)"),
       [&](Json& j) { j["threads"] = threads; });
  flag(app.add_option("--chains", chains, "independent chains"), [&](Json& j) { j["chains"] = chains; });
  flag(app.add_option("--sweeps", sweeps, "total sweeps per chain"), [&](Json& j) { j["chain"]["sweeps"] = sweeps; });
  flag(app.add_option("--burn-in", burn_in, "burn-in sweeps"), [&](Json& j) { j["chain"]["burn_in"] = burn_in; });
  flag(app.add_option("--thin", thin, "sweeps between retained samples"), [&](Json& j) { j["chain"]["thin"] = thin; });
  flag(app.add_option("--scan-order", scan_order, "raster or random"),
       [&](Json& j) { j["chain"]["scan"] = scan_order; });
  flag(app.add_flag("--no-oracle", no_oracle, "always use MCMC"), [&](Json& j) { j["use_oracle"] = !no_oracle; });
  flag(app.add_option("--oracle-max-free", oracle_max_free, "largest instance handed to the exact oracle"),
       [&](Json& j) { j["oracle_max_free"] = oracle_max_free; });
  flag(app.add_option("--out", out, "output file (atomic write); stdout when absent"), [&](Json& j) { j["out"] = out; });
  flag(app.add_option("--format", format, "csv or json"), [&](Json& j) { j["format"] = format; });
  flag(app.add_option("--max-size", max_size, "largest rectangle side in the duality suite"),
       [&](Json& j) { j["max_size"] = max_size; });
  flag(app.add_option("--max-free", max_free, "free-vertex cap for FKG, CBC and connectivity"),
       [&](Json& j) { j["max_free"] = max_free; });
  flag(app.add_option("--sampler-samples", sampler_samples, "samples for the TV check"),
       [&](Json& j) { j["sampler_samples"] = sampler_samples; });
  flag(app.add_flag("--inject-fault", inject_fault, "use NN where Cross adjacency is meant (mutation test)"),
       [&](Json& j) { j["inject_fault"] = inject_fault; });
  flag(app.add_option("--counterexample-dir", counterexample_dir, "where failed verifications dump JSON"),
       [&](Json& j) { j["counterexample_dir"] = counterexample_dir; });

  std::vector<std::pair<CLI::App*, std::string>> leaves;
  for (auto [c, what] : {std::pair{"count", "exact number of height functions"},
                         {"prob", "exact probability of an event"},
                         {"sample", "exact or MCMC samples"},
                         {"estimate", "probability of an event, exact when small and MCMC otherwise"}})
    leaves.emplace_back(app.add_subcommand(c, what)->fallthrough(), "");
  auto* scan = app.add_subcommand("scan", "parameter scans")->fallthrough()->require_subcommand(1);
  for (const char* t : {"variance", "crossing", "an", "diameter", "torus", "rsw"})
    leaves.emplace_back(scan->add_subcommand(t)->fallthrough(), t);
  auto* verify = app.add_subcommand("verify", "verification suites")->fallthrough()->require_subcommand(1);
  for (const char* t : {"duality", "annulus", "fkg", "cbc", "bijection", "sampler", "oracle", "all"})
    leaves.emplace_back(verify->add_subcommand(t)->fallthrough(), t);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  Runner runner;
  try {
    if (!config_path.empty()) runner.cfg = read_json_file(config_path);
    if (!runner.cfg.is_object()) runner.cfg = Json::object();
    for (auto& [opt, set] : flags)
      if (opt->count() > 0) set(runner.cfg);
    for (auto& [sub, t] : leaves) {
      if (!sub->parsed()) continue;
      runner.target = t;
      runner.command = t.empty() ? sub->get_name() : sub->get_parent()->get_name();
    }
    if (runner.command.empty()) {
      runner.command = runner.cfg.value("command", std::string());
      runner.target = runner.cfg.value("target", std::string());
    }
    if (runner.command.empty()) {
      std::cerr << app.help();
      return kExitUsage;
    }
    runner.cfg["command"] = runner.command;
    if (!runner.target.empty()) runner.cfg["target"] = runner.target;
    runner.threads = runner.cfg.value("threads", default_threads());

    Json hashed = runner.cfg;
    hashed.erase("threads");
    std::string hash = content_hash(hashed);
    int status = runner.run();
    std::cerr << "squareice " << runner.command << (runner.target.empty() ? "" : " " + runner.target) << ": "
              << (status == kExitOk ? "ok" : "FAILED") << " seed=" << runner.seed() << " config=" << hash;
    if (!runner.note.empty()) std::cerr << " " << runner.note;
    if (runner.cfg.contains("out")) std::cerr << " out=" << runner.cfg.at("out").get<std::string>();
    std::cerr << "\n";
    return status;
  } catch (const TooLarge& e) {
    std::cerr << "error: too large for exact computation: " << e.what()
              << "; use the estimate or sample commands, which run MCMC\n";
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Unsupported& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Json::exception& e) {
    std::cerr << "error: invalid config: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitFailed;
  }
}
