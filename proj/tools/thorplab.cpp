// thorplab: command-line front end.
//
// Exit codes: 0 success, 1 a check failed (or a run could not finish),
// 2 usage error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "thorp/thorp.hpp"

using json = nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

struct RunConfig {
  std::string subcommand;
  int d = 2;
  std::string chain = "full";
  std::string schedule = "thorp";
  std::uint64_t rounds = 10;
  std::uint64_t trials = 10'000;
  std::uint64_t seed = 1;
  std::uint64_t T = 0;  // 0: 4d
  std::uint32_t b = 0;  // 0: 2^(d-1) + 1
  std::string mode = "exact";
  std::string report;
  std::string suite = "all";
  double a = 0.5;
  double floor_b = 0.1;
  double logV = 10.0;
  std::string out;
  std::string format = "json";
  std::string trace_out;
};

json to_json(const RunConfig& c) {
  json j;
  j["subcommand"] = c.subcommand;
  j["d"] = c.d;
  j["chain"] = c.chain;
  j["schedule"] = c.schedule;
  j["rounds"] = c.rounds;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["T"] = c.T;
  j["b"] = c.b;
  j["mode"] = c.mode;
  j["report"] = c.report;
  j["suite"] = c.suite;
  j["a"] = c.a;
  j["floor_b"] = c.floor_b;
  j["logV"] = c.logV;
  j["format"] = c.format;
  return j;
}

// Accepts a bare RunConfig object or a report that embeds one under "config".
void apply_json(RunConfig& c, json j) {
  if (j.contains("config") && j["config"].is_object()) j = j["config"];
  auto take = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  take("subcommand", c.subcommand);
  take("d", c.d);
  take("chain", c.chain);
  take("schedule", c.schedule);
  take("rounds", c.rounds);
  take("trials", c.trials);
  take("seed", c.seed);
  take("T", c.T);
  take("b", c.b);
  take("mode", c.mode);
  take("report", c.report);
  take("suite", c.suite);
  take("a", c.a);
  take("floor_b", c.floor_b);
  take("logV", c.logV);
  take("format", c.format);
}

struct Output {
  json report;                            // JSON form
  std::vector<std::string> csv_header;    // CSV form
  std::vector<std::vector<std::string>> csv_rows;
  bool checks_passed = true;
};

template <class T>
std::string cell(const T& v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::uint64_t depink_period(const RunConfig& c) { return c.T ? c.T : 4ULL * c.d; }
std::uint32_t nonblack(const RunConfig& c) {
  return c.b ? c.b : thorp::deck_size(c.d) / 2 + 1;
}

thorp::CheckMode parse_mode(const std::string& m) {
  if (m == "exact") return thorp::CheckMode::exact;
  if (m == "monte-carlo" || m == "mc") return thorp::CheckMode::monte_carlo;
  throw thorp::contract_error("unknown mode '" + m + "' (exact | monte-carlo)");
}

// ---------------------------------------------------------------------------

Output run_simulate(const RunConfig& c) {
  const auto schedule = thorp::Schedule::parse(c.schedule);
  thorp::CoinStream coins(c.seed);
  const auto run = thorp::run_schedule(thorp::DeckState::identity(c.d), schedule, c.rounds, coins);
  if (!c.trace_out.empty()) {
    std::ofstream f(c.trace_out);
    if (!f) throw std::runtime_error("cannot write " + c.trace_out);
    run.trace.write_text(f);
  }
  Output o;
  o.report["deck"] = run.deck.occupants();
  o.report["coins"] = run.trace.size();
  o.csv_header = {"position", "card"};
  for (thorp::Position p = 0; p < run.deck.size(); ++p)
    o.csv_rows.push_back({cell(p), cell(run.deck.occupant(p))});
  return o;
}

Output run_exact(const RunConfig& c) {
  Output o;
  const std::string report = c.report.empty() ? "mixing" : c.report;
  const auto schedule = thorp::Schedule::parse(c.schedule);
  if (report == "lambda") {
    const auto spec = thorp::StateSpaceSpec::parse(c.chain, c.d);
    thorp::require(spec.kind == thorp::ChainKind::subset, "lambda needs --chain subset:k");
    const auto curve = thorp::lambda_curve(c.d, spec.k, c.rounds, schedule);
    o.report["states"] = spec.size();
    o.report["lambda"] = curve;
    std::uint64_t first = 0;
    bool found = false;
    for (std::uint64_t m = 0; m < curve.size() && !found; ++m)
      if (curve[m] <= 0.25) first = m, found = true;
    o.report["first_m_below_quarter"] = found ? json(first) : json(nullptr);
    o.csv_header = {"m", "lambda"};
    for (std::size_t m = 0; m < curve.size(); ++m) o.csv_rows.push_back({cell(m), cell(curve[m])});
    return o;
  }
  thorp::require(report == "mixing", "unknown exact report '" + report + "' (mixing | lambda)");
  const auto spec = thorp::StateSpaceSpec::parse(c.chain, c.d);
  const auto op = thorp::build_operator(spec, schedule);
  const auto tau = thorp::mixing_time(op);
  const auto curve = thorp::distance_curve(op, std::max<std::uint64_t>(c.rounds, tau), 0);
  o.report["states"] = spec.size();
  o.report["mixing_time"] = tau;
  o.report["distance_curve"] = curve;
  o.csv_header = {"n", "uniform_distance"};
  for (std::size_t n = 0; n < curve.size(); ++n) o.csv_rows.push_back({cell(n), cell(curve[n])});
  return o;
}

Output run_evolving_sets(const RunConfig& c) {
  const auto spec = thorp::StateSpaceSpec::parse(c.chain, c.d);
  const auto op = thorp::build_operator(spec, thorp::Schedule::parse(c.schedule));
  thorp::DualityOptions opts;
  opts.trials = c.trials;
  opts.seed = c.seed;
  const auto rows = thorp::verify_duality(op, 0, static_cast<int>(c.rounds), parse_mode(c.mode), opts);
  Output o;
  json arr = json::array();
  o.csv_header = {"x", "y", "n", "transition_probability", "hit_probability", "gap", "standard_error", "pass"};
  for (const auto& r : rows) {
    arr.push_back({{"x", r.x}, {"y", r.y}, {"n", r.n}, {"transition_probability", r.transition_probability},
                   {"hit_probability", r.hit_probability}, {"gap", r.gap},
                   {"standard_error", r.standard_error}, {"pass", r.pass}});
    o.csv_rows.push_back({cell(r.x), cell(r.y), cell(r.n), cell(r.transition_probability),
                          cell(r.hit_probability), cell(r.gap), cell(r.standard_error), r.pass ? "1" : "0"});
    o.checks_passed = o.checks_passed && r.pass;
  }
  o.report["duality"] = arr;
  return o;
}

Output run_chameleon(const RunConfig& c) {
  Output o;
  const std::string report = c.report.empty() ? "decay" : c.report;
  const auto T = depink_period(c);
  const auto b = nonblack(c);
  if (report == "decay") {
    const auto rows = thorp::red_decay_trace(c.d, b, T, c.rounds, c.trials, c.seed);
    json arr = json::array();
    o.csv_header = {"checkpoint", "round", "mean_z", "mean_root_sharp", "standard_error",
                    "pinkening_bound_fraction"};
    for (const auto& r : rows) {
      arr.push_back({{"checkpoint", r.checkpoint}, {"round", r.round}, {"mean_z", r.mean_z},
                     {"mean_root_sharp", r.mean_root_sharp}, {"standard_error", r.standard_error},
                     {"pinkening_bound_fraction", r.pinkening_bound_fraction}});
      o.csv_rows.push_back({cell(r.checkpoint), cell(r.round), cell(r.mean_z), cell(r.mean_root_sharp),
                            cell(r.standard_error), cell(r.pinkening_bound_fraction)});
    }
    o.report["decay"] = arr;
    return o;
  }
  if (report == "identity") {
    thorp::IdentityOptions opts;
    opts.trials = c.trials;
    opts.seed = c.seed;
    const auto rep = thorp::verify_chameleon_identity(c.d, b, c.rounds, T, parse_mode(c.mode), opts);
    json arr = json::array();
    o.csv_header = {"n", "x", "card_probability", "mean_rho", "gap", "standard_error", "pass"};
    for (const auto& r : rep.rows) {
      arr.push_back({{"n", r.n}, {"x", r.x}, {"card_probability", r.card_probability},
                     {"mean_rho", r.mean_rho}, {"gap", r.gap}, {"standard_error", r.standard_error},
                     {"pass", r.pass}});
      o.csv_rows.push_back({cell(r.n), cell(r.x), cell(r.card_probability), cell(r.mean_rho), cell(r.gap),
                            cell(r.standard_error), r.pass ? "1" : "0"});
    }
    o.report["identity"] = arr;
    o.report["max_group_gap"] = rep.max_group_gap;
    o.report["pass"] = rep.pass;
    o.checks_passed = rep.pass;
    return o;
  }
  if (report == "trace") {
    // One JSON object per round: (round, Z, P, color histogram).
    auto s = thorp::cham_init(c.d, thorp::first_cards(b), T);
    thorp::CoinStream coins(c.seed);
    json lines = json::array();
    o.csv_header = {"round", "z", "pink", "red", "white", "black"};
    for (std::uint64_t r = 0; r <= c.rounds; ++r) {
      if (r > 0)
        for (int t = 0; t < 2 * c.d; ++t) thorp::cham_step_in_place(s, coins);
      const auto k = s.counts();
      lines.push_back({{"round", r}, {"Z", thorp::red_mass(s)}, {"P", k.pink},
                       {"colors", {{"red", k.red}, {"white", k.white}, {"pink", k.pink}, {"black", k.black}}}});
      o.csv_rows.push_back({cell(r), cell(thorp::red_mass(s)), cell(k.pink), cell(k.red), cell(k.white),
                            cell(k.black)});
    }
    o.report["trace"] = lines;
    return o;
  }
  throw thorp::contract_error("unknown chameleon report '" + report + "' (decay | identity | trace)");
}

Output run_profile(const RunConfig& c) {
  const auto spec = thorp::StateSpaceSpec::parse(c.chain, c.d);
  const auto op = thorp::build_operator(spec, thorp::Schedule::parse(c.schedule));
  thorp::ProfileOptions opts;
  opts.seed = c.seed;
  const auto mode = op.size() <= opts.exhaustive_limit ? thorp::ProfileMode::exhaustive
                                                       : thorp::ProfileMode::sampled;
  const auto prof = thorp::profile_by_size(op, mode, opts);
  std::vector<double> grid;
  for (std::size_t j = 1; j <= op.size() / 2; ++j)
    grid.push_back(static_cast<double>(j) / static_cast<double>(op.size()));
  const auto points = thorp::profile_points(prof, op.size(), grid);
  Output o;
  json arr = json::array();
  o.csv_header = {"x", "psi", "mode", "argmin"};
  for (const auto& p : points) {
    const auto set = thorp::format_set(p.argmin);
    arr.push_back({{"x", p.x}, {"psi", p.psi}, {"mode", thorp::to_string(p.mode)}, {"argmin", set}});
    o.csv_rows.push_back({cell(p.x), cell(p.psi), thorp::to_string(p.mode), set});
  }
  o.report["profile"] = arr;
  if (op.size() >= 2) {
    try {
      const auto fit = thorp::fit_profile_bound(prof, op.size());
      o.report["fit"] = {{"a", fit.a}, {"b", fit.b}, {"logV", fit.log_v}};
      const auto bound = thorp::mixing_bound_from_profile(fit);
      o.report["tau_bound"] = bound.tau_bound;
    } catch (const std::exception& e) {
      o.report["fit_error"] = e.what();
    }
  }
  return o;
}

Output run_bound(const RunConfig& c) {
  const thorp::ProfileBoundSpec spec{c.a, c.floor_b, c.logV};
  const auto r = thorp::mixing_bound_from_profile(spec);
  Output o;
  o.report["n_exact"] = r.n_exact;
  o.report["n1"] = r.n1;
  o.report["n2"] = r.n2;
  o.report["tau_bound"] = r.tau_bound;
  o.report["tau_phase"] = r.tau_phase;
  o.report["n1_closed"] = r.n1_closed;
  o.report["n2_closed"] = r.n2_closed;
  o.report["iterated"] = r.iterated;
  o.csv_header = {"n_exact", "n1", "n2", "tau_bound", "tau_phase", "n1_closed", "n2_closed"};
  o.csv_rows.push_back({cell(r.n_exact), cell(r.n1), cell(r.n2), cell(r.tau_bound), cell(r.tau_phase),
                        cell(r.n1_closed), cell(r.n2_closed)});
  o.checks_passed = r.iterated;
  return o;
}

Output run_verify(const RunConfig& c) {
  const auto results = thorp::run_suite(c.suite, c.d, c.seed);
  Output o;
  json arr = json::array();
  o.csv_header = {"check", "pass", "detail"};
  for (const auto& r : results) {
    arr.push_back({{"check", r.name}, {"pass", r.pass}, {"detail", r.detail}});
    o.csv_rows.push_back({r.name, r.pass ? "1" : "0", r.detail});
    o.checks_passed = o.checks_passed && r.pass;
    std::cerr << (r.pass ? "PASS " : "FAIL ") << r.name << (r.detail.empty() ? "" : "  (" + r.detail + ")")
              << "\n";
  }
  o.report["checks"] = arr;
  o.report["pass"] = o.checks_passed;
  return o;
}

Output run_constants(const RunConfig&) {
  const auto r = thorp::constants_solver();
  const auto tc = thorp::trunccor_arithmetic_check();
  Output o;
  o.report["alpha_min"] = r.alpha_min;
  o.report["beta"] = r.beta;
  o.report["c_min"] = r.c_min;
  o.report["checked_up_to"] = r.checked_up_to;
  o.report["tail_monotone"] = r.tail_monotone;
  o.report["trunccor_points"] = tc.points;
  o.report["trunccor_pass"] = tc.pass;
  o.csv_header = {"d", "alpha_slack", "c_slack"};
  for (std::size_t i = 0; i < r.table.size() && i < 10; ++i)
    o.csv_rows.push_back({cell(r.table[i].d), cell(r.table[i].alpha_slack), cell(r.table[i].c_slack)});
  o.checks_passed = r.pass && tc.pass;
  return o;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

void emit(const RunConfig& c, const Output& o, std::ostream& os) {
  if (c.format == "csv") {
    os << "# config: " << to_json(c).dump() << "\n";
    for (std::size_t i = 0; i < o.csv_header.size(); ++i) os << (i ? "," : "") << o.csv_header[i];
    os << "\n";
    for (const auto& row : o.csv_rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_escape(row[i]);
      os << "\n";
    }
    return;
  }
  json j = o.report;
  j["schema_version"] = kSchemaVersion;
  j["config"] = to_json(c);
  os << j.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thorp shuffle laboratory"};
  app.require_subcommand(1);

  RunConfig cli;
  std::string config_path;
  const std::vector<std::string> names{"simulate", "exact",   "evolving-sets", "chameleon",
                                       "profile",  "bound",   "verify",        "constants"};
  const std::vector<std::string> help{
      "run a schedule from the identity deck and print the final deck",
      "exact operator: mixing time and distance curve, or lambda for subset chains",
      "evolving-set duality check from state 0",
      "chameleon process: decay trace, identity check, or per-round color trace",
      "root profile of a chain",
      "mixing-time bound from profile parameters",
      "run property suites",
      "solve the implicit constants and check the truncated-round arithmetic"};
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto* s = app.add_subcommand(names[i], help[i]);
    s->add_option("--config", config_path, "JSON config (a RunConfig or a report embedding one)");
    s->add_option("--d", cli.d, "hypercube dimension");
    s->add_option("--chain", cli.chain, "full | card | subset:k");
    s->add_option("--schedule", cli.schedule, "thorp | zigzag | classic | truncated:D | step:N");
    s->add_option("--rounds", cli.rounds, "rounds, steps or checkpoints, per subcommand");
    s->add_option("--trials", cli.trials, "Monte Carlo trials");
    s->add_option("--seed", cli.seed, "seed");
    s->add_option("--T", cli.T, "de-pinking period in rounds (default 4d)");
    s->add_option("--b", cli.b, "nonblack cards (default 2^(d-1)+1)");
    s->add_option("--mode", cli.mode, "exact | monte-carlo");
    s->add_option("--report", cli.report, "report kind");
    s->add_option("--suite", cli.suite, "shuffle | exact | evolving-sets | chameleon | l2 | bound | all");
    s->add_option("--a", cli.a, "profile exponent a");
    s->add_option("--floor-b", cli.floor_b, "profile floor b");
    s->add_option("--logV", cli.logV, "natural log of |V|");
    s->add_option("--out", cli.out, "output path (default stdout)");
    s->add_option("--format", cli.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    s->add_option("--trace", cli.trace_out, "simulate: write the coin trace here");
    subs.push_back(s);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* used = nullptr;
  for (auto* s : subs)
    if (s->parsed()) used = s;
  RunConfig cfg;
  try {
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw thorp::contract_error("cannot read config " + config_path);
      apply_json(cfg, json::parse(f));
    }
  } catch (const json::exception& e) {
    std::cerr << "error: bad config: " << e.what() << "\n";
    return 2;
  } catch (const thorp::contract_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  // Flags given on the command line win over the config file.
  auto given = [&](const char* flag) { return used->count(flag) > 0; };
  if (given("--d")) cfg.d = cli.d;
  if (given("--chain")) cfg.chain = cli.chain;
  if (given("--schedule")) cfg.schedule = cli.schedule;
  if (given("--rounds")) cfg.rounds = cli.rounds;
  if (given("--trials")) cfg.trials = cli.trials;
  if (given("--seed")) cfg.seed = cli.seed;
  if (given("--T")) cfg.T = cli.T;
  if (given("--b")) cfg.b = cli.b;
  if (given("--mode")) cfg.mode = cli.mode;
  if (given("--report")) cfg.report = cli.report;
  if (given("--suite")) cfg.suite = cli.suite;
  if (given("--a")) cfg.a = cli.a;
  if (given("--floor-b")) cfg.floor_b = cli.floor_b;
  if (given("--logV")) cfg.logV = cli.logV;
  if (given("--format")) cfg.format = cli.format;
  cfg.out = cli.out;
  cfg.trace_out = cli.trace_out;
  cfg.subcommand = used->get_name();

  Output out;
  try {
    const std::string& sc = cfg.subcommand;
    if (sc == "simulate") out = run_simulate(cfg);
    else if (sc == "exact") out = run_exact(cfg);
    else if (sc == "evolving-sets") out = run_evolving_sets(cfg);
    else if (sc == "chameleon") out = run_chameleon(cfg);
    else if (sc == "profile") out = run_profile(cfg);
    else if (sc == "bound") out = run_bound(cfg);
    else if (sc == "verify") out = run_verify(cfg);
    else out = run_constants(cfg);
  } catch (const thorp::contract_error& e) {
    std::cerr << "error: " << e.what() << "\n" << used->help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  if (cfg.out.empty()) {
    emit(cfg, out, std::cout);
  } else {
    std::ofstream f(cfg.out);
    if (!f) {
      std::cerr << "error: cannot write " << cfg.out << "\n";
      return 1;
    }
    emit(cfg, out, f);
  }
  return out.checks_passed ? 0 : 1;
}
