#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cachegame/errors.hpp"
#include "cachegame/games.hpp"
#include "cachegame/io.hpp"
#include "cachegame/multiuser.hpp"
#include "cachegame/oracle.hpp"
#include "cachegame/twouser.hpp"

#ifndef CACHEGAME_VERSION
#define CACHEGAME_VERSION "0.0.0"
#endif
#ifndef CACHEGAME_GIT_DESCRIBE
#define CACHEGAME_GIT_DESCRIBE "unknown"
#endif

using namespace cachegame;
using io::json;

namespace {

struct Config {
  std::string instance;
  int alphas = 101;
  int iters = 100;
  double eps = 1e-5;
  std::uint64_t seed = 0;
  std::size_t samples = 10000;
  int grid = 4;
  std::string out;
  std::string mode = "exact";
  bool schedules = false;

  // gen
  std::string preset = "skewed";
  double beta = 0.5;
  std::vector<double> buffers;
  int chunks = 1;
};

std::string number(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

json meta(const std::string& command, const Config& cfg) {
  return {{"tool", "cachegame"},
          {"version", CACHEGAME_VERSION},
          {"git", CACHEGAME_GIT_DESCRIBE},
          {"command", command},
          {"seed", cfg.seed}};
}

void emit(const Config& cfg, const std::string& text) {
  if (cfg.out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) throw InvalidInstance("cannot write " + cfg.out);
  f << text;
}

void emit_json(const Config& cfg, const json& j) {
  io::ensure_finite(j);
  emit(cfg, j.dump(2) + "\n");
}

json read_raw(const std::string& path) {
  if (path.empty()) throw InvalidInstance("--instance is required");
  std::ifstream in(path);
  if (!in) throw InvalidInstance("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidInstance(path + ": " + e.what());
  }
}

void require_two_users(const Instance& inst) {
  if (inst.num_users() != 2) {
    throw InvalidInstance("this command needs exactly two users");
  }
}

json point_json(twouser::ThroughputPoint p) {
  return {{"r1", p.r1}, {"r2", p.r2}};
}

// ---- gen -------------------------------------------------------------------

void cmd_gen(const Config& cfg) {
  PreferenceMatrix p;
  std::vector<double> buffers;
  if (cfg.preset == "skewed") {
    p = PreferenceMatrix({{0.99, 0.01}, {0.5, 0.5}});
    buffers = {1, 1};
  } else if (cfg.preset == "p1" || cfg.preset == "p2" || cfg.preset == "p3") {
    const auto zipf = zipf_row(20, 1.0);
    const auto unif = zipf_row(20, 0.0);
    const auto& a = cfg.preset == "p1" ? zipf : unif;
    const auto& b = cfg.preset == "p3" ? unif : zipf;
    p = PreferenceMatrix({a, b});
    buffers = {1, 1};
  } else if (cfg.preset == "p4") {
    p = PreferenceMatrix({{0.7, 0.2, 0.1, 0.0},
                          {0.4, 0.3, 0.2, 0.1},
                          {0.25, 0.25, 0.25, 0.25}});
    buffers = {2, 2, 2};
  } else if (cfg.preset == "beta") {
    p = beta_mixture_matrix(cfg.beta);
    buffers = {2, 2};
  } else {
    throw InvalidInstance("unknown preset " + cfg.preset);
  }
  if (cfg.buffers.size() == 1) {
    buffers.assign(p.num_users(), cfg.buffers[0]);
  } else if (!cfg.buffers.empty()) {
    buffers = cfg.buffers;
  }
  auto inst = make_single_request_instance(p, buffers, cfg.chunks);
  emit_json(cfg, io::instance_to_json(inst, io::DemandModel::IndependentSingle));
}

// ---- domain ----------------------------------------------------------------

void cmd_domain(const Config& cfg) {
  const json raw = read_raw(cfg.instance);
  const Instance inst = io::instance_from_json(raw);
  require_two_users(inst);
  if (cfg.alphas < 1) throw InvalidInstance("--alphas must be positive");

  const auto grid = twouser::uniform_alpha_grid(cfg.alphas);
  const auto sweep = twouser::boundary_sweep(inst, grid);

  std::string csv = "alpha,r1,r2\n";
  for (const auto& s : sweep.samples) {
    if (!std::isfinite(s.point.r1) || !std::isfinite(s.point.r2)) {
      throw NumericalFailure("non-finite sweep point");
    }
    csv += number(s.alpha) + "," + number(s.point.r1) + "," +
           number(s.point.r2) + "\n";
  }

  json vertices = json::array();
  for (std::size_t i = 0; i < sweep.boundary.vertices.size(); ++i) {
    json v = point_json(sweep.boundary.vertices[i]);
    v["placement"] = io::placement_to_json(sweep.boundary.placements[i]);
    vertices.push_back(v);
  }
  const auto& p = inst.preferences();
  json doc = {
      {"meta", meta("domain", cfg)},
      {"input", {{"instance", raw}, {"alphas", cfg.alphas}}},
      {"vertices", vertices},
      {"pure_caching",
       {{"r1", pure_caching_throughput(p.row(0), inst.buffers()[0])},
        {"r2", pure_caching_throughput(p.row(1), inst.buffers()[1])}}}};
  io::ensure_finite(doc);
  emit(cfg, csv + "\n" + doc.dump(2) + "\n");
}

// ---- nash / allocate -------------------------------------------------------

json game_input(const json& raw, const Config& cfg) {
  return {{"instance", raw},
          {"iters", cfg.iters},
          {"eps", cfg.eps},
          {"seed", cfg.seed}};
}

void check_game_flags(const Config& cfg) {
  if (cfg.iters < 1) throw InvalidInstance("--iters must be positive");
  if (!(cfg.eps > 0)) throw InvalidInstance("--eps must be positive");
}

void cmd_nash(const Config& cfg) {
  check_game_flags(cfg);
  const json raw = read_raw(cfg.instance);
  const Instance inst = io::instance_from_json(raw);
  require_two_users(inst);
  auto nash = games::find_psne(inst, cfg.iters, cfg.eps, cfg.seed);
  json result = io::nash_record(nash);
  if (nash.converged) {
    result["verified"] = games::verify_psne(inst, nash.placement, 1e-6);
  }
  emit_json(cfg, {{"meta", meta("nash", cfg)},
                  {"input", game_input(raw, cfg)},
                  {"result", result}});
}

void cmd_allocate(const Config& cfg) {
  check_game_flags(cfg);
  const json raw = read_raw(cfg.instance);
  const Instance inst = io::instance_from_json(raw);
  require_two_users(inst);
  auto out = games::allocate(inst, cfg.iters, cfg.eps, cfg.seed);
  json result = io::allocation_record(out);
  result["baseline"] = point_json(out.allocation.baseline);
  emit_json(cfg, {{"meta", meta("allocate", cfg)},
                  {"input", game_input(raw, cfg)},
                  {"result", result}});
}

// ---- deliver ---------------------------------------------------------------

json outcome_json(const DemandOutcome& o) {
  json sets = json::array();
  for (const auto& s : o.requested) {
    json items = json::array();
    for (int n : s) items.push_back(n + 1);
    sets.push_back(items);
  }
  return sets;
}

void cmd_deliver(const Config& cfg) {
  const json raw = read_raw(cfg.instance);
  const Instance inst = io::instance_from_json(raw);
  multiuser::ExpectationMode mode;
  if (cfg.mode == "exact") {
    mode = multiuser::Exact{};
  } else if (cfg.mode == "mc") {
    if (cfg.samples < 1) throw InvalidInstance("--samples must be positive");
    mode = multiuser::MonteCarlo{cfg.samples, cfg.seed};
  } else {
    throw InvalidInstance("--mode must be exact or mc");
  }
  auto r = multiuser::expected_throughput_multiuser(inst, mode);

  json pure = json::array();
  for (std::size_t k = 0; k < inst.num_users(); ++k) {
    pure.push_back(pure_caching_throughput(inst.preferences().row(k),
                                           inst.buffers()[k]));
  }
  json result = {{"throughput", r.throughput}, {"pure_caching", pure}};
  if (r.std_error) result["std_error"] = *r.std_error;

  if (cfg.schedules) {
    const auto profile = multiuser::popular_placement(inst);
    json caches = json::array();
    for (std::size_t k = 0; k < profile.num_users(); ++k) {
      json c = json::array();
      for (const auto& id : profile.cache(k)) c.push_back(io::chunk_label(id));
      caches.push_back(c);
    }
    json per_outcome = json::array();
    for (const auto& wo : inst.demands()) {
      per_outcome.push_back(
          {{"requests", outcome_json(wo.outcome)},
           {"prob", wo.prob},
           {"schedule",
            io::schedule_to_json(multiuser::deliver(profile, wo.outcome))}});
    }
    result["caches"] = caches;
    result["schedules"] = per_outcome;
  }

  json input = {{"instance", raw}, {"mode", cfg.mode}};
  if (cfg.mode == "mc") {
    input["samples"] = cfg.samples;
    input["seed"] = cfg.seed;
  }
  emit_json(cfg, {{"meta", meta("deliver", cfg)},
                  {"input", input},
                  {"result", result}});
}

// ---- oracle ----------------------------------------------------------------

struct Check {
  explicit Check(std::string n) : name(std::move(n)) {}
  std::string name;
  bool pass = true;
  std::string detail;
  bool skipped = false;
};

json check_json(const Check& c) {
  json j = {{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}};
  if (c.skipped) j["skipped"] = true;
  return j;
}

std::vector<Check> two_user_checks(const Instance& inst, const Config& cfg) {
  std::vector<Check> out;
  const double coop = games::cooperative_total(inst);
  const double n = double(inst.num_items());

  Check grid{"grid_search_brackets_cooperative_total"};
  try {
    const double g = oracle::grid_best_sum(inst, {cfg.grid});
    const double slack = 3.0 * n / cfg.grid;
    grid.pass = g <= coop + 1e-6 && g >= coop - slack;
    grid.detail = "grid " + number(g) + " vs cooperative " + number(coop);
  } catch (const TooLarge& e) {
    grid.skipped = true;
    grid.detail = e.what();
  }
  out.push_back(grid);

  Check lpcheck{"simplex_matches_vertex_enumeration"};
  const auto scal = twouser::build_scalarized_lp(inst, 0.5);
  if (scal.lp.num_vars <= oracle::kMaxEnumVars &&
      scal.lp.num_rows() <= oracle::kMaxEnumRows) {
    const auto a = lp::solve(scal.lp);
    const auto b = oracle::lp_vertex_enumerate(scal.lp);
    lpcheck.pass = a.status == b.status && std::abs(a.value - b.value) <= 1e-8;
    lpcheck.detail = "simplex " + number(a.value) + " vs enumeration " +
                     number(b.value);
  } else {
    lpcheck.skipped = true;
    lpcheck.detail = "program exceeds the enumeration guard";
  }
  out.push_back(lpcheck);

  Check bits{"bit_level_cost_matches_closed_form"};
  std::mt19937_64 rng(cfg.seed);
  const int G = 8;
  double worst = 0.0;
  int count = 0;
  for (int i = 0; i < 50; ++i) {
    auto pl = oracle::sample_aligned_placement(inst.num_items(), G, rng);
    for (const auto& wo : inst.demands()) {
      auto x = oracle::bit_level_two_user_cost(pl, wo.outcome, G);
      auto y = twouser::outcome_cost(pl, wo.outcome);
      worst = std::max({worst, std::abs(x.first - y.first),
                        std::abs(x.second - y.second)});
      ++count;
    }
  }
  bits.pass = worst <= 1e-12;
  bits.detail = std::to_string(count) + " cases, max error " + number(worst);
  out.push_back(bits);
  return out;
}

std::vector<Check> multiuser_checks(const Instance& inst) {
  Check dec{"every_user_decodes_every_outcome"};
  const auto profile = multiuser::popular_placement(inst);
  int failures = 0, count = 0;
  for (const auto& wo : inst.demands()) {
    const auto sched = multiuser::deliver(profile, wo.outcome);
    for (std::size_t k = 0; k < inst.num_users(); ++k) {
      ++count;
      try {
        multiuser::decode(profile, sched, wo.outcome, k);
      } catch (const DecodingFailure&) {
        ++failures;
      }
    }
  }
  dec.pass = failures == 0;
  dec.detail = std::to_string(count) + " decodes, " +
               std::to_string(failures) + " failures";

  Check floor{"multiuser_not_below_pure_caching"};
  auto r = multiuser::expected_throughput_multiuser(inst, multiuser::Exact{});
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < inst.num_users(); ++k) {
    const double pure = pure_caching_throughput(inst.preferences().row(k),
                                                inst.buffers()[k]);
    margin = std::min(margin, r.throughput[k] - pure);
  }
  floor.pass = margin >= -1e-9;
  floor.detail = "smallest gain over pure caching " + number(margin);
  return {dec, floor};
}

int cmd_oracle(const Config& cfg) {
  if (cfg.grid < 1) throw InvalidInstance("--grid must be positive");
  const json raw = read_raw(cfg.instance);
  const Instance inst = io::instance_from_json(raw);
  std::vector<Check> checks;
  if (inst.num_users() == 2) checks = two_user_checks(inst, cfg);
  bool chunk_aligned = true;
  for (double b : inst.buffers().capacities()) {
    const double units = b * inst.catalog().chunks_per_item;
    chunk_aligned = chunk_aligned && std::abs(units - std::round(units)) < 1e-9;
  }
  if (chunk_aligned) {
    for (auto& c : multiuser_checks(inst)) checks.push_back(c);
  }
  bool all = true;
  json arr = json::array();
  for (const auto& c : checks) {
    all = all && c.pass;
    arr.push_back(check_json(c));
  }
  emit_json(cfg, {{"meta", meta("oracle", cfg)},
                  {"input", {{"instance", raw}, {"grid", cfg.grid}}},
                  {"result", {{"checks", arr}, {"all_pass", all}}}});
  return all ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Effective-throughput tools for cache-aided networks"};
  app.require_subcommand(1);
  Config cfg;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out, "Write output here instead of stdout");
    sub->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  };
  auto add_instance = [&](CLI::App* sub) {
    sub->add_option("--instance", cfg.instance, "Instance JSON file")
        ->required();
  };

  auto* gen = app.add_subcommand("gen", "Write a preset instance");
  gen->add_option("--preset", cfg.preset, "skewed|p1|p2|p3|p4|beta")
      ->capture_default_str();
  gen->add_option("--beta", cfg.beta, "Mixture weight for the beta preset")
      ->capture_default_str();
  gen->add_option("--buffers", cfg.buffers,
                  "Buffer sizes, one per user or a single shared value")
      ->delimiter(',');
  gen->add_option("--chunks", cfg.chunks, "Chunks per item")
      ->capture_default_str();
  add_common(gen);

  auto* domain = app.add_subcommand("domain", "Sweep the two-user boundary");
  add_instance(domain);
  domain->add_option("--alphas", cfg.alphas, "Number of weights in [0, 1]")
      ->capture_default_str();
  add_common(domain);

  auto* nash = app.add_subcommand("nash", "Best-response equilibrium search");
  auto* alloc = app.add_subcommand("allocate", "Cooperative allocation");
  for (auto* sub : {nash, alloc}) {
    add_instance(sub);
    sub->add_option("--iters", cfg.iters, "Maximum rounds")
        ->capture_default_str();
    sub->add_option("--eps", cfg.eps, "Convergence threshold")
        ->capture_default_str();
    add_common(sub);
  }

  auto* deliver = app.add_subcommand("deliver", "Multiuser coded delivery");
  add_instance(deliver);
  deliver->add_option("--mode", cfg.mode, "exact|mc")->capture_default_str();
  deliver->add_option("--samples", cfg.samples, "Monte Carlo samples")
      ->capture_default_str();
  deliver->add_flag("--schedules", cfg.schedules,
                    "Include the schedule of every support outcome");
  add_common(deliver);

  auto* orc = app.add_subcommand("oracle", "Brute-force cross-checks");
  add_instance(orc);
  orc->add_option("--grid", cfg.grid, "Grid resolution for placement search")
      ->capture_default_str();
  add_common(orc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) cmd_gen(cfg);
    if (domain->parsed()) cmd_domain(cfg);
    if (nash->parsed()) cmd_nash(cfg);
    if (alloc->parsed()) cmd_allocate(cfg);
    if (deliver->parsed()) cmd_deliver(cfg);
    if (orc->parsed()) return cmd_oracle(cfg);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
