// Command-line front end: dataset generation, defense runs, attack
// evaluation, parameter sweeps, invariant verification, and the live query
// service.
//
// Exit codes: 0 ok, 1 infeasible defense, 2 usage/config error, 3 internal
// invariant failure. Errors also land on stderr as one-line JSON.

#include <algorithm>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "beacon/attack.hpp"
#include "beacon/manifest.hpp"
#include "beacon/service.hpp"
#include "beacon/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInvariant = 3;

void error_json(const std::string& kind, const std::string& message) {
  json err{{"error", kind}, {"message", message}};
  std::cerr << err.dump() << "\n";
}

std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

// Dataset + derived quantities shared by defend/attack/sweep.
struct LoadedInstance {
  beacon::GenotypeMatrix g;
  beacon::AafVector aaf;
  std::vector<std::size_t> beacon_ids;
  std::vector<std::size_t> reference_ids;
  beacon::LrtParams params;
  beacon::QuerySet q;
  beacon::ResponseVector x;
};

LoadedInstance load_instance(const std::string& dataset_path,
                             const std::string& reference_path, double delta) {
  auto [gb, fb] = beacon::load_matrix(dataset_path);
  LoadedInstance inst;
  const std::size_t nb = gb.n_individuals();
  if (!reference_path.empty()) {
    auto [gr, fr] = beacon::load_matrix(reference_path);
    if (gr.n_snvs() != gb.n_snvs())
      throw beacon::ConfigError("beacon and reference files disagree on m");
    beacon::GenotypeMatrix combined(nb + gr.n_individuals(), gb.n_snvs());
    for (std::size_t i = 0; i < nb; ++i) {
      combined.set_id(i, gb.id(i));
      for (std::size_t j = 0; j < gb.n_snvs(); ++j)
        combined.set(i, j, gb.get(i, j));
    }
    for (std::size_t i = 0; i < gr.n_individuals(); ++i) {
      combined.set_id(nb + i, gr.id(i));
      for (std::size_t j = 0; j < gr.n_snvs(); ++j)
        combined.set(nb + i, j, gr.get(i, j));
      inst.reference_ids.push_back(nb + i);
    }
    inst.g = std::move(combined);
  } else {
    inst.g = std::move(gb);
  }
  for (std::size_t i = 0; i < nb; ++i) inst.beacon_ids.push_back(i);
  inst.aaf = std::move(fb);
  inst.params = beacon::compute_params(inst.aaf, nb, delta);
  inst.q = beacon::QuerySet::all(inst.g.n_snvs());
  inst.x = beacon::true_responses(inst.g, inst.beacon_ids);
  return inst;
}

json defense_to_json(const beacon::DefenseResult& result,
                     const std::string& method) {
  json out;
  out["method"] = method;
  out["feasible"] = result.feasible;
  out["flips"] = result.flips.indices();
  out["flip_count"] = result.flips.flipped_count();
  out["margins"] = result.margins;
  out["iterations"] = result.iterations;
  if (result.witness)
    out["witness"] = *result.witness;
  else
    out["witness"] = nullptr;
  out["note"] = result.note;
  return out;
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::size_t n_beacon = 0, n_reference = 0, m = 0;
  double beta_a = 1.0, beta_b = 5.0;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_generate(const GenerateArgs& args) {
  Timer timer;
  fs::create_directories(args.out);
  const auto data = beacon::generate_synthetic(
      args.n_beacon, args.n_reference, args.m, args.beta_a, args.beta_b, args.seed);

  const fs::path beacon_path = fs::path(args.out) / "beacon.matrix";
  const fs::path reference_path = fs::path(args.out) / "reference.matrix";

  // Split the combined matrix back into the two files the other commands eat.
  const auto slice = [&](std::span<const std::size_t> rows) {
    beacon::GenotypeMatrix part(rows.size(), args.m);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      part.set_id(r, data.genotypes.id(rows[r]));
      for (std::size_t j = 0; j < args.m; ++j)
        part.set(r, j, data.genotypes.get(rows[r], j));
    }
    return part;
  };
  beacon::save_matrix(slice(data.split.beacon), data.aaf, beacon_path);
  beacon::RunManifest manifest;
  manifest.command = "generate";
  manifest.seed = args.seed;
  manifest.config = {{"n_beacon", std::to_string(args.n_beacon)},
                     {"n_reference", std::to_string(args.n_reference)},
                     {"m", std::to_string(args.m)},
                     {"beta_a", format17(args.beta_a)},
                     {"beta_b", format17(args.beta_b)}};
  manifest.outputs.push_back(beacon_path.string());
  if (args.n_reference > 0) {
    beacon::save_matrix(slice(data.split.reference), data.aaf, reference_path);
    manifest.outputs.push_back(reference_path.string());
  }
  manifest.wall_seconds = timer.seconds();
  beacon::write_manifest(manifest, fs::path(args.out) / "manifest.json");
  std::cout << "wrote " << beacon_path.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct DefendArgs {
  std::string dataset, reference, out;
  double delta = 1e-6;
  std::string threat = "fixed";
  double theta = 0.0;
  std::size_t k = 1;
  std::string method = "mig";
  std::uint64_t seed = 0;
  double beta_a = 1.0, beta_b = 5.0;
  double rf_p = 0.5, dp_epsilon = 1.0;
  double max_aaf = -1.0;
  std::size_t max_exact = 24;
};

beacon::ThreatSpec make_threat(const std::string& kind, double theta,
                               std::size_t k,
                               const std::vector<std::size_t>& reference) {
  if (kind == "fixed") return beacon::ThreatSpec::fixed_threshold(theta);
  if (kind == "adaptive") {
    if (reference.empty())
      throw beacon::ConfigError("adaptive threat requires --reference");
    return beacon::ThreatSpec::adaptive(k, reference);
  }
  throw beacon::ConfigError("threat must be 'fixed' or 'adaptive'");
}

int cmd_defend(const DefendArgs& args) {
  Timer timer;
  const auto inst = load_instance(args.dataset, args.reference, args.delta);
  fs::create_directories(args.out);

  beacon::DefenseRequest request;
  request.method = args.method;
  request.threat = make_threat(args.threat, args.theta, args.k, inst.reference_ids);
  request.beta_a = args.beta_a;
  request.beta_b = args.beta_b;
  request.rf_p = args.rf_p;
  request.dp_epsilon = args.dp_epsilon;
  request.seed = args.seed;
  request.options.max_exact_columns = args.max_exact;
  if (args.max_aaf >= 0.0) request.options.max_aaf = args.max_aaf;

  const auto result = beacon::run_named_defense(request, inst.params, inst.g,
                                                inst.beacon_ids, inst.q, inst.x);

  const fs::path defense_path = fs::path(args.out) / "defense.json";
  {
    std::ofstream out(defense_path, std::ios::trunc);
    out << defense_to_json(result, args.method).dump(2) << "\n";
  }

  beacon::RunManifest manifest;
  manifest.command = "defend";
  manifest.seed = args.seed;
  manifest.config = {{"dataset", args.dataset},
                     {"reference", args.reference},
                     {"delta", format17(args.delta)},
                     {"threat", args.threat},
                     {"theta", format17(args.theta)},
                     {"k", std::to_string(args.k)},
                     {"method", args.method}};
  manifest.input_hashes[args.dataset] = beacon::git_blob_sha1(args.dataset);
  if (!args.reference.empty())
    manifest.input_hashes[args.reference] = beacon::git_blob_sha1(args.reference);
  manifest.outputs.push_back(defense_path.string());
  manifest.wall_seconds = timer.seconds();
  beacon::write_manifest(manifest, fs::path(args.out) / "manifest.json");

  std::cout << "method=" << args.method
            << " feasible=" << (result.feasible ? "true" : "false")
            << " flips=" << result.flips.flipped_count() << "\n";
  return result.feasible ? kExitOk : kExitInfeasible;
}

// ---------------------------------------------------------------------------

struct AttackArgs {
  std::string dataset, reference, out, flips_file;
  double delta = 1e-6;
  std::string threat = "fixed";
  double theta = 0.0;
  std::size_t k = 1;
  std::size_t clustering_runs = 20;
  std::uint64_t seed = 0;
};

int cmd_attack(const AttackArgs& args) {
  Timer timer;
  const auto inst = load_instance(args.dataset, args.reference, args.delta);
  fs::create_directories(args.out);

  beacon::FlipSet flips = beacon::FlipSet::none(inst.g.n_snvs());
  if (!args.flips_file.empty()) {
    std::ifstream in(args.flips_file);
    if (!in) throw beacon::ConfigError("cannot open " + args.flips_file);
    json doc = json::parse(in);
    std::vector<std::size_t> indices =
        doc.at("flips").get<std::vector<std::size_t>>();
    flips = beacon::FlipSet::from_indices(inst.g.n_snvs(), indices);
  }
  const auto served = beacon::apply_flips(inst.x, flips);

  std::vector<std::size_t> targets = inst.beacon_ids;
  targets.insert(targets.end(), inst.reference_ids.begin(),
                 inst.reference_ids.end());
  std::vector<std::uint8_t> membership(targets.size(), 0);
  for (std::size_t t = 0; t < inst.beacon_ids.size(); ++t) membership[t] = 1;

  beacon::AttackReport report;
  if (args.threat == "fixed") {
    report = beacon::run_fixed_attack(inst.params, inst.g, targets, membership,
                                      inst.q, served, args.theta,
                                      flips.flipped_count());
  } else if (args.threat == "adaptive") {
    if (inst.reference_ids.empty())
      throw beacon::ConfigError("adaptive attack requires --reference");
    report = beacon::run_adaptive_attack(inst.params, inst.g, targets,
                                         membership, inst.reference_ids,
                                         inst.q, served, args.k,
                                         flips.flipped_count());
  } else {
    throw beacon::ConfigError("threat must be 'fixed' or 'adaptive'");
  }

  json out_doc = json::parse(beacon::attack_report_json(report));
  bool distinct = false;
  for (double s : report.scores)
    if (s != report.scores.front()) distinct = true;
  if (args.clustering_runs > 0 && distinct) {
    const auto [ctpr, cfpr] = beacon::clustering_attack(
        report.scores, membership, args.clustering_runs, args.seed);
    out_doc["clustering_tpr"] = ctpr;
    out_doc["clustering_fpr"] = cfpr;
  }

  const fs::path report_path = fs::path(args.out) / "attack.json";
  const fs::path roc_path = fs::path(args.out) / "roc.csv";
  {
    std::ofstream out(report_path, std::ios::trunc);
    out << out_doc.dump(2) << "\n";
  }
  {
    const auto roc = beacon::roc_curve(report.scores, membership);
    std::ofstream out(roc_path, std::ios::trunc);
    beacon::write_roc_csv(roc, out);
  }

  beacon::RunManifest manifest;
  manifest.command = "attack";
  manifest.seed = args.seed;
  manifest.config = {{"dataset", args.dataset},
                     {"reference", args.reference},
                     {"delta", format17(args.delta)},
                     {"threat", args.threat},
                     {"theta", format17(args.theta)},
                     {"k", std::to_string(args.k)},
                     {"flips_file", args.flips_file}};
  manifest.input_hashes[args.dataset] = beacon::git_blob_sha1(args.dataset);
  if (!args.reference.empty())
    manifest.input_hashes[args.reference] = beacon::git_blob_sha1(args.reference);
  if (!args.flips_file.empty())
    manifest.input_hashes[args.flips_file] = beacon::git_blob_sha1(args.flips_file);
  manifest.outputs = {report_path.string(), roc_path.string()};
  manifest.wall_seconds = timer.seconds();
  beacon::write_manifest(manifest, fs::path(args.out) / "manifest.json");

  std::cout << "tpr=" << report.tpr << " fpr=" << report.fpr
            << " privacy=" << report.privacy_fraction << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  std::string dataset, reference, out;
  double delta = 1e-6;
  std::vector<double> thetas;
  std::vector<std::size_t> ks;
  std::vector<std::string> methods;
  std::uint64_t seed = 0;
  std::size_t budget = 5;
};

// One sweep cell: defense at (method, threat) + attack on the result.
void sweep_row(const LoadedInstance& inst, const std::string& method,
               const beacon::ThreatSpec& threat, std::uint64_t seed,
               std::size_t budget, double* flips_out, double* privacy_out) {
  std::vector<std::size_t> targets = inst.beacon_ids;
  targets.insert(targets.end(), inst.reference_ids.begin(),
                 inst.reference_ids.end());
  std::vector<std::uint8_t> membership(targets.size(), 0);
  for (std::size_t t = 0; t < inst.beacon_ids.size(); ++t) membership[t] = 1;

  const auto evaluate = [&](const beacon::FlipSet& flips) {
    const auto served = beacon::apply_flips(inst.x, flips);
    beacon::AttackReport report;
    if (threat.kind == beacon::ThreatSpec::Kind::fixed)
      report = beacon::run_fixed_attack(inst.params, inst.g, targets, membership,
                                        inst.q, served, threat.theta);
    else
      report = beacon::run_adaptive_attack(inst.params, inst.g, targets,
                                           membership, threat.reference, inst.q,
                                           served, threat.k);
    return report.privacy_fraction;
  };

  if (method == "rf" || method == "dp") {
    const auto kind = method == "rf" ? beacon::BaselineConfig::Kind::rf
                                     : beacon::BaselineConfig::Kind::dp;
    const auto calibrated =
        beacon::calibrate_baseline(kind, inst.params, inst.g, inst.beacon_ids,
                                   inst.q, inst.x, threat, budget, seed);
    if (calibrated.achievable) {
      *flips_out = calibrated.mean_flips;
      *privacy_out = 1.0;
    } else {
      // Nothing on the grid protects everyone; report the most aggressive
      // point's actual performance.
      const auto flips =
          kind == beacon::BaselineConfig::Kind::rf
              ? beacon::rf_defend(inst.g, inst.beacon_ids, inst.x, 1.0, seed)
              : beacon::dp_defend(inst.x, 0.01, seed);
      *flips_out = static_cast<double>(flips.flipped_count());
      *privacy_out = evaluate(flips);
    }
    return;
  }

  if (method == "og") {
    if (threat.kind != beacon::ThreatSpec::Kind::fixed)
      throw beacon::ConfigError("og sweeps only the fixed threat");
    beacon::OnlineState state = beacon::make_online_state(inst.beacon_ids.size());
    for (std::size_t j = 0; j < inst.g.n_snvs(); ++j)
      beacon::online_greedy_step(state, j, inst.params, inst.g, inst.beacon_ids,
                                 inst.x, threat.theta);
    beacon::FlipSet flips = beacon::FlipSet::none(inst.g.n_snvs());
    for (const auto& [snv, commitment] : state.commitments)
      if (commitment.flipped) flips.y[snv] = 1;
    *flips_out = static_cast<double>(flips.flipped_count());
    *privacy_out = evaluate(flips);
    return;
  }

  beacon::DefenseRequest request;
  request.method = method == "omig" ? "unauth-greedy" : method;
  request.threat = threat;
  request.seed = seed;
  const auto result = beacon::run_named_defense(request, inst.params, inst.g,
                                                inst.beacon_ids, inst.q, inst.x);
  *flips_out = static_cast<double>(result.flips.flipped_count());
  *privacy_out = evaluate(result.flips);
}

int cmd_sweep(const SweepArgs& args) {
  Timer timer;
  const auto inst = load_instance(args.dataset, args.reference, args.delta);
  fs::create_directories(args.out);
  if (args.methods.empty())
    throw beacon::ConfigError("sweep requires --methods");
  if (args.thetas.empty() && args.ks.empty())
    throw beacon::ConfigError("sweep requires --thetas or --ks");

  const fs::path csv_path = fs::path(args.out) / "sweep.csv";
  std::ofstream csv(csv_path, std::ios::trunc);
  csv << "theta,method,flips,privacy_fraction\n";

  const auto emit = [&](double point_label, const std::string& method,
                        const beacon::ThreatSpec& threat) {
    double flips = 0.0, privacy = 0.0;
    sweep_row(inst, method, threat, args.seed, args.budget, &flips, &privacy);
    csv << format17(point_label) << "," << method << "," << format17(flips)
        << "," << format17(privacy) << "\n";
  };

  for (double theta : args.thetas)
    for (const auto& method : args.methods)
      emit(theta, method, beacon::ThreatSpec::fixed_threshold(theta));
  for (std::size_t k : args.ks)
    for (const auto& method : args.methods)
      emit(static_cast<double>(k), method,
           beacon::ThreatSpec::adaptive(k, inst.reference_ids));
  csv.flush();

  beacon::RunManifest manifest;
  manifest.command = "sweep";
  manifest.seed = args.seed;
  manifest.config = {{"dataset", args.dataset},
                     {"reference", args.reference},
                     {"delta", format17(args.delta)},
                     {"budget", std::to_string(args.budget)}};
  manifest.input_hashes[args.dataset] = beacon::git_blob_sha1(args.dataset);
  if (!args.reference.empty())
    manifest.input_hashes[args.reference] = beacon::git_blob_sha1(args.reference);
  manifest.outputs.push_back(csv_path.string());
  manifest.wall_seconds = timer.seconds();
  beacon::write_manifest(manifest, fs::path(args.out) / "manifest.json");
  std::cout << "wrote " << csv_path.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct ServeArgs {
  std::string dataset, reference;
  std::string mode = "batch";
  double delta = 1e-6;
  std::string threat = "fixed";
  double theta = 0.0;
  std::size_t k = 1;
  std::string method = "mig";
  std::string listen = "127.0.0.1:7654";
  std::string persist;
  std::size_t snapshot_every = 1024;
};

volatile std::sig_atomic_t g_stop_requested = 0;

int cmd_serve(const ServeArgs& args) {
  beacon::ServiceConfig config;
  if (args.mode == "batch")
    config.mode = beacon::ServiceConfig::Mode::batch_precomputed;
  else if (args.mode == "auth")
    config.mode = beacon::ServiceConfig::Mode::auth_online;
  else if (args.mode == "unauth")
    config.mode = beacon::ServiceConfig::Mode::unauth_online;
  else
    throw beacon::ConfigError("mode must be batch|auth|unauth");

  config.threat_kind = args.threat == "adaptive"
                           ? beacon::ThreatSpec::Kind::adaptive
                           : beacon::ThreatSpec::Kind::fixed;
  config.theta = args.theta;
  config.k = args.k;
  config.beacon_path = args.dataset;
  config.reference_path = args.reference;
  config.listen_addr = args.listen;
  config.persistence_path = args.persist;
  config.delta = args.delta;
  config.method = args.method;
  config.snapshot_every = args.snapshot_every;

  beacon::BeaconService service(std::move(config));
  service.start();
  std::cout << "listening on " << service.port() << std::endl;

  std::signal(SIGINT, [](int) { g_stop_requested = 1; });
  std::signal(SIGTERM, [](int) { g_stop_requested = 1; });
  while (!g_stop_requested)
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  service.stop();
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_verify(std::uint64_t seed) {
  const bool ok = beacon::run_verification(seed, std::cout);
  if (!ok) error_json("invariant", "verification suite failed");
  return ok ? kExitOk : kExitInvariant;
}

}  // namespace

// Flat key=value config support: values are spliced in right after the
// subcommand token, so later command-line flags win under TakeLast.
std::vector<std::string> merge_config_args(const CLI::App& app,
                                           std::vector<std::string> args) {
  std::string config_path;
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] == "--config") {
      config_path = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
      break;
    }
  }
  if (config_path.empty()) return args;

  std::ifstream in(config_path);
  if (!in) throw beacon::ConfigError("cannot open config file " + config_path);
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\r'))
      line.pop_back();
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw beacon::ConfigError("config line is not key=value: '" + line + "'");
    pairs.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }

  std::size_t sub_pos = args.size();
  const CLI::App* sub = nullptr;
  for (std::size_t i = 0; i < args.size(); ++i) {
    for (const auto* candidate : app.get_subcommands(
             [&](const CLI::App* s) { return s->get_name() == args[i]; })) {
      sub = candidate;
      sub_pos = i;
      break;
    }
    if (sub) break;
  }
  if (!sub) return args;  // no subcommand; nothing to merge into

  // Keys that are not options of this subcommand are ignored, so one config
  // file can drive defend, attack, and serve runs alike.
  std::vector<std::string> merged(args.begin(), args.begin() + sub_pos + 1);
  for (const auto& [key, value] : pairs) {
    const auto* opt = sub->get_option_no_throw("--" + key);
    if (!opt) continue;
    merged.push_back("--" + key);
    merged.push_back(value);
  }
  merged.insert(merged.end(), args.begin() + sub_pos + 1, args.end());
  return merged;
}

int main(int argc, char** argv) {
  CLI::App app{"Beacon membership-inference defense toolkit"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "synthesize a dataset");
  generate->add_option("--n-beacon", gen.n_beacon)->required();
  generate->add_option("--n-reference", gen.n_reference);
  generate->add_option("--m", gen.m)->required();
  generate->add_option("--beta-a", gen.beta_a);
  generate->add_option("--beta-b", gen.beta_b);
  generate->add_option("--seed", gen.seed);
  generate->add_option("--out", gen.out)->required();

  DefendArgs def;
  auto* defend = app.add_subcommand("defend", "compute a flip set");
  defend->add_option("--dataset", def.dataset)->required();
  defend->add_option("--reference", def.reference);
  defend->add_option("--delta", def.delta);
  defend->add_option("--threat", def.threat);
  defend->add_option("--theta", def.theta);
  defend->add_option("--k", def.k);
  defend->add_option("--method", def.method);
  defend->add_option("--seed", def.seed);
  defend->add_option("--beta-a", def.beta_a);
  defend->add_option("--beta-b", def.beta_b);
  defend->add_option("--rf-p", def.rf_p);
  defend->add_option("--dp-epsilon", def.dp_epsilon);
  defend->add_option("--max-aaf", def.max_aaf);
  defend->add_option("--max-exact-columns", def.max_exact);
  defend->add_option("--out", def.out)->required();

  AttackArgs atk;
  auto* attack = app.add_subcommand("attack", "run the LRT attack");
  attack->add_option("--dataset", atk.dataset)->required();
  attack->add_option("--reference", atk.reference);
  attack->add_option("--delta", atk.delta);
  attack->add_option("--threat", atk.threat);
  attack->add_option("--theta", atk.theta);
  attack->add_option("--k", atk.k);
  attack->add_option("--flips", atk.flips_file);
  attack->add_option("--clustering-runs", atk.clustering_runs);
  attack->add_option("--seed", atk.seed);
  attack->add_option("--out", atk.out)->required();

  SweepArgs swp;
  auto* sweep = app.add_subcommand("sweep", "defense+attack over thresholds");
  sweep->add_option("--dataset", swp.dataset)->required();
  sweep->add_option("--reference", swp.reference);
  sweep->add_option("--delta", swp.delta);
  sweep->add_option("--thetas", swp.thetas)->delimiter(',');
  sweep->add_option("--ks", swp.ks)->delimiter(',');
  sweep->add_option("--methods", swp.methods)->delimiter(',')->required();
  sweep->add_option("--seed", swp.seed);
  sweep->add_option("--budget", swp.budget);
  sweep->add_option("--out", swp.out)->required();

  ServeArgs srv;
  auto* serve = app.add_subcommand("serve", "run the query service");
  serve->add_option("--dataset", srv.dataset)->required();
  serve->add_option("--reference", srv.reference);
  serve->add_option("--mode", srv.mode);
  serve->add_option("--delta", srv.delta);
  serve->add_option("--threat", srv.threat);
  serve->add_option("--theta", srv.theta);
  serve->add_option("--k", srv.k);
  serve->add_option("--method", srv.method);
  serve->add_option("--listen", srv.listen);
  serve->add_option("--persist", srv.persist);
  serve->add_option("--snapshot-every", srv.snapshot_every);

  std::uint64_t verify_seed = 1;
  auto* verify = app.add_subcommand("verify", "run the invariant suites");
  verify->add_option("--seed", verify_seed);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = merge_config_args(app, std::move(args));
    std::reverse(args.begin(), args.end());  // CLI11 vector parse order
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    error_json("usage", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    error_json("config", e.what());
    return kExitUsage;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen);
    if (defend->parsed()) return cmd_defend(def);
    if (attack->parsed()) return cmd_attack(atk);
    if (sweep->parsed()) return cmd_sweep(swp);
    if (serve->parsed()) return cmd_serve(srv);
    if (verify->parsed()) return cmd_verify(verify_seed);
  } catch (const beacon::ContractError& e) {
    error_json("invariant", e.what());
    return kExitInvariant;
  } catch (const std::exception& e) {
    error_json("config", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
