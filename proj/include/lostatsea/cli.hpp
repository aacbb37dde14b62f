// Copyright 2026 The lostatsea Authors
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

#pragma once

// Subcommands: ingest, synth, simulate, analyze, report.
// Exit status: 0 success, 1 validation or usage error, 2 provider or system
// error.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "lostatsea/analytics.hpp"
#include "lostatsea/cohort_io.hpp"
#include "lostatsea/config.hpp"
#include "lostatsea/http_provider.hpp"
#include "lostatsea/simulate.hpp"
#include "lostatsea/synthlab.hpp"

namespace lostatsea::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitSystem = 2;

namespace fs = std::filesystem;

/// Refuse to overwrite any input.
inline void check_output_path(const std::string& out, const std::vector<std::string>& inputs) {
  std::error_code ec;
  const auto target = fs::weakly_canonical(out, ec);
  for (const auto& in : inputs) {
    if (in.empty()) continue;
    std::error_code ec2;
    if (!ec && target == fs::weakly_canonical(in, ec2))
      throw ValidationError("output '" + out + "' would overwrite input '" + in + "'");
  }
}

inline std::string manifest_path_for(const std::string& out) { return out + ".manifest.json"; }

inline void write_json_file(const std::string& path, const Json& j) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw SystemError("cannot write '" + path + "'");
  f << j.dump(2) << '\n';
  if (!f) throw SystemError("write failed for '" + path + "'");
}

/// Flags that override settings. Each maps to the setting key of the same
/// name with dashes turned into underscores.
class SettingFlags {
 public:
  void attach(CLI::App* app, std::initializer_list<std::string> keys) {
    for (const auto& key : keys) {
      std::string flag = "--" + key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      auto& slot = values_[key];
      options_[key] = app->add_option(flag, slot, "setting '" + key + "' (see README)");
    }
  }

  SettingLayer layer() const {
    SettingLayer out;
    for (const auto& [key, opt] : options_)
      if (opt->count() > 0) out[key] = {values_.at(key), "flag " + opt->get_name()};
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, CLI::Option*> options_;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::vector<std::string> argv;
  EnvLookup env = process_env;
};

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string in, out, schema{kSchemaVersion};
  bool validate = false;
};

inline int cmd_ingest(const IngestArgs& a, Context& ctx) {
  RunManifest manifest;
  manifest.command_line = ctx.argv;
  manifest.started_at = utc_timestamp();
  std::ifstream in(a.in, std::ios::binary);
  if (!in) throw SystemError("cannot open '" + a.in + "'");
  auto result = ingest_cohort(in, a.schema);
  for (const auto& d : result.diagnostics) ctx.err << "rejected: " << d.str() << '\n';
  ctx.out << "accepted " << result.cohort.groups.size() << " group(s), rejected " << result.diagnostics.size()
          << " diagnostic(s)\n";
  if (!a.out.empty()) {
    check_output_path(a.out, {a.in});
    write_cohort_file(a.out, result.cohort);
    manifest.inputs[a.in] = sha256_file(a.in);
    manifest.settings = {{"schema_version", a.schema}};
    add_cohort(manifest, result.cohort);
    manifest.finished_at = utc_timestamp();
    write_json_file(manifest_path_for(a.out), manifest.to_json());
  }
  return result.ok() ? kExitOk : kExitValidation;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string out;
  synth::SynthConfig config;
  std::string treatment = "identified";
};

inline int cmd_synth(SynthArgs a, Context& ctx) {
  a.config.treatment = parse_treatment(a.treatment);
  RunManifest manifest;
  manifest.command_line = ctx.argv;
  manifest.started_at = utc_timestamp();
  const Cohort cohort = synth::generate_cohort(a.config);
  write_cohort_file(a.out, cohort);
  manifest.settings = a.config.to_json();
  manifest.seeds["synth"] = a.config.seed;
  add_cohort(manifest, cohort);
  manifest.finished_at = utc_timestamp();
  write_json_file(manifest_path_for(a.out), manifest.to_json());
  ctx.out << "wrote " << cohort.groups.size() << " synthetic group(s) to " << a.out << " ("
          << cohort.header_extra["synthetic"]["clipped_nominations"].get<int>() << " nomination(s) clipped)\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string cohort, out, traces, key, config, treatment;
  bool force_synthetic = false;
};

inline int cmd_simulate(const SimulateArgs& a, const SettingLayer& flags, Context& ctx) {
  RunManifest manifest;
  manifest.command_line = ctx.argv;
  manifest.started_at = utc_timestamp();
  const Settings settings = load_config(a.config.empty() ? std::nullopt : std::optional(a.config), flags, ctx.env);
  const Treatment treatment = parse_treatment(a.treatment);
  check_output_path(a.out, {a.cohort, a.key, a.config});
  if (!a.traces.empty()) check_output_path(a.traces, {a.cohort, a.key, a.config, a.out});

  const Cohort human = read_cohort_file(a.cohort);
  std::optional<TaskKey> key;
  if (!a.key.empty()) key = read_task_key_file(a.key);
  SimulationOptions options;
  options.key = key ? &*key : nullptr;
  options.allow_synthetic_transcripts = a.force_synthetic;

  auto provider = make_provider(settings.provider, settings.seed);
  auto result = run_agent_cohort(human, treatment, settings.provider, *provider, settings.seed, options);

  write_cohort_file(a.out, result.cohort);
  if (!a.traces.empty()) {
    std::ofstream t(a.traces, std::ios::binary | std::ios::trunc);
    if (!t) throw SystemError("cannot write '" + a.traces + "'");
    write_traces(t, result.traces);
  }
  for (const auto& d : result.diagnostics) ctx.err << "excluded group " << d.group_id << ": " << d.message << '\n';

  manifest.settings = settings.to_json();
  manifest.settings["treatment"] = to_string(treatment);
  manifest.settings["force_synthetic"] = a.force_synthetic;
  manifest.inputs[a.cohort] = sha256_file(a.cohort);
  if (!a.key.empty()) manifest.inputs[a.key] = sha256_file(a.key);
  if (!a.config.empty()) manifest.inputs[a.config] = sha256_file(a.config);
  manifest.seeds["simulate"] = settings.seed;
  add_cohort(manifest, result.cohort);
  if (manifest.models.empty()) manifest.models.push_back(settings.provider.model);
  Json m = manifest.to_json();
  m["excluded_groups"] = Json::array();
  for (const auto& d : result.diagnostics) m["excluded_groups"].push_back({{"group_id", d.group_id}, {"reason", d.message}});
  manifest.finished_at = utc_timestamp();
  m["finished_at"] = manifest.finished_at;
  write_json_file(manifest_path_for(a.out), m);

  ctx.out << "simulated " << result.cohort.groups.size() << " of " << human.groups.size() << " group(s) under "
          << to_string(treatment) << " with model " << settings.provider.model << '\n';
  if (result.cohort.groups.empty() && !human.groups.empty()) return kExitSystem;
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  std::string human, sim, out, config, key;
};

/// Groups carrying raw stage data but no outcome are completed by replaying
/// their recorded nominations, ballots and answers.
inline Cohort replay_incomplete(Cohort c, const TaskKey* key, const Settings& settings) {
  ReplayResponder replay;
  SessionOptions options;
  options.key = key;
  options.cutoff_policy = settings.cutoff_policy;
  options.honor_recorded_candidates = true;
  for (auto& g : c.groups)
    if (!g.complete()) g = run_session(g, replay, derive_seed(settings.seed, "replay:" + g.group_id), options);
  return c;
}

inline Cohort subset(const Cohort& c, Treatment t) {
  Cohort out;
  for (const auto& g : c.groups)
    if (g.treatment == t) out.groups.push_back(g);
  return out;
}

inline CohortTables compute_tables(const Cohort& human, const Cohort* sim, const Settings& settings) {
  CohortTables t;
  Cohort all = human;
  t.gap = gap_table(human);
  if (sim) {
    for (auto& row : gap_table(*sim, &human)) t.gap.push_back(std::move(row));
    all.groups.insert(all.groups.end(), sim->groups.begin(), sim->groups.end());
    t.alignment = alignment_report(human, *sim, settings.alignment_baseline);
  }
  t.nomination = nomination_table(all);
  t.score = score_table(all);
  t.stage_ratio = stage_ratio_table(all);
  const Cohort identified = subset(human, Treatment::kIdentified);
  const Cohort pseudonymous = subset(human, Treatment::kPseudonymous);
  if (!identified.groups.empty() && !pseudonymous.groups.empty())
    t.pronoun_balance = covariate_balance(identified, pseudonymous, pronoun_category, settings.yates);
  return t;
}

inline int cmd_analyze(const AnalyzeArgs& a, const SettingLayer& flags, Context& ctx) {
  RunManifest manifest;
  manifest.command_line = ctx.argv;
  manifest.started_at = utc_timestamp();
  const Settings settings = load_config(a.config.empty() ? std::nullopt : std::optional(a.config), flags, ctx.env);
  check_output_path(a.out, {a.human, a.sim, a.config, a.key});
  std::optional<TaskKey> key;
  if (!a.key.empty()) key = read_task_key_file(a.key);
  const Cohort human = replay_incomplete(read_cohort_file(a.human), key ? &*key : nullptr, settings);
  std::optional<Cohort> sim;
  if (!a.sim.empty()) sim = replay_incomplete(read_cohort_file(a.sim), key ? &*key : nullptr, settings);

  const CohortTables tables = compute_tables(human, sim ? &*sim : nullptr, settings);
  manifest.settings = {{"alignment_baseline", settings.alignment_baseline},
                       {"yates", settings.yates},
                       {"cutoff_policy", settings.to_json()["cutoff_policy"]}};
  manifest.seeds["replay"] = settings.seed;
  manifest.inputs[a.human] = sha256_file(a.human);
  if (!a.key.empty()) manifest.inputs[a.key] = sha256_file(a.key);
  if (sim) manifest.inputs[a.sim] = sha256_file(a.sim);
  if (!a.config.empty()) manifest.inputs[a.config] = sha256_file(a.config);
  add_cohort(manifest, human);
  if (sim) add_cohort(manifest, *sim);
  manifest.finished_at = utc_timestamp();
  const auto files = emit_report(a.out, tables, manifest.to_json());
  ctx.out << "wrote";
  for (const auto& f : files) ctx.out << ' ' << f;
  ctx.out << " to " << a.out << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

/// Minimal RFC-4180 reader for the files this tool writes.
inline std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SystemError("cannot open '" + path + "'");
  std::vector<std::vector<std::string>> rows(1);
  std::string cell;
  bool quoted = false;
  char c;
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          cell += '"';
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      rows.back().push_back(std::move(cell));
      cell.clear();
    } else if (c == '\n') {
      rows.back().push_back(std::move(cell));
      cell.clear();
      rows.emplace_back();
    } else if (c != '\r') {
      cell += c;
    }
  }
  if (!cell.empty() || !rows.back().empty()) rows.back().push_back(std::move(cell));
  if (rows.back().empty()) rows.pop_back();
  return rows;
}

inline std::string markdown_table(const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) return "(empty)\n";
  std::string s;
  auto line = [&s](const std::vector<std::string>& r) {
    s += '|';
    for (const auto& c : r) s += ' ' + c + " |";
    s += '\n';
  };
  line(rows.front());
  s += '|';
  for (std::size_t i = 0; i < rows.front().size(); ++i) s += " --- |";
  s += '\n';
  for (std::size_t i = 1; i < rows.size(); ++i) line(rows[i]);
  return s;
}

struct ReportArgs {
  std::string dir, out;
};

inline int cmd_report(const ReportArgs& a, Context& ctx) {
  const fs::path dir(a.dir);
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw SystemError("no manifest.json in '" + a.dir + "'; run analyze first");
  Json manifest;
  try {
    manifest = Json::parse(mf);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("manifest.json: " + std::string(e.what()));
  }
  std::string md = "# lostatsea report\n\n";
  md += "Config digest: `" + manifest.value("config_digest", std::string("?")) + "`\n";
  for (const auto& f : manifest.at("files")) {
    const auto name = f.get<std::string>();
    md += "\n## " + name.substr(0, name.rfind('.')) + "\n\n" + markdown_table(read_csv((dir / name).string()));
  }
  if (a.out.empty()) {
    ctx.out << md;
  } else {
    std::vector<std::string> inputs;
    for (const auto& f : manifest.at("files")) inputs.push_back((dir / f.get<std::string>()).string());
    inputs.push_back((dir / "manifest.json").string());
    check_output_path(a.out, inputs);
    std::ofstream o(a.out, std::ios::binary | std::ios::trunc);
    if (!o) throw SystemError("cannot write '" + a.out + "'");
    o << md;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr,
               EnvLookup env = process_env) {
  Context ctx{out, err, std::vector<std::string>(argv, argv + argc), std::move(env)};
  CLI::App app{"Lost-at-Sea leader election simulator and analytics", "lostatsea"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "validate a cohort file and optionally write its canonical form");
  c_ingest->add_option("--in", ingest.in, "cohort JSON Lines file")->required();
  c_ingest->add_flag("--validate", ingest.validate, "only validate (the default when --out is absent)");
  c_ingest->add_option("--out", ingest.out, "canonical cohort output");
  c_ingest->add_option("--schema-version", ingest.schema, "expected schema version");

  SynthArgs synth_args;
  auto* c_synth = app.add_subcommand("synth", "generate a synthetic cohort");
  auto& sc = synth_args.config;
  c_synth->add_option("--out", synth_args.out, "cohort output")->required();
  c_synth->add_option("--groups", sc.n_groups, "number of groups")->capture_default_str();
  c_synth->add_option("--max-items", sc.max_items, "task items")->capture_default_str();
  c_synth->add_option("--nomination-base", sc.nomination_base, "mean W of non-male members")->capture_default_str();
  c_synth->add_option("--male-shift", sc.male_nomination_shift, "added to male W")->capture_default_str();
  c_synth->add_option("--score-base", sc.score_base, "mean score of non-male members")->capture_default_str();
  c_synth->add_option("--score-shift", sc.score_gender_shift, "added to male scores")->capture_default_str();
  c_synth->add_option("--noise", sc.noise_spread, "noise SD on the W scale")->capture_default_str();
  c_synth->add_option("--treatment", synth_args.treatment, "identified | pseudonymous | no_demographics")
      ->capture_default_str();
  c_synth->add_option("--seed", sc.seed, "seed")->capture_default_str();

  SimulateArgs sim;
  SettingFlags sim_flags;
  auto* c_sim = app.add_subcommand("simulate", "run a matched agent cohort");
  c_sim->add_option("--cohort", sim.cohort, "human cohort")->required();
  c_sim->add_option("--treatment", sim.treatment, "identified | pseudonymous | no_demographics")->required();
  c_sim->add_option("--out", sim.out, "simulated cohort output")->required();
  c_sim->add_option("--traces", sim.traces, "agent trace JSON Lines output");
  c_sim->add_option("--key", sim.key, "task key JSON (default: built-in 6-item key)");
  c_sim->add_option("--config", sim.config, "key = value settings file");
  c_sim->add_flag("--force-synthetic", sim.force_synthetic, "allow placeholder transcripts under identified/pseudonymous");
  sim_flags.attach(c_sim, {"provider", "endpoint", "model", "api_key_env", "temperature", "max_output_tokens",
                           "timeout_ms", "parallelism", "max_attempts", "backoff_ms", "backoff_max_ms", "reask_limit",
                           "seed"});

  AnalyzeArgs an;
  SettingFlags an_flags;
  auto* c_an = app.add_subcommand("analyze", "compute report tables");
  c_an->add_option("--human", an.human, "human (or reference) cohort")->required();
  c_an->add_option("--sim", an.sim, "simulated cohort matched to --human");
  c_an->add_option("--out", an.out, "report directory")->required();
  c_an->add_option("--config", an.config, "key = value settings file");
  c_an->add_option("--key", an.key, "task key for scoring replayed answers (default: built-in 6-item key)");
  an_flags.attach(c_an, {"alignment_baseline", "yates", "seed", "cutoff_policy"});

  ReportArgs rep;
  auto* c_rep = app.add_subcommand("report", "render an analyze directory as Markdown");
  c_rep->add_option("--dir", rep.dir, "directory written by analyze")->required();
  c_rep->add_option("--out", rep.out, "Markdown output (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  try {
    if (c_ingest->parsed()) return cmd_ingest(ingest, ctx);
    if (c_synth->parsed()) return cmd_synth(synth_args, ctx);
    if (c_sim->parsed()) return cmd_simulate(sim, sim_flags.layer(), ctx);
    if (c_an->parsed()) return cmd_analyze(an, an_flags.layer(), ctx);
    if (c_rep->parsed()) return cmd_report(rep, ctx);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const SystemError& e) {
    err << "error: " << e.what() << '\n';
    return kExitSystem;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSystem;
  }
  return kExitValidation;
}

}  // namespace lostatsea::cli
