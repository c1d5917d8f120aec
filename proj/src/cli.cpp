/*
 * Copyright 2026 The avqa Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "avqa/cli.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "CLI11.hpp"
#include "avqa/error.hpp"
#include "avqa/hm.hpp"
#include "avqa/manifest.hpp"
#include "avqa/siti.hpp"
#include "avqa/synth.hpp"
#include "csv.hpp"

namespace avqa {

namespace fs = std::filesystem;

namespace {

std::vector<SequenceManifestEntry> manifest_of(const RunConfig& cfg) {
  require_path(cfg.manifest, "manifest");
  return load_manifest(cfg.manifest);
}

std::vector<std::string> ids_of(const std::vector<SequenceManifestEntry>& entries) {
  std::vector<std::string> ids;
  for (const auto& e : entries) ids.push_back(e.sequence_id);
  return ids;
}

std::map<std::string, double> mos_table(const RunConfig& cfg) {
  const fs::path path = cfg.mos_path();
  if (!fs::exists(path))
    throw ValidationError("MOS file not found: " + path.string() + " (run process-scores first)");
  std::map<std::string, double> out;
  for (const auto& m : parse_mos_csv(read_file(path))) out[m.sequence_id] = m.mos;
  return out;
}

SplitAssignment load_split(const RunConfig& cfg, const std::vector<std::string>& manifest_ids) {
  const fs::path path = cfg.split_path();
  if (!fs::exists(path))
    throw ValidationError("split file not found: " + path.string() + " (run split first)");
  SplitAssignment s = parse_split_csv(read_file(path));
  const std::set<std::string> known(manifest_ids.begin(), manifest_ids.end());
  for (const auto* part : {&s.train, &s.test})
    for (const auto& id : *part)
      if (!known.count(id)) throw DataError(path.string() + ": unknown sequence '" + id + "'");
  return s;
}

std::vector<std::string> select_ids(const RunConfig& cfg, const std::string& on) {
  const auto ids = ids_of(manifest_of(cfg));
  if (on == "all") return ids;
  const SplitAssignment s = load_split(cfg, ids);
  if (on == "train") return s.train;
  if (on == "test") return s.test;
  throw ValidationError("unknown split selector '" + on + "'");
}

LoadedModel load_checked_model(const RunConfig& cfg) {
  const fs::path path = cfg.checkpoint_path();
  if (!fs::exists(path)) throw ValidationError("checkpoint not found: " + path.string());
  LoadedModel m = load_model(nn::read_checkpoint(path));
  check_architecture_match(cfg.model, m.model.config());
  return m;
}

}  // namespace

SplitAssignment make_split(std::vector<std::string> ids, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ValidationError("split ratio must lie in (0, 1)");
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw ValidationError("split: duplicate sequence ids");
  nn::Rng rng(seed);
  for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[rng.below(i)]);
  const auto n_test = static_cast<std::size_t>(
      std::floor(static_cast<double>(ids.size()) * (1.0 - ratio) + 1e-9));
  SplitAssignment s;
  s.test.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.train.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_test), ids.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

std::string format_split_csv(const SplitAssignment& s) {
  std::vector<std::pair<std::string, const char*>> rows;
  for (const auto& id : s.train) rows.emplace_back(id, "train");
  for (const auto& id : s.test) rows.emplace_back(id, "test");
  std::sort(rows.begin(), rows.end());
  std::string out = "sequence_id,split\n";
  for (const auto& [id, part] : rows) out += id + "," + part + "\n";
  return out;
}

SplitAssignment parse_split_csv(std::string_view text) {
  const auto lines = csv::split_lines(text);
  if (lines.empty() || lines[0] != "sequence_id,split")
    throw DataError("split file: expected header sequence_id,split");
  SplitAssignment s;
  std::map<std::string, std::string> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = csv::split_line(lines[i]);
    const std::string where = "split file line " + std::to_string(i + 1);
    if (f.size() != 2) throw DataError(where + ": expected 2 fields");
    if (auto it = seen.find(f[0]); it != seen.end()) {
      throw ValidationError("split leakage: '" + f[0] + "' assigned to both " + it->second +
                            " and " + f[1]);
    }
    seen[f[0]] = f[1];
    if (f[1] == "train") {
      s.train.push_back(f[0]);
    } else if (f[1] == "test") {
      s.test.push_back(f[0]);
    } else {
      throw DataError(where + ": split must be train or test");
    }
  }
  return s;
}

ModelInput load_model_input(const RunConfig& cfg, const std::string& id) {
  return preprocess(load_y4m(cfg.video_path(id)), load_wav(cfg.audio_path(id)), cfg.model);
}

std::vector<MOSRecord> cmd_process_scores(const RunConfig& cfg, std::ostream& log) {
  require_path(cfg.scores, "scores");
  const auto records = load_ratings(cfg.scores);
  std::vector<std::string> warnings;
  const auto valid = exclude_ssq(records, &warnings);
  if (valid.empty()) throw DataError(cfg.scores.string() + ": every session is SSQ-flagged");
  const ScreeningOutcome screened = screen_subjects(valid);
  std::vector<std::string> expected;
  if (!cfg.manifest.empty()) expected = ids_of(manifest_of(cfg));
  const auto mos = compute_mos(screened.kept, expected);
  write_file(cfg.mos_path(), format_mos_csv(mos));

  const auto rejected = screened.rejected_subjects();
  log << "ratings: " << records.size() << ", after SSQ exclusion: " << valid.size() << "\n";
  log << "subjects: " << screened.subjects.size() << ", rejected: " << rejected.size();
  for (std::size_t i = 0; i < rejected.size(); ++i) log << (i ? ", " : " (") << rejected[i];
  log << (rejected.empty() ? "" : ")") << "\n";
  for (const auto& m : mos)
    if (m.below_min_ratings)
      log << "warning: " << m.sequence_id << " has " << m.n_valid << " valid ratings (< "
          << kMinValidRatings << ")\n";
  log << "wrote " << cfg.mos_path().string() << "\n";
  return mos;
}

std::vector<SITIRow> cmd_siti(const RunConfig& cfg, std::ostream& log) {
  std::vector<SITIRow> rows;
  for (const auto& e : manifest_of(cfg))
    rows.push_back({e.sequence_id, summarize_siti(load_y4m(cfg.video_path(e.sequence_id)))});
  const fs::path out = cfg.output_dir / "siti.csv";
  write_file(out, format_siti_csv(rows));
  log << "wrote " << out.string() << " (" << rows.size() << " sequences)\n";
  return rows;
}

void cmd_hm_stats(const RunConfig& cfg, std::ostream& log) {
  require_path(cfg.hm_root, "hm_root");
  std::vector<fs::path> files;
  for (const auto& it : fs::recursive_directory_iterator(cfg.hm_root))
    if (it.is_regular_file() && it.path().extension() == ".csv") files.push_back(it.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError(cfg.hm_root.string() + ": no .csv traces");
  std::vector<std::pair<std::string, HmSummary>> rows;
  for (const auto& f : files) {
    fs::path rel = fs::relative(f, cfg.hm_root);
    rel.replace_extension();
    rows.emplace_back(rel.generic_string(), hm_stats(load_hm(f)));
  }
  const fs::path out = cfg.output_dir / "hm_stats.csv";
  write_file(out, format_hm_summary_csv(rows));
  log << "wrote " << out.string() << " (" << rows.size() << " traces)\n";
}

SplitAssignment cmd_split(const RunConfig& cfg, std::ostream& log) {
  const SplitAssignment s = make_split(ids_of(manifest_of(cfg)), cfg.split_ratio, cfg.split_seed);
  write_file(cfg.split_path(), format_split_csv(s));
  log << "train: " << s.train.size() << ", test: " << s.test.size() << "\n";
  log << "wrote " << cfg.split_path().string() << "\n";
  return s;
}

void cmd_extract_features(const RunConfig& cfg, std::ostream& log) {
  const auto entries = manifest_of(cfg);
  for (const auto& e : entries) {
    const PatchList p = audio_patches(load_wav(cfg.audio_path(e.sequence_id)), cfg.model.audio);
    if (p.patches.empty()) throw DataError(e.sequence_id + ": audio shorter than one window");
    const nn::Shape& ps = p.patches.front().shape();
    nn::Tensor stacked({static_cast<int>(p.patches.size()), ps[0], ps[1]});
    std::size_t off = 0;
    for (const auto& t : p.patches) {
      std::copy(t.data(), t.data() + t.size(), stacked.data() + off);
      off += t.size();
    }
    write_feature_dump(cfg.output_dir / "features" / (e.sequence_id + ".avqf"), stacked);
  }
  log << "wrote " << entries.size() << " feature files under "
      << (cfg.output_dir / "features").string() << "\n";
}

TrainResult cmd_train(const RunConfig& cfg, std::ostream& log) {
  const auto ids = select_ids(cfg, cfg.train_on);
  const auto mos = mos_table(cfg);
  std::vector<TrainingSample> samples;
  for (const auto& id : ids) {
    auto it = mos.find(id);
    if (it == mos.end()) throw DataError("no MOS for training sequence '" + id + "'");
    samples.push_back({id, load_model_input(cfg, id), it->second / 100.0});
  }
  log << "training on " << samples.size() << " sequences, " << cfg.model.epochs << " epochs\n";
  const AvqaModel model(cfg.model);
  std::string train_log = "step,loss\n";
  TrainResult r = train(model, samples, [&](int step, double loss) {
    train_log += std::to_string(step) + "," + csv::fmt(loss) + "\n";
  });
  write_file(cfg.output_dir / "train_log.csv", train_log);
  nn::write_checkpoint(cfg.checkpoint_path(), make_checkpoint(cfg.model, r.params));
  if (!r.step_losses.empty())
    log << "final loss " << csv::fmt(r.step_losses.back()) << "\n";
  log << "wrote " << cfg.checkpoint_path().string() << "\n";
  return r;
}

Evaluation cmd_evaluate(const RunConfig& cfg, const std::string& on, std::ostream& log) {
  const LoadedModel m = load_checked_model(cfg);
  const auto ids = select_ids(cfg, on);
  const auto mos = mos_table(cfg);
  Evaluation ev;
  std::vector<double> pred, truth;
  for (const auto& id : ids) {
    auto it = mos.find(id);
    if (it == mos.end()) throw DataError("no MOS for sequence '" + id + "'");
    const double score = predict_score(m.model, m.params, load_model_input(cfg, id));
    ev.predictions.push_back({id, score, it->second});
    pred.push_back(score);
    truth.push_back(it->second);
  }
  ev.report = evaluate_predictions(pred, truth);
  std::string rows = "sequence_id,prediction,mos\n";
  for (const auto& p : ev.predictions)
    rows += p.sequence_id + "," + csv::fmt(p.score) + "," + csv::fmt(p.mos) + "\n";
  write_file(cfg.output_dir / "predictions.csv", rows);
  write_file(cfg.output_dir / "metrics.csv", format_metric_csv(ev.report));
  if (ev.report.degenerate_fit) log << "warning: degenerate logistic fit, identity mapping used\n";
  log << format_metric_csv(ev.report);
  return ev;
}

double cmd_predict(const RunConfig& cfg, const std::string& id, std::ostream& log) {
  const LoadedModel m = load_checked_model(cfg);
  const double score = predict_score(m.model, m.params, load_model_input(cfg, id));
  log << id << "," << csv::fmt(score) << "\n";
  return score;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Audio-visual quality assessment for 360-degree video"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "run config file")->required();
    sub->add_option("--set", overrides, "override a config key (key=value)");
  };
  auto* process = app.add_subcommand("process-scores", "screen ratings and compute MOS");
  auto* siti = app.add_subcommand("siti", "spatial/temporal information per sequence");
  auto* hm = app.add_subcommand("hm-stats", "head-movement trace statistics");
  auto* split = app.add_subcommand("split", "seeded train/test split");
  auto* extract = app.add_subcommand("extract-features", "dump log-mel audio patches");
  auto* trn = app.add_subcommand("train", "train the model");
  auto* eval = app.add_subcommand("evaluate", "metrics on a split");
  auto* pred = app.add_subcommand("predict", "score one sequence");
  for (auto* s : {process, siti, hm, split, extract, trn, eval, pred}) add_common(s);
  std::string eval_on = "test";
  eval->add_option("--on", eval_on, "train, test or all")
      ->check(CLI::IsMember({"train", "test", "all"}));
  std::string sequence;
  pred->add_option("--sequence", sequence, "sequence id")->required();

  auto* synth = app.add_subcommand("synth-fixture", "write the synthetic test corpus");
  std::string synth_out;
  SynthOptions synth_opts;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--seed", synth_opts.seed, "corpus seed");
  synth->add_option("--sequences", synth_opts.sequences, "number of sequences");
  synth->add_option("--subjects", synth_opts.subjects, "number of raters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::kValidation);
  }

  try {
    if (synth->parsed()) {
      const auto seqs = write_synth_fixture(synth_out, synth_opts);
      out << "wrote " << seqs.size() << " sequences to " << synth_out << "\n";
      return 0;
    }
    RunConfig cfg = load_run_config(config_path);
    std::string run_log;
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + kv + "'");
      set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1), fs::current_path());
      run_log += "override " + kv + "\n";
      err << "override " << kv << "\n";
    }
    validate(cfg);
    if (cfg.output_dir.empty()) throw ValidationError("config: output_dir is not set");
    CLI::App* active = app.get_subcommands().front();
    run_log = "command " + active->get_name() + "\n" + run_log + format_run_config(cfg);
    write_file(cfg.output_dir / (active->get_name() + ".log"), run_log);

    if (active == process) cmd_process_scores(cfg, out);
    else if (active == siti) cmd_siti(cfg, out);
    else if (active == hm) cmd_hm_stats(cfg, out);
    else if (active == split) cmd_split(cfg, out);
    else if (active == extract) cmd_extract_features(cfg, out);
    else if (active == trn) cmd_train(cfg, out);
    else if (active == eval) cmd_evaluate(cfg, eval_on, out);
    else if (active == pred) cmd_predict(cfg, sequence, out);
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kData);
  }
}

}  // namespace avqa
