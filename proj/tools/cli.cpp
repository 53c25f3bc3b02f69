// Copyright 2026 The slsdet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "sls/ensemble.hpp"
#include "sls/error.hpp"
#include "sls/eval_metrics.hpp"
#include "sls/featstore.hpp"
#include "sls/format.hpp"
#include "sls/head_io.hpp"
#include "sls/preprocess.hpp"
#include "sls/rng.hpp"
#include "sls/trainer.hpp"

namespace sls::cli {
namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out << text;
  if (!out.flush()) throw DataError(path.string() + ": write failed");
}

/// Writes to `path`, or to `out` when path is "-".
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path == "-") out << text;
  else write_text(path, text);
}

struct FixturesArgs {
  std::string out_dir;
  std::uint64_t seed = 0;
  double separation = 4.0;
  std::uint32_t train_per_class = 200;
  std::uint32_t dev_per_class = 100;
  std::uint32_t layers = 4;
  std::uint32_t frames = 16;
  std::uint32_t dim = 16;
};

int cmd_fixtures(const FixturesArgs& a, std::ostream& err) {
  const fs::path root(a.out_dir);
  const fs::path features = root / "features";
  fs::create_directories(features);

  std::ostringstream readme;
  readme << "synthetic hidden-state fixture\n"
         << "seed=" << a.seed << '\n'
         << "separation=" << format_real(a.separation) << '\n'
         << "layers=" << a.layers << "\nframes=" << a.frames
         << "\ndim=" << a.dim << '\n'
         << "informative_features=" << informative_features(a.dim) << '\n'
         << "train_per_class=" << a.train_per_class << '\n'
         << "dev_per_class=" << a.dev_per_class << '\n'
         << "noise=irwin-hall-12 (xoshiro256**, splitmix64 seeding)\n";

  const auto make = [&](const std::string& split, std::uint32_t per_class,
                        std::uint64_t stream) {
    FixtureSpec spec;
    spec.prefix = split;
    spec.per_class = per_class;
    spec.layers = a.layers;
    spec.frames = a.frames;
    spec.dim = a.dim;
    spec.separation = a.separation;
    spec.seed = derive_seed(a.seed, stream);
    const Fixture fixture = synth_fixture(spec);
    write_fixture_stacks(fixture, features);
    write_manifest_file(fixture.manifest, root / (split + ".tsv"));
    readme << split << "_seed=" << spec.seed << '\n';
    err << "[slsdet] wrote " << fixture.stacks.size() << " " << split
        << " stacks\n";
  };
  make("train", a.train_per_class, 1);
  if (a.dev_per_class > 0) make("dev", a.dev_per_class, 2);
  write_text(root / "README.txt", readme.str());
  return kOk;
}

struct TrainArgs {
  std::string manifest;
  std::string features;
  std::string dev_manifest;
  std::string dev_features;
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string history;
};

int cmd_train(const TrainArgs& a, std::ostream& err) {
  TrainConfig config = a.config.empty() ? TrainConfig{}
                                        : read_train_config_file(a.config);
  for (const auto& kv : a.overrides) set_config_value(config, kv);
  if (a.seed) config.seed = *a.seed;
  config.validate();

  const Dataset train_set =
      load_dataset(read_manifest_file(a.manifest), a.features);
  std::optional<Dataset> dev_set;
  if (!a.dev_manifest.empty())
    dev_set = load_dataset(read_manifest_file(a.dev_manifest),
                           a.dev_features.empty() ? a.features : a.dev_features);

  const TrainResult result =
      train(train_set, dev_set ? &*dev_set : nullptr, config,
            [&](const EpochStats& s) {
              err << "[slsdet] epoch " << s.epoch << " lr=" << format_real(s.lr)
                  << " loss=" << format_real(s.mean_loss)
                  << " train_eer=" << format_real(s.train_eer);
              if (s.dev_eer) err << " dev_eer=" << format_real(*s.dev_eer);
              err << '\n';
            });

  write_checkpoint_file(result.params, a.out);
  std::ostringstream history;
  write_history_csv(result.history, history);
  write_text(a.history.empty() ? a.out + ".history.csv" : a.history,
             history.str());
  err << "[slsdet] kept epoch " << result.best_epoch << " -> " << a.out << '\n';
  return kOk;
}

struct ScoreArgs {
  std::string checkpoint;
  std::string manifest;
  std::string features;
  std::string out = "-";
};

int cmd_score(const ScoreArgs& a, std::ostream& out) {
  const auto params = read_checkpoint_file(a.checkpoint);
  const Dataset data = load_dataset(read_manifest_file(a.manifest), a.features);
  const auto scores = score_dataset(data, params);
  std::vector<ScoreEntry> entries;
  entries.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i)
    entries.push_back({data.manifest.records()[i].utterance_id, scores[i]});
  std::ostringstream text;
  write_scores(entries, text);
  emit(a.out, text.str(), out);
  return kOk;
}

struct FuseArgs {
  std::string scores_x;
  std::string scores_w;
  std::string out = "-";
};

int cmd_fuse(const FuseArgs& a, std::ostream& out) {
  const auto fused =
      fuse_scores(read_scores_file(a.scores_x), read_scores_file(a.scores_w));
  std::ostringstream text;
  write_scores(fused, text);
  emit(a.out, text.str(), out);
  return kOk;
}

struct EvalArgs {
  std::string scores;
  std::string manifest;
  bool per_attack = false;
  bool per_origin = false;
  std::vector<std::string> exclude_origins;
  std::string out = "-";
  std::string csv;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const Manifest manifest = read_manifest_file(a.manifest);
  const auto trials = join_scores(read_scores_file(a.scores), manifest);
  if (trials.size() < manifest.size())
    err << "[slsdet] warning: " << manifest.size() - trials.size()
        << " manifest rows have no score\n";

  const bool defaults = !a.per_attack && !a.per_origin && a.exclude_origins.empty();
  std::vector<BreakdownMode> modes{BreakdownMode::overall()};
  if (a.per_attack || defaults) modes.push_back(BreakdownMode::per_attack());
  std::vector<std::string> excluded = a.exclude_origins;
  if (defaults) excluded.push_back("acesinger");
  for (const auto& o : excluded) modes.push_back(BreakdownMode::exclude_origin(o));
  if (a.per_origin) modes.push_back(BreakdownMode::per_origin());

  std::vector<SliceResult> results;
  std::vector<std::string> extra_attacks, origins, extra_excluded;
  const ReportLayout table = attack_layout();
  const auto in_table = [&](const std::string& slice) {
    for (const auto& c : table.columns)
      if (c.first == slice) return true;
    return false;
  };
  for (const auto& mode : modes) {
    Breakdown b = breakdown(trials, mode);
    for (const auto& w : b.warnings) err << "[slsdet] warning: " << w << '\n';
    for (auto& s : b.slices) {
      using Kind = BreakdownMode::Kind;
      if (mode.kind == Kind::kPerOrigin) origins.push_back(s.slice);
      else if (!in_table(s.slice)) {
        (mode.kind == Kind::kPerAttack ? extra_attacks : extra_excluded)
            .push_back(s.slice);
      }
      results.push_back(std::move(s));
    }
  }

  std::string text = render_report(results, table).text;
  const auto block = [&](const std::vector<std::string>& slices) {
    if (!slices.empty()) text += "\n" + render_report(results, origin_layout(slices)).text;
  };
  block(extra_attacks);
  block(extra_excluded);
  block(origins);
  emit(a.out, text, out);
  if (!a.csv.empty()) write_text(a.csv, results_csv(results));
  return kOk;
}

struct WeightsArgs {
  std::string checkpoint;
  std::string manifest;
  std::string features;
  std::size_t limit = 0;
  std::string out = "-";
};

int cmd_weights(const WeightsArgs& a, std::ostream& out) {
  const auto params = read_checkpoint_file(a.checkpoint);
  Manifest manifest = read_manifest_file(a.manifest);
  if (a.limit > 0 && a.limit < manifest.size()) {
    std::vector<TrialRecord> head(manifest.records().begin(),
                                  manifest.records().begin() +
                                      static_cast<std::ptrdiff_t>(a.limit));
    manifest = Manifest(std::move(head), manifest.source());
  }
  const Dataset data = load_dataset(manifest, a.features);
  std::vector<LayerWeightRow> rows;
  for (const auto& stack : data.stacks)
    rows.push_back({stack.utterance_id(), layer_weights(stack, params)});
  std::ostringstream text;
  write_layer_weights_csv(rows, text);
  emit(a.out, text.str(), out);
  return kOk;
}

struct ReportArgs {
  std::string results;
  std::vector<std::string> origins;
  std::string out = "-";
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
  std::ifstream in(a.results);
  if (!in) throw DataError(a.results + ": cannot open results file");
  const auto results = read_results_csv(in, a.results);
  std::string text = render_report(results, attack_layout()).text;
  if (!a.origins.empty())
    text += "\n" + render_report(results, origin_layout(a.origins)).text;
  emit(a.out, text, out);
  return kOk;
}

struct GoldenArgs {
  std::vector<std::size_t> lengths{16000, 48000, 64000, 64001, 70000, 160000};
  std::vector<std::uint64_t> seeds{0, 1, 42, 2024};
  std::string out = "-";
};

int cmd_window_golden(const GoldenArgs& a, std::ostream& out) {
  std::ostringstream text;
  write_window_goldens(make_window_goldens(a.lengths, a.seeds), text);
  emit(a.out, text.str(), out);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Layer-select head training, scoring, fusion and EER evaluation "
               "over serialized hidden-state stacks",
               "slsdet"};
  app.require_subcommand(1);

  FixturesArgs fx;
  auto* fixtures = app.add_subcommand("fixtures", "write a synthetic two-class fixture");
  fixtures->add_option("--out", fx.out_dir, "output directory")->required();
  fixtures->add_option("--seed", fx.seed, "fixture seed")->capture_default_str();
  fixtures->add_option("--separation", fx.separation,
                       "class-mean distance on informative features")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  fixtures->add_option("--train-per-class", fx.train_per_class)->capture_default_str()
      ->check(CLI::PositiveNumber);
  fixtures->add_option("--dev-per-class", fx.dev_per_class, "0 disables the dev split")
      ->capture_default_str();
  fixtures->add_option("--layers", fx.layers)->capture_default_str()->check(CLI::PositiveNumber);
  fixtures->add_option("--frames", fx.frames)->capture_default_str()->check(CLI::PositiveNumber);
  fixtures->add_option("--dim", fx.dim)->capture_default_str()->check(CLI::PositiveNumber);

  TrainArgs tr;
  std::uint64_t train_seed = 0;
  auto* train_cmd = app.add_subcommand("train", "train a head on frozen features");
  train_cmd->add_option("--manifest", tr.manifest, "training manifest TSV")->required();
  train_cmd->add_option("--features", tr.features, "directory of <id>.hstk files")->required();
  train_cmd->add_option("--dev-manifest", tr.dev_manifest, "dev manifest for checkpoint selection");
  train_cmd->add_option("--dev-features", tr.dev_features, "dev feature dir (default: --features)");
  train_cmd->add_option("--config", tr.config, "key=value config file");
  train_cmd->add_option("--set", tr.overrides, "config override key=value (repeatable)");
  auto* seed_opt = train_cmd->add_option("--seed", train_seed, "overrides the config seed");
  train_cmd->add_option("--out", tr.out, "checkpoint path")->required();
  train_cmd->add_option("--history", tr.history, "history CSV (default: <out>.history.csv)");

  ScoreArgs sc;
  auto* score = app.add_subcommand("score", "score every manifest row");
  score->add_option("--checkpoint", sc.checkpoint)->required();
  score->add_option("--manifest", sc.manifest)->required();
  score->add_option("--features", sc.features)->required();
  score->add_option("--out", sc.out, "score TSV ('-' for stdout)")->capture_default_str();

  FuseArgs fu;
  auto* fuse = app.add_subcommand("fuse", "max-abs fusion of two score files");
  fuse->add_option("--scores-x", fu.scores_x, "first (XLS-R branch) scores")->required();
  fuse->add_option("--scores-w", fu.scores_w, "second (WavLM branch) scores")->required();
  fuse->add_option("--out", fu.out)->capture_default_str();

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "EER report for a score file");
  eval->add_option("--scores", ev.scores)->required();
  eval->add_option("--manifest", ev.manifest)->required();
  eval->add_flag("--per-attack", ev.per_attack, "EER per attack tag");
  eval->add_flag("--per-origin", ev.per_origin, "EER per dataset origin");
  eval->add_option("--exclude-origin", ev.exclude_origins,
                   "pooled EER without this origin (repeatable)");
  eval->add_option("--out", ev.out, "report text ('-' for stdout)")->capture_default_str();
  eval->add_option("--csv", ev.csv, "full-precision CSV twin");

  WeightsArgs wt;
  auto* weights = app.add_subcommand("weights", "export per-utterance layer weights");
  weights->add_option("--checkpoint", wt.checkpoint)->required();
  weights->add_option("--manifest", wt.manifest)->required();
  weights->add_option("--features", wt.features)->required();
  weights->add_option("--limit", wt.limit, "first N manifest rows only (0 = all)");
  weights->add_option("--out", wt.out)->capture_default_str();

  ReportArgs rp;
  auto* report = app.add_subcommand("report", "render a results CSV as a table");
  report->add_option("--results", rp.results)->required();
  report->add_option("--origins", rp.origins, "also render these origin columns");
  report->add_option("--out", rp.out)->capture_default_str();

  GoldenArgs gd;
  auto* golden = app.add_subcommand("window-golden", "crop-offset golden vectors");
  golden->add_option("--lengths", gd.lengths)->capture_default_str();
  golden->add_option("--seeds", gd.seeds)->capture_default_str();
  golden->add_option("--out", gd.out)->capture_default_str();

  std::vector<const char*> argv{"slsdet"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    const auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front();
    err << "slsdet: " << e.what() << '\n';
    if (e.get_exit_code() == 0) return kOk;
    err << (sub ? sub->help() : app.help());
    return kUsage;
  }

  try {
    if (*fixtures) return cmd_fixtures(fx, err);
    if (*train_cmd) {
      if (*seed_opt) tr.seed = train_seed;
      return cmd_train(tr, err);
    }
    if (*score) return cmd_score(sc, out);
    if (*fuse) return cmd_fuse(fu, out);
    if (*eval) return cmd_eval(ev, out, err);
    if (*weights) return cmd_weights(wt, out);
    if (*report) return cmd_report(rp, out);
    if (*golden) return cmd_window_golden(gd, out);
  } catch (const NumericError& e) {
    err << "slsdet: numeric failure: " << e.what() << '\n';
    return kNumericError;
  } catch (const DataError& e) {
    err << "slsdet: " << e.what() << '\n';
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "slsdet: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace sls::cli
