#include "cemaint/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <thread>

#include <CLI11.hpp>

#include "cemaint/analysis.hpp"
#include "cemaint/csv.hpp"
#include "cemaint/logistic.hpp"
#include "cemaint/ratings_adapter.hpp"

namespace cemaint::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("write failed for " + path.string());
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

void prepare_out(const RunConfig& config) {
  std::error_code ec;
  fs::create_directories(config.out, ec);
  if (ec || !fs::is_directory(config.out)) {
    throw ConfigError("cannot create output directory " + config.out.string());
  }
}

void print_warnings(std::ostream& log, const Warnings& warnings) {
  for (const auto& w : warnings) log << "warning: " << w << '\n';
}

std::string optional_fixed(const std::optional<double>& v) {
  return v ? csv::fixed(*v) : std::string();
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// Score rows grouped by model id, in order of first appearance.
std::vector<std::pair<std::string, std::vector<ScoreRow>>> read_models(
    const std::vector<fs::path>& paths) {
  std::vector<std::pair<std::string, std::vector<ScoreRow>>> models;
  for (const auto& path : paths) {
    for (auto& row : read_scores_csv(path)) {
      auto it = std::find_if(models.begin(), models.end(),
                             [&](const auto& m) { return m.first == row.model_id; });
      if (it == models.end()) {
        models.emplace_back(row.model_id, std::vector<ScoreRow>{});
        it = std::prev(models.end());
      }
      it->second.push_back(std::move(row));
    }
  }
  return models;
}

std::vector<fs::path> scores_inputs(const RunConfig& config) {
  if (!config.scores.empty()) return config.scores;
  return {config.out / "scores.csv"};
}

json join_json(const JoinResult& join) {
  return json{{"matched", join.instances.size()},
              {"unmatched_scores", join.unmatched_scores},
              {"unmatched_ratings", join.unmatched_ratings},
              {"rejected", join.rejected}};
}

json coefficient_json(const std::optional<CoefficientEstimate>& e) {
  if (!e) return nullptr;
  return json{{"coef", e->coef},       {"std_err", e->std_err}, {"z", e->z},
              {"p", e->p_value},       {"ci_low", e->ci_low},   {"ci_high", e->ci_high}};
}

json entry_json(const AssociationEntry& e) {
  json j{{"estimable", e.estimable}, {"n", e.n}, {"positives", e.positives}};
  if (!e.estimable) j["reason"] = e.reason;
  j["log_ce"] = coefficient_json(e.ce);
  if (e.lloc) j["log_lloc"] = coefficient_json(e.lloc);
  if (e.lloc_low) j["lloc_low"] = *e.lloc_low;
  if (e.lloc_high) j["lloc_high"] = *e.lloc_high;
  return j;
}

}  // namespace

ScoredCorpus score_corpus(const Corpus& corpus, const LanguageModel& model,
                          const std::string& model_id, ScoringOptions options,
                          std::size_t concurrency) {
  const std::size_t n = corpus.files.size();
  std::vector<std::optional<ScoreRow>> rows(n);
  std::vector<std::string> failures(n);
  std::vector<Warnings> file_warnings(n);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      const SourceClass& file = corpus.files[i];
      try {
        const CrossEntropyResult r =
            score_text(model, file.id, file.cleaned_text, options, &file_warnings[i]);
        rows[i] = ScoreRow{file.id,          model_id,    file.lloc, r.total_targets,
                           r.chunks.size(), r.ce,        r.perplexity};
      } catch (const std::exception& e) {
        failures[i] = e.what();
        if (failures[i].empty()) failures[i] = "scoring failed";
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const std::size_t workers = std::max<std::size_t>(1, std::min(concurrency, n));
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  ScoredCorpus result;
  result.failures = corpus.failures;
  result.warnings = corpus.warnings;
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& w : file_warnings[i]) result.warnings.push_back(corpus.files[i].id + ": " + w);
    if (rows[i]) {
      result.rows.push_back(std::move(*rows[i]));
    } else {
      result.failures.push_back({corpus.files[i].id, failures[i]});
    }
  }
  std::sort(result.failures.begin(), result.failures.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  return result;
}

int cmd_score(const RunConfig& config, std::ostream& log) {
  if (!config.corpus) throw ConfigError("score: --corpus is required");
  const Corpus corpus = load_corpus(*config.corpus, config.extensions);

  RemoteOptions remote;
  remote.max_in_flight = config.concurrency;
  const auto model = open_model(config.builtin, config.endpoint, config.max_input, remote);
  const std::string model_id = config.model_id.value_or(model->spec().model_id);

  const ScoredCorpus scored = score_corpus(corpus, *model, model_id,
                                           ScoringOptions{config.prepend_bos},
                                           config.concurrency);
  prepare_out(config);

  json failures = json::array();
  for (const auto& f : scored.failures) failures.push_back({{"file", f.id}, {"reason", f.reason}});
  const json report{{"model_id", model_id},
                    {"max_input", model->spec().max_input},
                    {"prepend_bos", config.prepend_bos},
                    {"files_found", corpus.files.size() + corpus.failures.size()},
                    {"files_scored", scored.rows.size()},
                    {"failures", failures},
                    {"warnings", scored.warnings}};
  write_json(config.out / "score_report.json", report);

  print_warnings(log, scored.warnings);
  for (const auto& f : scored.failures) log << "failed: " << f.id << ": " << f.reason << '\n';
  if (scored.rows.empty()) {
    log << "error: no scorable files\n";
    return 1;
  }
  write_text(config.out / "scores.csv", format_scores_csv(scored.rows));
  log << "scored " << scored.rows.size() << " of "
      << corpus.files.size() + corpus.failures.size() << " files with " << model_id << " -> "
      << (config.out / "scores.csv").string() << '\n';
  return 0;
}

int cmd_evaluate(const RunConfig& config, std::ostream& log) {
  if (!config.ratings) throw ConfigError("evaluate: --ratings is required");
  const auto inputs = scores_inputs(config);
  if (inputs.size() != 1) throw ConfigError("evaluate: expects exactly one scores CSV");
  const auto models = read_models(inputs);
  if (models.size() != 1) {
    throw IngestionError("evaluate: scores CSV must hold exactly one model, found " +
                         std::to_string(models.size()));
  }
  const std::vector<ScoreRow>& scores = models.front().second;

  Warnings warnings;
  const auto ratings = load_ratings(*config.ratings, &warnings);

  std::vector<Dimension> dims{config.dimension};
  std::vector<FeatureSet> feature_sets{config.features};
  std::vector<Classifier> classifiers{config.classifier};
  if (config.all) {
    dims.assign(kAllDimensions.begin(), kAllDimensions.end());
    feature_sets.assign(std::begin(kAllFeatureSets), std::end(kAllFeatureSets));
    classifiers.assign(std::begin(kAllClassifiers), std::end(kAllClassifiers));
  }

  prepare_out(config);
  const JoinResult probe = join_instances(scores, ratings, dims.front());
  write_json(config.out / "join_report.json", join_json(probe));
  for (const auto& id : probe.unmatched_scores) log << "unmatched score row: " << id << '\n';
  for (const auto& id : probe.unmatched_ratings) log << "unmatched rating: " << id << '\n';
  for (const auto& id : probe.rejected) log << "rejected (non-positive ce or lloc): " << id << '\n';
  const std::size_t required = 2 * config.folds;
  if (probe.instances.size() < required) {
    log << "error: join produced " << probe.instances.size() << " instances; need at least "
        << required << '\n';
    return 1;
  }

  CvOptions cv;
  cv.folds = config.folds;
  cv.seed = config.seed;
  cv.shuffle = config.shuffle;
  cv.scaling = config.scaling;

  std::string summary = "dimension,features,classifier,acc,f1,mcc,roc_auc,folds,seed,scaling\n";
  std::string per_fold = "dimension,features,classifier,fold,acc,f1,mcc,roc_auc\n";
  bool failed = false;
  for (Dimension dim : dims) {
    const JoinResult join = join_instances(scores, ratings, dim);
    const std::string dname(dimension_name(dim));
    for (FeatureSet fs_ : feature_sets) {
      const std::string fname(feature_set_name(fs_));
      for (Classifier k : classifiers) {
        const std::string kname(classifier_name(k));
        try {
          const EvaluationReport r = cross_validate(join.instances, dim, fs_, k, cv);
          summary += dname + ',' + fname + ',' + kname + ',' + csv::fixed(r.summary.acc) + ',' +
                     csv::fixed(r.summary.f1) + ',' + csv::fixed(r.summary.mcc) + ',' +
                     csv::fixed(r.summary.roc_auc) + ',' + std::to_string(r.n_folds) + ',' +
                     std::to_string(r.seed) + ',' + std::string(scaling_mode_name(r.scaling)) +
                     '\n';
          for (std::size_t f = 0; f < r.folds.size(); ++f) {
            const FoldMetrics& m = r.folds[f];
            per_fold += dname + ',' + fname + ',' + kname + ',' + std::to_string(f) + ',' +
                        csv::fixed(m.acc) + ',' + csv::fixed(m.f1) + ',' + csv::fixed(m.mcc) +
                        ',' + optional_fixed(m.roc_auc) + '\n';
          }
          for (const auto& w : r.warnings) {
            warnings.push_back(dname + '/' + fname + '/' + kname + ": " + w);
          }
        } catch (const Error& e) {
          failed = true;
          log << "error: " << dname << '/' << fname << '/' << kname << ": " << e.what() << '\n';
        }
      }

      if (std::find(classifiers.begin(), classifiers.end(), Classifier::LogReg) ==
          classifiers.end()) {
        continue;
      }
      // Full-data fit for interpretation, always on globally scaled features.
      const std::string stem = "coefficients_" + dname + "_" + fname;
      try {
        const FeatureMatrix fm = build_features(join.instances, fs_, ScalingMode::Global);
        const LogisticFit fit = fit_logistic(fm, label_vector(join.instances));
        write_text(config.out / (stem + ".csv"), format_coefficient_csv(fit));
        write_text(config.out / (stem + ".txt"), format_coefficient_table(fit));
      } catch (const Error& e) {
        warnings.push_back(stem + ": " + e.what());
      }
    }
  }

  write_text(config.out / "evaluation.csv", summary);
  write_text(config.out / "evaluation_folds.csv", per_fold);
  print_warnings(log, warnings);
  log << "wrote " << (config.out / "evaluation.csv").string() << '\n';
  return failed ? 1 : 0;
}

int cmd_stats(const RunConfig& config, std::ostream& log) {
  const auto models = read_models(scores_inputs(config));
  if (models.empty()) {
    log << "error: no score rows\n";
    return 1;
  }
  Warnings warnings;
  std::string out = "model_id,n,min,max,range,mean,variance,skewness,kurtosis\n";
  for (const auto& [model_id, rows] : models) {
    std::vector<double> ce;
    for (const auto& r : rows) ce.push_back(r.cross_entropy);
    Warnings w;
    const DescriptiveStats s = describe(ce, &w);
    for (auto& m : w) warnings.push_back(model_id + ": " + m);
    out += csv::escape(model_id) + ',' + std::to_string(s.n) + ',' + csv::fixed(s.min) + ',' +
           csv::fixed(s.max) + ',' + csv::fixed(s.range) + ',' + csv::fixed(s.mean) + ',' +
           optional_fixed(s.variance) + ',' + optional_fixed(s.skewness) + ',' +
           optional_fixed(s.kurtosis) + '\n';
  }
  prepare_out(config);
  write_text(config.out / "desc_stats.csv", out);
  print_warnings(log, warnings);
  log << "wrote " << (config.out / "desc_stats.csv").string() << '\n';
  return 0;
}

int cmd_analyze(const RunConfig& config, std::ostream& log) {
  if (!config.ratings) throw ConfigError("analyze: --ratings is required");
  const auto models = read_models(scores_inputs(config));
  if (models.empty()) {
    log << "error: no score rows\n";
    return 1;
  }
  Warnings warnings;
  const auto ratings = load_ratings(*config.ratings, &warnings);

  std::vector<AssociationReport> reports;
  json joins = json::object();
  for (const auto& [model_id, rows] : models) {
    const JoinResult join = join_instances(rows, ratings, config.dimension);
    joins[model_id] = join_json(join);
    if (join.instances.size() < 4) {
      log << "error: " << model_id << ": join produced " << join.instances.size()
          << " instances; need at least 4\n";
      return 1;
    }
    Warnings w;
    reports.push_back(analyze_association(model_id, join.instances, &w));
    for (auto& m : w) warnings.push_back(model_id + ": " + m);
  }

  json doc{{"dimension", std::string(dimension_name(config.dimension))}};
  json marginal = json::object(), conditional = json::object(), per_stratum = json::object(),
       reversal = json::object(), strata = json::object();
  std::string csv_out =
      "model_id,stratum,lloc_low,lloc_high,n,positives,coef,std_err,ci_low,ci_high,p\n";
  for (const auto& r : reports) {
    marginal[r.model_id] = entry_json(r.marginal);
    conditional[r.model_id] = entry_json(r.conditional);
    json list = json::array();
    for (std::size_t k = 0; k < r.per_stratum.size(); ++k) {
      const AssociationEntry& e = r.per_stratum[k];
      list.push_back(entry_json(e));
      csv_out += csv::escape(r.model_id) + ',' + std::to_string(k + 1) + ',' +
                 optional_fixed(e.lloc_low) + ',' + optional_fixed(e.lloc_high) + ',' +
                 std::to_string(e.n) + ',' + std::to_string(e.positives) + ',';
      if (e.ce) {
        csv_out += csv::fixed(e.ce->coef) + ',' + csv::fixed(e.ce->std_err) + ',' +
                   csv::fixed(e.ce->ci_low) + ',' + csv::fixed(e.ce->ci_high) + ',' +
                   csv::fixed(e.ce->p_value) + '\n';
      } else {
        csv_out += ",,,,\n";
      }
    }
    per_stratum[r.model_id] = list;
    reversal[r.model_id] = json{{"reversal", r.reversal}, {"narrative", r.narrative}};
    strata[r.model_id] = json{{"min", r.strata.min}, {"q1", r.strata.q1}, {"q2", r.strata.q2},
                              {"q3", r.strata.q3},   {"max", r.strata.max},
                              {"n_strata", r.strata.n_strata}};
    log << r.narrative << '\n';
  }
  doc["marginal"] = marginal;
  doc["conditional"] = conditional;
  doc["per_stratum"] = per_stratum;
  doc["reversal"] = reversal;
  doc["lloc_quartiles"] = strata;
  doc["join"] = joins;
  if (reports.size() >= 2) {
    Warnings w;
    doc["inverted_models"] = flag_inverted_models(reports, &w);
    warnings.insert(warnings.end(), w.begin(), w.end());
  }
  doc["warnings"] = warnings;

  prepare_out(config);
  write_json(config.out / "analysis.json", doc);
  write_text(config.out / "per_stratum.csv", csv_out);
  print_warnings(log, warnings);
  log << "wrote " << (config.out / "analysis.json").string() << '\n';
  return 0;
}

int cmd_ratings_adapt(const RunConfig& config, std::ostream& log) {
  if (!config.ratings) throw ConfigError("ratings-adapt: --ratings (upstream table) is required");
  const AdaptedRatings adapted = adapt_ratings(csv::read_file(*config.ratings));
  for (const auto& [canonical, upstream] : adapted.mapping) {
    log << canonical << " <- " << upstream << '\n';
  }
  print_warnings(log, adapted.warnings);
  prepare_out(config);
  write_ratings(config.out / "ratings.csv", adapted.ratings);
  log << "wrote " << adapted.ratings.size() << " ratings to "
      << (config.out / "ratings.csv").string() << '\n';
  return 0;
}

int cmd_synthetic(const RunConfig& config, std::ostream& log) {
  const auto instances = generate_simpson_corpus(config.seed, config.synthetic_n);
  std::vector<ScoreRow> rows;
  std::vector<MaintainabilityRating> ratings;
  for (const auto& inst : instances) {
    rows.push_back(ScoreRow{inst.file_id, config.model_id.value_or("synthetic"), inst.lloc,
                            inst.lloc * 10, 1, inst.ce, std::exp(inst.ce)});
    MaintainabilityRating r;
    r.file_id = inst.file_id;
    for (Dimension d : kAllDimensions) {
      LikertProbabilities p;
      const bool negative = d == Dimension::Cx || d == Dimension::Md;
      double& favourable = negative ? p.strongly_disagree : p.strongly_agree;
      double& near = negative ? p.weakly_disagree : p.weakly_agree;
      favourable = inst.label == 1 ? 0.75 : 0.25;
      near = 1.0 - favourable;
      r[d] = p;
    }
    ratings.push_back(r);
  }
  prepare_out(config);
  write_text(config.out / "scores.csv", format_scores_csv(rows));
  write_ratings(config.out / "ratings.csv", ratings);
  log << "wrote " << instances.size() << " synthetic instances to " << config.out.string() << '\n';
  return 0;
}

namespace {

// Flags that carry integers in the config document.
bool is_integer_key(const std::string& key) {
  return key == "max-input" || key == "folds" || key == "seed" || key == "concurrency" ||
         key == "n";
}

struct FlagStore {
  std::map<std::string, std::string> strings;
  std::map<std::string, std::vector<std::string>> lists;
  std::map<std::string, bool> switches;
  std::vector<std::pair<std::string, CLI::Option*>> options;
  std::string config_path;

  void value(CLI::App* app, const std::string& key, const std::string& help) {
    options.emplace_back(key, app->add_option("--" + key, strings[key], help));
  }
  void list(CLI::App* app, const std::string& key, const std::string& help) {
    options.emplace_back(key, app->add_option("--" + key, lists[key], help));
  }
  void flag(CLI::App* app, const std::string& key, const std::string& help) {
    options.emplace_back(key, app->add_flag("--" + key, switches[key], help));
  }

  json to_json() const {
    json j = json::object();
    for (const auto& [key, option] : options) {
      if (option->count() == 0) continue;
      if (switches.count(key)) {
        j[key] = switches.at(key);
      } else if (lists.count(key)) {
        j[key] = lists.at(key);
      } else if (is_integer_key(key)) {
        const auto v = csv::to_integer(strings.at(key));
        if (!v || *v < 0) {
          throw ConfigError("--" + key + ": expected a non-negative integer, got '" +
                            strings.at(key) + "'");
        }
        j[key] = static_cast<std::uint64_t>(*v);
      } else {
        j[key] = strings.at(key);
      }
    }
    return j;
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Score source files by language-model cross-entropy and relate the scores "
               "to maintainability ratings."};
  app.require_subcommand(1);

  struct Sub {
    CLI::App* app;
    FlagStore flags;
    int (*run)(const RunConfig&, std::ostream&);
  };
  std::map<std::string, Sub> subs;
  auto add = [&](const std::string& name, const std::string& help,
                 int (*run)(const RunConfig&, std::ostream&)) -> FlagStore& {
    Sub& s = subs[name];
    s.app = app.add_subcommand(name, help);
    s.run = run;
    s.app->add_option("--config", s.flags.config_path, "JSON config file; flags override it");
    s.flags.value(s.app, "out", "Output directory (default: out)");
    return s.flags;
  };
  auto model_flags = [](CLI::App* a, FlagStore& f) {
    f.value(a, "endpoint", "Model shim base URL (default: $CEMAINT_ENDPOINT)");
    f.value(a, "builtin", "Builtin model: uniform:V or unigram:PATH");
    f.value(a, "max-input", "Tokens per forward pass");
    f.flag(a, "prepend-bos", "Prepend the model's BOS token to every chunk");
    f.value(a, "model-id", "Model id written to the scores CSV");
    f.value(a, "concurrency", "Parallel scoring workers (default: 4)");
  };

  FlagStore& score = add("score", "Score every source file of a corpus", cmd_score);
  score.value(subs["score"].app, "corpus", "Corpus root directory");
  score.list(subs["score"].app, "extensions", "File extensions to score (default: .java)");
  model_flags(subs["score"].app, score);

  FlagStore& evaluate = add("evaluate", "Cross-validate classifiers on scores + ratings",
                            cmd_evaluate);
  {
    CLI::App* a = subs["evaluate"].app;
    evaluate.list(a, "scores", "Scores CSV (default: <out>/scores.csv)");
    evaluate.value(a, "ratings", "Canonical ratings CSV");
    evaluate.value(a, "dimension", "ov|rd|ud|cx|md (default: ov)");
    evaluate.value(a, "features", "lloc|ce|both (default: both)");
    evaluate.value(a, "classifier", "logreg|rf (default: logreg)");
    evaluate.flag(a, "all", "Every dimension, feature set and classifier");
    evaluate.value(a, "folds", "Stratified folds (default: 10)");
    evaluate.value(a, "seed", "Random seed (default: 0)");
    evaluate.flag(a, "shuffle", "Shuffle within classes before assigning folds");
    evaluate.value(a, "scaling", "per-fold|global (default: per-fold)");
  }

  FlagStore& stats = add("stats", "Descriptive statistics of cross-entropy per model", cmd_stats);
  stats.list(subs["stats"].app, "scores", "Scores CSVs");

  FlagStore& analyze = add("analyze", "Marginal, conditional and per-stratum associations",
                           cmd_analyze);
  analyze.list(subs["analyze"].app, "scores", "Scores CSVs, one or more models");
  analyze.value(subs["analyze"].app, "ratings", "Canonical ratings CSV");
  analyze.value(subs["analyze"].app, "dimension", "ov|rd|ud|cx|md (default: ov)");

  FlagStore& adapt = add("ratings-adapt", "Convert an upstream ratings table to canonical CSV",
                         cmd_ratings_adapt);
  adapt.value(subs["ratings-adapt"].app, "ratings", "Upstream ratings table");

  FlagStore& synth = add("synthetic", "Write a synthetic confounded scores/ratings pair",
                         cmd_synthetic);
  synth.value(subs["synthetic"].app, "seed", "Random seed (default: 0)");
  synth.value(subs["synthetic"].app, "n", "Number of instances (default: 1000, minimum 200)");
  synth.value(subs["synthetic"].app, "model-id", "Model id (default: synthetic)");

  std::vector<std::string> argv_store{"cemaint"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  for (auto& [name, sub] : subs) {
    if (!sub.app->parsed()) continue;
    try {
      const json file = sub.flags.config_path.empty() ? json::object()
                                                      : read_config_file(sub.flags.config_path);
      const char* env = std::getenv("CEMAINT_ENDPOINT");
      const RunConfig config = resolve_config(
          file, sub.flags.to_json(), env ? std::optional<std::string>(env) : std::nullopt);
      return sub.run(config, err);
    } catch (const ConfigError& e) {
      err << "error: " << e.what() << '\n';
      return 2;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return 1;
    }
  }
  return 2;
}

}  // namespace cemaint::cli
