#include "commands.hpp"

#include <pthread.h>
#include <signal.h>

#include <atomic>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "explicable/explicable.hpp"
#include "labeling.hpp"
#include "server.hpp"

namespace explicable::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string one_line(std::string s) {
  for (auto& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

void emit(std::ostream& out, const std::optional<std::string>& path, const std::string& text) {
  if (path) {
    csv::write_file(*path, text);
  } else {
    out << text;
  }
}

std::vector<std::string> split_list(const std::string& s, char delim) {
  std::vector<std::string> out;
  for (auto& f : csv::split(s, delim)) {
    if (f.empty()) throw UsageError("empty item in list '" + s + "'");
    out.push_back(f);
  }
  return out;
}

std::vector<double> parse_numbers(const std::string& s, char delim) {
  std::vector<double> out;
  for (const auto& f : split_list(s, delim)) {
    try {
      out.push_back(csv::parse_double(f, 0));
    } catch (const Error&) {
      throw UsageError("not a number: '" + f + "'");
    }
  }
  return out;
}

// `name=path`, or a bare path named after its stem.
std::pair<std::string, std::string> named_path(const std::string& spec) {
  auto eq = spec.find('=');
  if (eq == std::string::npos) return {fs::path(spec).stem().string(), spec};
  if (eq == 0 || eq + 1 == spec.size()) throw UsageError("expected name=path, got '" + spec + "'");
  return {spec.substr(0, eq), spec.substr(eq + 1)};
}

std::vector<std::string> class_names_from(const std::string& path) {
  return read_class_names_csv(csv::read_file(path));
}

// --- weights ---------------------------------------------------------------

struct WeightsArgs {
  std::string ratings, classes, taxonomy, labels, mode = "pooled";
  std::vector<std::string> inputs;
  std::optional<std::string> out;
  bool raw = false;
};

void add_weights(CLI::App& app, WeightsArgs& a, std::function<int()>& action, std::ostream& out) {
  auto* weights = app.add_subcommand("weights", "Build a weight matrix")->require_subcommand(1);

  auto* ihl = weights->add_subcommand("ihl", "Aggregate instance-level label votes");
  ihl->add_option("--ratings", a.ratings, "instance_id,true_class,count_0..")->required();
  ihl->add_option("--classes", a.classes, "index,name class list")->required();
  ihl->add_option("--mode", a.mode, "pooled or per-instance")
      ->check(CLI::IsMember({"pooled", "per-instance"}));
  ihl->add_option("--out", a.out);
  ihl->callback([&] {
    action = [&] {
      auto ratings = read_instance_ratings_csv(csv::read_file(a.ratings));
      auto mode = a.mode == "pooled" ? InstanceAggregation::pooled_counts
                                     : InstanceAggregation::per_instance_average;
      emit(out, a.out, write_weight_csv(from_instance_ratings(ratings, class_names_from(a.classes), mode)));
      return kOk;
    };
  });

  auto* chl = weights->add_subcommand("chl", "Average class-level Likert ratings");
  chl->add_option("--ratings", a.ratings, "rater_id,true_class,predicted_class,score")->required();
  chl->add_option("--classes", a.classes, "index,name class list")->required();
  chl->add_flag("--raw", a.raw, "Skip row normalization");
  chl->add_option("--out", a.out);
  chl->callback([&] {
    action = [&] {
      auto ratings = read_class_ratings_csv(csv::read_file(a.ratings));
      auto names = class_names_from(a.classes);
      emit(out, a.out,
           write_weight_csv(a.raw ? class_ratings_raw(ratings, names) : from_class_ratings(ratings, names)));
      return kOk;
    };
  });

  auto* ekl = weights->add_subcommand("ekl", "Path similarity over a taxonomy");
  ekl->add_option("--taxonomy", a.taxonomy, "parent<TAB>child edge list")->required();
  ekl->add_option("--labels", a.labels, "index,name,node label map")->required();
  ekl->add_flag("--raw", a.raw, "Skip row normalization");
  ekl->add_option("--out", a.out);
  ekl->callback([&] {
    action = [&] {
      auto tax = Taxonomy::parse(csv::read_file(a.taxonomy));
      auto labels = LabelMap::parse(csv::read_file(a.labels));
      emit(out, a.out,
           write_weight_csv(a.raw ? taxonomy_similarity_raw(tax, labels) : from_taxonomy(tax, labels)));
      return kOk;
    };
  });

  auto* avg = weights->add_subcommand("average", "Element-wise mean of matrices");
  avg->add_option("--in", a.inputs, "Weight CSV (repeatable)")->required();
  avg->add_option("--out", a.out);
  avg->callback([&] {
    action = [&] {
      std::vector<WeightMatrix> ms;
      for (const auto& p : a.inputs) ms.push_back(read_weight_csv(csv::read_file(p)));
      emit(out, a.out, write_weight_csv(average_matrices(ms)));
      return kOk;
    };
  });
}

// --- data and training -----------------------------------------------------

struct SynthArgs {
  std::string centers, names;
  std::size_t per_class = 100;
  double spread = 1.0;
  std::uint64_t seed = 0;
  std::optional<std::string> out;
};

void add_synth(CLI::App& app, SynthArgs& a, std::function<int()>& action, std::ostream& out) {
  auto* cmd = app.add_subcommand("synth", "Generate a Gaussian-blob dataset");
  cmd->add_option("--centers", a.centers, "Class centers, e.g. \"0,0;1,0;10,10\"")->required();
  cmd->add_option("--per-class", a.per_class)->check(CLI::PositiveNumber);
  cmd->add_option("--spread", a.spread, "Standard deviation")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", a.seed);
  cmd->add_option("--names", a.names, "Comma-separated class names");
  cmd->add_option("--out", a.out);
  cmd->callback([&] {
    action = [&] {
      SyntheticSpec spec;
      for (const auto& c : split_list(a.centers, ';')) spec.centers.push_back(parse_numbers(c, ','));
      spec.per_class = a.per_class;
      spec.spread = a.spread;
      spec.seed = a.seed;
      if (!a.names.empty()) spec.class_names = split_list(a.names, ',');
      emit(out, a.out, write_dataset_csv(generate_synthetic(spec)));
      return kOk;
    };
  });
}

struct TrainArgs {
  std::string data, model;
  std::optional<std::string> classes, weights, out, trace;
  TrainConfig cfg;
};

Dataset load_dataset(const std::string& path, std::optional<std::vector<std::string>> names) {
  return read_dataset_csv(csv::read_file(path), std::move(names));
}

void add_train(CLI::App& app, TrainArgs& a, std::function<int()>& action, std::ostream& out) {
  auto* cmd = app.add_subcommand("train", "Train with weighted (or plain) cross-entropy");
  cmd->add_option("--data", a.data, "f_0,..,f_{d-1},label dataset")->required();
  cmd->add_option("--classes", a.classes, "index,name class list");
  cmd->add_option("--weights", a.weights, "Weight CSV; omit for plain cross-entropy");
  cmd->add_option("--lr", a.cfg.learning_rate);
  cmd->add_option("--epochs", a.cfg.epochs);
  cmd->add_option("--batch", a.cfg.batch_size);
  cmd->add_option("--hidden", a.cfg.hidden_units, "Hidden tanh units; 0 for softmax regression");
  cmd->add_option("--l2", a.cfg.l2);
  cmd->add_option("--seed", a.cfg.seed);
  cmd->add_option("--out", a.out, "Model file")->required();
  cmd->add_option("--trace", a.trace, "epoch,loss CSV");
  cmd->callback([&] {
    action = [&] {
      std::optional<WeightMatrix> w;
      std::optional<std::vector<std::string>> names;
      if (a.classes) names = class_names_from(*a.classes);
      if (a.weights) {
        w = read_weight_csv(csv::read_file(*a.weights));
        if (!names) names = w->class_names();
      }
      auto data = load_dataset(a.data, names);
      auto result = train(data, w, a.cfg);
      csv::write_file(*a.out, write_model(result.model));
      if (a.trace) {
        std::string t = "epoch,loss\n";
        for (std::size_t e = 0; e < result.loss_trace.size(); ++e) {
          t += std::to_string(e + 1) + "," + csv::format_double(result.loss_trace[e]) + "\n";
        }
        csv::write_file(*a.trace, t);
      }
      out << "train epochs=" << result.loss_trace.size()
          << " final_loss=" << csv::format_double(result.loss_trace.empty() ? 0.0 : result.loss_trace.back())
          << " accuracy=" << csv::format_double(accuracy(result.model, data)) << "\n";
      return kOk;
    };
  });
}

struct PredictArgs {
  std::string model, data;
  std::optional<std::string> out;
};

void add_predict(CLI::App& app, PredictArgs& a, std::function<int()>& action, std::ostream& out) {
  auto* cmd = app.add_subcommand("predict", "Write class probabilities for a dataset");
  cmd->add_option("--model", a.model)->required();
  cmd->add_option("--data", a.data)->required();
  cmd->add_option("--out", a.out, "instance,true_class,p_0.. CSV");
  cmd->callback([&] {
    action = [&] {
      auto model = read_model(csv::read_file(a.model));
      auto data = load_dataset(a.data, model.class_names());
      std::vector<PredictionRow> rows;
      for (std::size_t i = 0; i < data.size(); ++i) {
        rows.push_back({std::to_string(i), data.label(i), predict(model, data.features(i))});
      }
      emit(out, a.out, write_predictions_csv(PredictionSet("model", std::move(rows))));
      if (a.out) out << "predict rows=" << data.size() << " accuracy=" << csv::format_double(accuracy(model, data)) << "\n";
      return kOk;
    };
  });
}

// --- evaluation ------------------------------------------------------------

std::vector<PredictionSet> load_predictions(const std::vector<std::string>& specs) {
  std::vector<PredictionSet> sets;
  for (const auto& s : specs) {
    auto [name, path] = named_path(s);
    sets.push_back(read_predictions_csv(name, csv::read_file(path)));
  }
  return sets;
}

struct ScoreArgs {
  std::string sim;
  std::vector<std::string> preds, losses;
  std::optional<std::string> out;
};

void add_score(CLI::App& app, ScoreArgs& a, std::function<int()>& action, std::ostream& out) {
  auto* cmd = app.add_subcommand("score", "Hard/soft explicability scores over shared mistakes");
  cmd->add_option("--sim", a.sim, "Similarity (weight) CSV")->required();
  cmd->add_option("--pred", a.preds, "name=predictions.csv (repeatable)")->required();
  cmd->add_option("--out", a.out, "classifier,hard,soft CSV");
  cmd->callback([&] {
    action = [&] {
      auto sets = load_predictions(a.preds);
      auto report = score_classifiers(sets, read_weight_csv(csv::read_file(a.sim)));
      emit(out, a.out, write_score_csv(report));
      if (a.out) {
        out << "score intersection=" << report.intersection_size << " tied=" << report.tied_instances << "\n";
      }
      return kOk;
    };
  });

  auto* table = app.add_subcommand("loss-table", "Mean test loss of each model under each weight matrix");
  table->add_option("--pred", a.preds, "name=predictions.csv (repeatable)")->required();
  table->add_option("--loss", a.losses, "name=weights.csv (repeatable)")->required();
  table->add_option("--out", a.out, "model,<loss names> CSV");
  table->callback([&] {
    action = [&] {
      auto sets = load_predictions(a.preds);
      std::vector<std::pair<std::string, WeightMatrix>> losses;
      for (const auto& s : a.losses) {
        auto [name, path] = named_path(s);
        losses.emplace_back(name, read_weight_csv(csv::read_file(path)));
      }
      emit(out, a.out, write_loss_table_csv(loss_table(sets, losses)));
      return kOk;
    };
  });
}

// --- simulation and lemmas -------------------------------------------------

struct SimulateArgs {
  SimConfig cfg;
  std::string grid = "0.1,0.3,0.5,0.7";
  std::optional<std::string> label, out, verdict;
};

void add_simulate(CLI::App& app, SimulateArgs& a, std::function<int()>& action, std::ostream& out) {
  auto* cmd = app.add_subcommand("simulate", "Sweep three-class loss curves for one regime");
  cmd->add_option("--wc", a.cfg.w_c, "Weight of the competing class")->required();
  cmd->add_option("--wf", a.cfg.w_f, "Weight of the third class")->required();
  cmd->add_option("--w-correct", a.cfg.w_correct);
  cmd->add_option("--grid", a.grid, "Comma-separated true-class probabilities");
  cmd->add_option("--step", a.cfg.p_f_step, "Probability step");
  cmd->add_option("--label", a.label, "Regime label override");
  cmd->add_option("--out", a.out, "Curve CSV");
  cmd->add_option("--verdict", a.verdict, "Verdict CSV");
  cmd->callback([&] {
    action = [&] {
      a.cfg.p_true_grid = parse_numbers(a.grid, ',');
      a.cfg.regime_label = a.label;
      auto curves = sweep(a.cfg);
      auto v = regime_report(curves, a.cfg);
      emit(out, a.out, curve_csv_header() + write_curve_rows(curves));
      auto verdict = verdict_csv_header() + write_verdict_row(v);
      if (a.verdict) csv::write_file(*a.verdict, verdict);
      if (a.out) {
        out << verdict;
        out << "detail pairs=" << v.pairs << " violations_where_condition_holds=" << v.violations_where_condition_holds
            << " disagreements=" << v.disagreements << " exact_disagreements=" << v.exact_disagreements
            << " violations_where_exact_condition_holds=" << v.violations_where_exact_condition_holds << "\n";
      }
      return kOk;
    };
  });
}

struct LemmaArgs {
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
};

void add_verify(CLI::App& app, LemmaArgs& a, std::function<int()>& action, std::ostream& out) {
  auto* cmd = app.add_subcommand("verify-lemmas", "Run the randomized Lemma 1 and Lemma 2 checks");
  cmd->add_option("--trials", a.trials)->check(CLI::PositiveNumber);
  cmd->add_option("--seed", a.seed);
  cmd->callback([&] {
    action = [&] {
      auto l1 = run_lemma1_suite(a.trials, a.seed);
      auto l2 = run_lemma2_suite(a.trials, a.seed);
      out << "lemma1 pass=" << l1.pass << " fail=" << l1.fail << "; lemma2 pass=" << l2.pass
          << " fail=" << l2.fail << " boundary=" << l2.boundary << "\n";
      out << "lemma2-exact pass=" << l2.exact_pass << " fail=" << l2.exact_fail
          << " boundary=" << l2.exact_boundary << "; lemma2-sufficient trials=" << l2.sufficient_trials
          << " fail=" << l2.sufficient_fail << "\n";
      if (l1.fail != 0 || l2.fail != 0) {
        throw Error(Errc::invariant_violation, "lemma checks failed: lemma1=" + std::to_string(l1.fail) +
                                                   " lemma2=" + std::to_string(l2.fail));
      }
      return kOk;
    };
  });
}

// --- labeling --------------------------------------------------------------

struct LabelArgs {
  std::string classes, out, host = "127.0.0.1";
  int port = 8080;
  std::uint64_t seed = 0;
  std::optional<std::string> images, attention;
};

int serve(const LabelArgs& a, std::ostream& out) {
  labeling::Options opts;
  opts.class_names = class_names_from(a.classes);
  opts.ratings_path = a.out;
  opts.seed = a.seed;
  if (a.attention) {
    opts.attention_checks = labeling::read_attention_csv(csv::read_file(*a.attention), opts.class_names.size());
  }
  if (a.images) opts.images = labeling::image_manifest(*a.images, opts.class_names);
  labeling::LabelingService service(std::move(opts));
  labeling::Server server(service, a.images ? std::optional<fs::path>(*a.images) : std::nullopt);

  // Handle SIGINT/SIGTERM on a dedicated thread; server threads inherit the mask.
  sigset_t set, old;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, &old);
  int port = server.bind(a.host, a.port);
  std::atomic<bool> done{false};
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    if (!done) server.stop();
  });
  out << "listening host=" << a.host << " port=" << port << " ratings=" << a.out
      << " logged=" << service.logged_total() << std::endl;
  server.listen();
  done = true;
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  pthread_sigmask(SIG_SETMASK, &old, nullptr);
  return kOk;
}

void add_label(CLI::App& app, LabelArgs& a, std::function<int()>& action, std::ostream& out) {
  auto* label = app.add_subcommand("label", "Class-level rating collection")->require_subcommand(1);
  auto* cmd = label->add_subcommand("serve", "Serve the labeling endpoints");
  cmd->add_option("--classes", a.classes, "index,name class list")->required();
  cmd->add_option("--out", a.out, "Append-only ratings CSV")->required();
  cmd->add_option("--port", a.port, "0 picks a free port")->check(CLI::Range(0, 65535));
  cmd->add_option("--host", a.host);
  cmd->add_option("--seed", a.seed, "Pair-order shuffle seed");
  cmd->add_option("--images", a.images, "Directory with one sub-directory of images per class");
  cmd->add_option("--attention", a.attention, "true_class,predicted_class,expected_score CSV");
  cmd->callback([&] {
    action = [&] { return serve(a, out); };
  });
}

void report(std::ostream& err, std::string_view code, std::optional<std::size_t> line, const std::string& msg) {
  err << "error code=" << code;
  if (line) err << " line=" << *line;
  err << " msg=" << one_line(msg) << std::endl;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Explicable-misclassification toolkit", "explicable"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "explicable 0.1.0");

  std::function<int()> action;
  WeightsArgs weights;
  SynthArgs synth;
  TrainArgs train_args;
  PredictArgs predict_args;
  ScoreArgs score;
  SimulateArgs simulate;
  LemmaArgs lemmas;
  LabelArgs label;
  add_weights(app, weights, action, out);
  add_synth(app, synth, action, out);
  add_train(app, train_args, action, out);
  add_predict(app, predict_args, action, out);
  add_score(app, score, action, out);
  add_simulate(app, simulate, action, out);
  add_verify(app, lemmas, action, out);
  add_label(app, label, action, out);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kOk;
    }
    report(err, "usage", std::nullopt, e.what());
    return kUsage;
  }

  try {
    return action ? action() : kUsage;
  } catch (const UsageError& e) {
    report(err, "usage", std::nullopt, e.what());
    return kUsage;
  } catch (const Error& e) {
    report(err, to_string(e.code()), e.line(), e.message());
    return is_io_error(e.code()) ? kIo : kValidation;
  } catch (const fs::filesystem_error& e) {
    report(err, "io-error", std::nullopt, e.what());
    return kIo;
  } catch (const std::exception& e) {
    report(err, "internal-error", std::nullopt, e.what());
    return kInternal;
  }
}

}  // namespace explicable::cli
