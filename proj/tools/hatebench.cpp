#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hatebench/app.hpp"
#include "hatebench/error.hpp"

using namespace hatebench;

namespace {

numerics::Pooling parse_pooling(const std::string& name) {
  if (name == "max") return numerics::Pooling::Max;
  if (name == "last") return numerics::Pooling::LastState;
  throw ConfigError("unknown pooling '" + name + "' (expected max or last)");
}

void print_metrics(const eval::MethodResult& r) {
  const auto& m = r.metrics;
  std::cout << r.method << ": acc " << eval::percent_1dp(m.accuracy) << " prec "
            << eval::percent_1dp(m.precision) << " rec " << eval::percent_1dp(m.recall) << " f1 "
            << eval::percent_1dp(m.f1) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Indonesian hate-speech benchmark: conventional TF-IDF models and a CNN-BiLSTM"};
  cli.set_config("--config", "", "Key-value configuration file; command-line flags override it");
  cli.require_subcommand(1);
  cli.fallthrough();

  app::RunConfig c;
  std::string task = "hs", pooling = "max";
  app::SyntheticOptions synth;
  std::string synth_path = "synthetic.csv";

  cli.add_option("--data", c.data_path, "Annotation table (CSV/TSV/semicolon)");
  cli.add_option("--task", task, "Target label: hs or abusive")->capture_default_str();
  cli.add_option("--seed", c.seed, "Root seed")->capture_default_str();
  cli.add_option("--out", c.out_dir, "Output directory")->capture_default_str();
  cli.add_option("--text-column", c.columns.text)->capture_default_str();
  cli.add_option("--hs-column", c.columns.hs)->capture_default_str();
  cli.add_option("--abusive-column", c.columns.abusive)->capture_default_str();
  cli.add_option("--slang", c.slang_path, "Slang normalization map (two columns)");
  cli.add_option("--stopwords", c.stopwords_path, "Stopword list, one per line");
  cli.add_option("--lexicon", c.lexicon_path, "Abusive lexicon, one per line");
  cli.add_option("--test-fraction", c.test_fraction)->capture_default_str();
  cli.add_option("--threads", c.threads)->capture_default_str();
  cli.add_flag("--quiet", c.quiet, "Suppress progress output");

  cli.add_option("--max-terms", c.max_terms, "TF-IDF vocabulary cap")->capture_default_str();
  cli.add_option("--ngram-min", c.ngrams.min_n)->capture_default_str();
  cli.add_option("--ngram-max", c.ngrams.max_n)->capture_default_str();
  cli.add_option("--folds", c.folds, "Cross-validation folds")->capture_default_str();
  cli.add_flag("--per-fold-vocab", c.per_fold_vocab, "Refit the vocabulary inside each fold");
  cli.add_option("--models", c.models, "Estimators: naive_bayes linear_svm random_forest")
      ->capture_default_str();
  cli.add_option("--nb-alpha", c.nb_alpha)->capture_default_str();
  cli.add_option("--svm-lambda", c.svm_lambda)->capture_default_str();
  cli.add_option("--svm-epochs", c.svm_epochs)->capture_default_str();
  cli.add_option("--rf-trees", c.rf_trees)->capture_default_str();
  cli.add_option("--rf-max-depth", c.rf_depth)->capture_default_str();
  cli.add_option("--rf-max-features", c.rf_max_features, "0 means sqrt(dim)")->capture_default_str();

  auto& n = c.neural;
  cli.add_option("--embedding-dim", n.embedding_dim)->capture_default_str();
  cli.add_option("--max-len", n.max_len, "Sequence length")->capture_default_str();
  cli.add_option("--filters", n.filters)->capture_default_str();
  cli.add_option("--kernel-size", n.kernel)->capture_default_str();
  cli.add_option("--lstm-units", n.lstm_units)->capture_default_str();
  cli.add_option("--dropout", n.dropout)->capture_default_str();
  cli.add_option("--learning-rate", n.learning_rate)->capture_default_str();
  cli.add_option("--batch-size", n.batch_size)->capture_default_str();
  cli.add_option("--epochs", n.max_epochs, "Maximum epochs")->capture_default_str();
  cli.add_option("--patience", n.patience)->capture_default_str();
  cli.add_option("--val-fraction", n.val_fraction)->capture_default_str();
  cli.add_option("--max-vocab", n.max_vocab)->capture_default_str();
  cli.add_option("--pooling", pooling, "max or last")->capture_default_str();
  cli.add_option("--checkpoint", c.checkpoint_path, "Checkpoint path (default <out>/model.ckpt)");

  cli.add_option("--rows", synth.n, "Synthetic corpus size")->capture_default_str();
  cli.add_option("--label-noise", synth.label_noise)->capture_default_str();
  cli.add_option("--synth-out", synth_path, "Synthetic corpus file")->capture_default_str();

  auto* eda = cli.add_subcommand("eda", "Corpus statistics and length histogram");
  auto* bench = cli.add_subcommand("bench", "Cross-validated conventional models, champion on test");
  auto* train = cli.add_subcommand("train", "Train the CNN-BiLSTM and score the test split");
  auto* evaluate = cli.add_subcommand("evaluate", "Score the test split with a saved checkpoint");
  auto* synth_cmd = cli.add_subcommand("synth", "Write a synthetic separable corpus");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::Config);
  }

  try {
    c.task = corpus::parse_task(task);
    n.pooling = parse_pooling(pooling);
    if (*eda) {
      const auto s = app::cmd_eda(c);
      std::cout << "rows " << s.total_rows << ", hs " << s.hs_counts.first << "/" << s.hs_counts.second
                << ", abusive " << s.abusive_counts.first << "/" << s.abusive_counts.second
                << ", mean length " << s.mean_length << '\n';
    } else if (*bench) {
      const auto r = app::cmd_bench(c);
      for (const auto& m : r.test_results) print_metrics(m);
    } else if (*train) {
      print_metrics(app::cmd_train(c).test_result);
    } else if (*evaluate) {
      print_metrics(app::cmd_evaluate(c).test_result);
    } else if (*synth_cmd) {
      if (cli.get_option("--seed")->count() > 0) synth.seed = c.seed;
      app::write_synthetic_corpus(synth, synth_path);
      std::cout << "wrote " << synth.n << " rows to " << synth_path << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
