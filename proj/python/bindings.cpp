#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hatebench/app.hpp"
#include "hatebench/classic.hpp"
#include "hatebench/error.hpp"
#include "hatebench/eval.hpp"
#include "hatebench/features.hpp"
#include "hatebench/textprep.hpp"

namespace py = pybind11;
using namespace hatebench;

namespace {

using DenseArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

features::SparseMatrix to_sparse(const DenseArray& x) {
  if (x.ndim() != 2) throw ConfigError("expected a 2-D feature array");
  const auto r = x.unchecked<2>();
  features::SparseMatrix m;
  m.n_cols = static_cast<std::size_t>(r.shape(1));
  std::vector<features::SparseEntry> row;
  for (py::ssize_t i = 0; i < r.shape(0); ++i) {
    row.clear();
    for (py::ssize_t j = 0; j < r.shape(1); ++j)
      if (r(i, j) != 0.0) row.push_back({static_cast<std::uint32_t>(j), r(i, j)});
    m.append_row(row);
  }
  return m;
}

py::array_t<double> to_dense(const features::SparseMatrix& m) {
  py::array_t<double> out({static_cast<py::ssize_t>(m.n_rows()), static_cast<py::ssize_t>(m.n_cols)});
  auto w = out.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < w.shape(0); ++i)
    for (py::ssize_t j = 0; j < w.shape(1); ++j) w(i, j) = 0.0;
  for (std::size_t r = 0; r < m.n_rows(); ++r)
    for (const auto& e : m.row(r)) w(static_cast<py::ssize_t>(r), e.column) = e.value;
  return out;
}

std::vector<textprep::CleanDoc> as_docs(const std::vector<std::vector<std::string>>& docs) {
  std::vector<textprep::CleanDoc> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back({d});
  return out;
}

py::dict metrics_dict(const eval::MetricsReport& m) {
  py::dict d;
  d["accuracy"] = m.accuracy;
  d["precision"] = m.precision;
  d["recall"] = m.recall;
  d["f1"] = m.f1;
  d["auc"] = m.auc ? py::cast(*m.auc) : py::none();
  d["precision_undefined"] = m.precision_undefined;
  d["recall_undefined"] = m.recall_undefined;
  d["f1_undefined"] = m.f1_undefined;
  return d;
}

py::dict confusion_dict(const eval::ConfusionMatrix& cm) {
  py::dict d;
  d["tp"] = cm.tp;
  d["tn"] = cm.tn;
  d["fp"] = cm.fp;
  d["fn"] = cm.fn;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Indonesian hate-speech benchmark: preprocessing, TF-IDF models, CNN-BiLSTM.";

  // Later registrations are tried first, so the base goes in first.
  auto& base = py::register_exception<Error>(m, "HatebenchError");
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<DataError>(m, "DataError", base);
  py::register_exception<TrainingError>(m, "TrainingError", base);
  py::register_exception<IoError>(m, "IoError", base);

  // Text preprocessing.
  m.def("clean_text", &textprep::clean_text, py::arg("raw"));
  m.def("tokenize", &textprep::tokenize, py::arg("cleaned"));
  m.def(
      "preprocess",
      [](const std::string& raw) { return textprep::preprocess(raw, app::bundled_resources()).tokens; },
      py::arg("raw"), "Clean, tokenize, normalize slang and drop stopwords using the bundled resources.");

  // Features.
  py::class_<features::Vocabulary>(m, "Vocabulary")
      .def_readonly("terms", &features::Vocabulary::terms)
      .def_readonly("df", &features::Vocabulary::df)
      .def_readonly("n_docs", &features::Vocabulary::n_docs)
      .def("__len__", &features::Vocabulary::size);
  m.def(
      "fit_vocabulary",
      [](const std::vector<std::vector<std::string>>& docs, std::size_t max_terms, int ngram_min, int ngram_max) {
        return features::fit_vocabulary(as_docs(docs), max_terms, {ngram_min, ngram_max});
      },
      py::arg("docs"), py::arg("max_terms") = 5000, py::arg("ngram_min") = 1, py::arg("ngram_max") = 2);
  m.def("idf", &features::idf, py::arg("n_docs"), py::arg("df"));
  m.def(
      "transform",
      [](const std::vector<std::vector<std::string>>& docs, const features::Vocabulary& vocab,
         const std::vector<std::string>& lexicon) {
        const std::unordered_set<std::string> lex(lexicon.begin(), lexicon.end());
        return to_dense(features::to_matrix(features::transform_corpus(as_docs(docs), vocab, lex)));
      },
      py::arg("docs"), py::arg("vocabulary"), py::arg("lexicon") = std::vector<std::string>{},
      "Dense TF-IDF rows with the abusive-lexicon count in the last column.");

  // Splits.
  m.def(
      "stratified_split",
      [](const std::vector<int>& y, double fraction, std::uint64_t seed) {
        const auto s = corpus::stratified_split(y, fraction, seed);
        return py::make_tuple(s.train_indices, s.test_indices);
      },
      py::arg("labels"), py::arg("test_fraction") = 0.2, py::arg("seed") = 42);
  m.def(
      "kfold_stratified",
      [](const std::vector<int>& y, std::size_t k, std::uint64_t seed) {
        return autobench::kfold_stratified(y, k, seed).fold_of;
      },
      py::arg("labels"), py::arg("k") = 5, py::arg("seed") = 42);

  // Metrics.
  m.def(
      "confusion",
      [](const std::vector<int>& y_true, const std::vector<int>& y_pred) {
        return confusion_dict(eval::confusion(y_true, y_pred));
      },
      py::arg("y_true"), py::arg("y_pred"));
  m.def(
      "metrics",
      [](std::size_t tp, std::size_t tn, std::size_t fp, std::size_t fn) {
        return metrics_dict(eval::metrics({tp, tn, fp, fn}));
      },
      py::arg("tp"), py::arg("tn"), py::arg("fp"), py::arg("fn"));
  m.def(
      "auc", [](const std::vector<int>& y, const std::vector<double>& s) { return eval::auc(y, s); },
      py::arg("y_true"), py::arg("scores"));
  m.def("percent_1dp", &eval::percent_1dp, py::arg("fraction"));

  // Conventional estimators.
  py::class_<classic::TrainedModel>(m, "ClassicModel")
      .def_property_readonly("family", [](const classic::TrainedModel& t) { return classic::family_name(t.family); })
      .def_readonly("n_features", &classic::TrainedModel::n_features)
      .def("score", [](const classic::TrainedModel& t, const DenseArray& x) { return classic::score(t, to_sparse(x)); })
      .def(
          "predict",
          [](const classic::TrainedModel& t, const DenseArray& x) { return classic::predict(t, to_sparse(x)); })
      .def("to_json", &classic::model_to_json);
  m.def(
      "train_classic",
      [](const std::string& family, const DenseArray& x, const std::vector<int>& y,
         const std::map<std::string, double>& hyperparameters, std::uint64_t seed) {
        const auto spec = classic::EstimatorSpec::make(classic::parse_family(family), hyperparameters, seed);
        py::gil_scoped_release release;
        return classic::train(spec, to_sparse(x), y, 1);
      },
      py::arg("family"), py::arg("X"), py::arg("y"), py::arg("hyperparameters") = std::map<std::string, double>{},
      py::arg("seed") = 0);

  // Whole commands.
  py::class_<app::RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("data_path", &app::RunConfig::data_path)
      .def_readwrite("slang_path", &app::RunConfig::slang_path)
      .def_readwrite("stopwords_path", &app::RunConfig::stopwords_path)
      .def_readwrite("lexicon_path", &app::RunConfig::lexicon_path)
      .def_property(
          "task", [](const app::RunConfig& c) { return corpus::task_name(c.task); },
          [](app::RunConfig& c, const std::string& t) { c.task = corpus::parse_task(t); })
      .def_readwrite("seed", &app::RunConfig::seed)
      .def_readwrite("test_fraction", &app::RunConfig::test_fraction)
      .def_readwrite("max_terms", &app::RunConfig::max_terms)
      .def_readwrite("folds", &app::RunConfig::folds)
      .def_property(
          "ngram_min", [](const app::RunConfig& c) { return c.ngrams.min_n; },
          [](app::RunConfig& c, int v) { c.ngrams.min_n = v; })
      .def_property(
          "ngram_max", [](const app::RunConfig& c) { return c.ngrams.max_n; },
          [](app::RunConfig& c, int v) { c.ngrams.max_n = v; })
      .def_readwrite("per_fold_vocab", &app::RunConfig::per_fold_vocab)
      .def_readwrite("models", &app::RunConfig::models)
      .def_readwrite("nb_alpha", &app::RunConfig::nb_alpha)
      .def_readwrite("svm_lambda", &app::RunConfig::svm_lambda)
      .def_readwrite("svm_epochs", &app::RunConfig::svm_epochs)
      .def_readwrite("rf_trees", &app::RunConfig::rf_trees)
      .def_readwrite("rf_max_depth", &app::RunConfig::rf_depth)
      .def_readwrite("rf_max_features", &app::RunConfig::rf_max_features)
      .def_property(
          "embedding_dim", [](const app::RunConfig& c) { return c.neural.embedding_dim; },
          [](app::RunConfig& c, std::size_t v) { c.neural.embedding_dim = v; })
      .def_property(
          "max_len", [](const app::RunConfig& c) { return c.neural.max_len; },
          [](app::RunConfig& c, std::size_t v) { c.neural.max_len = v; })
      .def_property(
          "filters", [](const app::RunConfig& c) { return c.neural.filters; },
          [](app::RunConfig& c, std::size_t v) { c.neural.filters = v; })
      .def_property(
          "kernel_size", [](const app::RunConfig& c) { return c.neural.kernel; },
          [](app::RunConfig& c, std::size_t v) { c.neural.kernel = v; })
      .def_property(
          "lstm_units", [](const app::RunConfig& c) { return c.neural.lstm_units; },
          [](app::RunConfig& c, std::size_t v) { c.neural.lstm_units = v; })
      .def_property(
          "dropout", [](const app::RunConfig& c) { return c.neural.dropout; },
          [](app::RunConfig& c, double v) { c.neural.dropout = v; })
      .def_property(
          "learning_rate", [](const app::RunConfig& c) { return c.neural.learning_rate; },
          [](app::RunConfig& c, double v) { c.neural.learning_rate = v; })
      .def_property(
          "batch_size", [](const app::RunConfig& c) { return c.neural.batch_size; },
          [](app::RunConfig& c, std::size_t v) { c.neural.batch_size = v; })
      .def_property(
          "epochs", [](const app::RunConfig& c) { return c.neural.max_epochs; },
          [](app::RunConfig& c, std::size_t v) { c.neural.max_epochs = v; })
      .def_property(
          "patience", [](const app::RunConfig& c) { return c.neural.patience; },
          [](app::RunConfig& c, std::size_t v) { c.neural.patience = v; })
      .def_property(
          "val_fraction", [](const app::RunConfig& c) { return c.neural.val_fraction; },
          [](app::RunConfig& c, double v) { c.neural.val_fraction = v; })
      .def_property(
          "max_vocab", [](const app::RunConfig& c) { return c.neural.max_vocab; },
          [](app::RunConfig& c, std::size_t v) { c.neural.max_vocab = v; })
      .def_property(
          "pooling",
          [](const app::RunConfig& c) { return c.neural.pooling == numerics::Pooling::Max ? "max" : "last"; },
          [](app::RunConfig& c, const std::string& v) {
            if (v == "max") c.neural.pooling = numerics::Pooling::Max;
            else if (v == "last") c.neural.pooling = numerics::Pooling::LastState;
            else throw ConfigError("pooling must be 'max' or 'last'");
          })
      .def_readwrite("out_dir", &app::RunConfig::out_dir)
      .def_readwrite("checkpoint_path", &app::RunConfig::checkpoint_path)
      .def_readwrite("threads", &app::RunConfig::threads)
      .def_readwrite("quiet", &app::RunConfig::quiet);

  m.def(
      "eda",
      [](const app::RunConfig& c) {
        const auto s = app::cmd_eda(c);
        py::dict d;
        d["total_rows"] = s.total_rows;
        d["hs_counts"] = s.hs_counts;
        d["abusive_counts"] = s.abusive_counts;
        d["mean_length"] = s.mean_length;
        d["length_histogram"] = s.length_histogram;
        return d;
      },
      py::arg("config"));
  m.def(
      "bench",
      [](const app::RunConfig& c) {
        app::BenchOutcome r;
        {
          py::gil_scoped_release release;
          r = app::cmd_bench(c);
        }
        py::dict d;
        py::list ranking;
        for (const auto& e : r.leaderboard.entries) {
          py::dict row;
          row["model"] = e.spec.describe();
          row["mean_f1"] = e.mean_f1;
          row["mean_accuracy"] = e.mean_accuracy;
          ranking.append(row);
        }
        d["leaderboard"] = ranking;
        py::dict test;
        for (const auto& t : r.test_results) test[py::str(t.method)] = metrics_dict(t.metrics);
        d["test"] = test;
        d["n_train"] = r.n_train;
        d["n_test"] = r.n_test;
        d["champion_confusion"] = confusion_dict(r.champion_confusion);
        return d;
      },
      py::arg("config"));
  auto neural_dict = [](const app::NeuralOutcome& r) {
    py::dict d;
    d["test"] = metrics_dict(r.test_result.metrics);
    d["confusion"] = confusion_dict(r.confusion);
    d["epochs"] = r.log.epochs.size();
    d["best_epoch"] = r.log.best_epoch;
    d["vocab_size"] = r.vocab_size;
    d["n_train"] = r.n_train;
    d["n_val"] = r.n_val;
    d["n_test"] = r.n_test;
    return d;
  };
  m.def(
      "train",
      [neural_dict](const app::RunConfig& c) {
        app::NeuralOutcome r;
        {
          py::gil_scoped_release release;
          r = app::cmd_train(c);
        }
        return neural_dict(r);
      },
      py::arg("config"));
  m.def(
      "evaluate",
      [neural_dict](const app::RunConfig& c) {
        app::NeuralOutcome r;
        {
          py::gil_scoped_release release;
          r = app::cmd_evaluate(c);
        }
        return neural_dict(r);
      },
      py::arg("config"));
  m.def(
      "synth",
      [](const std::string& path, std::size_t n, std::uint64_t seed, double label_noise) {
        app::write_synthetic_corpus({n, seed, label_noise}, path);
      },
      py::arg("path"), py::arg("n") = 1000, py::arg("seed") = 7, py::arg("label_noise") = 0.0);
}
