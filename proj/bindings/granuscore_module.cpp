#include "granuscore/analysis.hpp"
#include "granuscore/errors.hpp"
#include "granuscore/pipeline.hpp"

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace granuscore;

namespace {

// Provider implemented in Python (e.g. wrapping sentence-transformers).
class PyEmbeddingProvider : public EmbeddingProvider {
public:
    using EmbeddingProvider::EmbeddingProvider;

    std::string model_id() const override {
        PYBIND11_OVERRIDE_PURE(std::string, EmbeddingProvider, model_id);
    }
    SpaceDescriptor space() const override {
        PYBIND11_OVERRIDE_PURE(SpaceDescriptor, EmbeddingProvider, space);
    }
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override {
        PYBIND11_OVERRIDE_PURE(std::vector<EmbeddingVector>, EmbeddingProvider, embed, texts);
    }
};

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "granuscore core: hyperbolic geometry, anchor features, boosted scorer";

    py::register_exception<Error>(m, "GranuscoreError");

    py::enum_<SpaceKind>(m, "SpaceKind")
        .value("hyperbolic_ball", SpaceKind::hyperbolic_ball)
        .value("flat", SpaceKind::flat);

    py::class_<SpaceDescriptor>(m, "SpaceDescriptor")
        .def(py::init([](const std::string& kind, double curvature, size_t dimension) {
                 SpaceDescriptor s{space_kind_from_name(kind), curvature, dimension};
                 validate_space(s);
                 return s;
             }),
             py::arg("kind"), py::arg("curvature"), py::arg("dimension"))
        .def_readonly("curvature", &SpaceDescriptor::curvature)
        .def_readonly("dimension", &SpaceDescriptor::dimension)
        .def_property_readonly("kind",
                               [](const SpaceDescriptor& s) { return space_kind_name(s.kind); });

    py::class_<EmbeddingVector>(m, "EmbeddingVector")
        .def(py::init([](std::vector<double> components, const SpaceDescriptor& space,
                         const std::string& model_id) {
                 EmbeddingVector v{std::move(components), space, model_id};
                 validate_in_space(v);
                 return v;
             }),
             py::arg("components"), py::arg("space"), py::arg("model_id") = "")
        .def_readonly("components", &EmbeddingVector::components)
        .def_readonly("space", &EmbeddingVector::space)
        .def_readonly("model_id", &EmbeddingVector::model_id);

    m.def("dist0", &dist0, py::arg("vector"));
    m.def("cosine_similarity", &cosine_similarity, py::arg("u"), py::arg("v"));
    m.def("hyperbolic_distance", &hyperbolic_distance, py::arg("u"), py::arg("v"));
    m.def("mobius_add", &mobius_add, py::arg("u"), py::arg("v"), py::arg("curvature"));

    py::class_<EmbeddingProvider, PyEmbeddingProvider, std::shared_ptr<EmbeddingProvider>>(
        m, "EmbeddingProvider")
        .def(py::init<>())
        .def("model_id", &EmbeddingProvider::model_id)
        .def("space", &EmbeddingProvider::space)
        .def("embed", &EmbeddingProvider::embed, py::arg("texts"));

    py::class_<TableProvider, EmbeddingProvider, std::shared_ptr<TableProvider>>(m,
                                                                                 "TableProvider")
        .def(py::init([](const std::string& model_id, const SpaceDescriptor& space) {
                 return std::make_shared<TableProvider>(model_id, space);
             }),
             py::arg("model_id"), py::arg("space"))
        .def_static("load",
                    [](const std::string& path) {
                        return std::make_shared<TableProvider>(TableProvider::load(path));
                    })
        .def("save", &TableProvider::save, py::arg("path"))
        .def("add",
             [](TableProvider& t, const std::string& text, const std::vector<float>& vec) {
                 t.add(text, vec);
             })
        .def("contains", &TableProvider::contains)
        .def("__len__", &TableProvider::size);

    m.def(
        "embed_batch",
        [](const std::vector<std::string>& texts, std::shared_ptr<EmbeddingProvider> provider) {
            return embed_batch(texts, *provider);
        },
        py::arg("texts"), py::arg("provider"));

    py::class_<AnchorStrategy>(m, "AnchorStrategy")
        .def(py::init([](const std::string& kind, size_t k, uint64_t seed, size_t bins,
                         bool equal_width) {
                 return AnchorStrategy{anchor_kind_from_name(kind), k, seed, bins, equal_width};
             }),
             py::arg("kind") = "random_fixed", py::arg("k") = 999, py::arg("seed") = 0,
             py::arg("bins") = 10, py::arg("equal_width") = false)
        .def_readwrite("k", &AnchorStrategy::k)
        .def_readwrite("seed", &AnchorStrategy::seed)
        .def_readwrite("bins", &AnchorStrategy::bins);

    py::class_<AnchorIndex>(m, "AnchorIndex")
        .def_static("load", &AnchorIndex::load, py::arg("path"))
        .def("save", &AnchorIndex::save, py::arg("path"))
        .def("__len__", &AnchorIndex::size)
        .def("label", [](const AnchorIndex& i, size_t pos) { return i.entry(pos).label; })
        .def("entry_dist0", &AnchorIndex::entry_dist0);

    m.def(
        "build_index",
        [](const std::vector<std::string>& labels, std::shared_ptr<EmbeddingProvider> provider,
           size_t sample_size, uint64_t seed, const std::string& source_id) {
            return build_index(labels, *provider, sample_size, seed, source_id);
        },
        py::arg("labels"), py::arg("provider"), py::arg("sample_size"), py::arg("seed") = 0,
        py::arg("source_id") = "");
    m.def("select_anchors",
          [](const AnchorIndex& index, const AnchorStrategy& strategy,
             const EmbeddingVector* query, uint64_t call_ordinal) {
              return select_anchors(index, strategy, query, call_ordinal);
          },
          py::arg("index"), py::arg("strategy"), py::arg("query") = nullptr,
          py::arg("call_ordinal") = 0);

    py::class_<RegressorConfig>(m, "RegressorConfig")
        .def(py::init<>())
        .def_readwrite("max_iterations", &RegressorConfig::max_iterations)
        .def_readwrite("early_stopping_rounds", &RegressorConfig::early_stopping_rounds)
        .def_readwrite("learning_rate", &RegressorConfig::learning_rate)
        .def_readwrite("num_leaves", &RegressorConfig::num_leaves)
        .def_readwrite("max_depth", &RegressorConfig::max_depth)
        .def_readwrite("min_data_in_leaf", &RegressorConfig::min_data_in_leaf)
        .def_readwrite("feature_fraction", &RegressorConfig::feature_fraction)
        .def_readwrite("bagging_fraction", &RegressorConfig::bagging_fraction)
        .def_readwrite("bagging_freq", &RegressorConfig::bagging_freq)
        .def_readwrite("max_bins", &RegressorConfig::max_bins)
        .def_readwrite("dart_rate", &RegressorConfig::dart_rate)
        .def_readwrite("seed", &RegressorConfig::seed);

    py::class_<GranolaEntry>(m, "GranolaEntry")
        .def(py::init([](const std::string& id, const std::string& question,
                         const std::vector<std::string>& answers) {
                 GranolaEntry e;
                 e.id = id;
                 e.question = question;
                 std::vector<double> levels = normalize_levels(answers.size());
                 for (size_t i = 0; i < answers.size(); ++i) {
                     e.realizations.emplace_back(answers[i], levels[i]);
                 }
                 return e;
             }),
             py::arg("id"), py::arg("question"), py::arg("answers"))
        .def_readonly("id", &GranolaEntry::id)
        .def_readonly("question", &GranolaEntry::question)
        .def_readonly("realizations", &GranolaEntry::realizations);

    m.def("load_granola",
          [](const std::string& path) { return load_granola(path, nullptr); });
    m.def("normalize_levels", &normalize_levels, py::arg("n"));
    m.def(
        "split_by_realization",
        [](const std::vector<GranolaEntry>& entries, double train, double dev, double test,
           uint64_t seed) {
            SplitAssignment a = split_by_realization(entries, {train, dev, test}, seed);
            std::vector<std::string> names;
            names.reserve(a.by_entry.size());
            for (Split s : a.by_entry) names.push_back(split_name(s));
            return names;
        },
        py::arg("entries"), py::arg("train") = 0.8, py::arg("dev") = 0.1, py::arg("test") = 0.1,
        py::arg("seed") = 0);
    m.def("load_calibration_corpus", &load_calibration_corpus, py::arg("path"));

    py::class_<GranularityModel, std::shared_ptr<GranularityModel>>(m, "GranularityModel")
        .def_static("load",
                    [](const std::string& path) {
                        return std::make_shared<GranularityModel>(load_model(path));
                    })
        .def("save",
             [](const GranularityModel& model, const std::string& path) {
                 save_model(model, path);
             })
        .def_property_readonly("embedding_model_id",
                               [](const GranularityModel& model) {
                                   return model.embedding_model_id;
                               })
        .def_property_readonly(
            "calibrated",
            [](const GranularityModel& model) { return model.calibration.has_value(); })
        .def_property_readonly("feature_order_id", [](const GranularityModel& model) {
            return model.feature_order_id;
        });

    m.def(
        "train_model",
        [](const std::vector<GranolaEntry>& entries, const std::vector<std::string>& splits,
           std::shared_ptr<EmbeddingProvider> provider, const AnchorIndex& index,
           const AnchorStrategy& strategy, bool include_dist0, const RegressorConfig& config,
           const std::string& dataset_id, size_t jobs) {
            SplitAssignment assignment;
            assignment.seed = config.seed;
            for (const auto& s : splits) {
                if (s == "train") {
                    assignment.by_entry.push_back(Split::train);
                } else if (s == "dev") {
                    assignment.by_entry.push_back(Split::dev);
                } else {
                    assignment.by_entry.push_back(Split::test);
                }
            }
            return std::make_shared<GranularityModel>(
                train_granola_model(entries, assignment, *provider, index, strategy,
                                    include_dist0, config, dataset_id, jobs));
        },
        py::arg("entries"), py::arg("splits"), py::arg("provider"), py::arg("index"),
        py::arg("strategy"), py::arg("include_dist0") = true,
        py::arg("config") = RegressorConfig{}, py::arg("dataset_id") = "", py::arg("jobs") = 1);

    m.def(
        "calibrate_model",
        [](std::shared_ptr<GranularityModel> model, std::shared_ptr<EmbeddingProvider> provider,
           const std::vector<std::string>& corpus, const std::string& corpus_id, size_t jobs) {
            UnitScorer scorer(model, provider);
            model->calibration = build_calibration(
                corpus, [&](const std::string& t) { return scorer.raw_score(t); }, corpus_id,
                nullptr, jobs);
        },
        py::arg("model"), py::arg("provider"), py::arg("corpus"), py::arg("corpus_id") = "",
        py::arg("jobs") = 1);

    py::class_<UnitScorer, std::shared_ptr<UnitScorer>>(m, "UnitScorer")
        .def(py::init([](std::shared_ptr<GranularityModel> model,
                         std::shared_ptr<EmbeddingProvider> provider) {
                 return std::make_shared<UnitScorer>(
                     std::static_pointer_cast<const GranularityModel>(model), provider);
             }),
             py::arg("model"), py::arg("provider"))
        .def("raw_score", &UnitScorer::raw_score, py::arg("text"))
        .def("score", &UnitScorer::score, py::arg("text"));

    py::class_<AggregationSpec>(m, "AggregationSpec")
        .def_static("parse", &AggregationSpec::parse, py::arg("name"))
        .def_static("defaults", &AggregationSpec::defaults)
        .def("name", &AggregationSpec::name);

    m.def("lqm", &lqm, py::arg("values"), py::arg("q"));
    m.def(
        "extract_units",
        [](const std::string& text) {
            std::vector<std::tuple<size_t, std::string, size_t, size_t>> out;
            for (const auto& eu : extract_units(text)) {
                out.emplace_back(eu.sentence, eu.unit.text, eu.unit.start, eu.unit.end);
            }
            return out;
        },
        py::arg("text"), "(sentence, text, start, end) per referential unit");
    m.def(
        "score_text",
        [](const std::string& text, std::shared_ptr<UnitScorer> scorer,
           const AggregationSpec& spec) {
            ScoreReport r = score_text(text, *scorer, spec);
            py::dict d;
            d["document_score"] = r.document_score;
            d["fallback_used"] = r.fallback_used;
            d["sentence_scores"] = r.sentence_scores;
            d["aggregation"] = r.spec.name();
            py::list sents;
            for (const auto& s : r.sentences) {
                py::dict sd;
                sd["sentence"] = s.sentence;
                sd["score"] = s.score;
                py::list units;
                for (const auto& u : s.units) {
                    py::dict ud;
                    ud["text"] = u.text;
                    ud["start"] = u.start;
                    ud["end"] = u.end;
                    ud["score"] = u.score ? py::cast(*u.score) : py::none();
                    units.append(ud);
                }
                sd["units"] = units;
                sents.append(sd);
            }
            d["sentences"] = sents;
            return d;
        },
        py::arg("text"), py::arg("scorer"), py::arg("spec") = AggregationSpec::defaults());

    // ranking metrics over (gold, pred) entry lists
    m.def(
        "pairwise_accuracy",
        [](const std::vector<std::vector<std::pair<double, double>>>& entries,
           const std::string& scope) {
            std::vector<ScoredEntry> scored;
            for (const auto& e : entries) {
                ScoredEntry se;
                for (const auto& [g, p] : e) se.realizations.push_back({g, p, true});
                scored.push_back(std::move(se));
            }
            PairwiseResult r = pairwise_accuracy(
                scored, scope == "intra" ? PairScope::intra : PairScope::global);
            return py::make_tuple(r.percent, r.pairs);
        },
        py::arg("entries"), py::arg("scope") = "global");
    m.def("kendall_tau_b", &kendall_tau_b, py::arg("x"), py::arg("y"));
    m.def("pearson_r", &pearson_r, py::arg("x"), py::arg("y"));
    m.def(
        "bootstrap_diff_test",
        [](const std::vector<double>& a, const std::vector<double>& b, size_t n, uint64_t seed) {
            StatTestResult r = bootstrap_diff_test(a, b, n, seed);
            return py::make_tuple(r.statistic, r.p_value);
        },
        py::arg("a"), py::arg("b"), py::arg("n_resamples") = 20000, py::arg("seed") = 0);
    m.def("to_percentile",
          [](double raw, std::vector<double> table) {
              CalibrationTable t{std::move(table), ""};
              return to_percentile(raw, t);
          });
}
