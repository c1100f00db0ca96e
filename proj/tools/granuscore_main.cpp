#include "granuscore/analysis.hpp"
#include "granuscore/errors.hpp"
#include "granuscore/pipeline.hpp"
#include "granuscore/text_util.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using granuscore::Error;
using nlohmann::json;

namespace {

// Config file is a JSON tree: {"common": {...}, "<subcommand>": {...}}.
// Flags given on the command line win over config values.
struct ConfigTree {
    json root = json::object();
    std::string scope;

    const json* find(const std::string& key) const {
        if (root.contains(scope) && root[scope].is_object() && root[scope].contains(key)) {
            return &root[scope][key];
        }
        if (root.contains("common") && root["common"].is_object() &&
            root["common"].contains(key)) {
            return &root["common"][key];
        }
        return nullptr;
    }

    template <typename T>
    void fill(const CLI::Option* opt, T& var, const std::string& key) const {
        if (opt != nullptr && opt->count() > 0) return; // flags win
        const json* v = find(key);
        if (v != nullptr) var = v->get<T>();
    }
};

ConfigTree load_config(const std::string& path, const std::string& scope) {
    ConfigTree cfg;
    cfg.scope = scope;
    if (path.empty()) return cfg;
    std::ifstream f(path);
    if (!f) throw granuscore::ConfigError("cannot open config file: " + path);
    cfg.root = json::parse(f, nullptr, false);
    if (cfg.root.is_discarded() || !cfg.root.is_object()) {
        throw granuscore::ConfigError("config file is not a JSON object: " + path);
    }
    return cfg;
}

void require_file(const std::string& path, const std::string& what) {
    if (path.empty()) throw granuscore::ConfigError(what + " not set");
    if (!fs::exists(path)) throw granuscore::ConfigError(what + " does not exist: " + path);
}

std::shared_ptr<granuscore::EmbeddingProvider> open_backend(const std::string& table_path) {
    require_file(table_path, "embedding backend table");
    auto table = std::make_shared<granuscore::TableProvider>(
        granuscore::TableProvider::load(table_path));
    return std::make_shared<granuscore::CachingProvider>(table);
}

granuscore::AnchorStrategy make_strategy(const std::string& kind, size_t k, uint64_t seed,
                                         size_t bins, bool equal_width) {
    granuscore::AnchorStrategy s;
    s.kind = granuscore::anchor_kind_from_name(kind);
    s.k = k;
    s.seed = seed;
    s.bins = bins;
    s.equal_width = equal_width;
    return s;
}

std::array<double, 3> parse_ratios(const std::string& s) {
    auto parts = granuscore::split(s, ',');
    if (parts.size() != 3) {
        throw granuscore::ConfigError("ratios must be three comma-separated numbers");
    }
    return {std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2])};
}

std::string read_stream(std::istream& in) {
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Shared per-subcommand plumbing.
struct Common {
    std::string config_path;
    uint64_t seed = 0;
    size_t jobs = 1;
    bool dry_run = false;
    bool verbose = false;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "JSON config file (flags win)");
        seed_opt = app->add_option("--seed", seed, "root seed recorded in every output header");
        jobs_opt = app->add_option("--jobs", jobs, "worker parallelism for scoring and sweeps");
        app->add_flag("--dry-run", dry_run, "validate configuration and exit without side effects");
        app->add_flag("-v,--verbose", verbose, "log progress to stderr");
    }

    ConfigTree resolve(const std::string& scope) {
        ConfigTree cfg = load_config(config_path, scope);
        cfg.fill(seed_opt, seed, "seed");
        cfg.fill(jobs_opt, jobs, "jobs");
        return cfg;
    }

    CLI::Option* seed_opt = nullptr;
    CLI::Option* jobs_opt = nullptr;
};

std::vector<std::string> load_entity_labels(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw granuscore::ResolutionError("cannot open entity corpus: " + path);
    std::vector<std::string> labels;
    std::string line;
    while (std::getline(f, line)) {
        std::string t = granuscore::trim(line);
        if (t.empty()) continue;
        if (t.front() == '{') {
            json row = json::parse(t, nullptr, false);
            if (row.is_discarded() || !row.contains("title")) {
                throw granuscore::DataError("entity corpus: JSON line without a title field");
            }
            labels.push_back(row["title"].get<std::string>());
        } else {
            labels.push_back(t);
        }
    }
    return labels;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"granuscore: reference-free semantic granularity scoring"};
    app.require_subcommand(1);

    // ---- build-index ----
    auto* cmd_index = app.add_subcommand("build-index", "sample entities and embed the anchor index");
    Common c_index;
    c_index.attach(cmd_index);
    std::string ix_entities, ix_backend, ix_out;
    size_t ix_sample = 50000;
    auto* ix_entities_opt = cmd_index->add_option("--entities", ix_entities, "entity corpus (titles)");
    auto* ix_backend_opt = cmd_index->add_option("--backend", ix_backend, "embedding table");
    auto* ix_out_opt = cmd_index->add_option("--out", ix_out, "index archive output");
    auto* ix_sample_opt = cmd_index->add_option("--sample-size", ix_sample, "entities to sample");
    cmd_index->callback([&]() {
        ConfigTree cfg = c_index.resolve("build-index");
        cfg.fill(ix_entities_opt, ix_entities, "entities");
        cfg.fill(ix_backend_opt, ix_backend, "backend");
        cfg.fill(ix_out_opt, ix_out, "out");
        cfg.fill(ix_sample_opt, ix_sample, "sample_size");
        require_file(ix_entities, "entity corpus");
        require_file(ix_backend, "embedding backend table");
        if (ix_out.empty()) throw granuscore::ConfigError("--out not set");
        if (c_index.dry_run) {
            std::cout << "dry-run ok\n";
            return;
        }
        auto provider = open_backend(ix_backend);
        std::vector<std::string> labels = load_entity_labels(ix_entities);
        granuscore::AnchorIndex index =
            granuscore::build_index(labels, *provider, ix_sample, c_index.seed);
        index.save(ix_out);
        std::cout << "{\"seed\":" << c_index.seed << ",\"entries\":" << index.size()
                  << ",\"out\":\"" << ix_out << "\"}\n";
    });

    // ---- train ----
    auto* cmd_train = app.add_subcommand("train", "split the dataset and fit the scorer");
    Common c_train;
    c_train.attach(cmd_train);
    std::string tr_granola, tr_backend, tr_index, tr_out, tr_split_out;
    std::string tr_strategy = "random_fixed", tr_ratios = "0.8,0.1,0.1";
    size_t tr_k = 999, tr_bins = 10;
    bool tr_equal_width = false, tr_no_dist0 = false;
    granuscore::RegressorConfig tr_cfg;
    auto* tr_granola_opt = cmd_train->add_option("--granola", tr_granola, "dataset (JSONL)");
    auto* tr_backend_opt = cmd_train->add_option("--backend", tr_backend, "embedding table");
    auto* tr_index_opt = cmd_train->add_option("--index", tr_index, "anchor index archive");
    auto* tr_out_opt = cmd_train->add_option("--out", tr_out, "model archive output");
    cmd_train->add_option("--split-out", tr_split_out, "write the id->split table here");
    auto* tr_strategy_opt = cmd_train->add_option("--strategy", tr_strategy,
                                                  "nearest_neighbors|random_dynamic|random_fixed|radial_binned");
    auto* tr_k_opt = cmd_train->add_option("--k", tr_k, "anchors per query");
    cmd_train->add_option("--bins", tr_bins, "radial bins");
    cmd_train->add_flag("--equal-width", tr_equal_width, "equal-width radial bins");
    cmd_train->add_flag("--no-dist0", tr_no_dist0, "drop the radial depth feature");
    auto* tr_ratios_opt = cmd_train->add_option("--ratios", tr_ratios, "train,dev,test ratios");
    cmd_train->add_option("--learning-rate", tr_cfg.learning_rate, "boosting step size");
    cmd_train->add_option("--iterations", tr_cfg.max_iterations, "max boosting rounds");
    cmd_train->add_option("--early-stopping", tr_cfg.early_stopping_rounds, "patience on dev RMSE");
    cmd_train->add_option("--leaves", tr_cfg.num_leaves, "leaves per tree");
    cmd_train->add_option("--min-leaf", tr_cfg.min_data_in_leaf, "min samples per leaf");
    cmd_train->add_option("--feature-fraction", tr_cfg.feature_fraction, "feature subsample");
    cmd_train->add_option("--bagging-fraction", tr_cfg.bagging_fraction, "row subsample");
    cmd_train->add_option("--bagging-freq", tr_cfg.bagging_freq, "rounds between row resamples");
    cmd_train->add_option("--max-bins", tr_cfg.max_bins, "histogram bins");
    cmd_train->add_option("--max-depth", tr_cfg.max_depth, "tree depth cap (-1 = unlimited)");
    cmd_train->add_option("--dart-rate", tr_cfg.dart_rate, "dropout boosting rate (0 = plain)");
    cmd_train->callback([&]() {
        ConfigTree cfg = c_train.resolve("train");
        cfg.fill(tr_granola_opt, tr_granola, "granola");
        cfg.fill(tr_backend_opt, tr_backend, "backend");
        cfg.fill(tr_index_opt, tr_index, "index");
        cfg.fill(tr_out_opt, tr_out, "out");
        cfg.fill(tr_strategy_opt, tr_strategy, "strategy");
        cfg.fill(tr_k_opt, tr_k, "k");
        cfg.fill(tr_ratios_opt, tr_ratios, "ratios");
        require_file(tr_granola, "dataset");
        require_file(tr_backend, "embedding backend table");
        require_file(tr_index, "anchor index");
        if (tr_out.empty()) throw granuscore::ConfigError("--out not set");
        if (c_train.dry_run) {
            std::cout << "dry-run ok\n";
            return;
        }
        auto provider = open_backend(tr_backend);
        granuscore::AnchorIndex index = granuscore::AnchorIndex::load(tr_index);
        std::vector<granuscore::GranolaEntry> entries = granuscore::load_granola(tr_granola);
        granuscore::SplitAssignment assignment =
            granuscore::split_by_realization(entries, parse_ratios(tr_ratios), c_train.seed);
        granuscore::AnchorStrategy strategy =
            make_strategy(tr_strategy, tr_k, c_train.seed, tr_bins, tr_equal_width);
        tr_cfg.seed = c_train.seed;
        granuscore::GranularityModel model = granuscore::train_granola_model(
            entries, assignment, *provider, index, strategy, !tr_no_dist0, tr_cfg, tr_granola,
            c_train.jobs);
        granuscore::save_model(model, tr_out);
        if (!tr_split_out.empty()) {
            granuscore::save_split_table(entries, assignment, tr_split_out);
        }
        auto counts = assignment.counts();
        std::cout << "{\"seed\":" << c_train.seed << ",\"trees\":" << model.ensemble.trees.size()
                  << ",\"dev_rmse\":" << model.ensemble.best_dev_rmse << ",\"split\":[" << counts[0]
                  << "," << counts[1] << "," << counts[2] << "],\"out\":\"" << tr_out << "\"}\n";
    });

    // ---- calibrate ----
    auto* cmd_cal = app.add_subcommand("calibrate", "attach the percentile reference distribution");
    Common c_cal;
    c_cal.attach(cmd_cal);
    std::string cal_model, cal_backend, cal_corpus, cal_out, cal_corpus_id;
    auto* cal_model_opt = cmd_cal->add_option("--model", cal_model, "model archive");
    auto* cal_backend_opt = cmd_cal->add_option("--backend", cal_backend, "embedding table");
    auto* cal_corpus_opt = cmd_cal->add_option("--corpus", cal_corpus, "noun lemma list");
    auto* cal_out_opt = cmd_cal->add_option("--out", cal_out, "calibrated model output");
    cmd_cal->add_option("--corpus-id", cal_corpus_id, "label recorded in the archive");
    cmd_cal->callback([&]() {
        ConfigTree cfg = c_cal.resolve("calibrate");
        cfg.fill(cal_model_opt, cal_model, "model");
        cfg.fill(cal_backend_opt, cal_backend, "backend");
        cfg.fill(cal_corpus_opt, cal_corpus, "corpus");
        cfg.fill(cal_out_opt, cal_out, "out");
        require_file(cal_model, "model archive");
        require_file(cal_backend, "embedding backend table");
        require_file(cal_corpus, "calibration corpus");
        if (cal_out.empty()) throw granuscore::ConfigError("--out not set");
        if (c_cal.dry_run) {
            std::cout << "dry-run ok\n";
            return;
        }
        auto provider = open_backend(cal_backend);
        auto model = std::make_shared<granuscore::GranularityModel>(
            granuscore::load_model(cal_model));
        std::vector<std::string> corpus = granuscore::load_calibration_corpus(cal_corpus);
        granuscore::UnitScorer scorer(model, provider);
        granuscore::CalibrationBuildReport report;
        granuscore::CalibrationTable table = granuscore::build_calibration(
            corpus, [&](const std::string& t) { return scorer.raw_score(t); },
            cal_corpus_id.empty() ? cal_corpus : cal_corpus_id, &report, c_cal.jobs);
        model->calibration = std::move(table);
        granuscore::save_model(*model, cal_out);
        std::cout << "{\"seed\":" << c_cal.seed << ",\"table_size\":" << report.scored
                  << ",\"skipped\":" << report.skipped.size() << ",\"out\":\"" << cal_out
                  << "\"}\n";
        for (const auto& s : report.skipped) std::cerr << "skipped corpus item: " << s << "\n";
    });

    // ---- score ----
    auto* cmd_score = app.add_subcommand("score", "Granuscore for inline text, a file, or stdin");
    Common c_score;
    c_score.attach(cmd_score);
    std::string sc_model, sc_backend, sc_text, sc_file, sc_agg = "sent-lqm-0.8-pool-mean";
    auto* sc_model_opt = cmd_score->add_option("--model", sc_model, "model archive");
    auto* sc_backend_opt = cmd_score->add_option("--backend", sc_backend, "embedding table");
    cmd_score->add_option("--text", sc_text, "inline text");
    cmd_score->add_option("--file", sc_file, "read text from this file");
    auto* sc_agg_opt = cmd_score->add_option("--aggregation", sc_agg, "aggregation strategy name");
    cmd_score->callback([&]() {
        ConfigTree cfg = c_score.resolve("score");
        cfg.fill(sc_model_opt, sc_model, "model");
        cfg.fill(sc_backend_opt, sc_backend, "backend");
        cfg.fill(sc_agg_opt, sc_agg, "aggregation");
        require_file(sc_model, "model archive");
        require_file(sc_backend, "embedding backend table");
        granuscore::AggregationSpec spec = granuscore::AggregationSpec::parse(sc_agg);
        if (c_score.dry_run) {
            std::cout << "dry-run ok\n";
            return;
        }
        std::string text = sc_text;
        if (text.empty() && !sc_file.empty()) {
            std::ifstream f(sc_file);
            if (!f) throw granuscore::ResolutionError("cannot open input file: " + sc_file);
            text = read_stream(f);
        }
        if (text.empty()) text = read_stream(std::cin);
        auto provider = open_backend(sc_backend);
        auto model = std::make_shared<granuscore::GranularityModel>(
            granuscore::load_model(sc_model));
        granuscore::UnitScorer scorer(model, provider);
        granuscore::ScoreReport report = granuscore::score_text(text, scorer, spec);
        json doc = json::parse(report.to_json());
        doc["seed"] = c_score.seed;
        std::cout << doc.dump(2) << "\n";
    });

    // ---- evaluate-granola ----
    auto* cmd_eval = app.add_subcommand("evaluate-granola", "ranking metrics per method");
    Common c_eval;
    c_eval.attach(cmd_eval);
    std::string ev_granola, ev_backend, ev_taxonomy, ev_out, ev_dump, ev_split = "test";
    std::string ev_ratios = "0.8,0.1,0.1";
    std::vector<std::string> ev_methods{"word_count", "dist0"};
    std::vector<std::string> ev_models; // name=path
    auto* ev_granola_opt = cmd_eval->add_option("--granola", ev_granola, "dataset (JSONL)");
    auto* ev_backend_opt = cmd_eval->add_option("--backend", ev_backend, "embedding table");
    cmd_eval->add_option("--taxonomy", ev_taxonomy, "noun taxonomy TSV (enables taxonomy_depth)");
    auto* ev_out_opt = cmd_eval->add_option("--out", ev_out, "metric table CSV");
    cmd_eval->add_option("--dump-pairs", ev_dump, "per-pair dump for the last method");
    cmd_eval->add_option("--split", ev_split, "train|dev|test");
    auto* ev_ratios_opt = cmd_eval->add_option("--ratios", ev_ratios, "train,dev,test ratios");
    cmd_eval->add_option("--methods", ev_methods, "word_count,taxonomy_depth,dist0")
        ->delimiter(',');
    cmd_eval->add_option("--model", ev_models, "trained method as name=path (repeatable)");
    cmd_eval->callback([&]() {
        ConfigTree cfg = c_eval.resolve("evaluate-granola");
        cfg.fill(ev_granola_opt, ev_granola, "granola");
        cfg.fill(ev_backend_opt, ev_backend, "backend");
        cfg.fill(ev_out_opt, ev_out, "out");
        cfg.fill(ev_ratios_opt, ev_ratios, "ratios");
        require_file(ev_granola, "dataset");
        require_file(ev_backend, "embedding backend table");
        if (ev_out.empty()) throw granuscore::ConfigError("--out not set");
        granuscore::Split split;
        if (ev_split == "train") {
            split = granuscore::Split::train;
        } else if (ev_split == "dev") {
            split = granuscore::Split::dev;
        } else if (ev_split == "test") {
            split = granuscore::Split::test;
        } else {
            throw granuscore::ConfigError("unknown split: " + ev_split);
        }
        if (c_eval.dry_run) {
            std::cout << "dry-run ok\n";
            return;
        }
        auto provider = open_backend(ev_backend);
        std::vector<granuscore::GranolaEntry> entries = granuscore::load_granola(ev_granola);
        granuscore::SplitAssignment assignment =
            granuscore::split_by_realization(entries, parse_ratios(ev_ratios), c_eval.seed);
        auto eval_entries = granuscore::entries_in_split(entries, assignment, split);

        std::vector<std::pair<std::string, granuscore::RankingReport>> rows;
        std::vector<granuscore::ScoredEntry> last_scored;
        auto run_method = [&](const std::string& name, const granuscore::TextScorer& scorer) {
            last_scored = granuscore::score_entries(eval_entries, scorer, c_eval.jobs);
            rows.emplace_back(name, granuscore::evaluate_ranking(last_scored));
            if (c_eval.verbose) std::cerr << "evaluated method " << name << "\n";
        };
        for (const auto& m : ev_methods) {
            if (m == "word_count") {
                run_method(m, granuscore::make_word_count_scorer());
            } else if (m == "dist0") {
                run_method(m, granuscore::make_dist0_scorer(provider));
            } else if (m == "taxonomy_depth") {
                require_file(ev_taxonomy, "noun taxonomy");
                auto tax = std::make_shared<granuscore::NounTaxonomy>(
                    granuscore::NounTaxonomy::load(ev_taxonomy));
                run_method(m, granuscore::make_taxonomy_scorer(tax));
            } else {
                throw granuscore::ConfigError("unknown method: " + m);
            }
        }
        for (const auto& spec : ev_models) {
            size_t eq = spec.find('=');
            if (eq == std::string::npos) {
                throw granuscore::ConfigError("--model expects name=path, got: " + spec);
            }
            std::string name = spec.substr(0, eq);
            std::string path = spec.substr(eq + 1);
            require_file(path, "model archive");
            auto model = std::make_shared<granuscore::GranularityModel>(
                granuscore::load_model(path));
            auto scorer = std::make_shared<granuscore::UnitScorer>(model, provider);
            run_method(name, granuscore::make_model_scorer(scorer));
        }
        granuscore::write_ranking_csv(rows, ev_out, c_eval.seed);
        if (!ev_dump.empty()) granuscore::write_pair_dump(last_scored, ev_dump);
        std::cout << "{\"seed\":" << c_eval.seed << ",\"methods\":" << rows.size()
                  << ",\"entries\":" << eval_entries.size() << ",\"out\":\"" << ev_out << "\"}\n";
    });

    // ---- analyze-qa ----
    auto* cmd_qa = app.add_subcommand("analyze-qa", "outcome stratification and granularity gap");
    Common c_qa;
    c_qa.attach(cmd_qa);
    std::string qa_records, qa_model, qa_backend, qa_outdir, qa_agg = "sent-lqm-0.8-pool-mean";
    size_t qa_folds = 5;
    bool qa_svg = false;
    auto* qa_records_opt = cmd_qa->add_option("--records", qa_records, "QA records (JSONL)");
    auto* qa_model_opt = cmd_qa->add_option("--model", qa_model, "model archive");
    auto* qa_backend_opt = cmd_qa->add_option("--backend", qa_backend, "embedding table");
    auto* qa_outdir_opt = cmd_qa->add_option("--out-dir", qa_outdir, "report directory");
    cmd_qa->add_option("--aggregation", qa_agg, "aggregation strategy name");
    cmd_qa->add_option("--folds", qa_folds, "cross-validation folds");
    cmd_qa->add_flag("--svg", qa_svg, "also emit a scatter chart");
    cmd_qa->callback([&]() {
        ConfigTree cfg = c_qa.resolve("analyze-qa");
        cfg.fill(qa_records_opt, qa_records, "records");
        cfg.fill(qa_model_opt, qa_model, "model");
        cfg.fill(qa_backend_opt, qa_backend, "backend");
        cfg.fill(qa_outdir_opt, qa_outdir, "out_dir");
        require_file(qa_records, "QA records");
        require_file(qa_model, "model archive");
        require_file(qa_backend, "embedding backend table");
        if (qa_outdir.empty()) throw granuscore::ConfigError("--out-dir not set");
        if (c_qa.dry_run) {
            std::cout << "dry-run ok\n";
            return;
        }
        fs::create_directories(qa_outdir);
        auto provider = open_backend(qa_backend);
        auto model = std::make_shared<granuscore::GranularityModel>(
            granuscore::load_model(qa_model));
        granuscore::UnitScorer scorer(model, provider);
        std::vector<granuscore::QARecord> records = granuscore::load_qa_records(qa_records);
        auto scored = granuscore::score_qa_records(
            records, scorer, granuscore::AggregationSpec::parse(qa_agg), c_qa.jobs);
        granuscore::OutcomeReport outcome = granuscore::qa_outcome_report(scored);
        granuscore::write_outcome_csv(outcome, qa_outdir + "/outcome.csv", c_qa.seed);
        granuscore::write_qa_scatter_csv(scored, qa_outdir + "/scatter.csv", c_qa.seed);
        granuscore::write_qa_confounds_csv(scored, qa_outdir + "/confounds.csv", c_qa.seed);
        if (qa_svg) granuscore::write_qa_scatter_svg(scored, qa_outdir + "/scatter.svg");
        json out = {{"seed", c_qa.seed}, {"records", scored.size()}};
        try {
            granuscore::GapAucResult auc = granuscore::gap_auc(scored, qa_folds, c_qa.seed);
            out["gap_auc"] = {{"mean", auc.mean_auc},
                              {"std", auc.std_auc},
                              {"folds", auc.folds},
                              {"intercept", auc.full_fit.intercept},
                              {"slope", auc.full_fit.slope}};
        } catch (const Error& e) {
            out["gap_auc_error"] = e.what();
        }
        for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << "\n";
        std::ofstream jf(qa_outdir + "/gap_auc.json");
        jf << out.dump(2) << "\n";
        std::cout << out.dump(2) << "\n";
    });

    // ---- analyze-sections ----
    auto* cmd_sec = app.add_subcommand("analyze-sections", "discourse-section granularity study");
    Common c_sec;
    c_sec.attach(cmd_sec);
    std::string se_papers, se_model, se_backend, se_out, se_agg = "sent-lqm-0.8-pool-mean";
    size_t se_min_units = 10;
    auto* se_papers_opt = cmd_sec->add_option("--papers", se_papers, "paper sections (JSONL)");
    auto* se_model_opt = cmd_sec->add_option("--model", se_model, "model archive");
    auto* se_backend_opt = cmd_sec->add_option("--backend", se_backend, "embedding table");
    auto* se_out_opt = cmd_sec->add_option("--out", se_out, "result JSON");
    cmd_sec->add_option("--aggregation", se_agg, "aggregation strategy name");
    cmd_sec->add_option("--min-units", se_min_units, "referential units a paragraph must carry");
    cmd_sec->callback([&]() {
        ConfigTree cfg = c_sec.resolve("analyze-sections");
        cfg.fill(se_papers_opt, se_papers, "papers");
        cfg.fill(se_model_opt, se_model, "model");
        cfg.fill(se_backend_opt, se_backend, "backend");
        cfg.fill(se_out_opt, se_out, "out");
        require_file(se_papers, "paper sections");
        require_file(se_model, "model archive");
        require_file(se_backend, "embedding backend table");
        if (se_out.empty()) throw granuscore::ConfigError("--out not set");
        if (c_sec.dry_run) {
            std::cout << "dry-run ok\n";
            return;
        }
        auto provider = open_backend(se_backend);
        auto model = std::make_shared<granuscore::GranularityModel>(
            granuscore::load_model(se_model));
        granuscore::UnitScorer scorer(model, provider);
        auto sections = granuscore::load_paper_sections(se_papers);
        auto pairs = granuscore::select_paper_pairs(sections, se_min_units);
        granuscore::SectionCompareResult res = granuscore::section_compare(
            pairs, scorer, granuscore::AggregationSpec::parse(se_agg), c_sec.jobs);
        json out = {{"seed", c_sec.seed},
                    {"papers", res.papers},
                    {"ordering_fraction", res.ordering_fraction},
                    {"tie_fraction", res.tie_fraction},
                    {"reverse_fraction", res.reverse_fraction},
                    {"intro_mean", res.intro_mean},
                    {"intro_std", res.intro_std},
                    {"related_mean", res.related_mean},
                    {"related_std", res.related_std},
                    {"paired_t", {{"statistic", res.t_test.statistic}, {"p", res.t_test.p_value}}},
                    {"wilcoxon",
                     {{"statistic", res.wilcoxon.statistic}, {"p", res.wilcoxon.p_value}}},
                    {"cohens_dz", res.cohens_dz},
                    {"insufficient_data", res.insufficient_data}};
        std::ofstream jf(se_out);
        jf << out.dump(2) << "\n";
        std::cout << out.dump(2) << "\n";
    });

    // ---- sweep-aggregations ----
    auto* cmd_sweep = app.add_subcommand("sweep-aggregations",
                                         "section-ordering accuracy per aggregation strategy");
    Common c_sw;
    c_sw.attach(cmd_sweep);
    std::string sw_papers, sw_model, sw_backend, sw_out;
    std::vector<std::string> sw_strategies;
    bool sw_all = false;
    size_t sw_min_units = 10;
    auto* sw_papers_opt = cmd_sweep->add_option("--papers", sw_papers, "paper sections (JSONL)");
    auto* sw_model_opt = cmd_sweep->add_option("--model", sw_model, "model archive");
    auto* sw_backend_opt = cmd_sweep->add_option("--backend", sw_backend, "embedding table");
    auto* sw_out_opt = cmd_sweep->add_option("--out", sw_out, "sweep table CSV");
    cmd_sweep->add_option("--strategies", sw_strategies, "aggregation names")->delimiter(',');
    cmd_sweep->add_flag("--all", sw_all, "run the full strategy grid");
    cmd_sweep->add_option("--min-units", sw_min_units, "referential units a paragraph must carry");
    cmd_sweep->callback([&]() {
        ConfigTree cfg = c_sw.resolve("sweep-aggregations");
        cfg.fill(sw_papers_opt, sw_papers, "papers");
        cfg.fill(sw_model_opt, sw_model, "model");
        cfg.fill(sw_backend_opt, sw_backend, "backend");
        cfg.fill(sw_out_opt, sw_out, "out");
        require_file(sw_papers, "paper sections");
        require_file(sw_model, "model archive");
        require_file(sw_backend, "embedding backend table");
        if (sw_out.empty()) throw granuscore::ConfigError("--out not set");
        std::vector<std::string> names = sw_strategies;
        if (sw_all) names = granuscore::sweep_strategy_names();
        if (names.empty()) {
            throw granuscore::ConfigError("no strategies given (use --strategies or --all)");
        }
        std::vector<granuscore::AggregationSpec> specs;
        for (const auto& n : names) specs.push_back(granuscore::AggregationSpec::parse(n));
        if (c_sw.dry_run) {
            std::cout << "dry-run ok\n";
            return;
        }
        auto provider = open_backend(sw_backend);
        auto model = std::make_shared<granuscore::GranularityModel>(
            granuscore::load_model(sw_model));
        granuscore::UnitScorer scorer(model, provider);
        auto sections = granuscore::load_paper_sections(sw_papers);
        auto pairs = granuscore::select_paper_pairs(sections, sw_min_units);
        auto rows = granuscore::aggregation_sweep(pairs, scorer, specs, c_sw.jobs);
        granuscore::write_sweep_csv(rows, sw_out, c_sw.seed);
        std::cout << "{\"seed\":" << c_sw.seed << ",\"strategies\":" << rows.size()
                  << ",\"papers\":" << pairs.size() << ",\"out\":\"" << sw_out << "\"}\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: usage: " << e.what() << "\n";
        std::cerr << app.help() << "\n";
        return 2;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: unexpected: " << e.what() << "\n";
        return 1;
    }
}
