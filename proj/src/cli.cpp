#include "scrisk/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "scrisk/config.hpp"
#include "scrisk/csv.hpp"
#include "scrisk/error.hpp"
#include "scrisk/eval.hpp"
#include "scrisk/gbm.hpp"
#include "scrisk/rng.hpp"
#include "scrisk/shap.hpp"
#include "scrisk/svg.hpp"
#include "scrisk/synth.hpp"

namespace scrisk {
namespace cli {

namespace fs = std::filesystem;

namespace {

void write_text_atomic(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw InputError("cannot write '" + tmp.string() + "'");
        out << content;
    }
    fs::rename(tmp, path);
}

struct CommonFlags {
    std::string config_path;
    std::string data_dir;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    int tier = 3;
    int tier_a = 3;
    int tier_b = 1;
    std::string entity_id;
};

RunConfig resolve_config(const CommonFlags& flags, bool seed_is_synth) {
    RunConfig config = flags.config_path.empty() ? RunConfig{} : load_run_config(flags.config_path);
    if (!flags.data_dir.empty()) {
        config.companies_path = (fs::path(flags.data_dir) / "companies.csv").string();
        config.ratings_path = (fs::path(flags.data_dir) / "ratings.csv").string();
        config.edges_path = (fs::path(flags.data_dir) / "edges.csv").string();
        config.breaches_path = (fs::path(flags.data_dir) / "breaches.csv").string();
    }
    if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
    if (flags.seed) {
        if (seed_is_synth) config.synth.seed = *flags.seed;
        else config.base_seed = *flags.seed;
    }
    if (flags.trials) config.n_trials = *flags.trials;
    return config;
}

GlobalGraph load_inputs(const RunConfig& config) {
    return load_graph_files(config.companies_path, config.ratings_path, config.edges_path,
                            config.breaches_path);
}

std::string hyperparams_text(const gbm::Hyperparams& hp) {
    std::ostringstream os;
    os << "learning_rate " << format_double(hp.learning_rate) << "\n";
    os << "n_estimators " << hp.n_estimators << "\n";
    os << "max_depth " << hp.max_depth << "\n";
    os << "l1_reg " << format_double(hp.l1_reg) << "\n";
    os << "min_samples_leaf " << hp.min_samples_leaf << "\n";
    return os.str();
}

gbm::Hyperparams parse_hyperparams(std::istream& in, const std::string& source) {
    gbm::Hyperparams hp;
    std::string key;
    std::string value;
    int seen = 0;
    while (in >> key >> value) {
        if (key == "learning_rate") hp.learning_rate = std::stod(value);
        else if (key == "n_estimators") hp.n_estimators = std::stoi(value);
        else if (key == "max_depth") hp.max_depth = std::stoi(value);
        else if (key == "l1_reg") hp.l1_reg = std::stod(value);
        else if (key == "min_samples_leaf") hp.min_samples_leaf = std::stoi(value);
        else throw ValidationError(source + ": unknown hyperparameter '" + key + "'");
        ++seen;
    }
    require(seen == 5, source + ": incomplete hyperparameter file");
    hp.validate();
    return hp;
}

// Tuned hyperparameters are an artifact shared across subcommands: eval
// writes one file per tier; train/explain/rankdiff reuse it and only fall
// back to tuning when the file is absent.
gbm::Hyperparams obtain_tuned(const RunConfig& config, const eval::TrialData& trial, int tier,
                              const features::FeatureCatalog& catalog) {
    const fs::path path = fs::path(config.out_dir) / ("hyperparams_tier" + std::to_string(tier) + ".txt");
    if (fs::exists(path)) {
        std::ifstream in(path);
        return parse_hyperparams(in, path.string());
    }
    const auto grid = config.grid();
    const auto sliced = trial.matrix.tier_slice(tier, catalog);
    std::vector<double> Xtr;
    std::vector<int> ytr;
    std::vector<std::string> strata;
    for (int r : trial.plan.train) {
        const auto ur = static_cast<std::size_t>(r);
        for (std::size_t c = 0; c < sliced.cols(); ++c) Xtr.push_back(sliced.at(ur, c));
        ytr.push_back(trial.labels[ur]);
        strata.push_back(trial.strata[ur]);
    }
    gbm::Hyperparams chosen = grid.front();
    if (grid.size() > 1) {
        const auto result =
            eval::kfold_tune(Xtr, trial.plan.train.size(), sliced.names, ytr, strata,
                             config.cv_folds, grid,
                             derive_seed(derive_seed(config.base_seed, 0), 0xCCu));
        chosen = grid[result.best_index];
    }
    write_text_atomic(path, hyperparams_text(chosen));
    return chosen;
}

struct FittedTier {
    gbm::GbmModel model;
    features::FeatureMatrix sliced;  // all rows, tier columns
};

FittedTier fit_tier(const RunConfig& config, const eval::TrialData& trial, int tier,
                    const features::FeatureCatalog& catalog) {
    FittedTier out;
    out.sliced = trial.matrix.tier_slice(tier, catalog);
    const gbm::Hyperparams hp = obtain_tuned(config, trial, tier, catalog);
    std::vector<double> Xtr;
    std::vector<int> ytr;
    for (int r : trial.plan.train) {
        const auto ur = static_cast<std::size_t>(r);
        for (std::size_t c = 0; c < out.sliced.cols(); ++c) Xtr.push_back(out.sliced.at(ur, c));
        ytr.push_back(trial.labels[ur]);
    }
    const std::uint64_t trial_seed = derive_seed(config.base_seed, 0);
    out.model = gbm::fit(Xtr, trial.plan.train.size(), out.sliced.names, ytr, hp,
                         derive_seed(trial_seed, static_cast<std::uint64_t>(tier)));
    return out;
}

int cmd_synth(const CommonFlags& flags) {
    RunConfig config = resolve_config(flags, /*seed_is_synth=*/true);
    const std::string target = !flags.out_dir.empty()
                                   ? flags.out_dir
                                   : fs::path(config.companies_path).parent_path().string();
    const auto dataset = synth::generate(config.synth);
    write_dataset(dataset, target.empty() ? "." : target);

    // Round-trip through the loader: generated data must validate cleanly.
    const std::string dir = target.empty() ? "." : target;
    const auto graph = load_graph_files(dir + "/companies.csv", dir + "/ratings.csv",
                                        dir + "/edges.csv", dir + "/breaches.csv");
    const auto stats = synth::statistics_report(graph);
    const std::string text = stats.to_text();
    std::cout << text;
    write_text_atomic(fs::path(dir) / "synth_stats.txt", text);
    return 0;
}

int cmd_features(const CommonFlags& flags) {
    RunConfig config = resolve_config(flags, false);
    const auto graph = load_inputs(config);
    const auto catalog = config.catalog();
    // The exported artifact uses the full population for the product risk
    // table and imputation; the evaluation protocol recomputes both per split.
    std::vector<int> all_entities = graph.entities;
    const auto table = features::build_product_risk_table(graph, catalog, all_entities);
    auto matrix = features::build_matrix(graph, catalog, table);
    std::vector<int> all_rows(matrix.rows());
    for (std::size_t i = 0; i < matrix.rows(); ++i) all_rows[i] = static_cast<int>(i);
    features::apply_impute(matrix, features::compute_impute(matrix, all_rows));

    for (int tier : config.tiers) {
        const auto sliced = matrix.tier_slice(tier, catalog);
        std::ostringstream os;
        std::vector<std::string> header{"entity_id", "label"};
        header.insert(header.end(), sliced.names.begin(), sliced.names.end());
        CsvWriter writer(os, header);
        for (std::size_t r = 0; r < sliced.rows(); ++r) {
            std::vector<std::string> row{sliced.entity_ids[r], std::to_string(sliced.labels[r])};
            for (std::size_t c = 0; c < sliced.cols(); ++c) {
                row.push_back(format_double(sliced.at(r, c)));
            }
            writer.row(row);
        }
        const fs::path path =
            fs::path(config.out_dir) / ("features_tier" + std::to_string(tier) + ".csv");
        write_text_atomic(path, os.str());
        std::cout << "wrote " << path.string() << "\n";
    }
    return 0;
}

int cmd_train(const CommonFlags& flags) {
    RunConfig config = resolve_config(flags, false);
    const auto graph = load_inputs(config);
    const auto catalog = config.catalog();
    const auto trial = eval::prepare_trial(graph, catalog, config.train_fraction,
                                           config.base_seed, 0);
    const auto fitted = fit_tier(config, trial, flags.tier, catalog);
    const fs::path path =
        fs::path(config.out_dir) / ("model_tier" + std::to_string(flags.tier) + ".txt");
    write_text_atomic(path, gbm::to_string(fitted.model));
    std::cout << "wrote " << path.string() << "\n";
    return 0;
}

int cmd_eval(const CommonFlags& flags) {
    RunConfig config = resolve_config(flags, false);
    const auto graph = load_inputs(config);
    const auto catalog = config.catalog();
    const auto report = eval::repeated_trials(graph, catalog, config.trial_options());

    write_text_atomic(fs::path(config.out_dir) / "report.json", eval::report_to_json(report));
    std::vector<svg::Series> curves;
    for (const auto& tier : report.tiers) {
        std::ostringstream os;
        CsvWriter writer(os, {"top_fraction", "recall"});
        for (const auto& [frac, recall] : tier.detection) {
            writer.row({format_double(frac), format_double(recall)});
        }
        const fs::path path = fs::path(config.out_dir) /
                              ("detection_tier" + std::to_string(tier.tier) + ".csv");
        write_text_atomic(path, os.str());
        curves.push_back({"model " + std::to_string(tier.tier), tier.detection});

        write_text_atomic(fs::path(config.out_dir) /
                              ("hyperparams_tier" + std::to_string(tier.tier) + ".txt"),
                          hyperparams_text(tier.chosen));
        std::cout << "tier " << tier.tier << ": mean AUC " << format_double(tier.mean_auc)
                  << "  95% CI [" << format_double(tier.ci_low) << ", "
                  << format_double(tier.ci_high) << "]\n";
    }
    curves.push_back({"random", {{0.0, 0.0}, {1.0, 1.0}}});
    write_text_atomic(fs::path(config.out_dir) / "detection.svg",
                      svg::line_chart("Out-of-sample detection rate", "top fraction of entities",
                                      "recall", curves));
    std::cout << "wrote " << (fs::path(config.out_dir) / "report.json").string() << "\n";
    return 0;
}

int cmd_explain(const CommonFlags& flags) {
    RunConfig config = resolve_config(flags, false);
    const auto graph = load_inputs(config);
    const auto catalog = config.catalog();
    const auto trial = eval::prepare_trial(graph, catalog, config.train_fraction,
                                           config.base_seed, 0);
    const auto fitted = fit_tier(config, trial, flags.tier, catalog);

    const auto importance = shap::global_importance(fitted.model, fitted.sliced.values,
                                                    fitted.sliced.rows());
    std::ostringstream os;
    CsvWriter writer(os, {"rank", "feature", "mean_abs_phi"});
    for (std::size_t i = 0; i < importance.size(); ++i) {
        writer.row({std::to_string(i + 1), importance[i].feature,
                    format_double(importance[i].mean_abs_phi)});
    }
    const fs::path path = fs::path(config.out_dir) /
                          ("importance_tier" + std::to_string(flags.tier) + ".csv");
    write_text_atomic(path, os.str());

    std::vector<std::pair<std::string, double>> bars;
    for (std::size_t i = 0; i < importance.size() && i < static_cast<std::size_t>(config.explain_top_k); ++i) {
        bars.emplace_back(importance[i].feature, importance[i].mean_abs_phi);
    }
    write_text_atomic(fs::path(config.out_dir) /
                          ("importance_tier" + std::to_string(flags.tier) + ".svg"),
                      svg::bar_chart("Mean |phi| (top features)", bars));
    std::cout << "wrote " << path.string() << "\n";

    if (!flags.entity_id.empty()) {
        const auto& ids = fitted.sliced.entity_ids;
        const auto it = std::find(ids.begin(), ids.end(), flags.entity_id);
        require(it != ids.end(), "unknown entity id '" + flags.entity_id + "'");
        const auto row = static_cast<std::size_t>(it - ids.begin());
        std::vector<double> x(fitted.sliced.cols());
        for (std::size_t c = 0; c < x.size(); ++c) x[c] = fitted.sliced.at(row, c);
        const auto attribution = shap::tree_shap(fitted.model, x);
        std::ostringstream as;
        CsvWriter awriter(as, {"feature", "value", "phi"});
        awriter.row({"__base__", "", format_double(attribution.base_value)});
        for (std::size_t c = 0; c < x.size(); ++c) {
            awriter.row({fitted.sliced.names[c], format_double(x[c]),
                         format_double(attribution.phi[c])});
        }
        const fs::path apath = fs::path(config.out_dir) /
                               ("attribution_" + flags.entity_id + "_tier" +
                                std::to_string(flags.tier) + ".csv");
        write_text_atomic(apath, as.str());
        std::cout << "wrote " << apath.string() << "\n";
    }
    return 0;
}

int cmd_rankdiff(const CommonFlags& flags) {
    RunConfig config = resolve_config(flags, false);
    const auto graph = load_inputs(config);
    const auto catalog = config.catalog();
    const auto trial = eval::prepare_trial(graph, catalog, config.train_fraction,
                                           config.base_seed, 0);
    const auto fitted_a = fit_tier(config, trial, flags.tier_a, catalog);
    const auto fitted_b = fit_tier(config, trial, flags.tier_b, catalog);

    const auto& test = trial.plan.test;
    std::vector<double> margins_a, margins_b;
    std::vector<int> test_labels;
    for (int r : test) {
        const auto ur = static_cast<std::size_t>(r);
        std::vector<double> xa(fitted_a.sliced.cols()), xb(fitted_b.sliced.cols());
        for (std::size_t c = 0; c < xa.size(); ++c) xa[c] = fitted_a.sliced.at(ur, c);
        for (std::size_t c = 0; c < xb.size(); ++c) xb[c] = fitted_b.sliced.at(ur, c);
        margins_a.push_back(gbm::predict_margin(fitted_a.model, xa));
        margins_b.push_back(gbm::predict_margin(fitted_b.model, xb));
        test_labels.push_back(trial.labels[ur]);
    }
    const auto series = eval::rank_difference_accumulation(margins_a, margins_b, test_labels);

    const std::string pair_tag =
        std::to_string(flags.tier_a) + "_vs_" + std::to_string(flags.tier_b);
    {
        std::ostringstream os;
        CsvWriter writer(os, {"position", "entity_id", "rank_diff", "observed_cum", "expected_cum"});
        for (std::size_t i = 0; i < series.order.size(); ++i) {
            const int row = test[static_cast<std::size_t>(series.order[i])];
            writer.row({std::to_string(i + 1),
                        trial.matrix.entity_ids[static_cast<std::size_t>(row)],
                        format_double(series.diffs[i]), format_double(series.observed[i]),
                        format_double(series.expected[i])});
        }
        write_text_atomic(fs::path(config.out_dir) / ("rankdiff_" + pair_tag + ".csv"), os.str());
    }

    std::vector<std::string> selected = config.rankdiff_features;
    if (selected.empty()) {
        const std::vector<std::string> wanted = {
            "employee_count", "fourth_breach_count", "product_edge_aggregate",
            "third_count_HealthcareAndWellness", "fourth_count_Manufacturing"};
        for (const auto& name : wanted) {
            if (std::find(trial.matrix.names.begin(), trial.matrix.names.end(), name) !=
                trial.matrix.names.end()) {
                selected.push_back(name);
            }
        }
        require(!selected.empty(), "rankdiff: no report features available for this catalog");
    }
    const auto top_k = std::min<std::size_t>(static_cast<std::size_t>(config.rankdiff_top_k),
                                             series.order.size());
    for (bool positive : {true, false}) {
        const auto report = eval::percentile_report(series, trial.matrix, test, selected, top_k,
                                                    positive);
        std::ostringstream os;
        std::vector<std::string> header{"entity", "rank_diff"};
        for (const auto& name : report.feature_names) {
            header.push_back(name);
            header.push_back(name + "_percentile");
        }
        CsvWriter writer(os, header);
        std::vector<std::string> mean_row{"population_mean", ""};
        for (double m : report.population_means) {
            mean_row.push_back(format_double(m));
            mean_row.push_back("");
        }
        writer.row(mean_row);
        for (const auto& row : report.rows) {
            std::vector<std::string> out{row.entity_id, format_double(row.diff)};
            for (std::size_t c = 0; c < row.values.size(); ++c) {
                out.push_back(format_double(row.values[c]));
                out.push_back(format_double(row.percentiles[c]));
            }
            writer.row(out);
        }
        const std::string name = std::string("rankdiff_") + pair_tag +
                                 (positive ? "_top_positive.csv" : "_top_negative.csv");
        write_text_atomic(fs::path(config.out_dir) / name, os.str());
    }

    std::ostringstream summary;
    try {
        const auto t = eval::positive_segment_t_test(series);
        summary << "positive-diff segment paired t-test: t=" << format_double(t.t)
                << " p=" << format_double(t.p) << " df=" << t.df << "\n";
    } catch (const ValidationError& e) {
        summary << "positive-diff segment paired t-test unavailable: " << e.what() << "\n";
    }
    write_text_atomic(fs::path(config.out_dir) / ("rankdiff_" + pair_tag + "_summary.txt"),
                      summary.str());
    std::cout << summary.str();

    std::vector<std::pair<double, double>> observed_points, expected_points;
    for (std::size_t i = 0; i < series.observed.size(); ++i) {
        observed_points.emplace_back(static_cast<double>(i + 1), series.observed[i]);
        expected_points.emplace_back(static_cast<double>(i + 1), series.expected[i]);
    }
    write_text_atomic(
        fs::path(config.out_dir) / ("rankdiff_" + pair_tag + ".svg"),
        svg::line_chart("Breach accumulation by rank difference (" + pair_tag + ")",
                        "entities ordered by rank difference", "cumulative breached entities",
                        {{"observed", observed_points}, {"expected (random)", expected_points}}));
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"supply-chain cyber-risk modeling pipeline"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string command;

    auto add_common = [&](CLI::App* sub, bool with_tier) {
        sub->add_option("--config", flags.config_path, "key=value config file");
        sub->add_option("--data", flags.data_dir, "directory holding the four input CSVs");
        sub->add_option("--out", flags.out_dir, "output directory");
        sub->add_option("--seed", flags.seed, "seed override");
        sub->add_option("--trials", flags.trials, "number of repeated trials");
        if (with_tier) sub->add_option("--tier", flags.tier, "model tier (1, 2 or 3)");
        sub->callback([&, sub] { command = sub->get_name(); });
    };

    add_common(app.add_subcommand("synth", "generate a synthetic dataset"), false);
    add_common(app.add_subcommand("features", "compute per-tier feature tables"), false);
    add_common(app.add_subcommand("train", "fit and serialize one model tier"), true);
    add_common(app.add_subcommand("eval", "repeated-trial evaluation report"), false);
    auto* explain = app.add_subcommand("explain", "global importance and attributions");
    add_common(explain, true);
    explain->add_option("--entity", flags.entity_id, "emit one entity's attribution");
    auto* rankdiff = app.add_subcommand("rankdiff", "inter-model rank difference analysis");
    add_common(rankdiff, false);
    rankdiff->add_option("--tier-a", flags.tier_a, "first model tier");
    rankdiff->add_option("--tier-b", flags.tier_b, "second model tier");

    std::vector<const char*> argv;
    argv.push_back("scrisk");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (command == "synth") return cmd_synth(flags);
        if (command == "features") return cmd_features(flags);
        if (command == "train") return cmd_train(flags);
        if (command == "eval") return cmd_eval(flags);
        if (command == "explain") return cmd_explain(flags);
        if (command == "rankdiff") return cmd_rankdiff(flags);
        std::cerr << "error: no subcommand\n";
        return 1;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
}

}  // namespace cli
}  // namespace scrisk
