#include "scrisk/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <json.hpp>

#include "scrisk/error.hpp"
#include "scrisk/rng.hpp"

namespace scrisk {
namespace eval {

double auc(std::span<const double> scores, std::span<const int> labels) {
    require(scores.size() == labels.size(), "auc: size mismatch");
    require(!scores.empty(), "auc: empty input");
    std::size_t n_pos = 0;
    for (int y : labels) {
        require(y == 0 || y == 1, "auc: labels must be 0/1");
        n_pos += static_cast<std::size_t>(y);
    }
    const std::size_t n = scores.size();
    require(n_pos > 0 && n_pos < n, "auc: both classes must be present");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Walk tie buckets in ascending score order: every positive in a bucket
    // beats all negatives below and half of the negatives tied with it.
    double won = 0.0;
    double neg_below = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        double bucket_pos = 0.0, bucket_neg = 0.0;
        while (j < n && scores[order[j]] == scores[order[i]]) {
            if (labels[order[j]] == 1) bucket_pos += 1.0;
            else bucket_neg += 1.0;
            ++j;
        }
        won += bucket_pos * (neg_below + 0.5 * bucket_neg);
        neg_below += bucket_neg;
        i = j;
    }
    return won / (static_cast<double>(n_pos) * static_cast<double>(n - n_pos));
}

namespace {

// Stratum key -> member ids, ids sorted so the grouping is independent of
// input order.
std::map<std::string, std::vector<int>> group_by_stratum(const std::vector<int>& ids,
                                                         const std::vector<std::string>& strata) {
    require(ids.size() == strata.size(), "strata must align with ids");
    std::map<std::string, std::vector<int>> groups;
    for (std::size_t i = 0; i < ids.size(); ++i) groups[strata[i]].push_back(ids[i]);
    for (auto& [key, members] : groups) std::sort(members.begin(), members.end());
    return groups;
}

}  // namespace

SplitPlan stratified_split(const std::vector<int>& ids, const std::vector<std::string>& strata,
                           double frac, std::uint64_t seed) {
    require(frac > 0.0 && frac < 1.0, "stratified_split: frac must be in (0,1)");
    auto groups = group_by_stratum(ids, strata);
    SplitPlan plan;
    plan.seed = seed;
    Rng rng(derive_seed(seed, 0x511u));
    for (auto& [key, members] : groups) {
        rng.shuffle(members);
        const auto n = static_cast<double>(members.size());
        const auto n_train = static_cast<std::size_t>(std::llround(frac * n));
        for (std::size_t i = 0; i < members.size(); ++i) {
            (i < n_train ? plan.train : plan.test).push_back(members[i]);
        }
    }
    std::sort(plan.train.begin(), plan.train.end());
    std::sort(plan.test.begin(), plan.test.end());
    return plan;
}

std::vector<int> stratified_fold_assignment(const std::vector<int>& ids,
                                            const std::vector<std::string>& strata, int k,
                                            std::uint64_t seed) {
    require(k >= 2, "fold assignment: k must be >= 2");
    auto groups = group_by_stratum(ids, strata);
    std::map<int, int> fold_of;
    Rng rng(derive_seed(seed, 0xf01d5u));
    for (auto& [key, members] : groups) {
        rng.shuffle(members);
        for (std::size_t i = 0; i < members.size(); ++i) {
            fold_of[members[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
        }
    }
    std::vector<int> out(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) out[i] = fold_of[ids[i]];
    return out;
}

namespace {

bool folds_are_two_class(const std::vector<int>& folds, std::span<const int> y, int k) {
    for (int f = 0; f < k; ++f) {
        int val_pos = 0, val_neg = 0, train_pos = 0, train_neg = 0;
        for (std::size_t i = 0; i < folds.size(); ++i) {
            if (folds[i] == f) {
                (y[i] == 1 ? val_pos : val_neg) += 1;
            } else {
                (y[i] == 1 ? train_pos : train_neg) += 1;
            }
        }
        if (val_pos == 0 || val_neg == 0 || train_pos == 0 || train_neg == 0) return false;
    }
    return true;
}

// Row-subset gather into a dense matrix.
std::vector<double> gather_rows(std::span<const double> X, std::size_t n_cols,
                                const std::vector<int>& rows) {
    std::vector<double> out(rows.size() * n_cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t r = static_cast<std::size_t>(rows[i]);
        std::copy_n(X.begin() + static_cast<long>(r * n_cols), n_cols,
                    out.begin() + static_cast<long>(i * n_cols));
    }
    return out;
}

std::vector<int> gather_labels(std::span<const int> y, const std::vector<int>& rows) {
    std::vector<int> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = y[static_cast<std::size_t>(rows[i])];
    return out;
}

}  // namespace

TuneResult kfold_tune(std::span<const double> X, std::size_t n_rows,
                      const std::vector<std::string>& feature_names, std::span<const int> y,
                      const std::vector<std::string>& strata, int k,
                      const std::vector<gbm::Hyperparams>& grid, std::uint64_t seed, Exec exec) {
    require(k >= 2, "kfold_tune: k must be >= 2");
    require(!grid.empty(), "kfold_tune: empty grid");
    require(y.size() == n_rows && strata.size() == n_rows, "kfold_tune: size mismatch");

    std::vector<int> ids(n_rows);
    std::iota(ids.begin(), ids.end(), 0);
    std::vector<int> folds = stratified_fold_assignment(ids, strata, k, seed);
    if (!folds_are_two_class(folds, y, k)) {
        folds = stratified_fold_assignment(ids, strata, k, derive_seed(seed, 0x4e5au));
        require(folds_are_two_class(folds, y, k),
                "kfold_tune: a fold is single-class even after reshuffling");
    }

    TuneResult result;
    result.mean_val_auc.assign(grid.size(), 0.0);
    if (grid.size() == 1) return result;  // nothing to search

    const std::size_t n_cols = feature_names.size();
    // Per-fold row partitions, shared across the grid.
    std::vector<std::vector<int>> fold_train(static_cast<std::size_t>(k));
    std::vector<std::vector<int>> fold_val(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < n_rows; ++i) {
        for (int f = 0; f < k; ++f) {
            (folds[i] == f ? fold_val : fold_train)[static_cast<std::size_t>(f)].push_back(
                static_cast<int>(i));
        }
    }

    for (std::size_t gpoint = 0; gpoint < grid.size(); ++gpoint) {
        double sum = 0.0;
        for (int f = 0; f < k; ++f) {
            const auto& tr = fold_train[static_cast<std::size_t>(f)];
            const auto& va = fold_val[static_cast<std::size_t>(f)];
            const auto Xtr = gather_rows(X, n_cols, tr);
            const auto ytr = gather_labels(y, tr);
            const auto Xva = gather_rows(X, n_cols, va);
            const auto yva = gather_labels(y, va);
            const auto model = gbm::fit(Xtr, tr.size(), feature_names, ytr, grid[gpoint],
                                        derive_seed(seed, static_cast<std::uint64_t>(f)), exec);
            const auto margins = gbm::predict_margins(model, Xva, va.size(), exec);
            sum += auc(margins, yva);
        }
        result.mean_val_auc[gpoint] = sum / static_cast<double>(k);
        if (result.mean_val_auc[gpoint] > result.mean_val_auc[result.best_index]) {
            result.best_index = gpoint;
        }
    }
    return result;
}

std::vector<std::pair<double, double>> detection_curve(std::span<const double> scores,
                                                       std::span<const int> labels) {
    require(scores.size() == labels.size() && !scores.empty(), "detection_curve: size mismatch");
    const std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (int y : labels) n_pos += static_cast<std::size_t>(y);
    require(n_pos > 0 && n_pos < n, "detection_curve: both classes must be present");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    std::vector<std::pair<double, double>> curve;
    curve.reserve(n);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        hits += static_cast<std::size_t>(labels[order[i]]);
        curve.emplace_back(static_cast<double>(i + 1) / static_cast<double>(n),
                           static_cast<double>(hits) / static_cast<double>(n_pos));
    }
    return curve;
}

RankDiffSeries rank_difference_accumulation(std::span<const double> scores_a,
                                            std::span<const double> scores_b,
                                            std::span<const int> labels) {
    require(scores_a.size() == scores_b.size() && scores_a.size() == labels.size(),
            "rank_difference_accumulation: length mismatch");
    require(!scores_a.empty(), "rank_difference_accumulation: empty input");
    const std::size_t n = scores_a.size();

    auto ranks_of = [n](std::span<const double> scores) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0u);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (scores[a] != scores[b]) return scores[a] > scores[b];
            return a < b;
        });
        std::vector<double> rank(n);
        for (std::size_t i = 0; i < n; ++i) rank[order[i]] = static_cast<double>(i + 1);
        return rank;
    };
    const auto rank_a = ranks_of(scores_a);
    const auto rank_b = ranks_of(scores_b);

    RankDiffSeries s;
    s.order.resize(n);
    std::iota(s.order.begin(), s.order.end(), 0);
    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = rank_b[i] - rank_a[i];
    std::sort(s.order.begin(), s.order.end(), [&](int a, int b) {
        const auto da = diff[static_cast<std::size_t>(a)];
        const auto db = diff[static_cast<std::size_t>(b)];
        if (da != db) return da > db;
        return a < b;
    });

    double n_pos = 0.0;
    for (int y : labels) n_pos += static_cast<double>(y);
    double cum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const int pos = s.order[i];
        s.diffs.push_back(diff[static_cast<std::size_t>(pos)]);
        cum += static_cast<double>(labels[static_cast<std::size_t>(pos)]);
        s.observed.push_back(cum);
        s.expected.push_back(static_cast<double>(i + 1) * n_pos / static_cast<double>(n));
    }
    return s;
}

TTestResult positive_segment_t_test(const RankDiffSeries& series) {
    std::size_t len = 0;
    while (len < series.diffs.size() && series.diffs[len] > 0.0) ++len;
    require(len >= 2, "positive segment has fewer than 2 entries");
    return paired_t_test(std::span<const double>(series.observed.data(), len),
                         std::span<const double>(series.expected.data(), len));
}

PercentileReport percentile_report(const RankDiffSeries& series,
                                   const features::FeatureMatrix& population,
                                   const std::vector<int>& score_rows,
                                   const std::vector<std::string>& select_features,
                                   std::size_t top_k, bool positive_direction) {
    require(score_rows.size() == series.order.size(),
            "percentile_report: score rows must align with the series");
    require(top_k <= series.order.size(), "percentile_report: k exceeds the entity count");

    PercentileReport report;
    report.feature_names = select_features;
    std::vector<std::size_t> cols;
    for (const auto& name : select_features) {
        auto it = std::find(population.names.begin(), population.names.end(), name);
        require(it != population.names.end(), "percentile_report: unknown feature '" + name + "'");
        cols.push_back(static_cast<std::size_t>(it - population.names.begin()));
    }
    std::vector<std::vector<double>> columns(cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) {
        columns[c].resize(population.rows());
        for (std::size_t r = 0; r < population.rows(); ++r) {
            columns[c][r] = population.at(r, cols[c]);
        }
        report.population_means.push_back(mean(columns[c]));
    }

    for (std::size_t i = 0; i < top_k; ++i) {
        // order is diff-descending; the negative direction walks from the tail.
        const std::size_t pos = positive_direction ? i : series.order.size() - 1 - i;
        const int series_pos = series.order[pos];
        const int row = score_rows[static_cast<std::size_t>(series_pos)];
        PercentileReport::Row out;
        out.entity_id = population.entity_ids[static_cast<std::size_t>(row)];
        out.diff = series.diffs[pos];
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const double v = population.at(static_cast<std::size_t>(row), cols[c]);
            out.values.push_back(v);
            out.percentiles.push_back(percentile_of(v, columns[c]));
        }
        report.rows.push_back(std::move(out));
    }
    return report;
}

namespace {

std::vector<gbm::Hyperparams> default_grid_or(const std::vector<gbm::Hyperparams>& grid) {
    if (!grid.empty()) return grid;
    return {gbm::Hyperparams{}};
}

}  // namespace

TrialData prepare_trial(const GlobalGraph& graph, const features::FeatureCatalog& catalog,
                        double train_fraction, std::uint64_t base_seed, int trial, Exec exec) {
    const std::size_t n = graph.entities.size();
    TrialData data;
    data.labels.resize(n);
    data.strata.resize(n);
    std::vector<int> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        const int ent = graph.entities[i];
        data.labels[i] = features::label_of(graph, ent, catalog);
        data.strata[i] = graph.company(ent).sector + "|" + std::to_string(data.labels[i]);
    }
    const std::uint64_t trial_seed = derive_seed(base_seed, static_cast<std::uint64_t>(trial));
    data.plan = stratified_split(rows, data.strata, train_fraction, trial_seed);

    // Training-split-only derived state: product risk table and imputation.
    std::vector<int> train_entities;
    for (int r : data.plan.train) {
        train_entities.push_back(graph.entities[static_cast<std::size_t>(r)]);
    }
    const auto table = features::build_product_risk_table(graph, catalog, train_entities);
    data.matrix = features::build_matrix(graph, catalog, table, exec);
    const auto impute = features::compute_impute(data.matrix, data.plan.train);
    features::apply_impute(data.matrix, impute);
    return data;
}

EvaluationReport repeated_trials(const GlobalGraph& graph,
                                 const features::FeatureCatalog& catalog,
                                 const TrialOptions& options) {
    require(options.n_trials >= 2, "repeated_trials: need at least 2 trials");
    require(!options.tiers.empty(), "repeated_trials: no tiers requested");
    const auto grid = default_grid_or(options.grid);

    const std::size_t n = graph.entities.size();
    require(n >= 10, "repeated_trials: too few entities");

    EvaluationReport report;
    report.n_trials = options.n_trials;
    report.base_seed = options.base_seed;
    for (int tier : options.tiers) {
        TierResult tr;
        tr.tier = tier;
        report.tiers.push_back(tr);
    }

    std::map<int, gbm::Hyperparams> tuned;
    std::map<int, std::vector<double>> first_margins;  // tier -> first trial test margins
    std::vector<int> first_test_labels;

    for (int trial = 0; trial < options.n_trials; ++trial) {
        const std::uint64_t trial_seed =
            derive_seed(options.base_seed, static_cast<std::uint64_t>(trial));
        TrialData data = prepare_trial(graph, catalog, options.train_fraction, options.base_seed,
                                       trial, options.exec);
        const SplitPlan& plan = data.plan;
        const auto& matrix = data.matrix;
        const auto& labels = data.labels;

        if (trial == 0) {
            report.first_trial_test_rows = plan.test;
            first_test_labels = gather_labels(labels, plan.test);
        }

        for (auto& tier_result : report.tiers) {
            const auto sliced = matrix.tier_slice(tier_result.tier, catalog);
            const std::size_t n_cols = sliced.cols();
            const auto Xtr = gather_rows(sliced.values, n_cols, plan.train);
            const auto ytr = gather_labels(labels, plan.train);

            if (options.tune_per_trial || tuned.find(tier_result.tier) == tuned.end()) {
                std::vector<std::string> train_strata;
                for (int r : plan.train) {
                    train_strata.push_back(data.strata[static_cast<std::size_t>(r)]);
                }
                const auto tune = kfold_tune(Xtr, plan.train.size(), sliced.names, ytr,
                                             train_strata, options.cv_folds, grid,
                                             derive_seed(trial_seed, 0xCCu), options.exec);
                tuned[tier_result.tier] = grid[tune.best_index];
            }
            tier_result.chosen = tuned[tier_result.tier];

            const auto model =
                gbm::fit(Xtr, plan.train.size(), sliced.names, ytr, tier_result.chosen,
                         derive_seed(trial_seed, static_cast<std::uint64_t>(tier_result.tier)),
                         options.exec);
            const auto Xte = gather_rows(sliced.values, n_cols, plan.test);
            const auto yte = gather_labels(labels, plan.test);
            const auto margins = gbm::predict_margins(model, Xte, plan.test.size(), options.exec);
            tier_result.trial_aucs.push_back(auc(margins, yte));

            if (trial == 0) {
                tier_result.detection = detection_curve(margins, yte);
                first_margins[tier_result.tier] = margins;
            }
        }
    }

    for (auto& tier_result : report.tiers) {
        tier_result.mean_auc = mean(tier_result.trial_aucs);
        const double sd = sample_sd(tier_result.trial_aucs);
        const double half =
            1.96 * sd / std::sqrt(static_cast<double>(tier_result.trial_aucs.size()));
        tier_result.ci_low = tier_result.mean_auc - half;
        tier_result.ci_high = tier_result.mean_auc + half;
    }

    const auto have_tier = [&](int tier) { return first_margins.count(tier) > 0; };
    for (int other : {1, 2}) {
        if (!have_tier(3) || !have_tier(other)) continue;
        RankDiffReport rd;
        rd.tier_a = 3;
        rd.tier_b = other;
        rd.series = rank_difference_accumulation(first_margins[3], first_margins[other],
                                                 first_test_labels);
        try {
            rd.positive_test = positive_segment_t_test(rd.series);
            rd.test_valid = true;
        } catch (const ValidationError&) {
            rd.test_valid = false;
        }
        report.rank_diffs.push_back(std::move(rd));
    }
    return report;
}

std::string report_to_json(const EvaluationReport& report) {
    nlohmann::json j;
    j["n_trials"] = report.n_trials;
    j["base_seed"] = report.base_seed;
    for (const auto& tier : report.tiers) {
        nlohmann::json t;
        t["tier"] = tier.tier;
        t["trial_aucs"] = tier.trial_aucs;
        t["mean_auc"] = tier.mean_auc;
        t["ci_low"] = tier.ci_low;
        t["ci_high"] = tier.ci_high;
        t["hyperparams"] = {{"learning_rate", tier.chosen.learning_rate},
                            {"n_estimators", tier.chosen.n_estimators},
                            {"max_depth", tier.chosen.max_depth},
                            {"l1_reg", tier.chosen.l1_reg},
                            {"min_samples_leaf", tier.chosen.min_samples_leaf}};
        nlohmann::json curve = nlohmann::json::array();
        for (const auto& [frac, recall] : tier.detection) {
            curve.push_back({frac, recall});
        }
        t["detection_curve"] = std::move(curve);
        j["tiers"].push_back(std::move(t));
    }
    for (const auto& rd : report.rank_diffs) {
        nlohmann::json r;
        r["tier_a"] = rd.tier_a;
        r["tier_b"] = rd.tier_b;
        r["diffs"] = rd.series.diffs;
        r["observed"] = rd.series.observed;
        r["expected"] = rd.series.expected;
        if (rd.test_valid) {
            r["positive_segment_t"] = rd.positive_test.t;
            r["positive_segment_p"] = rd.positive_test.p;
            r["positive_segment_df"] = rd.positive_test.df;
        }
        j["rank_differences"].push_back(std::move(r));
    }
    return j.dump(2) + "\n";
}

}  // namespace eval
}  // namespace scrisk
