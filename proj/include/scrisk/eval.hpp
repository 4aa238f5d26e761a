#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scrisk/features.hpp"
#include "scrisk/gbm.hpp"
#include "scrisk/stats.hpp"

namespace scrisk {
namespace eval {

// Mann-Whitney AUC with half credit for score ties, computed by a single
// sort over tie buckets.
double auc(std::span<const double> scores, std::span<const int> labels);

struct SplitPlan {
    std::vector<int> train;  // ids, ascending
    std::vector<int> test;   // ids, ascending
    std::uint64_t seed = 0;
};

// Per-stratum sampling without replacement; each stratum contributes
// round(frac * n) ids to train (within +-1 of frac by construction).
// Deterministic in `seed` and in the multiset of (id, stratum) pairs.
SplitPlan stratified_split(const std::vector<int>& ids, const std::vector<std::string>& strata,
                           double frac, std::uint64_t seed);

// Stratified fold labels in [0, k), aligned with `ids`.
std::vector<int> stratified_fold_assignment(const std::vector<int>& ids,
                                            const std::vector<std::string>& strata, int k,
                                            std::uint64_t seed);

struct TuneResult {
    std::size_t best_index = 0;          // into the grid; ties keep grid order
    std::vector<double> mean_val_auc;    // per grid point
};

// 5-fold (k-fold) grid search maximizing mean validation AUC. When a fold
// ends up single-class the folds are reshuffled once with a derived seed;
// a second failure raises ValidationError.
TuneResult kfold_tune(std::span<const double> X, std::size_t n_rows,
                      const std::vector<std::string>& feature_names, std::span<const int> y,
                      const std::vector<std::string>& strata, int k,
                      const std::vector<gbm::Hyperparams>& grid, std::uint64_t seed,
                      Exec exec = Exec::Parallel);

// Cumulative recall over entities ranked by descending score (ties broken by
// position); one (top_fraction, recall) point per rank.
std::vector<std::pair<double, double>> detection_curve(std::span<const double> scores,
                                                       std::span<const int> labels);

// Entities ordered by rank difference between two models. rank = 1 for the
// highest score (ties by position); diff = rank_b - rank_a, so positive
// means model A deems the entity relatively riskier.
struct RankDiffSeries {
    std::vector<int> order;        // positions sorted by diff descending
    std::vector<double> diffs;     // aligned with order
    std::vector<double> observed;  // cumulative observed breaches
    std::vector<double> expected;  // cumulative expected under random order
};

RankDiffSeries rank_difference_accumulation(std::span<const double> scores_a,
                                            std::span<const double> scores_b,
                                            std::span<const int> labels);

// Paired t-test of observed vs expected accumulation over the positive-diff
// prefix of the series.
TTestResult positive_segment_t_test(const RankDiffSeries& series);

// Feature values and population percentiles for the top-k entities by signed
// rank difference (descending when positive_direction, else ascending).
struct PercentileReport {
    std::vector<std::string> feature_names;
    std::vector<double> population_means;
    struct Row {
        std::string entity_id;
        double diff = 0.0;
        std::vector<double> values;
        std::vector<double> percentiles;
    };
    std::vector<Row> rows;
};

PercentileReport percentile_report(const RankDiffSeries& series,
                                   const features::FeatureMatrix& population,
                                   const std::vector<int>& score_rows,
                                   const std::vector<std::string>& select_features,
                                   std::size_t top_k, bool positive_direction);

struct TrialOptions {
    std::vector<int> tiers{1, 2, 3};
    int n_trials = 20;
    std::uint64_t base_seed = 42;
    double train_fraction = 0.7;
    std::vector<gbm::Hyperparams> grid;
    bool tune_per_trial = false;  // default: tune once on the first trial's training set
    int cv_folds = 5;
    Exec exec = Exec::Parallel;
};

struct TierResult {
    int tier = 1;
    std::vector<double> trial_aucs;
    double mean_auc = 0.0;
    double ci_low = 0.0;   // mean +- 1.96 * sd / sqrt(n_trials)
    double ci_high = 0.0;
    gbm::Hyperparams chosen;
    std::vector<std::pair<double, double>> detection;  // first trial's test set
};

struct RankDiffReport {
    int tier_a = 0;
    int tier_b = 0;
    RankDiffSeries series;
    bool test_valid = false;
    TTestResult positive_test;
};

struct EvaluationReport {
    int n_trials = 0;
    std::uint64_t base_seed = 0;
    std::vector<TierResult> tiers;
    std::vector<RankDiffReport> rank_diffs;  // (3,1) and (3,2) when available
    std::vector<int> first_trial_test_rows;  // matrix rows of the first trial's test set
};

// Reproducible per-trial state: the stratified split and the fully imputed
// tier-3 matrix whose product risk table and impute means come from the
// trial's training rows only.
struct TrialData {
    SplitPlan plan;
    features::FeatureMatrix matrix;
    std::vector<int> labels;
    std::vector<std::string> strata;  // "sector|label" per row
};

TrialData prepare_trial(const GlobalGraph& graph, const features::FeatureCatalog& catalog,
                        double train_fraction, std::uint64_t base_seed, int trial,
                        Exec exec = Exec::Parallel);

// The full protocol: per trial a fresh stratified split, per-split product
// risk table and imputation (training rows only), optional re-tuning, one
// fit per tier, out-of-sample AUC. Detection curves and rank-difference
// series come from the first trial's test set.
EvaluationReport repeated_trials(const GlobalGraph& graph,
                                 const features::FeatureCatalog& catalog,
                                 const TrialOptions& options);

std::string report_to_json(const EvaluationReport& report);

}  // namespace eval
}  // namespace scrisk
