#pragma once

#include <string>
#include <vector>

#include "scrisk/eval.hpp"
#include "scrisk/synth.hpp"

namespace scrisk {

// One experiment run: input paths, output directory, catalog and generator
// settings, the hyperparameter grid, and protocol knobs. Populated from a
// flat key=value config file ('#' comments); unknown keys are rejected.
struct RunConfig {
    std::string companies_path = "data/companies.csv";
    std::string ratings_path = "data/ratings.csv";
    std::string edges_path = "data/edges.csv";
    std::string breaches_path = "data/breaches.csv";
    std::string out_dir = "out";

    synth::SynthConfig synth;

    // Catalog defaults mirror the generator settings; explicit catalog.* keys
    // override them.
    bool catalog_overridden = false;
    features::FeatureCatalog catalog_override;

    std::vector<double> lr_grid = {0.05, 0.1, 0.3};
    std::vector<int> trees_grid = {100, 300};
    std::vector<int> depth_grid = {3, 5};
    std::vector<double> l1_grid = {0.0, 1.0, 10.0};
    int min_samples_leaf = 20;

    std::vector<int> tiers = {1, 2, 3};
    int n_trials = 20;
    std::uint64_t base_seed = 42;
    double train_fraction = 0.7;
    bool tune_per_trial = false;
    int cv_folds = 5;

    int explain_top_k = 20;
    int rankdiff_top_k = 10;
    std::vector<std::string> rankdiff_features;  // empty: built-in default selection

    features::FeatureCatalog catalog() const;
    std::vector<gbm::Hyperparams> grid() const;  // lr x trees x depth x l1, in that nesting order
    eval::TrialOptions trial_options() const;
};

RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(std::istream& in, const std::string& source_name);

}  // namespace scrisk
