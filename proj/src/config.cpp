#include "scrisk/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "scrisk/error.hpp"

namespace scrisk {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, sep)) parts.push_back(trim(part));
    if (!s.empty() && s.back() == sep) parts.push_back("");
    return parts;
}

double to_real(const std::string& v, const std::string& key) {
    std::size_t pos = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw ValidationError("config: bad number '" + v + "' for key '" + key + "'");
    }
    require(pos == v.size(), "config: bad number '" + v + "' for key '" + key + "'");
    return out;
}

long long to_int(const std::string& v, const std::string& key) {
    std::size_t pos = 0;
    long long out = 0;
    try {
        out = std::stoll(v, &pos);
    } catch (const std::exception&) {
        throw ValidationError("config: bad integer '" + v + "' for key '" + key + "'");
    }
    require(pos == v.size(), "config: bad integer '" + v + "' for key '" + key + "'");
    return out;
}

bool to_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ValidationError("config: bad boolean '" + v + "' for key '" + key + "'");
}

std::vector<std::pair<std::string, double>> to_mix(const std::string& v, const std::string& key) {
    std::vector<std::pair<std::string, double>> mix;
    for (const auto& part : split(v, ',')) {
        const auto pieces = split(part, ':');
        require(pieces.size() == 2 && !pieces[0].empty(),
                "config: bad mix entry '" + part + "' for key '" + key + "'");
        mix.emplace_back(pieces[0], to_real(pieces[1], key));
    }
    require(!mix.empty(), "config: empty mix for key '" + key + "'");
    return mix;
}

}  // namespace

features::FeatureCatalog RunConfig::catalog() const {
    if (catalog_overridden) return catalog_override;
    return synth::catalog_for(synth);
}

std::vector<gbm::Hyperparams> RunConfig::grid() const {
    std::vector<gbm::Hyperparams> grid;
    for (double lr : lr_grid) {
        for (int trees : trees_grid) {
            for (int depth : depth_grid) {
                for (double l1 : l1_grid) {
                    gbm::Hyperparams hp;
                    hp.learning_rate = lr;
                    hp.n_estimators = trees;
                    hp.max_depth = depth;
                    hp.l1_reg = l1;
                    hp.min_samples_leaf = min_samples_leaf;
                    grid.push_back(hp);
                }
            }
        }
    }
    return grid;
}

eval::TrialOptions RunConfig::trial_options() const {
    eval::TrialOptions opt;
    opt.tiers = tiers;
    opt.n_trials = n_trials;
    opt.base_seed = base_seed;
    opt.train_fraction = train_fraction;
    opt.grid = grid();
    opt.tune_per_trial = tune_per_trial;
    opt.cv_folds = cv_folds;
    return opt;
}

RunConfig parse_run_config(std::istream& in, const std::string& source_name) {
    RunConfig config;
    bool catalog_touched = false;
    features::FeatureCatalog catalog = synth::catalog_for(config.synth);

    std::map<std::string, std::function<void(const std::string&, const std::string&)>> handlers;
    auto set_string = [](std::string& field) {
        return [&field](const std::string&, const std::string& v) { field = v; };
    };
    handlers["io.companies"] = set_string(config.companies_path);
    handlers["io.ratings"] = set_string(config.ratings_path);
    handlers["io.edges"] = set_string(config.edges_path);
    handlers["io.breaches"] = set_string(config.breaches_path);
    handlers["io.out_dir"] = set_string(config.out_dir);

    handlers["synth.n_entities"] = [&](const std::string& k, const std::string& v) {
        config.synth.n_entities = static_cast<int>(to_int(v, k));
    };
    handlers["synth.n_third"] = [&](const std::string& k, const std::string& v) {
        config.synth.n_third = static_cast<int>(to_int(v, k));
    };
    handlers["synth.n_fourth"] = [&](const std::string& k, const std::string& v) {
        config.synth.n_fourth = static_cast<int>(to_int(v, k));
    };
    handlers["synth.sector_mix"] = [&](const std::string& k, const std::string& v) {
        config.synth.sector_mix = to_mix(v, k);
    };
    handlers["synth.supplier_sector_mix"] = [&](const std::string& k, const std::string& v) {
        config.synth.supplier_sector_mix = to_mix(v, k);
    };
    handlers["synth.rating_names"] = [&](const std::string&, const std::string& v) {
        config.synth.rating_names = split(v, ',');
    };
    handlers["synth.hub_fraction"] = [&](const std::string& k, const std::string& v) {
        config.synth.hub_fraction = to_real(v, k);
    };
    handlers["synth.base_breach_rate"] = [&](const std::string& k, const std::string& v) {
        config.synth.base_breach_rate = to_real(v, k);
    };
    handlers["synth.power_law_alpha"] = [&](const std::string& k, const std::string& v) {
        config.synth.power_law_alpha = to_real(v, k);
    };
    handlers["synth.n_product_types"] = [&](const std::string& k, const std::string& v) {
        config.synth.n_product_types = static_cast<int>(to_int(v, k));
    };
    handlers["synth.supplier_breach_rate"] = [&](const std::string& k, const std::string& v) {
        config.synth.supplier_breach_rate = to_real(v, k);
    };
    handlers["synth.rating_presence"] = [&](const std::string& k, const std::string& v) {
        config.synth.rating_presence = to_real(v, k);
    };
    handlers["synth.signal_employee"] = [&](const std::string& k, const std::string& v) {
        config.synth.signal_employee = to_real(v, k);
    };
    handlers["synth.signal_sector"] = [&](const std::string& k, const std::string& v) {
        config.synth.signal_sector.clear();
        for (const auto& [name, w] : to_mix(v, k)) config.synth.signal_sector[name] = w;
    };
    handlers["synth.signal_own_rating"] = [&](const std::string& k, const std::string& v) {
        config.synth.signal_own_rating = to_real(v, k);
    };
    handlers["synth.signal_sc_breaches"] = [&](const std::string& k, const std::string& v) {
        config.synth.signal_sc_breaches = to_real(v, k);
    };
    handlers["synth.signal_sc_rating"] = [&](const std::string& k, const std::string& v) {
        config.synth.signal_sc_rating = to_real(v, k);
    };
    handlers["synth.signal_sc_exposure"] = [&](const std::string& k, const std::string& v) {
        config.synth.signal_sc_exposure = to_real(v, k);
    };
    handlers["synth.signal_sc_product"] = [&](const std::string& k, const std::string& v) {
        config.synth.signal_sc_product = to_real(v, k);
    };
    handlers["synth.logit_bias"] = [&](const std::string& k, const std::string& v) {
        config.synth.logit_bias = to_real(v, k);
    };
    handlers["synth.history_start"] = [&](const std::string&, const std::string& v) {
        config.synth.history_start = Month::parse(v);
    };
    handlers["synth.history_months"] = [&](const std::string& k, const std::string& v) {
        config.synth.history_months = static_cast<int>(to_int(v, k));
    };
    handlers["synth.label_months"] = [&](const std::string& k, const std::string& v) {
        config.synth.label_months = static_cast<int>(to_int(v, k));
    };
    handlers["synth.seed"] = [&](const std::string& k, const std::string& v) {
        config.synth.seed = static_cast<std::uint64_t>(to_int(v, k));
    };

    handlers["catalog.sectors"] = [&](const std::string&, const std::string& v) {
        catalog.sectors = split(v, ',');
        catalog_touched = true;
    };
    handlers["catalog.rating_names"] = [&](const std::string&, const std::string& v) {
        catalog.rating_names = split(v, ',');
        catalog_touched = true;
    };
    handlers["catalog.history_start"] = [&](const std::string&, const std::string& v) {
        catalog.history_window.start = Month::parse(v);
        catalog_touched = true;
    };
    handlers["catalog.history_end"] = [&](const std::string&, const std::string& v) {
        catalog.history_window.end = Month::parse(v);
        catalog_touched = true;
    };
    handlers["catalog.label_start"] = [&](const std::string&, const std::string& v) {
        catalog.label_window.start = Month::parse(v);
        catalog_touched = true;
    };
    handlers["catalog.label_end"] = [&](const std::string&, const std::string& v) {
        catalog.label_window.end = Month::parse(v);
        catalog_touched = true;
    };

    handlers["eval.lr_grid"] = [&](const std::string& k, const std::string& v) {
        config.lr_grid.clear();
        for (const auto& p : split(v, ',')) config.lr_grid.push_back(to_real(p, k));
    };
    handlers["eval.trees_grid"] = [&](const std::string& k, const std::string& v) {
        config.trees_grid.clear();
        for (const auto& p : split(v, ',')) config.trees_grid.push_back(static_cast<int>(to_int(p, k)));
    };
    handlers["eval.depth_grid"] = [&](const std::string& k, const std::string& v) {
        config.depth_grid.clear();
        for (const auto& p : split(v, ',')) config.depth_grid.push_back(static_cast<int>(to_int(p, k)));
    };
    handlers["eval.l1_grid"] = [&](const std::string& k, const std::string& v) {
        config.l1_grid.clear();
        for (const auto& p : split(v, ',')) config.l1_grid.push_back(to_real(p, k));
    };
    handlers["eval.min_samples_leaf"] = [&](const std::string& k, const std::string& v) {
        config.min_samples_leaf = static_cast<int>(to_int(v, k));
    };
    handlers["eval.tiers"] = [&](const std::string& k, const std::string& v) {
        config.tiers.clear();
        for (const auto& p : split(v, ',')) config.tiers.push_back(static_cast<int>(to_int(p, k)));
    };
    handlers["eval.trials"] = [&](const std::string& k, const std::string& v) {
        config.n_trials = static_cast<int>(to_int(v, k));
    };
    handlers["eval.base_seed"] = [&](const std::string& k, const std::string& v) {
        config.base_seed = static_cast<std::uint64_t>(to_int(v, k));
    };
    handlers["eval.train_fraction"] = [&](const std::string& k, const std::string& v) {
        config.train_fraction = to_real(v, k);
    };
    handlers["eval.tune_per_trial"] = [&](const std::string& k, const std::string& v) {
        config.tune_per_trial = to_bool(v, k);
    };
    handlers["eval.cv_folds"] = [&](const std::string& k, const std::string& v) {
        config.cv_folds = static_cast<int>(to_int(v, k));
    };

    handlers["explain.top_k"] = [&](const std::string& k, const std::string& v) {
        config.explain_top_k = static_cast<int>(to_int(v, k));
    };
    handlers["rankdiff.top_k"] = [&](const std::string& k, const std::string& v) {
        config.rankdiff_top_k = static_cast<int>(to_int(v, k));
    };
    handlers["rankdiff.features"] = [&](const std::string&, const std::string& v) {
        config.rankdiff_features = split(v, ',');
    };

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        require(eq != std::string::npos,
                source_name + ":" + std::to_string(line_no) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto it = handlers.find(key);
        if (it == handlers.end()) {
            throw ValidationError(source_name + ":" + std::to_string(line_no) +
                                  ": unknown config key '" + key + "'");
        }
        it->second(key, value);
    }

    if (catalog_touched) {
        config.catalog_overridden = true;
        config.catalog_override = catalog;
    }
    return config;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config '" + path + "'");
    return parse_run_config(in, path);
}

}  // namespace scrisk
