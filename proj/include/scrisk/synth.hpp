#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "scrisk/features.hpp"
#include "scrisk/graph.hpp"
#include "scrisk/month.hpp"

namespace scrisk {
namespace synth {

// Generator configuration. Scale defaults are 1:10 of the reference industry
// dataset the statistics report compares against; sector proportions follow
// the same source. Breach probabilities come from a logistic model whose
// supply-chain terms are all non-negative, so raising a supply-chain weight
// at fixed bias strictly raises the population mean breach probability.
struct SynthConfig {
    int n_entities = 3834;
    int n_third = 488;
    int n_fourth = 536;

    std::vector<std::pair<std::string, double>> sector_mix = {
        {"Healthcare", 0.55}, {"OilGas", 0.24}, {"Retail", 0.21}};
    std::vector<std::pair<std::string, double>> supplier_sector_mix = {
        {"Technology", 0.40}, {"Manufacturing", 0.25}, {"Legal", 0.15},
        {"HealthcareAndWellness", 0.20}};
    std::vector<std::string> rating_names = {
        "patching_cadence", "spf", "spam_propagation", "open_ports", "tls_ssl",
        "desktop_software"};

    double hub_fraction = 0.02;       // suppliers made near-universal
    double base_breach_rate = 0.0137; // entity label rate over the label window
    double power_law_alpha = 2.1;     // non-hub supplier degree exponent
    int n_product_types = 70;
    double supplier_breach_rate = 0.8;  // mean incidents per supplier, history window
    double rating_presence = 0.97;      // probability a (company, rating) series exists

    double signal_employee = 0.6;
    std::map<std::string, double> signal_sector = {
        {"Healthcare", 0.5}, {"OilGas", -0.4}, {"Retail", 0.0}};
    double signal_own_rating = 0.8;
    double signal_sc_breaches = 0.8;
    double signal_sc_rating = 0.5;
    double signal_sc_exposure = 0.5;
    double signal_sc_product = 0.5;

    // NaN: calibrate the intercept so the mean probability hits
    // base_breach_rate; finite: use as-is (the monotonicity tests pin it).
    double logit_bias = std::numeric_limits<double>::quiet_NaN();

    Month history_start{2017, 5};
    int history_months = 24;
    int label_months = 12;

    std::uint64_t seed = 42;

    MonthWindow history_window() const {
        return {history_start, history_start.plus(history_months)};
    }
    MonthWindow label_window() const {
        return {history_start.plus(history_months),
                history_start.plus(history_months + label_months)};
    }
    void validate() const;
};

// Feature-catalog settings matching a generator configuration: entity sectors
// followed by supplier sectors, the configured rating names, and the
// generator's history/label windows.
features::FeatureCatalog catalog_for(const SynthConfig& config);

struct SynthDataset {
    struct CompanyRow {
        std::string id;
        std::string sector;
        long long employees = 0;
        bool is_entity = false;
    };
    struct RatingRow {
        std::string id;
        Month month;
        std::string rating;
        int value = 0;
    };
    struct EdgeRow {
        std::string supplier;
        std::string customer;
        std::string product;
    };
    struct BreachRow {
        std::string id;
        Month month;
    };

    std::vector<CompanyRow> companies;
    std::vector<RatingRow> ratings;
    std::vector<EdgeRow> edges;
    std::vector<BreachRow> breaches;

    // The logistic model's per-entity breach probability, aligned with the
    // entity rows of `companies`; exposed for calibration checks.
    std::vector<double> entity_breach_probability;

    double mean_breach_probability() const;
};

SynthDataset generate(const SynthConfig& config);

// Writes companies.csv, ratings.csv, edges.csv, breaches.csv under `dir`
// (atomically: temp file + rename). Same seed, same bytes.
void write_dataset(const SynthDataset& dataset, const std::string& dir);

// Side-by-side comparison of generated aggregates against the reference
// values the defaults are calibrated to; reference column is informational
// only ([reference-only]).
struct StatisticsReport {
    struct Row {
        std::string name;
        double generated = 0.0;
        std::string reference;
    };
    std::vector<Row> rows;
    std::string to_text() const;
};

StatisticsReport statistics_report(const GlobalGraph& graph);

}  // namespace synth
}  // namespace scrisk
