#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "scrisk/graph.hpp"
#include "scrisk/parallel.hpp"

namespace scrisk {
namespace features {

// Field name accepted by party_summary alongside the configured rating names.
inline const std::string kEmployeeCountField = "employee_count";

// Configuration symbols for feature assembly. history_window must end at or
// before label_window.start so no feature can read label-period data.
struct FeatureCatalog {
    std::vector<std::string> sectors;
    std::vector<std::string> rating_names;
    MonthWindow history_window;
    MonthWindow label_window;

    Month last_history_month() const { return history_window.end.plus(-1); }
    void validate() const;
};

// Product types bucketed into 4 risk groups (4 = highest risk quartile).
struct ProductRiskTable {
    struct Entry {
        std::string product;
        double risk_level = 0.0;
        int group = 1;
    };
    std::vector<Entry> entries;  // risk_level descending, name ascending

    int group_of(const std::string& product) const;      // unseen -> 1
    double risk_level_of(const std::string& product) const;  // unseen -> NaN

private:
    friend ProductRiskTable build_product_risk_table(const GlobalGraph&, const FeatureCatalog&,
                                                     const std::vector<int>&);
    std::unordered_map<std::string, std::size_t> index_;
};

enum class PartyLevel { Third, Fourth };

struct FeatureVector {
    std::string entity_id;
    int tier = 1;
    std::vector<std::string> names;
    std::vector<double> values;
};

// Row-major feature matrix over all entities of the graph, rows ordered by
// entity id. Missing summaries are NaN until impute() is applied.
struct FeatureMatrix {
    int tier = 1;
    std::vector<std::string> names;
    std::vector<int> entity_indices;   // into graph.companies
    std::vector<std::string> entity_ids;
    std::vector<int> labels;           // 1 iff >= 1 breach in label_window
    std::vector<double> values;        // n_rows x names.size()

    std::size_t rows() const { return entity_indices.size(); }
    std::size_t cols() const { return names.size(); }
    double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }

    // Prefix-column slice; valid because tier names nest.
    FeatureMatrix tier_slice(int tier, const FeatureCatalog& catalog) const;
};

struct ImputeStats {
    std::vector<double> column_mean;  // impute value per column
};

// Canonical feature-name list for a tier. Tier 1 names are a prefix of
// tier 2 names, which are a prefix of tier 3 names.
std::vector<std::string> feature_names(const FeatureCatalog& catalog, int tier);

int label_of(const GlobalGraph& graph, int entity_index, const FeatureCatalog& catalog);

// --- per-feature operations ------------------------------------------------

// Number of third parties of the given sector.
int third_connectivity(const LocalSupplyChain& local, const GlobalGraph& graph,
                       const FeatureCatalog& catalog, const std::string& sector);

// Number of distinct fourth parties of the given sector.
int fourth_connectivity_count(const LocalSupplyChain& local, const GlobalGraph& graph,
                              const FeatureCatalog& catalog, const std::string& sector);

// Median over third parties of their count of distinct fourth parties of the
// given sector within the chain; 0 when the entity has no third parties.
double fourth_connectivity_median(const LocalSupplyChain& local, const GlobalGraph& graph,
                                  const FeatureCatalog& catalog, const std::string& sector);

// Total number of distinct third plus fourth parties.
int network_exposure(const LocalSupplyChain& local);

// Mean of `field` over the parties at `level` at `month`; parties missing the
// field are excluded; NaN when all are missing or the party set is empty.
double party_summary(const LocalSupplyChain& local, const GlobalGraph& graph,
                     const FeatureCatalog& catalog, PartyLevel level,
                     const std::string& field, Month month);

// Laplace-smoothed breach rate of a product's training customers:
// (breached + 1) / (customers + 2), computed on training entities only;
// products sorted by risk descending (name ascending on ties) and split into
// 4 near-equal groups, 4 = riskiest.
ProductRiskTable build_product_risk_table(const GlobalGraph& graph, const FeatureCatalog& catalog,
                                          const std::vector<int>& train_entities);

// Weighted count of the entity's incoming product edges: weight = risk group
// of the edge's product type, edges counted with multiplicity.
long long product_edge_aggregate(const LocalSupplyChain& local, const GlobalGraph& graph,
                                 const ProductRiskTable& table);

// Total breach incidents in [window.start, window.end) across parties at `level`.
int party_breach_count(const LocalSupplyChain& local, const GlobalGraph& graph,
                       PartyLevel level, const MonthWindow& window);

// --- assembly ---------------------------------------------------------------

// Raw tier-3 matrix (NaN for missing summaries), parallel across entities.
FeatureMatrix build_matrix(const GlobalGraph& graph, const FeatureCatalog& catalog,
                           const ProductRiskTable& table, Exec exec = Exec::Parallel);

// Column means over the non-missing training rows (0 when a column is
// missing in every training row).
ImputeStats compute_impute(const FeatureMatrix& matrix, const std::vector<int>& train_rows);

void apply_impute(FeatureMatrix& matrix, const ImputeStats& stats);

// Single-entity vector with missing values imputed.
FeatureVector assemble(int entity_index, const GlobalGraph& graph, const FeatureCatalog& catalog,
                       const ProductRiskTable& table, int tier, const ImputeStats& impute);

}  // namespace features
}  // namespace scrisk
