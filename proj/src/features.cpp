#include "scrisk/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "scrisk/error.hpp"
#include "scrisk/stats.hpp"

namespace scrisk {
namespace features {

void FeatureCatalog::validate() const {
    require(!sectors.empty(), "catalog: sector list is empty");
    require(history_window.start < history_window.end, "catalog: inverted history window");
    require(label_window.start < label_window.end, "catalog: inverted label window");
    require(history_window.end <= label_window.start,
            "catalog: history window must end at or before the label window start");
    std::set<std::string> s(sectors.begin(), sectors.end());
    require(s.size() == sectors.size(), "catalog: duplicate sector");
    std::set<std::string> r(rating_names.begin(), rating_names.end());
    require(r.size() == rating_names.size(), "catalog: duplicate rating name");
}

int ProductRiskTable::group_of(const std::string& product) const {
    auto it = index_.find(product);
    return it == index_.end() ? 1 : entries[it->second].group;
}

double ProductRiskTable::risk_level_of(const std::string& product) const {
    auto it = index_.find(product);
    return it == index_.end() ? std::nan("") : entries[it->second].risk_level;
}

namespace {

void validate_sector(const FeatureCatalog& catalog, const std::string& sector) {
    if (std::find(catalog.sectors.begin(), catalog.sectors.end(), sector) ==
        catalog.sectors.end()) {
        throw ValidationError("unknown sector label '" + sector + "'");
    }
}

void validate_field(const FeatureCatalog& catalog, const std::string& field) {
    if (field == kEmployeeCountField) return;
    if (std::find(catalog.rating_names.begin(), catalog.rating_names.end(), field) ==
        catalog.rating_names.end()) {
        throw ValidationError("unknown field name '" + field + "'");
    }
}

const std::vector<int>& parties_at(const LocalSupplyChain& local, PartyLevel level) {
    return level == PartyLevel::Third ? local.third_parties : local.fourth_parties;
}

}  // namespace

std::vector<std::string> feature_names(const FeatureCatalog& catalog, int tier) {
    require(tier >= 1 && tier <= 3, "tier must be 1, 2 or 3");
    std::vector<std::string> names;
    for (const auto& s : catalog.sectors) names.push_back("sector_is_" + s);
    names.push_back("employee_count");
    if (tier >= 2) {
        for (const auto& r : catalog.rating_names) names.push_back("own_rating_" + r);
    }
    if (tier >= 3) {
        for (const auto& s : catalog.sectors) names.push_back("third_count_" + s);
        for (const auto& s : catalog.sectors) names.push_back("fourth_count_" + s);
        for (const auto& s : catalog.sectors) names.push_back("fourth_median_" + s);
        names.push_back("network_exposure");
        for (const auto& r : catalog.rating_names) names.push_back("third_mean_rating_" + r);
        names.push_back("third_mean_employees");
        for (const auto& r : catalog.rating_names) names.push_back("fourth_mean_rating_" + r);
        names.push_back("fourth_mean_employees");
        names.push_back("product_edge_aggregate");
        names.push_back("third_breach_count");
        names.push_back("fourth_breach_count");
    }
    return names;
}

int label_of(const GlobalGraph& graph, int entity_index, const FeatureCatalog& catalog) {
    return graph.company(entity_index).breach_count(catalog.label_window) > 0 ? 1 : 0;
}

int third_connectivity(const LocalSupplyChain& local, const GlobalGraph& graph,
                       const FeatureCatalog& catalog, const std::string& sector) {
    validate_sector(catalog, sector);
    int n = 0;
    for (int p : local.third_parties) {
        if (graph.company(p).sector == sector) ++n;
    }
    return n;
}

int fourth_connectivity_count(const LocalSupplyChain& local, const GlobalGraph& graph,
                              const FeatureCatalog& catalog, const std::string& sector) {
    validate_sector(catalog, sector);
    int n = 0;
    for (int p : local.fourth_parties) {
        if (graph.company(p).sector == sector) ++n;
    }
    return n;
}

double fourth_connectivity_median(const LocalSupplyChain& local, const GlobalGraph& graph,
                                  const FeatureCatalog& catalog, const std::string& sector) {
    validate_sector(catalog, sector);
    if (local.third_parties.empty()) return 0.0;
    // Distinct sector-matching fourth parties connected to each third party.
    std::map<int, std::set<int>> connections;
    for (int e : local.fourth_edges) {
        const auto& edge = graph.edges[static_cast<std::size_t>(e)];
        if (graph.company(edge.supplier).sector == sector) {
            connections[edge.customer].insert(edge.supplier);
        }
    }
    std::vector<double> counts;
    counts.reserve(local.third_parties.size());
    for (int t : local.third_parties) {
        auto it = connections.find(t);
        counts.push_back(it == connections.end() ? 0.0
                                                 : static_cast<double>(it->second.size()));
    }
    return median(std::move(counts));
}

int network_exposure(const LocalSupplyChain& local) {
    // Third and fourth sets are disjoint by construction.
    return static_cast<int>(local.third_parties.size() + local.fourth_parties.size());
}

double party_summary(const LocalSupplyChain& local, const GlobalGraph& graph,
                     const FeatureCatalog& catalog, PartyLevel level,
                     const std::string& field, Month month) {
    validate_field(catalog, field);
    double sum = 0.0;
    int n = 0;
    for (int p : parties_at(local, level)) {
        double v;
        if (field == kEmployeeCountField) {
            v = static_cast<double>(graph.company(p).employee_count);
        } else {
            v = graph.company(p).rating_at(field, month);
            if (std::isnan(v)) continue;
        }
        sum += v;
        ++n;
    }
    if (n == 0) return std::nan("");
    return sum / static_cast<double>(n);
}

ProductRiskTable build_product_risk_table(const GlobalGraph& graph, const FeatureCatalog& catalog,
                                          const std::vector<int>& train_entities) {
    // Distinct training customers per product type on incoming edges.
    std::map<std::string, std::set<int>> customers;
    for (int ent : train_entities) {
        for (int e : graph.in_edges[static_cast<std::size_t>(ent)]) {
            customers[graph.edges[static_cast<std::size_t>(e)].product].insert(ent);
        }
    }
    require(!customers.empty(), "product risk table: zero product types in training data");

    ProductRiskTable table;
    for (const auto& [product, custs] : customers) {
        int breached = 0;
        for (int c : custs) breached += label_of(graph, c, catalog);
        const double alpha = 1.0;  // Laplace smoothing
        double risk = (static_cast<double>(breached) + alpha) /
                      (static_cast<double>(custs.size()) + 2.0 * alpha);
        table.entries.push_back({product, risk, 1});
    }
    std::sort(table.entries.begin(), table.entries.end(),
              [](const ProductRiskTable::Entry& a, const ProductRiskTable::Entry& b) {
                  if (a.risk_level != b.risk_level) return a.risk_level > b.risk_level;
                  return a.product < b.product;
              });

    // Quartile buckets of ceil(n/4) / floor(n/4) products, riskiest first.
    const std::size_t n = table.entries.size();
    std::size_t pos = 0;
    for (int bucket = 0; bucket < 4; ++bucket) {
        const std::size_t size = (n + 3 - static_cast<std::size_t>(bucket)) / 4;
        for (std::size_t i = 0; i < size && pos < n; ++i, ++pos) {
            table.entries[pos].group = 4 - bucket;
        }
    }
    for (std::size_t i = 0; i < n; ++i) table.index_[table.entries[i].product] = i;
    return table;
}

long long product_edge_aggregate(const LocalSupplyChain& local, const GlobalGraph& graph,
                                 const ProductRiskTable& table) {
    long long sum = 0;
    for (int e : local.third_edges) {
        sum += table.group_of(graph.edges[static_cast<std::size_t>(e)].product);
    }
    return sum;
}

int party_breach_count(const LocalSupplyChain& local, const GlobalGraph& graph,
                       PartyLevel level, const MonthWindow& window) {
    require(window.start <= window.end, "party_breach_count: inverted window");
    int n = 0;
    for (int p : parties_at(local, level)) {
        n += graph.company(p).breach_count(window);
    }
    return n;
}

namespace {

// Full tier-3 raw row; layout must match feature_names(catalog, 3).
void raw_row(int entity, const GlobalGraph& graph, const FeatureCatalog& catalog,
             const ProductRiskTable& table, double* out) {
    const Company& company = graph.company(entity);
    const Month month = catalog.last_history_month();
    const LocalSupplyChain chain = extract_local_chain(graph, entity);
    std::size_t k = 0;

    for (const auto& s : catalog.sectors) out[k++] = company.sector == s ? 1.0 : 0.0;
    out[k++] = static_cast<double>(company.employee_count);
    for (const auto& r : catalog.rating_names) out[k++] = company.rating_at(r, month);

    for (const auto& s : catalog.sectors) {
        out[k++] = static_cast<double>(third_connectivity(chain, graph, catalog, s));
    }
    for (const auto& s : catalog.sectors) {
        out[k++] = static_cast<double>(fourth_connectivity_count(chain, graph, catalog, s));
    }
    for (const auto& s : catalog.sectors) {
        out[k++] = fourth_connectivity_median(chain, graph, catalog, s);
    }
    out[k++] = static_cast<double>(network_exposure(chain));
    for (const auto& r : catalog.rating_names) {
        out[k++] = party_summary(chain, graph, catalog, PartyLevel::Third, r, month);
    }
    out[k++] = party_summary(chain, graph, catalog, PartyLevel::Third, kEmployeeCountField, month);
    for (const auto& r : catalog.rating_names) {
        out[k++] = party_summary(chain, graph, catalog, PartyLevel::Fourth, r, month);
    }
    out[k++] = party_summary(chain, graph, catalog, PartyLevel::Fourth, kEmployeeCountField, month);
    out[k++] = static_cast<double>(product_edge_aggregate(chain, graph, table));
    out[k++] = static_cast<double>(party_breach_count(chain, graph, PartyLevel::Third,
                                                      catalog.history_window));
    out[k++] = static_cast<double>(party_breach_count(chain, graph, PartyLevel::Fourth,
                                                      catalog.history_window));
}

}  // namespace

FeatureMatrix build_matrix(const GlobalGraph& graph, const FeatureCatalog& catalog,
                           const ProductRiskTable& table, Exec exec) {
    catalog.validate();
    FeatureMatrix m;
    m.tier = 3;
    m.names = feature_names(catalog, 3);
    m.entity_indices = graph.entities;
    for (int e : graph.entities) {
        m.entity_ids.push_back(graph.company(e).id);
        m.labels.push_back(label_of(graph, e, catalog));
    }
    const std::size_t cols = m.names.size();
    m.values.assign(m.rows() * cols, 0.0);
    parallel_for(m.rows(), exec, [&](std::size_t r) {
        raw_row(m.entity_indices[r], graph, catalog, table, &m.values[r * cols]);
    });
    return m;
}

FeatureMatrix FeatureMatrix::tier_slice(int tier, const FeatureCatalog& catalog) const {
    require_internal(this->tier == 3, "tier_slice: source must be a tier-3 matrix");
    const std::size_t keep = feature_names(catalog, tier).size();
    require_internal(keep <= cols(), "tier_slice: catalog mismatch");
    FeatureMatrix m;
    m.tier = tier;
    m.names.assign(names.begin(), names.begin() + static_cast<long>(keep));
    m.entity_indices = entity_indices;
    m.entity_ids = entity_ids;
    m.labels = labels;
    m.values.resize(rows() * keep);
    for (std::size_t r = 0; r < rows(); ++r) {
        for (std::size_t c = 0; c < keep; ++c) m.values[r * keep + c] = at(r, c);
    }
    return m;
}

ImputeStats compute_impute(const FeatureMatrix& matrix, const std::vector<int>& train_rows) {
    ImputeStats stats;
    stats.column_mean.assign(matrix.cols(), 0.0);
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
        double sum = 0.0;
        std::size_t n = 0;
        for (int r : train_rows) {
            double v = matrix.at(static_cast<std::size_t>(r), c);
            if (std::isnan(v)) continue;
            sum += v;
            ++n;
        }
        stats.column_mean[c] = n == 0 ? 0.0 : sum / static_cast<double>(n);
    }
    return stats;
}

void apply_impute(FeatureMatrix& matrix, const ImputeStats& stats) {
    require_internal(stats.column_mean.size() == matrix.cols(), "impute: column count mismatch");
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        for (std::size_t c = 0; c < matrix.cols(); ++c) {
            if (std::isnan(matrix.at(r, c))) matrix.at(r, c) = stats.column_mean[c];
        }
    }
}

FeatureVector assemble(int entity_index, const GlobalGraph& graph, const FeatureCatalog& catalog,
                       const ProductRiskTable& table, int tier, const ImputeStats& impute) {
    catalog.validate();
    FeatureVector fv;
    fv.entity_id = graph.company(entity_index).id;
    fv.tier = tier;
    fv.names = feature_names(catalog, tier);

    std::vector<double> full(feature_names(catalog, 3).size(), 0.0);
    raw_row(entity_index, graph, catalog, table, full.data());
    require(impute.column_mean.size() >= fv.names.size(),
            "assemble: impute stats cover fewer columns than the tier needs");
    fv.values.resize(fv.names.size());
    for (std::size_t c = 0; c < fv.names.size(); ++c) {
        fv.values[c] = std::isnan(full[c]) ? impute.column_mean[c] : full[c];
    }
    return fv;
}

}  // namespace features
}  // namespace scrisk
