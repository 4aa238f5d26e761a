#pragma once

// Brute-force reference implementations used only by tests. Everything here
// recomputes results from first principles (direct scans over the raw data,
// O(n^2) pair counting, exponential subset enumeration) and stays independent
// of the library code paths it checks.

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "scrisk/features.hpp"
#include "scrisk/gbm.hpp"
#include "scrisk/graph.hpp"
#include "scrisk/rng.hpp"

namespace oracles {

using scrisk::GlobalGraph;
using scrisk::Month;
using scrisk::MonthWindow;
using scrisk::Rng;

// ---------------------------------------------------------------------------
// AUC: O(n^2) pair counting with half credit for ties.
inline double auc_pairs(const std::vector<double>& scores, const std::vector<int>& labels) {
    double won = 0.0;
    double pairs = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            pairs += 1.0;
            if (scores[i] > scores[j]) won += 1.0;
            else if (scores[i] == scores[j]) won += 0.5;
        }
    }
    return won / pairs;
}

// ---------------------------------------------------------------------------
// Margin: independent recursive tree walk.
inline double tree_value_recursive(const scrisk::gbm::Tree& tree, int node,
                                   const std::vector<double>& x) {
    const auto& n = tree.nodes[static_cast<std::size_t>(node)];
    if (n.feature < 0) return n.value;
    if (x[static_cast<std::size_t>(n.feature)] <= n.threshold) {
        return tree_value_recursive(tree, n.left, x);
    }
    return tree_value_recursive(tree, n.right, x);
}

inline double margin_recursive(const scrisk::gbm::GbmModel& model, const std::vector<double>& x) {
    double sum = 0.0;
    for (const auto& t : model.trees) sum += tree_value_recursive(t, 0, x);
    return model.base_score + model.learning_rate * sum;
}

// ---------------------------------------------------------------------------
// Shapley values by exponential enumeration under the path-dependent
// conditional-expectation semantics: features outside the subset branch by
// node cover.
inline double expvalue_subset(const scrisk::gbm::Tree& tree, int node,
                              const std::vector<double>& x, unsigned subset) {
    const auto& n = tree.nodes[static_cast<std::size_t>(node)];
    if (n.feature < 0) return n.value;
    if (subset & (1u << n.feature)) {
        const int next = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
        return expvalue_subset(tree, next, x, subset);
    }
    const double cl = tree.nodes[static_cast<std::size_t>(n.left)].cover;
    const double cr = tree.nodes[static_cast<std::size_t>(n.right)].cover;
    return (cl * expvalue_subset(tree, n.left, x, subset) +
            cr * expvalue_subset(tree, n.right, x, subset)) /
           n.cover;
}

inline double model_expvalue(const scrisk::gbm::GbmModel& model, const std::vector<double>& x,
                             unsigned subset) {
    double sum = 0.0;
    for (const auto& t : model.trees) sum += expvalue_subset(t, 0, x, subset);
    return model.base_score + model.learning_rate * sum;
}

inline std::vector<double> shap_enumeration(const scrisk::gbm::GbmModel& model,
                                            const std::vector<double>& x) {
    const std::size_t m = model.n_features();
    std::vector<double> factorial(m + 1, 1.0);
    for (std::size_t i = 1; i <= m; ++i) factorial[i] = factorial[i - 1] * static_cast<double>(i);

    std::vector<double> phi(m, 0.0);
    const unsigned full = (1u << m) - 1u;
    for (std::size_t j = 0; j < m; ++j) {
        const unsigned bit = 1u << j;
        for (unsigned subset = 0; subset <= full; ++subset) {
            if (subset & bit) continue;
            const auto size = static_cast<std::size_t>(std::popcount(subset));
            const double weight =
                factorial[size] * factorial[m - size - 1] / factorial[m];
            phi[j] += weight * (model_expvalue(model, x, subset | bit) -
                                model_expvalue(model, x, subset));
        }
    }
    return phi;
}

// ---------------------------------------------------------------------------
// Local-chain roles recomputed by direct edge scans.
inline std::set<int> third_set(const GlobalGraph& g, int entity) {
    std::set<int> out;
    for (const auto& e : g.edges) {
        if (e.customer == entity) out.insert(e.supplier);
    }
    return out;
}

inline std::set<int> fourth_set(const GlobalGraph& g, int entity) {
    const auto thirds = third_set(g, entity);
    std::set<int> out;
    for (const auto& e : g.edges) {
        if (thirds.count(e.customer) && e.supplier != entity && !thirds.count(e.supplier)) {
            out.insert(e.supplier);
        }
    }
    return out;
}

inline int count_sector(const GlobalGraph& g, const std::set<int>& parties,
                        const std::string& sector) {
    int n = 0;
    for (int p : parties) {
        if (g.company(p).sector == sector) ++n;
    }
    return n;
}

inline double median_sorted_copy(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

inline double fourth_median_direct(const GlobalGraph& g, int entity, const std::string& sector) {
    const auto thirds = third_set(g, entity);
    const auto fourths = fourth_set(g, entity);
    if (thirds.empty()) return 0.0;
    std::vector<double> counts;
    for (int t : thirds) {
        std::set<int> connected;
        for (const auto& e : g.edges) {
            if (e.customer == t && fourths.count(e.supplier) &&
                g.company(e.supplier).sector == sector) {
                connected.insert(e.supplier);
            }
        }
        counts.push_back(static_cast<double>(connected.size()));
    }
    return median_sorted_copy(counts);
}

inline double rating_at_direct(const GlobalGraph& g, int company, const std::string& name,
                               Month month) {
    const auto it = g.company(company).ratings.find(name);
    if (it == g.company(company).ratings.end()) return std::nan("");
    for (const auto& point : it->second) {
        if (point.month == month) return point.value;
    }
    return std::nan("");
}

inline double party_summary_direct(const GlobalGraph& g, const std::set<int>& parties,
                                   const std::string& field, Month month) {
    double sum = 0.0;
    int n = 0;
    for (int p : parties) {
        double v;
        if (field == "employee_count") {
            v = static_cast<double>(g.company(p).employee_count);
        } else {
            v = rating_at_direct(g, p, field, month);
            if (std::isnan(v)) continue;
        }
        sum += v;
        ++n;
    }
    return n == 0 ? std::nan("") : sum / n;
}

inline int breach_count_direct(const GlobalGraph& g, const std::set<int>& parties,
                               const MonthWindow& window) {
    int n = 0;
    for (int p : parties) {
        for (Month m : g.company(p).breach_months) {
            if (window.start <= m && m < window.end) ++n;
        }
    }
    return n;
}

inline int label_direct(const GlobalGraph& g, int entity, const MonthWindow& label) {
    for (Month m : g.company(entity).breach_months) {
        if (label.start <= m && m < label.end) return 1;
    }
    return 0;
}

// Product risk table recomputed with independently derived bucket sizes.
struct ProductTableOracle {
    std::vector<std::string> products;  // risk descending, name ascending
    std::map<std::string, double> risk;
    std::map<std::string, int> group;
};

inline ProductTableOracle product_table_direct(const GlobalGraph& g,
                                               const std::vector<int>& train_entities,
                                               const MonthWindow& label) {
    std::map<std::string, std::set<int>> customers;
    for (int ent : train_entities) {
        for (const auto& e : g.edges) {
            if (e.customer == ent) customers[e.product].insert(ent);
        }
    }
    ProductTableOracle oracle;
    for (const auto& [product, custs] : customers) {
        int breached = 0;
        for (int c : custs) breached += label_direct(g, c, label);
        oracle.risk[product] = (breached + 1.0) / (static_cast<double>(custs.size()) + 2.0);
        oracle.products.push_back(product);
    }
    std::sort(oracle.products.begin(), oracle.products.end(),
              [&](const std::string& a, const std::string& b) {
                  if (oracle.risk[a] != oracle.risk[b]) return oracle.risk[a] > oracle.risk[b];
                  return a < b;
              });
    // Bucket sizes derived by repeated halving of the remainder.
    const std::size_t n = oracle.products.size();
    const std::size_t s0 = (n + 3) / 4;
    const std::size_t s1 = (n - s0 + 2) / 3;
    const std::size_t s2 = (n - s0 - s1 + 1) / 2;
    std::size_t i = 0;
    for (; i < s0 && i < n; ++i) oracle.group[oracle.products[i]] = 4;
    for (; i < s0 + s1 && i < n; ++i) oracle.group[oracle.products[i]] = 3;
    for (; i < s0 + s1 + s2 && i < n; ++i) oracle.group[oracle.products[i]] = 2;
    for (; i < n; ++i) oracle.group[oracle.products[i]] = 1;
    return oracle;
}

inline long long aggregate_direct(const GlobalGraph& g, int entity,
                                  const ProductTableOracle& table) {
    long long sum = 0;
    for (const auto& e : g.edges) {
        if (e.customer != entity) continue;
        const auto it = table.group.find(e.product);
        sum += it == table.group.end() ? 1 : it->second;
    }
    return sum;
}

// The complete tier-3 raw feature row recomputed from scratch, in the
// canonical column order.
inline std::vector<double> raw_row_direct(const GlobalGraph& g, int entity,
                                          const scrisk::features::FeatureCatalog& catalog,
                                          const ProductTableOracle& table) {
    const auto thirds = third_set(g, entity);
    const auto fourths = fourth_set(g, entity);
    const Month month = catalog.history_window.end.plus(-1);
    std::vector<double> row;

    for (const auto& s : catalog.sectors) row.push_back(g.company(entity).sector == s ? 1.0 : 0.0);
    row.push_back(static_cast<double>(g.company(entity).employee_count));
    for (const auto& r : catalog.rating_names) row.push_back(rating_at_direct(g, entity, r, month));
    for (const auto& s : catalog.sectors) row.push_back(count_sector(g, thirds, s));
    for (const auto& s : catalog.sectors) row.push_back(count_sector(g, fourths, s));
    for (const auto& s : catalog.sectors) row.push_back(fourth_median_direct(g, entity, s));
    row.push_back(static_cast<double>(thirds.size() + fourths.size()));
    for (const auto& r : catalog.rating_names) {
        row.push_back(party_summary_direct(g, thirds, r, month));
    }
    row.push_back(party_summary_direct(g, thirds, "employee_count", month));
    for (const auto& r : catalog.rating_names) {
        row.push_back(party_summary_direct(g, fourths, r, month));
    }
    row.push_back(party_summary_direct(g, fourths, "employee_count", month));
    row.push_back(static_cast<double>(aggregate_direct(g, entity, table)));
    row.push_back(breach_count_direct(g, thirds, catalog.history_window));
    row.push_back(breach_count_direct(g, fourths, catalog.history_window));
    return row;
}

// ---------------------------------------------------------------------------
// Random-graph source: emits the four CSV texts so tests also exercise the
// loader, optionally shuffling data rows to probe permutation invariance.
struct GraphCsv {
    std::string companies;
    std::string ratings;
    std::string edges;
    std::string breaches;
};

inline const std::vector<std::string>& test_sectors() {
    static const std::vector<std::string> sectors = {
        "Healthcare", "OilGas", "Retail", "Technology", "Manufacturing", "Legal",
        "HealthcareAndWellness"};
    return sectors;
}

inline scrisk::features::FeatureCatalog test_catalog() {
    scrisk::features::FeatureCatalog catalog;
    catalog.sectors = test_sectors();
    catalog.rating_names = {"patching_cadence", "open_ports"};
    catalog.history_window = {Month(2017, 5), Month(2019, 5)};
    catalog.label_window = {Month(2019, 5), Month(2020, 5)};
    return catalog;
}

inline GraphCsv random_graph_csv(Rng& rng, int max_companies = 50) {
    const int n = static_cast<int>(rng.uniform_int(2, max_companies));
    std::vector<std::string> ids;
    std::vector<bool> entity(static_cast<std::size_t>(n));
    int n_entities = 0;
    std::ostringstream companies;
    companies << "id,sector,employee_count,is_entity\n";
    for (int i = 0; i < n; ++i) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "C%03d", i);
        ids.emplace_back(buf);
        const auto& sectors = test_sectors();
        const auto sector = sectors[static_cast<std::size_t>(rng.below(sectors.size()))];
        entity[static_cast<std::size_t>(i)] = rng.uniform01() < 0.5 || (i == 0);
        if (entity[static_cast<std::size_t>(i)]) ++n_entities;
        companies << ids.back() << "," << sector << "," << rng.uniform_int(0, 9999) << ","
                  << (entity[static_cast<std::size_t>(i)] ? 1 : 0) << "\n";
    }

    std::ostringstream ratings;
    ratings << "id,month,rating_name,value\n";
    for (int i = 0; i < n; ++i) {
        for (const auto& name : test_catalog().rating_names) {
            if (rng.uniform01() < 0.25) continue;  // missing series
            std::set<int> months;
            const int k = static_cast<int>(rng.uniform_int(1, 5));
            for (int j = 0; j < k; ++j) months.insert(static_cast<int>(rng.uniform_int(0, 23)));
            for (int m : months) {
                ratings << ids[static_cast<std::size_t>(i)] << ","
                        << Month(2017, 5).plus(m).str() << "," << name << ","
                        << rng.uniform_int(300, 820) << "\n";
            }
        }
    }

    std::ostringstream edges;
    edges << "supplier_id,customer_id,product_type\n";
    std::set<std::string> used;
    const int n_edges = static_cast<int>(rng.uniform_int(n, 4 * n));
    // Guarantee at least one edge into an entity so the product table exists.
    if (n >= 2) {
        int ent = 0;
        while (!entity[static_cast<std::size_t>(ent)]) ++ent;
        const int supplier = ent == 0 ? 1 : 0;
        edges << ids[static_cast<std::size_t>(supplier)] << "," << ids[static_cast<std::size_t>(ent)]
              << ",P0\n";
        used.insert(ids[static_cast<std::size_t>(supplier)] + "|" + ids[static_cast<std::size_t>(ent)] + "|P0");
    }
    for (int e = 0; e < n_edges; ++e) {
        const int s = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        const int c = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        if (s == c) continue;
        char product[8];
        std::snprintf(product, sizeof(product), "P%d", static_cast<int>(rng.uniform_int(0, 7)));
        const std::string key = ids[static_cast<std::size_t>(s)] + "|" +
                                ids[static_cast<std::size_t>(c)] + "|" + product;
        if (!used.insert(key).second) continue;
        edges << ids[static_cast<std::size_t>(s)] << "," << ids[static_cast<std::size_t>(c)] << ","
              << product << "\n";
    }

    std::ostringstream breaches;
    breaches << "id,month\n";
    for (int i = 0; i < n; ++i) {
        const int k = static_cast<int>(rng.uniform_int(0, 3));
        for (int j = 0; j < k; ++j) {
            breaches << ids[static_cast<std::size_t>(i)] << ","
                     << Month(2017, 5).plus(static_cast<int>(rng.uniform_int(0, 35))).str()
                     << "\n";
        }
    }
    return {companies.str(), ratings.str(), edges.str(), breaches.str()};
}

inline GlobalGraph load_from_csv(const GraphCsv& csv) {
    std::istringstream companies(csv.companies);
    std::istringstream ratings(csv.ratings);
    std::istringstream edges(csv.edges);
    std::istringstream breaches(csv.breaches);
    return scrisk::load_graph(companies, ratings, edges, breaches);
}

// Shuffle the data rows of a CSV text (header kept first).
inline std::string shuffle_rows(const std::string& text, Rng& rng) {
    std::istringstream in(text);
    std::string header, line;
    std::getline(in, header);
    std::vector<std::string> rows;
    while (std::getline(in, line)) rows.push_back(line);
    rng.shuffle(rows);
    std::string out = header + "\n";
    for (const auto& r : rows) out += r + "\n";
    return out;
}

}  // namespace oracles
