#pragma once

#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "scrisk/month.hpp"

namespace scrisk {

// Security ratings take values in [kRatingMin, kRatingMax].
inline constexpr double kRatingMin = 300.0;
inline constexpr double kRatingMax = 820.0;

struct RatingPoint {
    Month month;
    double value = 0.0;
};

struct Company {
    std::string id;
    std::string sector;
    long long employee_count = 0;
    bool is_entity = false;
    // rating name -> month-ascending series
    std::unordered_map<std::string, std::vector<RatingPoint>> ratings;
    std::vector<Month> breach_months;  // ascending

    // Rating value at exactly `month`; NaN when absent.
    double rating_at(const std::string& name, Month month) const;
    int breach_count(const MonthWindow& window) const;
};

struct ProductEdge {
    int supplier = -1;   // company index
    int customer = -1;   // company index
    std::string product;
};

// The immutable global supply-chain graph. Canonicalized on load (companies
// sorted by id, edges sorted by (supplier, customer, product)) so every
// downstream computation is independent of input row order. All queries are
// read-only and safe to run concurrently.
struct GlobalGraph {
    std::vector<Company> companies;             // sorted by id
    std::vector<ProductEdge> edges;             // sorted
    std::vector<int> entities;                  // company indices, sorted
    MonthWindow window;                         // [min month seen, max month seen + 1)

    std::vector<std::vector<int>> in_edges;     // per company: incoming edge indices
    std::vector<std::vector<int>> out_edges;    // per company: outgoing edge indices

    int index_of(const std::string& id) const;  // -1 when unknown
    int require_company(const std::string& id) const;
    const Company& company(int idx) const { return companies[idx]; }

private:
    std::unordered_map<std::string, int> index_;
    friend GlobalGraph load_graph(std::istream&, std::istream&, std::istream&, std::istream&);
};

// One entity's local supply chain under the role rules: a direct supplier is
// only ever a third party, fourth parties are suppliers of third parties that
// are neither the entity nor one of its third parties. All vectors sorted.
struct LocalSupplyChain {
    int entity = -1;
    std::vector<int> third_parties;
    std::vector<int> fourth_parties;
    std::vector<int> third_edges;   // edge indices: third party -> entity
    std::vector<int> fourth_edges;  // edge indices: fourth party -> third party
};

// Loads and validates the four tabular inputs. Throws ValidationError with
// file:line context on the first malformed row, dangling edge endpoint,
// out-of-range rating, duplicate company id, or duplicate edge triple.
GlobalGraph load_graph(std::istream& companies_csv, std::istream& ratings_csv,
                       std::istream& edges_csv, std::istream& breaches_csv);
GlobalGraph load_graph_files(const std::string& companies_path, const std::string& ratings_path,
                             const std::string& edges_path, const std::string& breaches_path);

LocalSupplyChain extract_local_chain(const GlobalGraph& graph, int entity_index);
LocalSupplyChain extract_local_chain(const GlobalGraph& graph, const std::string& entity_id);

// Number of distinct customers served by a supplier.
int supplier_degree(const GlobalGraph& graph, int company_index);

enum class DegreeCohort { All, ServedByTopDecileSuppliers, ServedByBottomDecileSuppliers };

struct DistributionSummary {
    std::size_t count = 0;
    double min = 0.0;
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
    double max = 0.0;
};

// Entity-degree summary for a cohort. Suppliers (companies with >= 1
// outgoing edge) are ranked by supplier_degree; decile membership uses
// nearest-rank boundaries with closed thresholds, so suppliers tied with the
// boundary value are all included and the cohort is permutation-invariant.
DistributionSummary degree_cohort_stats(const GlobalGraph& graph, DegreeCohort cohort);

}  // namespace scrisk
