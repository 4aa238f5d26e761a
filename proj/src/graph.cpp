#include "scrisk/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "scrisk/csv.hpp"
#include "scrisk/error.hpp"
#include "scrisk/stats.hpp"

namespace scrisk {

double Company::rating_at(const std::string& name, Month month) const {
    auto it = ratings.find(name);
    if (it == ratings.end()) return std::nan("");
    const auto& series = it->second;
    auto pt = std::lower_bound(series.begin(), series.end(), month,
                               [](const RatingPoint& p, Month m) { return p.month < m; });
    if (pt == series.end() || pt->month != month) return std::nan("");
    return pt->value;
}

int Company::breach_count(const MonthWindow& window) const {
    auto lo = std::lower_bound(breach_months.begin(), breach_months.end(), window.start);
    auto hi = std::lower_bound(breach_months.begin(), breach_months.end(), window.end);
    return static_cast<int>(hi - lo);
}

int GlobalGraph::index_of(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? -1 : it->second;
}

int GlobalGraph::require_company(const std::string& id) const {
    int idx = index_of(id);
    require(idx >= 0, "unknown company id '" + id + "'");
    return idx;
}

namespace {

long long parse_count(const std::string& text, const std::string& context) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(text, &pos);
    } catch (const std::exception&) {
        throw ValidationError(context + ": bad integer '" + text + "'");
    }
    require(pos == text.size(), context + ": bad integer '" + text + "'");
    return v;
}

double parse_real(const std::string& text, const std::string& context) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw ValidationError(context + ": bad number '" + text + "'");
    }
    require(pos == text.size(), context + ": bad number '" + text + "'");
    return v;
}

std::string at_line(const CsvReader& r) {
    return r.source() + ":" + std::to_string(r.line());
}

}  // namespace

GlobalGraph load_graph(std::istream& companies_csv, std::istream& ratings_csv,
                       std::istream& edges_csv, std::istream& breaches_csv) {
    GlobalGraph g;

    // companies.csv
    {
        CsvReader reader(companies_csv, "companies.csv", {"id", "sector", "employee_count", "is_entity"});
        std::vector<std::string> row;
        while (reader.next(row)) {
            Company c;
            c.id = row[0];
            c.sector = row[1];
            require(!c.id.empty(), at_line(reader) + ": empty company id");
            c.employee_count = parse_count(row[2], at_line(reader));
            require(c.employee_count >= 0,
                    at_line(reader) + ": negative employee_count for '" + c.id + "'");
            if (row[3] == "1" || row[3] == "true") c.is_entity = true;
            else if (row[3] == "0" || row[3] == "false") c.is_entity = false;
            else throw ValidationError(at_line(reader) + ": bad is_entity '" + row[3] + "'");
            g.companies.push_back(std::move(c));
        }
    }
    std::sort(g.companies.begin(), g.companies.end(),
              [](const Company& a, const Company& b) { return a.id < b.id; });
    for (std::size_t i = 0; i + 1 < g.companies.size(); ++i) {
        require(g.companies[i].id != g.companies[i + 1].id,
                "duplicate company id '" + g.companies[i].id + "'");
    }
    for (std::size_t i = 0; i < g.companies.size(); ++i) {
        g.index_[g.companies[i].id] = static_cast<int>(i);
        if (g.companies[i].is_entity) g.entities.push_back(static_cast<int>(i));
    }

    bool any_month = false;
    Month min_month, max_month;
    auto see_month = [&](Month m) {
        if (!any_month) {
            min_month = max_month = m;
            any_month = true;
        } else {
            min_month = std::min(min_month, m);
            max_month = std::max(max_month, m);
        }
    };

    // ratings.csv (optional per company)
    {
        CsvReader reader(ratings_csv, "ratings.csv", {"id", "month", "rating_name", "value"});
        std::vector<std::string> row;
        while (reader.next(row)) {
            int idx = g.index_of(row[0]);
            require(idx >= 0, at_line(reader) + ": rating for unknown company '" + row[0] + "'");
            Month m = Month::parse(row[1]);
            see_month(m);
            double value = parse_real(row[3], at_line(reader));
            require(value >= kRatingMin && value <= kRatingMax,
                    at_line(reader) + ": rating value " + row[3] + " outside [300,820]");
            g.companies[static_cast<std::size_t>(idx)].ratings[row[2]].push_back({m, value});
        }
    }
    for (auto& c : g.companies) {
        for (auto& [name, series] : c.ratings) {
            std::sort(series.begin(), series.end(),
                      [](const RatingPoint& a, const RatingPoint& b) { return a.month < b.month; });
            for (std::size_t i = 0; i + 1 < series.size(); ++i) {
                require(series[i].month < series[i + 1].month,
                        "company '" + c.id + "' rating '" + name +
                        "': months not strictly increasing at " + series[i].month.str());
            }
        }
    }

    // edges.csv
    {
        CsvReader reader(edges_csv, "edges.csv", {"supplier_id", "customer_id", "product_type"});
        std::vector<std::string> row;
        while (reader.next(row)) {
            int s = g.index_of(row[0]);
            require(s >= 0, at_line(reader) + ": dangling edge endpoint '" + row[0] + "'");
            int c = g.index_of(row[1]);
            require(c >= 0, at_line(reader) + ": dangling edge endpoint '" + row[1] + "'");
            require(s != c, at_line(reader) + ": self-loop edge on '" + row[0] + "'");
            g.edges.push_back({s, c, row[2]});
        }
    }
    std::sort(g.edges.begin(), g.edges.end(), [](const ProductEdge& a, const ProductEdge& b) {
        if (a.supplier != b.supplier) return a.supplier < b.supplier;
        if (a.customer != b.customer) return a.customer < b.customer;
        return a.product < b.product;
    });
    for (std::size_t i = 0; i + 1 < g.edges.size(); ++i) {
        const auto& a = g.edges[i];
        const auto& b = g.edges[i + 1];
        require(a.supplier != b.supplier || a.customer != b.customer || a.product != b.product,
                "duplicate edge (" + g.companies[static_cast<std::size_t>(a.supplier)].id + ", " +
                g.companies[static_cast<std::size_t>(a.customer)].id + ", " + a.product + ")");
    }

    // breaches.csv
    {
        CsvReader reader(breaches_csv, "breaches.csv", {"id", "month"});
        std::vector<std::string> row;
        while (reader.next(row)) {
            int idx = g.index_of(row[0]);
            require(idx >= 0, at_line(reader) + ": breach for unknown company '" + row[0] + "'");
            Month m = Month::parse(row[1]);
            see_month(m);
            g.companies[static_cast<std::size_t>(idx)].breach_months.push_back(m);
        }
    }
    for (auto& c : g.companies) {
        std::sort(c.breach_months.begin(), c.breach_months.end());
    }

    if (any_month) {
        g.window = MonthWindow{min_month, max_month.plus(1)};
    }

    g.in_edges.assign(g.companies.size(), {});
    g.out_edges.assign(g.companies.size(), {});
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        g.out_edges[static_cast<std::size_t>(g.edges[e].supplier)].push_back(static_cast<int>(e));
        g.in_edges[static_cast<std::size_t>(g.edges[e].customer)].push_back(static_cast<int>(e));
    }
    return g;
}

GlobalGraph load_graph_files(const std::string& companies_path, const std::string& ratings_path,
                             const std::string& edges_path, const std::string& breaches_path) {
    auto open = [](const std::string& path) {
        std::ifstream f(path);
        if (!f) throw InputError("cannot open '" + path + "'");
        return f;
    };
    std::ifstream companies = open(companies_path);
    std::ifstream ratings = open(ratings_path);
    std::ifstream edges = open(edges_path);
    std::ifstream breaches = open(breaches_path);
    return load_graph(companies, ratings, edges, breaches);
}

LocalSupplyChain extract_local_chain(const GlobalGraph& graph, int entity_index) {
    require(entity_index >= 0 && entity_index < static_cast<int>(graph.companies.size()),
            "unknown entity index");
    require(std::binary_search(graph.entities.begin(), graph.entities.end(), entity_index),
            "company '" + graph.companies[static_cast<std::size_t>(entity_index)].id +
            "' is not an entity");

    LocalSupplyChain chain;
    chain.entity = entity_index;

    std::set<int> thirds;
    for (int e : graph.in_edges[static_cast<std::size_t>(entity_index)]) {
        thirds.insert(graph.edges[static_cast<std::size_t>(e)].supplier);
        chain.third_edges.push_back(e);
    }
    chain.third_parties.assign(thirds.begin(), thirds.end());

    // A supplier with a direct edge to the entity is only ever a third party;
    // edges back to the entity or between third parties are dropped, which
    // keeps the fourth -> third -> entity graph acyclic.
    std::set<int> fourths;
    for (int t : chain.third_parties) {
        for (int e : graph.in_edges[static_cast<std::size_t>(t)]) {
            int s = graph.edges[static_cast<std::size_t>(e)].supplier;
            if (s == entity_index || thirds.count(s)) continue;
            fourths.insert(s);
            chain.fourth_edges.push_back(e);
        }
    }
    chain.fourth_parties.assign(fourths.begin(), fourths.end());
    std::sort(chain.third_edges.begin(), chain.third_edges.end());
    std::sort(chain.fourth_edges.begin(), chain.fourth_edges.end());
    return chain;
}

LocalSupplyChain extract_local_chain(const GlobalGraph& graph, const std::string& entity_id) {
    return extract_local_chain(graph, graph.require_company(entity_id));
}

int supplier_degree(const GlobalGraph& graph, int company_index) {
    require(company_index >= 0 && company_index < static_cast<int>(graph.companies.size()),
            "unknown company index");
    std::set<int> customers;
    for (int e : graph.out_edges[static_cast<std::size_t>(company_index)]) {
        customers.insert(graph.edges[static_cast<std::size_t>(e)].customer);
    }
    return static_cast<int>(customers.size());
}

namespace {

DistributionSummary summarize(std::vector<double> values) {
    DistributionSummary s;
    s.count = values.size();
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    s.min = values.front();
    s.max = values.back();
    s.q25 = nearest_rank_quantile(values, 0.25);
    s.q75 = nearest_rank_quantile(values, 0.75);
    const std::size_t n = values.size();
    s.median = (n % 2 == 1) ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    return s;
}

}  // namespace

DistributionSummary degree_cohort_stats(const GlobalGraph& graph, DegreeCohort cohort) {
    // Entity degree: number of distinct suppliers with an edge to the entity.
    std::vector<int> entity_degree(graph.companies.size(), 0);
    for (int ent : graph.entities) {
        std::set<int> suppliers;
        for (int e : graph.in_edges[static_cast<std::size_t>(ent)]) {
            suppliers.insert(graph.edges[static_cast<std::size_t>(e)].supplier);
        }
        entity_degree[static_cast<std::size_t>(ent)] = static_cast<int>(suppliers.size());
    }

    std::vector<int> cohort_entities;
    if (cohort == DegreeCohort::All) {
        cohort_entities = graph.entities;
    } else {
        std::vector<int> suppliers;
        std::vector<double> degrees;
        for (std::size_t c = 0; c < graph.companies.size(); ++c) {
            if (!graph.out_edges[c].empty()) {
                suppliers.push_back(static_cast<int>(c));
                degrees.push_back(static_cast<double>(supplier_degree(graph, static_cast<int>(c))));
            }
        }
        require(suppliers.size() >= 10, "degree_cohort_stats: fewer than 10 suppliers");
        std::vector<double> sorted_degrees = degrees;
        std::sort(sorted_degrees.begin(), sorted_degrees.end());

        std::set<int> members;
        if (cohort == DegreeCohort::ServedByTopDecileSuppliers) {
            const double boundary = nearest_rank_quantile(sorted_degrees, 0.9);
            for (std::size_t i = 0; i < suppliers.size(); ++i) {
                if (degrees[i] >= boundary) members.insert(suppliers[i]);
            }
        } else {
            const double boundary = nearest_rank_quantile(sorted_degrees, 0.1);
            for (std::size_t i = 0; i < suppliers.size(); ++i) {
                if (degrees[i] <= boundary) members.insert(suppliers[i]);
            }
        }
        std::set<int> served;
        for (int s : members) {
            for (int e : graph.out_edges[static_cast<std::size_t>(s)]) {
                int c = graph.edges[static_cast<std::size_t>(e)].customer;
                if (std::binary_search(graph.entities.begin(), graph.entities.end(), c)) {
                    served.insert(c);
                }
            }
        }
        cohort_entities.assign(served.begin(), served.end());
    }

    std::vector<double> values;
    values.reserve(cohort_entities.size());
    for (int ent : cohort_entities) {
        values.push_back(static_cast<double>(entity_degree[static_cast<std::size_t>(ent)]));
    }
    return summarize(std::move(values));
}

}  // namespace scrisk
