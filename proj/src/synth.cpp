#include "scrisk/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include "scrisk/csv.hpp"
#include "scrisk/error.hpp"
#include "scrisk/rng.hpp"
#include "scrisk/stats.hpp"

namespace scrisk {
namespace synth {

namespace {

double mix_total(const std::vector<std::pair<std::string, double>>& mix) {
    double t = 0.0;
    for (const auto& [name, w] : mix) t += w;
    return t;
}

std::size_t sample_mix(Rng& rng, const std::vector<std::pair<std::string, double>>& mix) {
    const double u = rng.uniform01() * mix_total(mix);
    double cum = 0.0;
    for (std::size_t i = 0; i < mix.size(); ++i) {
        cum += mix[i].second;
        if (u < cum) return i;
    }
    return mix.size() - 1;
}

std::string padded_id(char prefix, int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%c%05d", prefix, i);
    return buf;
}

// Discrete truncated power law on [1, dmax]: P(d) proportional to d^-alpha.
struct PowerLawSampler {
    std::vector<double> cdf;
    PowerLawSampler(double alpha, int dmax) {
        cdf.resize(static_cast<std::size_t>(dmax));
        double cum = 0.0;
        for (int d = 1; d <= dmax; ++d) {
            cum += std::pow(static_cast<double>(d), -alpha);
            cdf[static_cast<std::size_t>(d - 1)] = cum;
        }
    }
    int sample(Rng& rng) const {
        const double u = rng.uniform01() * cdf.back();
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        return static_cast<int>(it - cdf.begin()) + 1;
    }
};

// Distinct weighted sampling by inverse-CDF with rejection; fine while the
// draw count is far below the population size.
std::vector<int> sample_distinct_weighted(Rng& rng, const std::vector<double>& cum_weight,
                                          int count) {
    std::set<int> chosen;
    const double total = cum_weight.back();
    while (static_cast<int>(chosen.size()) < count) {
        const double u = rng.uniform01() * total;
        const auto it = std::upper_bound(cum_weight.begin(), cum_weight.end(), u);
        chosen.insert(static_cast<int>(it - cum_weight.begin()));
    }
    return {chosen.begin(), chosen.end()};
}

}  // namespace

void SynthConfig::validate() const {
    require(n_entities >= 0 && n_third >= 0 && n_fourth >= 0, "synth: negative company count");
    require(std::fabs(mix_total(sector_mix) - 1.0) <= 1e-9,
            "synth: sector_mix proportions must sum to 1");
    require(std::fabs(mix_total(supplier_sector_mix) - 1.0) <= 1e-9,
            "synth: supplier_sector_mix proportions must sum to 1");
    require(base_breach_rate > 0.0 && base_breach_rate < 1.0,
            "synth: base_breach_rate must be in (0,1)");
    require(supplier_breach_rate >= 0.0, "synth: supplier_breach_rate must be >= 0");
    require(hub_fraction >= 0.0 && hub_fraction <= 1.0, "synth: hub_fraction must be in [0,1]");
    require(power_law_alpha > 1.0, "synth: power_law_alpha must exceed 1");
    require(n_product_types >= 1, "synth: need at least one product type");
    require(rating_presence >= 0.0 && rating_presence <= 1.0,
            "synth: rating_presence must be in [0,1]");
    require(history_months >= 1 && label_months >= 1, "synth: empty windows");
    const int n_hubs = static_cast<int>(std::llround(hub_fraction * n_third));
    if (n_third > 0 && n_hubs > 0) {
        require(n_entities >= 2, "synth: infeasible config, hub suppliers need >= 2 entities");
    }
}

features::FeatureCatalog catalog_for(const SynthConfig& config) {
    features::FeatureCatalog catalog;
    for (const auto& [name, w] : config.sector_mix) catalog.sectors.push_back(name);
    for (const auto& [name, w] : config.supplier_sector_mix) catalog.sectors.push_back(name);
    catalog.rating_names = config.rating_names;
    catalog.history_window = config.history_window();
    catalog.label_window = config.label_window();
    return catalog;
}

double SynthDataset::mean_breach_probability() const {
    if (entity_breach_probability.empty()) return 0.0;
    return mean(entity_breach_probability);
}

SynthDataset generate(const SynthConfig& config) {
    config.validate();
    SynthDataset data;

    const int n_entities = config.n_entities;
    const int n_suppliers = config.n_third + config.n_fourth;
    const int n_companies = n_entities + n_suppliers;
    if (n_companies == 0) return data;

    // Companies: entities first, then third-party then fourth-party suppliers.
    Rng rng_company(derive_seed(config.seed, 1));
    std::vector<double> vulnerability(static_cast<std::size_t>(n_companies));
    for (int i = 0; i < n_companies; ++i) {
        SynthDataset::CompanyRow row;
        if (i < n_entities) {
            row.id = padded_id('E', i);
            row.sector = config.sector_mix[sample_mix(rng_company, config.sector_mix)].first;
            row.is_entity = true;
            row.employees = std::max(1LL, std::llround(rng_company.lognormal(std::log(150.0), 1.6)));
        } else {
            const int s = i - n_entities;
            row.id = s < config.n_third ? padded_id('T', s) : padded_id('F', s - config.n_third);
            row.sector =
                config.supplier_sector_mix[sample_mix(rng_company, config.supplier_sector_mix)]
                    .first;
            row.is_entity = false;
            row.employees = std::max(1LL, std::llround(rng_company.lognormal(std::log(400.0), 1.8)));
        }
        vulnerability[static_cast<std::size_t>(i)] = rng_company.normal();
        data.companies.push_back(std::move(row));
    }

    // Ratings: a per-(company, rating) baseline negatively tied to the latent
    // vulnerability, plus independent monthly noise, clamped into [300, 820].
    Rng rng_rating(derive_seed(config.seed, 2));
    const MonthWindow history = config.history_window();
    std::vector<double> security_base(static_cast<std::size_t>(n_companies), 0.0);
    std::vector<int> security_n(static_cast<std::size_t>(n_companies), 0);
    for (int i = 0; i < n_companies; ++i) {
        for (const auto& rating : config.rating_names) {
            if (rng_rating.uniform01() >= config.rating_presence) continue;
            const double base =
                560.0 + 130.0 * (-0.55 * vulnerability[static_cast<std::size_t>(i)] +
                                 0.45 * rng_rating.normal());
            security_base[static_cast<std::size_t>(i)] += base;
            security_n[static_cast<std::size_t>(i)] += 1;
            for (int m = 0; m < history.length(); ++m) {
                const double noisy = base + 12.0 * rng_rating.normal();
                const int value = static_cast<int>(
                    std::llround(std::clamp(noisy, kRatingMin, kRatingMax)));
                data.ratings.push_back(
                    {data.companies[static_cast<std::size_t>(i)].id, history.start.plus(m),
                     rating, value});
            }
        }
    }
    double pop_security_sum = 0.0;
    int pop_security_n = 0;
    for (int i = 0; i < n_companies; ++i) {
        if (security_n[static_cast<std::size_t>(i)] > 0) {
            security_base[static_cast<std::size_t>(i)] /= security_n[static_cast<std::size_t>(i)];
            pop_security_sum += security_base[static_cast<std::size_t>(i)];
            pop_security_n += 1;
        }
    }
    const double pop_security = pop_security_n > 0 ? pop_security_sum / pop_security_n : 560.0;
    for (int i = 0; i < n_companies; ++i) {
        if (security_n[static_cast<std::size_t>(i)] == 0) {
            security_base[static_cast<std::size_t>(i)] = pop_security;
        }
    }

    // Third-party -> entity edges. A few hub suppliers serve most entities;
    // the rest draw power-law degrees and preferentially attach to
    // high-attractiveness entities, the more strongly the smaller they are.
    Rng rng_edges(derive_seed(config.seed, 3));
    std::vector<std::pair<int, int>> pairs;  // supplier company index -> customer company index
    const int n_hubs = std::min(config.n_third,
                                static_cast<int>(std::llround(config.hub_fraction * config.n_third)));
    if (n_entities > 0 && config.n_third > 0) {
        std::vector<double> attractiveness(static_cast<std::size_t>(n_entities));
        for (int i = 0; i < n_entities; ++i) {
            attractiveness[static_cast<std::size_t>(i)] =
                std::pow(1.0 - rng_edges.uniform01(), -1.0 / 1.4);
        }
        const int dmax = std::max(1, std::min(n_entities, std::max(10, n_entities / 20)));
        PowerLawSampler degree_law(config.power_law_alpha, dmax);
        std::vector<int> scratch(static_cast<std::size_t>(n_entities));
        std::iota(scratch.begin(), scratch.end(), 0);
        std::vector<double> cum(static_cast<std::size_t>(n_entities));

        for (int t = 0; t < config.n_third; ++t) {
            const int supplier = n_entities + t;
            if (t < n_hubs) {
                const int lo = std::max(1, (n_entities * 55) / 100);
                const int hi = std::max(lo, (n_entities * 85) / 100);
                const int degree = static_cast<int>(rng_edges.uniform_int(lo, hi));
                // Partial Fisher-Yates for a uniform distinct sample.
                for (int j = 0; j < degree; ++j) {
                    const auto k = static_cast<std::size_t>(
                        rng_edges.uniform_int(j, n_entities - 1));
                    std::swap(scratch[static_cast<std::size_t>(j)], scratch[k]);
                }
                std::vector<int> customers(scratch.begin(), scratch.begin() + degree);
                std::sort(customers.begin(), customers.end());
                for (int c : customers) pairs.emplace_back(supplier, c);
            } else {
                const int degree = std::min(degree_law.sample(rng_edges), n_entities);
                const double exponent = 1.0 + 3.0 / static_cast<double>(degree);
                double running = 0.0;
                for (int i = 0; i < n_entities; ++i) {
                    running += std::pow(attractiveness[static_cast<std::size_t>(i)], exponent);
                    cum[static_cast<std::size_t>(i)] = running;
                }
                for (int c : sample_distinct_weighted(rng_edges, cum, degree)) {
                    pairs.emplace_back(supplier, c);
                }
            }
        }
    }

    // Fourth-party -> third-party edges, preferring bigger third parties.
    if (config.n_third > 0 && config.n_fourth > 0) {
        std::vector<int> third_degree(static_cast<std::size_t>(config.n_third), 0);
        for (const auto& [s, c] : pairs) third_degree[static_cast<std::size_t>(s - n_entities)] += 1;
        std::vector<double> cum(static_cast<std::size_t>(config.n_third));
        double running = 0.0;
        for (int t = 0; t < config.n_third; ++t) {
            running += std::pow(static_cast<double>(third_degree[static_cast<std::size_t>(t)]) + 1.0, 0.7);
            cum[static_cast<std::size_t>(t)] = running;
        }
        const int dmax = std::max(1, std::min(config.n_third, 40));
        PowerLawSampler degree_law(config.power_law_alpha, dmax);
        for (int f = 0; f < config.n_fourth; ++f) {
            const int supplier = n_entities + config.n_third + f;
            const int degree = std::min(degree_law.sample(rng_edges), config.n_third);
            for (int t : sample_distinct_weighted(rng_edges, cum, degree)) {
                pairs.emplace_back(supplier, n_entities + t);
            }
        }
    }

    // Product types per supplier-customer pair: Zipf-popular primary product,
    // occasionally a second distinct one. Each product carries an intrinsic
    // risk coefficient feeding the entity signal below.
    Rng rng_product(derive_seed(config.seed, 4));
    std::vector<double> product_risk(static_cast<std::size_t>(config.n_product_types));
    for (double& r : product_risk) r = rng_product.uniform01();
    std::vector<double> product_cum(static_cast<std::size_t>(config.n_product_types));
    {
        double running = 0.0;
        for (int p = 0; p < config.n_product_types; ++p) {
            running += 1.0 / static_cast<double>(p + 1);
            product_cum[static_cast<std::size_t>(p)] = running;
        }
    }
    auto sample_product = [&](Rng& rng) {
        const double u = rng.uniform01() * product_cum.back();
        const auto it = std::upper_bound(product_cum.begin(), product_cum.end(), u);
        return static_cast<int>(it - product_cum.begin());
    };
    auto product_name = [](int p) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "P%02d", p);
        return std::string(buf);
    };
    // edge list with product indices, used for both output and signal terms
    struct EdgeTriple { int supplier; int customer; int product; };
    std::vector<EdgeTriple> edge_triples;
    for (const auto& [s, c] : pairs) {
        const int primary = sample_product(rng_product);
        edge_triples.push_back({s, c, primary});
        if (config.n_product_types > 1 && rng_product.uniform01() < 0.25) {
            int secondary = primary;
            while (secondary == primary) secondary = sample_product(rng_product);
            edge_triples.push_back({s, c, secondary});
        }
    }
    for (const auto& e : edge_triples) {
        data.edges.push_back({data.companies[static_cast<std::size_t>(e.supplier)].id,
                              data.companies[static_cast<std::size_t>(e.customer)].id,
                              product_name(e.product)});
    }

    // Supplier breach incidents over the history window, driven by the same
    // latent vulnerability the ratings reflect.
    Rng rng_breach(derive_seed(config.seed, 5));
    std::vector<int> breach_count(static_cast<std::size_t>(n_companies), 0);
    for (int s = n_entities; s < n_companies; ++s) {
        const double lam = config.supplier_breach_rate *
                           std::exp(0.9 * vulnerability[static_cast<std::size_t>(s)] - 0.405);
        const int count = std::min(rng_breach.poisson(lam), 12);
        breach_count[static_cast<std::size_t>(s)] = count;
        for (int k = 0; k < count; ++k) {
            const int offset = static_cast<int>(rng_breach.uniform_int(0, history.length() - 1));
            data.breaches.push_back({data.companies[static_cast<std::size_t>(s)].id,
                                     history.start.plus(offset)});
        }
    }

    // Entity breach probabilities. Local chains follow the role rules: the
    // direct suppliers are third parties; their suppliers are fourth parties
    // unless they already supply the entity directly.
    if (n_entities > 0) {
        std::vector<std::vector<int>> suppliers_of(static_cast<std::size_t>(n_companies));
        for (const auto& [s, c] : pairs) suppliers_of[static_cast<std::size_t>(c)].push_back(s);

        struct SignalTerms {
            double breaches = 0.0;
            double rating_deficit = 0.0;
            double exposure = 0.0;
            double product = 0.0;
        };
        std::vector<SignalTerms> terms(static_cast<std::size_t>(n_entities));
        std::vector<double> log_emp(static_cast<std::size_t>(n_entities));
        std::vector<double> own_security(static_cast<std::size_t>(n_entities));

        std::vector<std::vector<int>> products_of(static_cast<std::size_t>(n_companies));
        for (const auto& e : edge_triples) {
            products_of[static_cast<std::size_t>(e.customer)].push_back(e.product);
        }

        for (int i = 0; i < n_entities; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            std::set<int> thirds(suppliers_of[ui].begin(), suppliers_of[ui].end());
            std::set<int> fourths;
            for (int t : thirds) {
                for (int s : suppliers_of[static_cast<std::size_t>(t)]) {
                    if (s != i && !thirds.count(s)) fourths.insert(s);
                }
            }
            SignalTerms& st = terms[ui];
            double third_sec = 0.0;
            for (int t : thirds) {
                st.breaches += breach_count[static_cast<std::size_t>(t)];
                third_sec += security_base[static_cast<std::size_t>(t)];
            }
            for (int f : fourths) st.breaches += breach_count[static_cast<std::size_t>(f)];
            st.exposure = static_cast<double>(thirds.size() + fourths.size());
            const double mean_third_sec =
                thirds.empty() ? pop_security : third_sec / static_cast<double>(thirds.size());
            st.rating_deficit = std::max(0.0, (pop_security - mean_third_sec) / 71.5);
            for (int p : products_of[ui]) st.product += product_risk[static_cast<std::size_t>(p)];

            log_emp[ui] = std::log(static_cast<double>(data.companies[ui].employees));
            own_security[ui] = security_base[ui];
        }

        auto standardize = [](std::vector<double>& v) {
            if (v.size() < 2) { for (double& x : v) x = 0.0; return; }
            const double m = mean(v);
            double sd = sample_sd(v);
            if (sd == 0.0) sd = 1.0;
            for (double& x : v) x = (x - m) / sd;
        };
        standardize(log_emp);
        standardize(own_security);
        auto scale_by_mean = [&](auto getter) {
            double m = 0.0;
            for (int i = 0; i < n_entities; ++i) m += getter(terms[static_cast<std::size_t>(i)]);
            m /= static_cast<double>(n_entities);
            return m > 0.0 ? m : 1.0;
        };
        const double m_breach = scale_by_mean([](const SignalTerms& t) { return t.breaches; });
        const double m_deficit = scale_by_mean([](const SignalTerms& t) { return t.rating_deficit; });
        const double m_exposure = scale_by_mean([](const SignalTerms& t) { return t.exposure; });
        const double m_product = scale_by_mean([](const SignalTerms& t) { return t.product; });

        std::vector<double> signal(static_cast<std::size_t>(n_entities), 0.0);
        for (int i = 0; i < n_entities; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            double s = config.signal_employee * log_emp[ui];
            auto it = config.signal_sector.find(data.companies[ui].sector);
            if (it != config.signal_sector.end()) s += it->second;
            s += config.signal_own_rating * (-own_security[ui]);
            s += config.signal_sc_breaches * terms[ui].breaches / m_breach;
            s += config.signal_sc_rating * terms[ui].rating_deficit / m_deficit;
            s += config.signal_sc_exposure * terms[ui].exposure / m_exposure;
            s += config.signal_sc_product * terms[ui].product / m_product;
            signal[ui] = s;
        }

        double bias = config.logit_bias;
        if (!std::isfinite(bias)) {
            // Bisection on the intercept so the mean probability matches the
            // configured rate.
            double lo = -30.0, hi = 10.0;
            for (int iter = 0; iter < 100; ++iter) {
                const double mid = 0.5 * (lo + hi);
                double m = 0.0;
                for (double s : signal) m += sigmoid(mid + s);
                m /= static_cast<double>(n_entities);
                if (m < config.base_breach_rate) lo = mid;
                else hi = mid;
            }
            bias = 0.5 * (lo + hi);
        }

        Rng rng_label(derive_seed(config.seed, 6));
        const MonthWindow label = config.label_window();
        data.entity_breach_probability.resize(static_cast<std::size_t>(n_entities));
        for (int i = 0; i < n_entities; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            const double p = sigmoid(bias + signal[ui]);
            data.entity_breach_probability[ui] = p;
            if (rng_label.uniform01() < p) {
                const int offset = static_cast<int>(rng_label.uniform_int(0, label.length() - 1));
                data.breaches.push_back({data.companies[ui].id, label.start.plus(offset)});
            }
        }
    }

    return data;
}

namespace {

void write_atomic(const std::string& dir, const std::string& name,
                  const std::vector<std::string>& columns,
                  const std::function<void(CsvWriter&)>& body) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path final_path = fs::path(dir) / name;
    const fs::path tmp_path = fs::path(dir) / (name + ".tmp");
    {
        std::ofstream out(tmp_path);
        if (!out) throw InputError("cannot write '" + tmp_path.string() + "'");
        CsvWriter writer(out, columns);
        body(writer);
    }
    fs::rename(tmp_path, final_path);
}

}  // namespace

void write_dataset(const SynthDataset& dataset, const std::string& dir) {
    write_atomic(dir, "companies.csv", {"id", "sector", "employee_count", "is_entity"},
                 [&](CsvWriter& w) {
                     for (const auto& c : dataset.companies) {
                         w.row({c.id, c.sector, std::to_string(c.employees),
                                c.is_entity ? "1" : "0"});
                     }
                 });
    write_atomic(dir, "ratings.csv", {"id", "month", "rating_name", "value"}, [&](CsvWriter& w) {
        for (const auto& r : dataset.ratings) {
            w.row({r.id, r.month.str(), r.rating, std::to_string(r.value)});
        }
    });
    write_atomic(dir, "edges.csv", {"supplier_id", "customer_id", "product_type"},
                 [&](CsvWriter& w) {
                     for (const auto& e : dataset.edges) {
                         w.row({e.supplier, e.customer, e.product});
                     }
                 });
    write_atomic(dir, "breaches.csv", {"id", "month"}, [&](CsvWriter& w) {
        for (const auto& b : dataset.breaches) {
            w.row({b.id, b.month.str()});
        }
    });
}

StatisticsReport statistics_report(const GlobalGraph& graph) {
    StatisticsReport report;
    auto add = [&](const std::string& name, double value, const std::string& reference) {
        report.rows.push_back({name, value, reference});
    };

    const auto n_entities = graph.entities.size();
    std::size_t n_third = 0, n_fourth = 0;
    std::vector<bool> is_entity(graph.companies.size(), false);
    for (int e : graph.entities) is_entity[static_cast<std::size_t>(e)] = true;
    for (std::size_t c = 0; c < graph.companies.size(); ++c) {
        if (is_entity[c] || graph.out_edges[c].empty()) continue;
        bool serves_entity = false;
        for (int e : graph.out_edges[c]) {
            if (is_entity[static_cast<std::size_t>(graph.edges[static_cast<std::size_t>(e)].customer)]) {
                serves_entity = true;
                break;
            }
        }
        (serves_entity ? n_third : n_fourth) += 1;
    }
    add("entities", static_cast<double>(n_entities), "38345");
    add("third_parties", static_cast<double>(n_third), "4875");
    add("fourth_parties", static_cast<double>(n_fourth), "5365");

    std::map<std::string, std::size_t> by_sector;
    std::size_t breached = 0;
    for (int e : graph.entities) {
        by_sector[graph.company(e).sector] += 1;
        if (!graph.company(e).breach_months.empty()) ++breached;
    }
    for (const auto& [sector, count] : by_sector) {
        std::string reference = "-";
        if (sector == "Healthcare") reference = "0.55";
        else if (sector == "OilGas") reference = "0.24";
        else if (sector == "Retail") reference = "0.21";
        add("sector_share_" + sector,
            n_entities ? static_cast<double>(count) / static_cast<double>(n_entities) : 0.0,
            reference);
    }
    add("entity_breach_share",
        n_entities ? static_cast<double>(breached) / static_cast<double>(n_entities) : 0.0,
        "0.0329 over three years");

    std::size_t third_entity_edges = 0, supplier_supplier_edges = 0;
    for (const auto& e : graph.edges) {
        if (is_entity[static_cast<std::size_t>(e.customer)]) ++third_entity_edges;
        else ++supplier_supplier_edges;
    }
    add("edges_to_entities", static_cast<double>(third_entity_edges), "600000");
    add("edges_between_suppliers", static_cast<double>(supplier_supplier_edges), "8000000");

    bool have_deciles = false;
    std::size_t supplier_count = 0;
    for (std::size_t c = 0; c < graph.companies.size(); ++c) {
        if (!graph.out_edges[c].empty()) ++supplier_count;
    }
    have_deciles = supplier_count >= 10;
    if (n_entities > 0) {
        add("median_degree_all", degree_cohort_stats(graph, DegreeCohort::All).median, "13");
        if (have_deciles) {
            add("median_degree_top_decile_served",
                degree_cohort_stats(graph, DegreeCohort::ServedByTopDecileSuppliers).median, "14");
            add("median_degree_bottom_decile_served",
                degree_cohort_stats(graph, DegreeCohort::ServedByBottomDecileSuppliers).median,
                "131");
        }
    }
    return report;
}

std::string StatisticsReport::to_text() const {
    std::ostringstream os;
    os << "metric                                   generated    reference [reference-only]\n";
    for (const auto& row : rows) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-40s %12.6g    %s\n", row.name.c_str(), row.generated,
                      row.reference.c_str());
        os << buf;
    }
    return os.str();
}

}  // namespace synth
}  // namespace scrisk
