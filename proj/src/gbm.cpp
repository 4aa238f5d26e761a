#include "scrisk/gbm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "scrisk/error.hpp"
#include "scrisk/stats.hpp"

namespace scrisk {
namespace gbm {

namespace {
constexpr double kEps = 1e-16;  // division guard in gain and leaf formulas
}

void Hyperparams::validate() const {
    require(learning_rate > 0.0 && learning_rate <= 1.0, "learning_rate must be in (0,1]");
    require(n_estimators >= 0, "n_estimators must be >= 0");
    require(max_depth >= 1, "max_depth must be >= 1");
    require(l1_reg >= 0.0, "l1_reg must be >= 0");
    require(min_samples_leaf >= 1, "min_samples_leaf must be >= 1");
}

double Tree::eval(std::span<const double> x) const {
    int i = 0;
    while (!is_leaf(i)) {
        const Node& n = nodes[static_cast<std::size_t>(i)];
        i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
}

int Tree::max_path_depth() const {
    if (nodes.empty()) return 0;
    int deepest = 0;
    std::vector<std::pair<int, int>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [i, d] = stack.back();
        stack.pop_back();
        if (is_leaf(i)) {
            deepest = std::max(deepest, d);
        } else {
            const Node& n = nodes[static_cast<std::size_t>(i)];
            stack.push_back({n.left, d + 1});
            stack.push_back({n.right, d + 1});
        }
    }
    return deepest;
}

namespace {

struct SplitCand {
    double gain = 0.0;
    double threshold = 0.0;
    double g_left = 0.0;
    double h_left = 0.0;
    std::size_t count_left = 0;
    bool valid = false;
};

struct NodeStats {
    double g = 0.0;
    double h = 0.0;
    std::size_t count = 0;
};

double leaf_value(double g, double h, double l1) {
    const double mag = std::max(std::fabs(g) - l1, 0.0);
    if (mag == 0.0) return 0.0;
    return (g > 0.0 ? -mag : mag) / (h + kEps);
}

double gain_term(double g, double h) { return g * g / (h + kEps); }

// One boosting round: grows a depth-limited tree on (g, h), updates
// node_of_row to the final leaf of every row. Split search runs per feature
// (parallel across features); the cross-feature reduction is sequential in
// feature order so results are bit-identical to the serial path.
Tree grow_tree(std::span<const double> X, std::size_t n_rows, std::size_t n_cols,
               const std::vector<std::vector<std::uint32_t>>& sorted_idx,
               std::span<const double> g, std::span<const double> h,
               const Hyperparams& hp, std::vector<int>& node_of_row, Exec exec) {
    Tree tree;
    std::vector<NodeStats> stats;

    NodeStats root;
    for (std::size_t r = 0; r < n_rows; ++r) {
        root.g += g[r];
        root.h += h[r];
    }
    root.count = n_rows;
    tree.nodes.push_back({});
    tree.nodes[0].cover = static_cast<double>(n_rows);
    stats.push_back(root);
    std::fill(node_of_row.begin(), node_of_row.end(), 0);

    std::vector<int> active{0};
    for (int depth = 0; depth < hp.max_depth && !active.empty(); ++depth) {
        const std::size_t n_active = active.size();
        std::vector<int> slot_of_node(tree.nodes.size(), -1);
        for (std::size_t s = 0; s < n_active; ++s) {
            slot_of_node[static_cast<std::size_t>(active[s])] = static_cast<int>(s);
        }

        // Best split per (feature, slot); features are independent scans.
        std::vector<SplitCand> cands(n_cols * n_active);
        parallel_for(n_cols, exec, [&](std::size_t f) {
            struct ScanState {
                double g_left = 0.0;
                double h_left = 0.0;
                std::size_t count = 0;
                double prev = 0.0;
            };
            std::vector<ScanState> scan(n_active);
            SplitCand* best = &cands[f * n_active];
            for (std::uint32_t r : sorted_idx[f]) {
                const int node = node_of_row[r];
                const int s = slot_of_node[static_cast<std::size_t>(node)];
                if (s < 0) continue;
                ScanState& st = scan[static_cast<std::size_t>(s)];
                const double v = X[r * n_cols + f];
                const NodeStats& ns = stats[static_cast<std::size_t>(node)];
                if (st.count > 0 && v > st.prev && st.count >= static_cast<std::size_t>(hp.min_samples_leaf) &&
                    ns.count - st.count >= static_cast<std::size_t>(hp.min_samples_leaf)) {
                    const double gain = gain_term(st.g_left, st.h_left) +
                                        gain_term(ns.g - st.g_left, ns.h - st.h_left) -
                                        gain_term(ns.g, ns.h);
                    SplitCand& b = best[s];
                    if (gain > 0.0 && (!b.valid || gain > b.gain)) {
                        b.valid = true;
                        b.gain = gain;
                        b.threshold = 0.5 * (st.prev + v);
                        b.g_left = st.g_left;
                        b.h_left = st.h_left;
                        b.count_left = st.count;
                    }
                }
                st.g_left += g[r];
                st.h_left += h[r];
                st.count += 1;
                st.prev = v;
            }
        });

        // Sequential reduction, lowest feature index wins ties.
        std::vector<int> next_active;
        for (std::size_t s = 0; s < n_active; ++s) {
            const SplitCand* winner = nullptr;
            int winner_feature = -1;
            for (std::size_t f = 0; f < n_cols; ++f) {
                const SplitCand& c = cands[f * n_active + s];
                if (c.valid && (winner == nullptr || c.gain > winner->gain)) {
                    winner = &c;
                    winner_feature = static_cast<int>(f);
                }
            }
            if (winner == nullptr) continue;

            const int node = active[s];
            const NodeStats parent = stats[static_cast<std::size_t>(node)];
            const int left = static_cast<int>(tree.nodes.size());
            const int right = left + 1;
            tree.nodes[static_cast<std::size_t>(node)].feature = winner_feature;
            tree.nodes[static_cast<std::size_t>(node)].threshold = winner->threshold;
            tree.nodes[static_cast<std::size_t>(node)].left = left;
            tree.nodes[static_cast<std::size_t>(node)].right = right;

            Tree::Node child;
            child.cover = static_cast<double>(winner->count_left);
            tree.nodes.push_back(child);
            stats.push_back({winner->g_left, winner->h_left, winner->count_left});
            child.cover = static_cast<double>(parent.count - winner->count_left);
            tree.nodes.push_back(child);
            stats.push_back({parent.g - winner->g_left, parent.h - winner->h_left,
                             parent.count - winner->count_left});
            next_active.push_back(left);
            next_active.push_back(right);
        }
        if (next_active.empty()) break;

        parallel_for(n_rows, exec, [&](std::size_t r) {
            const int node = node_of_row[r];
            const Tree::Node& n = tree.nodes[static_cast<std::size_t>(node)];
            if (n.feature >= 0) {
                node_of_row[r] =
                    X[r * n_cols + static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                       : n.right;
            }
        });
        active = std::move(next_active);
    }

    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        if (tree.nodes[i].feature < 0) {
            tree.nodes[i].value = leaf_value(stats[i].g, stats[i].h, hp.l1_reg);
        }
    }
    return tree;
}

}  // namespace

GbmModel fit(std::span<const double> X, std::size_t n_rows,
             const std::vector<std::string>& feature_names, std::span<const int> y,
             const Hyperparams& hp, std::uint64_t seed, Exec exec) {
    (void)seed;  // reserved for subsampling extensions
    hp.validate();
    const std::size_t n_cols = feature_names.size();
    require(n_rows >= 2, "fit: need at least 2 rows");
    require(n_cols >= 1, "fit: need at least 1 feature");
    require(X.size() == n_rows * n_cols, "fit: matrix size mismatch");
    require(y.size() == n_rows, "fit: label count mismatch");
    for (double v : X) {
        require(std::isfinite(v), "fit: non-finite feature value");
    }
    std::size_t n_pos = 0;
    for (int label : y) {
        require(label == 0 || label == 1, "fit: labels must be 0/1");
        n_pos += static_cast<std::size_t>(label);
    }
    require(n_pos > 0 && n_pos < n_rows, "fit: both classes must be present");

    GbmModel model;
    model.feature_names = feature_names;
    model.learning_rate = hp.learning_rate;
    const double prevalence = static_cast<double>(n_pos) / static_cast<double>(n_rows);
    model.base_score = std::log(prevalence / (1.0 - prevalence));

    if (hp.n_estimators == 0) return model;

    // Presorted row order per feature, ties by row index.
    std::vector<std::vector<std::uint32_t>> sorted_idx(n_cols);
    parallel_for(n_cols, exec, [&](std::size_t f) {
        auto& idx = sorted_idx[f];
        idx.resize(n_rows);
        std::iota(idx.begin(), idx.end(), 0u);
        std::stable_sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
            return X[a * n_cols + f] < X[b * n_cols + f];
        });
    });

    std::vector<double> margin(n_rows, model.base_score);
    std::vector<double> grad(n_rows), hess(n_rows);
    std::vector<int> node_of_row(n_rows, 0);

    for (int round = 0; round < hp.n_estimators; ++round) {
        for (std::size_t r = 0; r < n_rows; ++r) {
            const double p = sigmoid(margin[r]);
            grad[r] = p - static_cast<double>(y[r]);
            hess[r] = p * (1.0 - p);
        }
        Tree tree = grow_tree(X, n_rows, n_cols, sorted_idx, grad, hess, hp, node_of_row, exec);
        // node_of_row now holds each row's leaf.
        for (std::size_t r = 0; r < n_rows; ++r) {
            margin[r] += hp.learning_rate *
                         tree.nodes[static_cast<std::size_t>(node_of_row[r])].value;
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

double predict_margin(const GbmModel& model, std::span<const double> x) {
    require(x.size() == model.n_features(), "predict: feature dimension mismatch");
    double sum = 0.0;
    for (const Tree& t : model.trees) sum += t.eval(x);
    return model.base_score + model.learning_rate * sum;
}

double predict_proba(const GbmModel& model, std::span<const double> x) {
    return sigmoid(predict_margin(model, x));
}

std::vector<double> predict_margins(const GbmModel& model, std::span<const double> X,
                                    std::size_t n_rows, Exec exec) {
    const std::size_t n_cols = model.n_features();
    require(X.size() == n_rows * n_cols, "predict: matrix size mismatch");
    std::vector<double> out(n_rows);
    parallel_for(n_rows, exec, [&](std::size_t r) {
        out[r] = predict_margin(model, X.subspan(r * n_cols, n_cols));
    });
    return out;
}

double logloss(std::span<const double> margins, std::span<const int> y) {
    require(margins.size() == y.size() && !margins.empty(), "logloss: size mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < margins.size(); ++i) {
        const double z = y[i] == 1 ? margins[i] : -margins[i];
        // log(1 + exp(-z)) without overflow
        sum += z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
    }
    return sum / static_cast<double>(margins.size());
}

namespace {

std::string hex(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

double parse_hex(const std::string& tok, const std::string& context) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &pos);
    } catch (const std::exception&) {
        throw ValidationError(context + ": bad number '" + tok + "'");
    }
    require(pos == tok.size(), context + ": bad number '" + tok + "'");
    return v;
}

}  // namespace

void serialize(const GbmModel& model, std::ostream& out) {
    out << "scrisk-gbm 1\n";
    out << "base_score " << hex(model.base_score) << "\n";
    out << "learning_rate " << hex(model.learning_rate) << "\n";
    out << "features " << model.feature_names.size() << "\n";
    for (const auto& name : model.feature_names) {
        require_internal(name.find_first_of(" \t\n") == std::string::npos,
                         "feature name contains whitespace: '" + name + "'");
        out << "f " << name << "\n";
    }
    out << "trees " << model.trees.size() << "\n";
    for (const Tree& t : model.trees) {
        out << "tree " << t.nodes.size() << "\n";
        for (const Tree::Node& n : t.nodes) {
            if (n.feature < 0) {
                out << "l " << hex(n.value) << " " << hex(n.cover) << "\n";
            } else {
                out << "s " << n.feature << " " << hex(n.threshold) << " " << n.left << " "
                    << n.right << " " << hex(n.cover) << "\n";
            }
        }
    }
    out << "end\n";
}

GbmModel deserialize(std::istream& in) {
    auto next_line = [&](const std::string& what) {
        std::string line;
        if (!std::getline(in, line)) {
            throw ValidationError("model file: unexpected end of input, expected " + what);
        }
        return line;
    };
    auto tokens = [](const std::string& line) {
        std::istringstream is(line);
        std::vector<std::string> toks;
        std::string t;
        while (is >> t) toks.push_back(t);
        return toks;
    };
    auto expect = [&](const std::string& what, std::size_t n) {
        auto toks = tokens(next_line(what));
        require(!toks.empty() && toks[0] == what && toks.size() == n,
                "model file: malformed '" + what + "' line");
        return toks;
    };

    require(next_line("header") == "scrisk-gbm 1", "model file: bad header");
    GbmModel model;
    model.base_score = parse_hex(expect("base_score", 2)[1], "base_score");
    model.learning_rate = parse_hex(expect("learning_rate", 2)[1], "learning_rate");
    const long n_features = std::stol(expect("features", 2)[1]);
    require(n_features >= 0, "model file: bad feature count");
    for (long i = 0; i < n_features; ++i) {
        model.feature_names.push_back(expect("f", 2)[1]);
    }
    const long n_trees = std::stol(expect("trees", 2)[1]);
    require(n_trees >= 0, "model file: bad tree count");
    for (long t = 0; t < n_trees; ++t) {
        const long n_nodes = std::stol(expect("tree", 2)[1]);
        require(n_nodes >= 1, "model file: bad node count");
        Tree tree;
        for (long i = 0; i < n_nodes; ++i) {
            auto toks = tokens(next_line("node"));
            require(!toks.empty(), "model file: empty node line");
            Tree::Node node;
            if (toks[0] == "l") {
                require(toks.size() == 3, "model file: malformed leaf");
                node.value = parse_hex(toks[1], "leaf value");
                node.cover = parse_hex(toks[2], "leaf cover");
            } else if (toks[0] == "s") {
                require(toks.size() == 6, "model file: malformed split");
                node.feature = std::stoi(toks[1]);
                node.threshold = parse_hex(toks[2], "threshold");
                node.left = std::stoi(toks[3]);
                node.right = std::stoi(toks[4]);
                node.cover = parse_hex(toks[5], "split cover");
                require(node.feature >= 0 && node.feature < static_cast<int>(n_features),
                        "model file: split feature out of range");
                require(node.left > 0 && node.left < n_nodes && node.right > 0 &&
                        node.right < n_nodes, "model file: child index out of range");
            } else {
                throw ValidationError("model file: unknown node kind '" + toks[0] + "'");
            }
            tree.nodes.push_back(node);
        }
        model.trees.push_back(std::move(tree));
    }
    require(next_line("end") == "end", "model file: missing end marker");
    return model;
}

std::string to_string(const GbmModel& model) {
    std::ostringstream os;
    serialize(model, os);
    return os.str();
}

}  // namespace gbm
}  // namespace scrisk
