#include "scrisk/shap.hpp"

#include <algorithm>
#include <cmath>

#include "scrisk/error.hpp"

namespace scrisk {
namespace shap {

namespace {

using gbm::Tree;

// One step of the feature path walked from the root: the feature that split,
// the fraction of cover flowing through when the feature is out of the subset
// (zero_fraction), whether x follows the path (one_fraction), and the
// permutation weight.
struct PathElem {
    int feature = -1;
    double zero_fraction = 1.0;
    double one_fraction = 1.0;
    double weight = 0.0;
};

void extend(std::vector<PathElem>& path, double zero_fraction, double one_fraction, int feature) {
    const int depth = static_cast<int>(path.size());
    path.push_back({feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0});
    for (int i = depth - 1; i >= 0; --i) {
        path[static_cast<std::size_t>(i + 1)].weight +=
            one_fraction * path[static_cast<std::size_t>(i)].weight *
            static_cast<double>(i + 1) / static_cast<double>(depth + 1);
        path[static_cast<std::size_t>(i)].weight =
            zero_fraction * path[static_cast<std::size_t>(i)].weight *
            static_cast<double>(depth - i) / static_cast<double>(depth + 1);
    }
}

void unwind(std::vector<PathElem>& path, std::size_t i) {
    const int depth = static_cast<int>(path.size()) - 1;
    double n = path[static_cast<std::size_t>(depth)].weight;
    if (path[i].one_fraction != 0.0) {
        for (int j = depth - 1; j >= 0; --j) {
            const double tmp = path[static_cast<std::size_t>(j)].weight;
            path[static_cast<std::size_t>(j)].weight =
                n * static_cast<double>(depth + 1) / static_cast<double>(j + 1);
            n = tmp - path[static_cast<std::size_t>(j)].weight * path[i].zero_fraction *
                          static_cast<double>(depth - j) / static_cast<double>(depth + 1);
        }
    } else {
        for (int j = depth - 1; j >= 0; --j) {
            path[static_cast<std::size_t>(j)].weight =
                path[static_cast<std::size_t>(j)].weight * static_cast<double>(depth + 1) /
                (path[i].zero_fraction * static_cast<double>(depth - j));
        }
    }
    for (std::size_t j = i; j < static_cast<std::size_t>(depth); ++j) {
        path[j].feature = path[j + 1].feature;
        path[j].zero_fraction = path[j + 1].zero_fraction;
        path[j].one_fraction = path[j + 1].one_fraction;
    }
    path.pop_back();
}

double unwound_sum(const std::vector<PathElem>& path, std::size_t i) {
    const int depth = static_cast<int>(path.size()) - 1;
    double total = 0.0;
    if (path[i].one_fraction != 0.0) {
        double n = path[static_cast<std::size_t>(depth)].weight;
        for (int j = depth - 1; j >= 0; --j) {
            const double tmp = n / (static_cast<double>(j + 1) * path[i].one_fraction);
            total += tmp;
            n = path[static_cast<std::size_t>(j)].weight -
                tmp * path[i].zero_fraction * static_cast<double>(depth - j);
        }
    } else {
        for (int j = depth - 1; j >= 0; --j) {
            total += path[static_cast<std::size_t>(j)].weight /
                     (path[i].zero_fraction * static_cast<double>(depth - j));
        }
    }
    return total * static_cast<double>(depth + 1);
}

void recurse(const Tree& tree, std::span<const double> x, double scale, double* phi,
             std::vector<PathElem> path, int node, double zero_fraction, double one_fraction,
             int parent_feature) {
    if (zero_fraction == 0.0 && one_fraction == 0.0) return;
    extend(path, zero_fraction, one_fraction, parent_feature);
    const Tree::Node& n = tree.nodes[static_cast<std::size_t>(node)];
    if (n.feature < 0) {
        for (std::size_t i = 1; i < path.size(); ++i) {
            phi[path[i].feature] += unwound_sum(path, i) *
                                    (path[i].one_fraction - path[i].zero_fraction) * n.value *
                                    scale;
        }
        return;
    }

    const int hot = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    const int cold = hot == n.left ? n.right : n.left;
    double incoming_zero = 1.0;
    double incoming_one = 1.0;
    for (std::size_t k = 1; k < path.size(); ++k) {
        if (path[k].feature == n.feature) {
            incoming_zero = path[k].zero_fraction;
            incoming_one = path[k].one_fraction;
            unwind(path, k);
            break;
        }
    }
    const double cover = n.cover;
    const double hot_cover = tree.nodes[static_cast<std::size_t>(hot)].cover;
    const double cold_cover = tree.nodes[static_cast<std::size_t>(cold)].cover;
    recurse(tree, x, scale, phi, path, hot, incoming_zero * hot_cover / cover, incoming_one,
            n.feature);
    recurse(tree, x, scale, phi, path, cold, incoming_zero * cold_cover / cover, 0.0, n.feature);
}

double expected_leaf_value(const Tree& tree, int node) {
    const Tree::Node& n = tree.nodes[static_cast<std::size_t>(node)];
    if (n.feature < 0) return n.value;
    const double cl = tree.nodes[static_cast<std::size_t>(n.left)].cover;
    const double cr = tree.nodes[static_cast<std::size_t>(n.right)].cover;
    // Same cover fractions as the attribution recursion.
    return (cl * expected_leaf_value(tree, n.left) + cr * expected_leaf_value(tree, n.right)) /
           n.cover;
}

void check_cover(const gbm::GbmModel& model) {
    for (const Tree& t : model.trees) {
        require(!t.nodes.empty() && t.nodes[0].cover > 0.0,
                "tree_shap: model tree is missing cover metadata");
    }
}

void attribute_into(const gbm::GbmModel& model, std::span<const double> x, double* phi) {
    for (const Tree& t : model.trees) {
        recurse(t, x, model.learning_rate, phi, {}, 0, 1.0, 1.0, -1);
    }
}

}  // namespace

Attribution tree_shap(const gbm::GbmModel& model, std::span<const double> x,
                      std::span<const double> background) {
    (void)background;  // reserved for an interventional mode
    require(x.size() == model.n_features(), "tree_shap: feature dimension mismatch");
    check_cover(model);
    Attribution a;
    a.phi.assign(model.n_features(), 0.0);
    a.base_value = model.base_score;
    for (const Tree& t : model.trees) {
        a.base_value += model.learning_rate * expected_leaf_value(t, 0);
    }
    attribute_into(model, x, a.phi.data());
    return a;
}

std::vector<double> attributions(const gbm::GbmModel& model, std::span<const double> X,
                                 std::size_t n_rows, Exec exec) {
    const std::size_t n_cols = model.n_features();
    require(X.size() == n_rows * n_cols, "attributions: matrix size mismatch");
    check_cover(model);
    std::vector<double> phi(n_rows * n_cols, 0.0);
    parallel_for(n_rows, exec, [&](std::size_t r) {
        attribute_into(model, X.subspan(r * n_cols, n_cols), &phi[r * n_cols]);
    });
    return phi;
}

std::vector<ImportanceEntry> global_importance(const gbm::GbmModel& model,
                                               std::span<const double> X, std::size_t n_rows,
                                               Exec exec) {
    require(n_rows > 0, "global_importance: empty matrix");
    const std::size_t n_cols = model.n_features();
    const std::vector<double> phi = attributions(model, X, n_rows, exec);
    std::vector<ImportanceEntry> out(n_cols);
    for (std::size_t c = 0; c < n_cols; ++c) {
        double sum = 0.0;
        for (std::size_t r = 0; r < n_rows; ++r) sum += std::fabs(phi[r * n_cols + c]);
        out[c] = {model.feature_names[c], sum / static_cast<double>(n_rows)};
    }
    std::sort(out.begin(), out.end(), [](const ImportanceEntry& a, const ImportanceEntry& b) {
        if (a.mean_abs_phi != b.mean_abs_phi) return a.mean_abs_phi > b.mean_abs_phi;
        return a.feature < b.feature;
    });
    return out;
}

}  // namespace shap
}  // namespace scrisk
