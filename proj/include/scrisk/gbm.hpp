#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "scrisk/parallel.hpp"

namespace scrisk {
namespace gbm {

struct Hyperparams {
    double learning_rate = 0.1;   // (0, 1]
    int n_estimators = 100;       // >= 0; 0 keeps the base score only
    int max_depth = 3;            // >= 1
    double l1_reg = 0.0;          // >= 0, soft-threshold on leaf values
    int min_samples_leaf = 20;    // >= 1

    void validate() const;
};

// Depth-limited regression tree over log-odds increments. Internal nodes
// route x to the left child iff x[feature] <= threshold; leaves hold the
// raw value (the ensemble learning rate is applied at prediction time).
// Every node carries its training-sample cover for the explainer.
struct Tree {
    struct Node {
        int feature = -1;         // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;       // leaves only
        double cover = 0.0;       // training samples through the node
    };
    std::vector<Node> nodes;      // nodes[0] is the root

    bool is_leaf(int i) const { return nodes[static_cast<std::size_t>(i)].feature < 0; }
    double eval(std::span<const double> x) const;
    int max_path_depth() const;   // edges on the longest root-to-leaf path
};

// Boosted ensemble: margin(x) = base_score + learning_rate * sum_k tree_k(x),
// probability = sigmoid(margin). Immutable after fit; predict is safe to
// call concurrently.
struct GbmModel {
    double base_score = 0.0;
    double learning_rate = 0.1;
    std::vector<std::string> feature_names;
    std::vector<Tree> trees;

    std::size_t n_features() const { return feature_names.size(); }
};

// Second-order (Newton) boosting of the logistic loss. Per round, one tree is
// fit to gradients g_i = p_i - y_i and hessians h_i = p_i (1 - p_i); split
// gain is G_L^2/(H_L+eps) + G_R^2/(H_R+eps) - G^2/(H+eps) searched greedily
// over every feature and every midpoint of consecutive distinct values, and
// leaf values are the L1 soft-threshold -sign(G) max(|G|-l1, 0)/(H+eps).
// Splits with non-positive gain or a child below min_samples_leaf are
// rejected. The result is independent of `exec` (bit-identical) and of
// `seed`, which is reserved for subsampling extensions.
GbmModel fit(std::span<const double> X, std::size_t n_rows,
             const std::vector<std::string>& feature_names, std::span<const int> y,
             const Hyperparams& hp, std::uint64_t seed, Exec exec = Exec::Parallel);

double predict_margin(const GbmModel& model, std::span<const double> x);
double predict_proba(const GbmModel& model, std::span<const double> x);

std::vector<double> predict_margins(const GbmModel& model, std::span<const double> X,
                                    std::size_t n_rows, Exec exec = Exec::Parallel);

// Mean logistic loss of margins against binary labels.
double logloss(std::span<const double> margins, std::span<const int> y);

// Self-describing text serialization; doubles are written as hexfloats so a
// round-trip is bit-exact.
void serialize(const GbmModel& model, std::ostream& out);
GbmModel deserialize(std::istream& in);
std::string to_string(const GbmModel& model);

}  // namespace gbm
}  // namespace scrisk
