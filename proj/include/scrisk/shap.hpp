#pragma once

#include <span>
#include <string>
#include <vector>

#include "scrisk/gbm.hpp"
#include "scrisk/parallel.hpp"

namespace scrisk {
namespace shap {

// Additive per-feature attribution of one prediction's margin:
// base_value + sum(phi) equals predict_margin(model, x).
struct Attribution {
    double base_value = 0.0;
    std::vector<double> phi;
};

// Exact Shapley values of the margin under path-dependent feature
// perturbation: when a feature is out of the active subset, the tree walk
// branches by the training cover recorded on each node. Attributions are
// additive across trees. The `background` matrix is accepted for a future
// interventional mode and is not read by the path-dependent computation.
// Throws ValidationError when a tree lacks cover metadata.
Attribution tree_shap(const gbm::GbmModel& model, std::span<const double> x,
                      std::span<const double> background = {});

// Per-row attributions (row-major n_rows x n_features), parallel across
// samples and bit-identical to the serial path.
std::vector<double> attributions(const gbm::GbmModel& model, std::span<const double> X,
                                 std::size_t n_rows, Exec exec = Exec::Parallel);

struct ImportanceEntry {
    std::string feature;
    double mean_abs_phi = 0.0;
};

// Mean |phi| per feature over X, descending, ties by feature name.
std::vector<ImportanceEntry> global_importance(const gbm::GbmModel& model,
                                               std::span<const double> X, std::size_t n_rows,
                                               Exec exec = Exec::Parallel);

}  // namespace shap
}  // namespace scrisk
