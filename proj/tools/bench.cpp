// Compares the serial reference implementations against the OpenMP kernels
// on a generated dataset: feature assembly, model fitting, batch prediction,
// and per-sample attribution.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "scrisk/eval.hpp"
#include "scrisk/features.hpp"
#include "scrisk/gbm.hpp"
#include "scrisk/parallel.hpp"
#include "scrisk/shap.hpp"
#include "scrisk/synth.hpp"

using namespace scrisk;

namespace {

double time_ms(const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void report(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-24s serial %9.1f ms   parallel %9.1f ms   speedup %.2fx\n", name, serial_ms,
                parallel_ms, parallel_ms > 0.0 ? serial_ms / parallel_ms : 0.0);
}

}  // namespace

int main(int argc, char** argv) {
    synth::SynthConfig config;
    if (argc > 1) config.n_entities = std::stoi(argv[1]);
    std::printf("threads: %d, entities: %d\n", num_threads(), config.n_entities);

    const auto dataset = synth::generate(config);
    const std::string dir = "bench_data";
    synth::write_dataset(dataset, dir);
    const auto graph = load_graph_files(dir + "/companies.csv", dir + "/ratings.csv",
                                        dir + "/edges.csv", dir + "/breaches.csv");
    const auto catalog = synth::catalog_for(config);
    const auto table = features::build_product_risk_table(graph, catalog, graph.entities);

    features::FeatureMatrix serial_matrix, parallel_matrix;
    const double fa_serial = time_ms([&] {
        serial_matrix = features::build_matrix(graph, catalog, table, Exec::Serial);
    });
    const double fa_parallel = time_ms([&] {
        parallel_matrix = features::build_matrix(graph, catalog, table, Exec::Parallel);
    });
    report("feature assembly", fa_serial, fa_parallel);
    if (serial_matrix.values != parallel_matrix.values) {
        std::printf("MISMATCH: feature kernels disagree\n");
        return 1;
    }

    auto matrix = parallel_matrix;
    std::vector<int> all_rows(matrix.rows());
    for (std::size_t i = 0; i < matrix.rows(); ++i) all_rows[i] = static_cast<int>(i);
    features::apply_impute(matrix, features::compute_impute(matrix, all_rows));

    gbm::Hyperparams hp;
    hp.learning_rate = 0.1;
    hp.n_estimators = 200;
    hp.max_depth = 5;
    hp.min_samples_leaf = 20;
    gbm::GbmModel serial_model, parallel_model;
    const double fit_serial = time_ms([&] {
        serial_model = gbm::fit(matrix.values, matrix.rows(), matrix.names, matrix.labels, hp, 7,
                                Exec::Serial);
    });
    const double fit_parallel = time_ms([&] {
        parallel_model = gbm::fit(matrix.values, matrix.rows(), matrix.names, matrix.labels, hp, 7,
                                  Exec::Parallel);
    });
    report("gbm fit", fit_serial, fit_parallel);
    if (gbm::to_string(serial_model) != gbm::to_string(parallel_model)) {
        std::printf("MISMATCH: fit kernels disagree\n");
        return 1;
    }

    std::vector<double> serial_margins, parallel_margins;
    const double pr_serial = time_ms([&] {
        serial_margins = gbm::predict_margins(parallel_model, matrix.values, matrix.rows(),
                                              Exec::Serial);
    });
    const double pr_parallel = time_ms([&] {
        parallel_margins = gbm::predict_margins(parallel_model, matrix.values, matrix.rows(),
                                                Exec::Parallel);
    });
    report("batch predict", pr_serial, pr_parallel);
    if (serial_margins != parallel_margins) {
        std::printf("MISMATCH: predict kernels disagree\n");
        return 1;
    }

    std::vector<double> serial_phi, parallel_phi;
    const double sh_serial = time_ms([&] {
        serial_phi = shap::attributions(parallel_model, matrix.values, matrix.rows(), Exec::Serial);
    });
    const double sh_parallel = time_ms([&] {
        parallel_phi = shap::attributions(parallel_model, matrix.values, matrix.rows(),
                                          Exec::Parallel);
    });
    report("tree shap", sh_serial, sh_parallel);
    if (serial_phi != parallel_phi) {
        std::printf("MISMATCH: attribution kernels disagree\n");
        return 1;
    }
    return 0;
}
