// Compares the parallel kernels against their serial references: batched
// backpropagation, batched forward evaluation, and the oracle reward-table
// fill. Reports wall time and the worst absolute deviation.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include <omp.h>

#include "oia/dqn.hpp"
#include "oia/env.hpp"
#include "oia/harness.hpp"
#include "oia/mlp.hpp"
#include "oia/rng.hpp"
#include "oia/tabular.hpp"

namespace {

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

double max_abs_diff(const oia::MlpParameters& a, const oia::MlpParameters& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.weights.size(); ++i) {
        for (std::size_t k = 0; k < a.weights[i].size(); ++k)
            worst = std::max(worst, std::abs(a.weights[i][k] - b.weights[i][k]));
        for (std::size_t k = 0; k < a.biases[i].size(); ++k)
            worst = std::max(worst, std::abs(a.biases[i][k] - b.biases[i][k]));
    }
    return worst;
}

}  // namespace

int main() {
    const int threads = oia::thread_limit_from_env();
    if (threads > 0) omp_set_num_threads(threads);
    std::printf("max OpenMP threads: %d\n\n", omp_get_max_threads());

    oia::Rng rng(20240817);
    const std::vector<int> architecture = {55, 128, 128, 32};
    const oia::MlpParameters net = oia::init_mlp(architecture, rng);

    const int batch_size = 256;
    oia::TrainingBatch batch;
    for (int b = 0; b < batch_size; ++b) {
        std::vector<double> obs(architecture.front());
        for (double& x : obs) x = rng.uniform();
        batch.observations.push_back(std::move(obs));
        batch.actions.push_back(static_cast<int>(rng.uniform_int(architecture.back())));
        batch.targets.push_back(10.0 * rng.uniform());
    }

    const int reps = 200;
    double t0 = now_seconds();
    oia::MlpParameters grad_serial = oia::backward_serial(net, batch);
    for (int r = 1; r < reps; ++r) grad_serial = oia::backward_serial(net, batch);
    const double serial_time = (now_seconds() - t0) / reps;

    t0 = now_seconds();
    oia::MlpParameters grad_parallel = oia::backward(net, batch);
    for (int r = 1; r < reps; ++r) grad_parallel = oia::backward(net, batch);
    const double parallel_time = (now_seconds() - t0) / reps;

    std::printf("backward  (batch %d): serial %8.3f ms, parallel %8.3f ms, speedup %.2fx, "
                "max |diff| %.3e\n",
                batch_size, 1e3 * serial_time, 1e3 * parallel_time,
                serial_time / parallel_time, max_abs_diff(grad_serial, grad_parallel));

    t0 = now_seconds();
    for (int r = 0; r < reps; ++r) {
        double sink = 0.0;
        for (const auto& obs : batch.observations) sink += oia::forward(net, obs)[0];
        if (sink == 42.0) std::printf("-");
    }
    const double fwd_serial = (now_seconds() - t0) / reps;

    t0 = now_seconds();
    for (int r = 0; r < reps; ++r) {
        const auto rows = oia::forward_batch(net, batch.observations);
        if (rows[0][0] == 42.0) std::printf("-");
    }
    const double fwd_parallel = (now_seconds() - t0) / reps;

    std::printf("forward   (batch %d): serial %8.3f ms, parallel %8.3f ms, speedup %.2fx\n",
                batch_size, 1e3 * fwd_serial, 1e3 * fwd_parallel, fwd_serial / fwd_parallel);

    // Oracle reward table: per-cell derived streams make the fill
    // bit-identical for every thread count.
    oia::EnvConfig small;
    small.users = 2;
    small.snr_levels = 3;
    small.ia.max_iter = 200;
    small.ia.tol = 1e-6;

    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    t0 = now_seconds();
    const oia::OracleResult oracle_serial = oia::value_iteration_oracle(small, 500, 0.5, 7);
    const double oracle_serial_time = now_seconds() - t0;
    omp_set_num_threads(saved);

    t0 = now_seconds();
    const oia::OracleResult oracle_parallel = oia::value_iteration_oracle(small, 500, 0.5, 7);
    const double oracle_parallel_time = now_seconds() - t0;

    double worst = 0.0;
    for (std::size_t i = 0; i < oracle_serial.reward_table.size(); ++i)
        worst = std::max(worst, std::abs(oracle_serial.reward_table[i] -
                                         oracle_parallel.reward_table[i]));
    std::printf("oracle reward table:  serial %8.3f ms, parallel %8.3f ms, speedup %.2fx, "
                "max |diff| %.3e (expect exactly 0)\n",
                1e3 * oracle_serial_time, 1e3 * oracle_parallel_time,
                oracle_serial_time / oracle_parallel_time, worst);
    return worst == 0.0 ? 0 : 1;
}
