// Compares the serial reference path against the OpenMP path for descriptor
// generation and pipeline evaluation, and checks that both produce
// identical records.

#include <omp.h>

#include <cstdio>
#include <cstring>

#include "fwrisk/experiments.hpp"

using namespace fwrisk;

namespace {

double time_once(const char* label, double serial_s, double parallel_s) {
    const double speedup = serial_s / parallel_s;
    std::printf("%-22s %10.3f ms %12.3f ms %8.2fx\n", label,
                1e3 * serial_s, 1e3 * parallel_s, speedup);
    return speedup;
}

}  // namespace

int main(int argc, char** argv) {
    std::int64_t n = 4000;
    if (argc > 1) n = std::atoll(argv[1]);

    std::printf("threads: %d, instances: %lld\n", omp_get_max_threads(),
                static_cast<long long>(n));
    std::printf("%-22s %13s %15s %9s\n", "phase", "serial", "openmp",
                "speedup");

    auto cfg = GeneratorConfig::defaults(n, 42);

    // Generation: the serial path is generate_one over a plain loop.
    double t0 = omp_get_wtime();
    const Mat l_c = jittered_cholesky(cfg.sigma_c);
    const Mat l_o = jittered_cholesky(cfg.sigma_o);
    std::vector<FirmwareDescriptor> serial_batch(n);
    for (std::int64_t i = 0; i < n; ++i)
        serial_batch[i] = generate_one(cfg, l_c, l_o, i);
    double serial_gen = omp_get_wtime() - t0;

    t0 = omp_get_wtime();
    auto parallel_batch = generate(cfg);
    double parallel_gen = omp_get_wtime() - t0;
    time_once("generate", serial_gen, parallel_gen);

    bool identical = serial_batch.size() == parallel_batch.size();
    for (std::size_t i = 0; identical && i < serial_batch.size(); ++i)
        identical = serial_batch[i].config == parallel_batch[i].config &&
                    serial_batch[i].structure == parallel_batch[i].structure;

    ParameterSet ps = ParameterSet::seeded(Dims{}, 7);
    SyntheticBackend backend;
    const std::vector<ExposureLevel> levels = {
        ExposureLevel::standard(Exposure::Medium),
        ExposureLevel::standard(Exposure::High)};

    RunOptions serial_opt;
    serial_opt.mode = ExecutionMode::Serial;
    t0 = omp_get_wtime();
    auto serial_records =
        run_pipeline(parallel_batch, levels, ps, backend, serial_opt);
    double serial_run = omp_get_wtime() - t0;

    RunOptions parallel_opt;
    parallel_opt.mode = ExecutionMode::Parallel;
    t0 = omp_get_wtime();
    auto parallel_records =
        run_pipeline(parallel_batch, levels, ps, backend, parallel_opt);
    double parallel_run = omp_get_wtime() - t0;
    time_once("pipeline", serial_run, parallel_run);

    for (std::size_t i = 0; identical && i < serial_records.size(); ++i)
        identical = record_to_csv(serial_records[i]) ==
                    record_to_csv(parallel_records[i]);
    std::printf("serial/openmp outputs identical: %s\n",
                identical ? "yes" : "NO");
    return identical ? 0 : 1;
}
