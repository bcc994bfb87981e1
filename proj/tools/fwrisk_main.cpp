#include <omp.h>

#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fwrisk/experiments.hpp"
#include "fwrisk/io.hpp"

namespace {

using namespace fwrisk;

std::vector<ExposureLevel> parse_levels(const std::string& csv) {
    std::vector<ExposureLevel> levels;
    std::string item;
    std::stringstream ss(csv);
    while (std::getline(ss, item, ','))
        if (!item.empty())
            levels.push_back(ExposureLevel::standard(exposure_from_string(item)));
    if (levels.empty()) throw std::invalid_argument("empty exposure list");
    return levels;
}

std::unique_ptr<Backend> make_backend(const std::string& kind,
                                      const RemoteConfig& remote) {
    if (kind == "synthetic") return std::make_unique<SyntheticBackend>();
    if (kind == "remote") return std::make_unique<RemoteBackend>(remote);
    throw std::invalid_argument("unknown backend: " + kind);
}

void print_record(const RiskRecord& r) {
    auto line = [](const char* key, double v) {
        std::printf("%-18s %.6f\n", key, v);
    };
    std::printf("%-18s %lld\n", "instance_id",
                static_cast<long long>(r.instance_id));
    std::printf("%-18s %s\n", "exposure", to_string(r.exposure).c_str());
    std::printf("%-18s %s\n", "variant", to_string(r.variant).c_str());
    line("r_cfg", r.display[0]);
    line("r_struct", r.display[1]);
    line("r_fusion", r.display[2]);
    line("r1_raw", r.r1_raw);
    line("r2_raw", r.r2_raw);
    line("p_fusion", r.p_fusion);
    line("p_final", r.p_final);
    line("divergence", r.divergence);
    std::printf("%-18s", "d_jk");
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
            if (j != k) std::printf(" %.4f", r.d_pairwise[j][k]);
    std::printf("\n");
    line("entropy", r.entropy);
    line("e_mis", r.e_mis);
    line("e_weighted", r.e_weighted);
    line("psi", r.psi);
    line("e_global", r.e_global);
    std::printf("%-18s %.4f %.4f %.4f\n", "e_layer", r.e_layer[0],
                r.e_layer[1], r.e_layer[2]);
    std::printf("%-18s %.4f %.4f %.4f\n", "latency_ms", r.latency[0],
                r.latency[1], r.latency[2]);
    std::printf("%-18s %.4f %.4f %.4f\n", "cpu_pct", r.cpu[0], r.cpu[1],
                r.cpu[2]);
    std::printf("%-18s %.4f %.4f %.4f\n", "gpu_pct", r.gpu[0], r.gpu[1],
                r.gpu[2]);
    std::printf("%-18s %.0f %.0f %.0f\n", "tokens", r.tokens[0], r.tokens[1],
                r.tokens[2]);
    line("risk_theory", r.risk_theory);
    line("risk_protocol", r.risk_protocol);
    std::printf("%-18s %.4f %.4f %.4f\n", "uncertainty", r.uncertainty[0],
                r.uncertainty[1], r.uncertainty[2]);
    std::printf("%-18s %d %d %d\n", "depth", r.depth[0], r.depth[1],
                r.depth[2]);
    line("stable_fraction", r.stable_fraction);
    std::printf("%-18s %s\n", "failed", r.failed ? "yes" : "no");
}

int run_cli(int argc, char** argv) {
    CLI::App app{
        "Binary-free firmware zero-day risk estimation pipeline.\n"
        "Symbolic tri-layer model over descriptor files; see README for "
        "formats."};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate",
                                   "Generate a synthetic descriptor batch");
    std::int64_t gen_n = 1000;
    std::uint64_t gen_seed = 42;
    std::size_t gen_kc = 16, gen_ko = 16;
    std::string gen_out;
    gen->add_option("--n", gen_n, "Instance count")->capture_default_str();
    gen->add_option("--seed", gen_seed, "Base seed")->capture_default_str();
    gen->add_option("--kc", gen_kc, "Configuration dimension")
        ->capture_default_str();
    gen->add_option("--ko", gen_ko, "Structure dimension")
        ->capture_default_str();
    gen->add_option("--out", gen_out, "Output descriptor file (JSON lines)")
        ->required();

    // shared run/ablate/demo options
    std::string params_path, backend_kind = "synthetic";
    RemoteConfig remote;
    int workers = 0;
    auto add_backend_options = [&](CLI::App* cmd) {
        cmd->add_option("--params", params_path, "Parameter file (JSON)")
            ->required();
        cmd->add_option("--backend", backend_kind,
                        "Backend: synthetic or remote")
            ->capture_default_str();
        cmd->add_option("--endpoint", remote.endpoint,
                        "Remote chat-completion endpoint URL");
        cmd->add_option("--model", remote.model, "Remote model name")
            ->capture_default_str();
        cmd->add_option("--timeout-ms", remote.timeout_ms,
                        "Remote request timeout")
            ->capture_default_str();
        cmd->add_option("--retries", remote.max_retries,
                        "Remote transport retries")
            ->capture_default_str();
        cmd->add_option("--temperature", remote.temperature,
                        "Remote sampling temperature")
            ->capture_default_str();
        cmd->add_option(
            "--workers", workers,
            "Worker threads (default: logical core count). The remote "
            "backend is bounded to 4 in-flight requests unless overridden.");
    };

    // run
    auto* run = app.add_subcommand(
        "run", "Run the pipeline over a descriptor batch and emit records");
    std::string run_in, run_out, run_exposure = "medium,high";
    std::uint64_t run_seed = 42;
    bool run_unpaired = false;
    bool run_serial = false;
    run->add_option("--in", run_in, "Input descriptor batch")->required();
    run->add_option("--out", run_out, "Output records CSV")->required();
    run->add_option("--exposure", run_exposure,
                    "Comma-separated exposure levels")
        ->capture_default_str();
    run->add_option("--seed", run_seed, "Perturbation seed")
        ->capture_default_str();
    run->add_flag("--unpaired", run_unpaired,
                  "Draw independent noise per exposure level");
    run->add_flag("--serial", run_serial,
                  "Use the serial reference path instead of OpenMP");
    add_backend_options(run);

    // analyze
    auto* analyze = app.add_subcommand(
        "analyze", "Build the statistical report from a records file");
    std::string an_in, an_out;
    analyze->add_option("--in", an_in, "Records CSV")->required();
    analyze->add_option("--out", an_out, "Report directory")->required();

    // ablate
    auto* ablate = app.add_subcommand(
        "ablate", "Run the layer-ablation study and emit the delta table");
    std::string ab_in, ab_out, ab_level = "medium";
    std::uint64_t ab_seed = 42;
    ablate->add_option("--in", ab_in, "Input descriptor batch")->required();
    ablate->add_option("--out", ab_out, "Output ablation CSV")->required();
    ablate->add_option("--level", ab_level, "Exposure level of the study")
        ->capture_default_str();
    ablate->add_option("--seed", ab_seed, "Perturbation seed")
        ->capture_default_str();
    add_backend_options(ablate);

    // demo
    auto* demo = app.add_subcommand(
        "demo", "Evaluate a single descriptor file and print its record");
    std::string demo_descriptor;
    demo->add_option("--descriptor", demo_descriptor, "Descriptor file (JSON)")
        ->required();
    add_backend_options(demo);

    app.footer(
        "Remote backend credentials are read from the FWRISK_API_KEY "
        "environment variable and are never written to reports.");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (workers > 0) omp_set_num_threads(workers);
    if (backend_kind == "remote" && workers == 0) omp_set_num_threads(4);

    if (gen->parsed()) {
        auto cfg = GeneratorConfig::defaults(gen_n, gen_seed, gen_kc, gen_ko);
        auto batch = generate(cfg);
        save_descriptor_lines(batch, gen_out);
        std::cerr << "wrote " << batch.size() << " descriptors to " << gen_out
                  << "\n";
        return 0;
    }
    if (run->parsed()) {
        auto batch = load_descriptor_lines(run_in);
        auto ps = ParameterSet::load(params_path);
        auto backend = make_backend(backend_kind, remote);
        RunOptions opt;
        opt.perturb_seed = run_seed;
        opt.paired = !run_unpaired;
        opt.mode = run_serial ? ExecutionMode::Serial : ExecutionMode::Parallel;
        opt.workers = workers;
        auto records =
            run_pipeline(batch, parse_levels(run_exposure), ps, *backend, opt);
        write_records_csv(records, run_out);
        std::size_t excluded = 0;
        for (const auto& r : records) excluded += r.excluded ? 1 : 0;
        std::cerr << "wrote " << records.size() << " records to " << run_out
                  << " (" << excluded << " excluded)\n";
        return 0;
    }
    if (analyze->parsed()) {
        auto records = read_records_csv(an_in);
        auto exposure = exposure_report_from_records(records);
        auto crosslayer = crosslayer_report_from_records(records);
        write_exposure_report(exposure, an_out);
        write_crosslayer_report(crosslayer, an_out);
        std::cerr << "report written to " << an_out << "\n";
        return 0;
    }
    if (ablate->parsed()) {
        auto batch = load_descriptor_lines(ab_in);
        auto ps = ParameterSet::load(params_path);
        auto backend = make_backend(backend_kind, remote);
        RunOptions opt;
        opt.perturb_seed = ab_seed;
        opt.workers = workers;
        auto report = run_ablation(batch, ps, *backend, opt,
                                   exposure_from_string(ab_level));
        write_ablation_report(report, ab_out);
        std::cerr << "ablation report written to " << ab_out << "\n";
        return 0;
    }
    if (demo->parsed()) {
        auto descriptor = load_descriptor(demo_descriptor);
        auto ps = ParameterSet::load(params_path);
        auto backend = make_backend(backend_kind, remote);
        RiskRecord rec = evaluate_instance(descriptor, Exposure::None,
                                           Variant::Full, ps, *backend);
        print_record(rec);
        return rec.failed ? 2 : 0;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
