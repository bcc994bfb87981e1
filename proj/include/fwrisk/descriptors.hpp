#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fwrisk/linalg.hpp"

namespace fwrisk {

enum class Arch { ARM, MIPS, PPC };

std::string to_string(Arch arch);
Arch arch_from_string(const std::string& s);

struct Metadata {
    Arch arch = Arch::ARM;
    std::string version_id;
    std::string device_class;
    std::string product_family;
};

/// The descriptor triple: metadata, configuration signals, structural
/// abstraction. Vector lengths are fixed at construction.
struct FirmwareDescriptor {
    std::int64_t id = 0;
    Metadata metadata;
    Vec config;
    Vec structure;

    std::size_t k_c() const { return config.size(); }
    std::size_t k_o() const { return structure.size(); }
};

enum class Exposure { None, Low, Medium, High };

std::string to_string(Exposure level);
Exposure exposure_from_string(const std::string& s);

struct ExposureLevel {
    Exposure level = Exposure::None;
    double alpha = 0.0;
    double beta = 0.0;

    /// Canonical intensity pairs: (0,0), (0.1,0.1), (0.3,0.3), (0.5,0.5).
    static ExposureLevel standard(Exposure level);
};

struct GeneratorConfig {
    std::int64_t n = 0;
    std::uint64_t base_seed = 0;
    std::size_t k_c = 16;
    std::size_t k_o = 16;
    Vec mu_c;       // defaults to zeros(k_c)
    Vec mu_o;       // defaults to zeros(k_o)
    Mat sigma_c;    // defaults to identity(k_c)
    Mat sigma_o;    // defaults to identity(k_o)
    double arch_probs[3] = {0.5, 0.3, 0.2};  // ARM, MIPS, PPC

    static GeneratorConfig defaults(std::int64_t n, std::uint64_t seed,
                                    std::size_t k_c = 16, std::size_t k_o = 16);
    void validate() const;  // throws std::invalid_argument
};

/// Draws cfg.n descriptors. Instance i is a pure function of
/// (cfg.base_seed, i): any partition of the index range across workers
/// produces identical values.
std::vector<FirmwareDescriptor> generate(const GeneratorConfig& cfg);

/// Single instance; used by both the serial and the OpenMP generation paths.
FirmwareDescriptor generate_one(const GeneratorConfig& cfg, const Mat& l_c,
                                const Mat& l_o, std::int64_t instance);

/// Core perturbation: c + alpha*eps_c, o + beta*eps_o. Metadata and id pass
/// through unchanged.
FirmwareDescriptor perturb(const FirmwareDescriptor& f, const ExposureLevel& e,
                           const Vec& eps_c, const Vec& eps_o);

/// Draws the noise from the per-instance derived stream. In paired mode
/// (default) the same draws are reused across all exposure levels of one
/// instance, making level contrasts within-instance comparisons.
FirmwareDescriptor perturb_seeded(const FirmwareDescriptor& f,
                                  const ExposureLevel& e,
                                  std::uint64_t base_seed, bool paired = true);

/// Cholesky with escalating diagonal jitter: plain attempt, then
/// 1e-10*I scaled up tenfold per retry, three retries before failing.
Mat jittered_cholesky(const Mat& sigma);

// Descriptor files: a JSON object per descriptor with fields
// {schema_version, id, metadata{arch, version_id, device_class,
// product_family}, k_c, k_o, config, structure}. Batch files hold one
// object per line.
FirmwareDescriptor descriptor_from_json_text(const std::string& text);
std::string descriptor_to_json_text(const FirmwareDescriptor& f);
FirmwareDescriptor load_descriptor(const std::string& path);
std::vector<FirmwareDescriptor> load_descriptor_lines(const std::string& path);
void save_descriptor_lines(const std::vector<FirmwareDescriptor>& batch,
                           const std::string& path);

}  // namespace fwrisk
