#include "fwrisk/descriptors.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fwrisk/io.hpp"
#include "fwrisk/rng.hpp"

namespace fwrisk {

using nlohmann::json;

std::string to_string(Arch arch) {
    switch (arch) {
        case Arch::ARM: return "ARM";
        case Arch::MIPS: return "MIPS";
        case Arch::PPC: return "PPC";
    }
    throw std::invalid_argument("unknown arch value");
}

Arch arch_from_string(const std::string& s) {
    if (s == "ARM") return Arch::ARM;
    if (s == "MIPS") return Arch::MIPS;
    if (s == "PPC") return Arch::PPC;
    throw std::invalid_argument("unknown arch: " + s);
}

std::string to_string(Exposure level) {
    switch (level) {
        case Exposure::None: return "none";
        case Exposure::Low: return "low";
        case Exposure::Medium: return "medium";
        case Exposure::High: return "high";
    }
    throw std::invalid_argument("unknown exposure value");
}

Exposure exposure_from_string(const std::string& s) {
    if (s == "none") return Exposure::None;
    if (s == "low") return Exposure::Low;
    if (s == "medium") return Exposure::Medium;
    if (s == "high") return Exposure::High;
    throw std::invalid_argument("unknown exposure level: " + s);
}

ExposureLevel ExposureLevel::standard(Exposure level) {
    switch (level) {
        case Exposure::None: return {level, 0.0, 0.0};
        case Exposure::Low: return {level, 0.1, 0.1};
        case Exposure::Medium: return {level, 0.3, 0.3};
        case Exposure::High: return {level, 0.5, 0.5};
    }
    throw std::invalid_argument("unknown exposure level");
}

GeneratorConfig GeneratorConfig::defaults(std::int64_t n, std::uint64_t seed,
                                          std::size_t k_c, std::size_t k_o) {
    GeneratorConfig cfg;
    cfg.n = n;
    cfg.base_seed = seed;
    cfg.k_c = k_c;
    cfg.k_o = k_o;
    cfg.mu_c.assign(k_c, 0.0);
    cfg.mu_o.assign(k_o, 0.0);
    cfg.sigma_c = Mat::identity(k_c);
    cfg.sigma_o = Mat::identity(k_o);
    return cfg;
}

void GeneratorConfig::validate() const {
    if (n <= 0) throw std::invalid_argument("generator: n must be positive");
    if (k_c == 0 || k_o == 0)
        throw std::invalid_argument("generator: dimensions must be positive");
    if (mu_c.size() != k_c || mu_o.size() != k_o)
        throw std::invalid_argument("generator: mean dimension mismatch");
    if (sigma_c.rows != k_c || sigma_c.cols != k_c || sigma_o.rows != k_o ||
        sigma_o.cols != k_o)
        throw std::invalid_argument("generator: covariance dimension mismatch");
    double psum = arch_probs[0] + arch_probs[1] + arch_probs[2];
    if (std::abs(psum - 1.0) > 1e-9)
        throw std::invalid_argument("generator: arch_probs must sum to 1");
    for (double p : arch_probs)
        if (p < 0.0)
            throw std::invalid_argument("generator: negative arch probability");
    for (const Mat* s : {&sigma_c, &sigma_o}) {
        for (std::size_t i = 0; i < s->rows; ++i) {
            if (s->at(i, i) < 0.0)
                throw std::invalid_argument("generator: negative variance");
            for (std::size_t j = i + 1; j < s->cols; ++j) {
                if (std::abs(s->at(i, j) - s->at(j, i)) > 1e-9)
                    throw std::invalid_argument(
                        "generator: covariance not symmetric");
            }
        }
    }
}

Mat jittered_cholesky(const Mat& sigma) {
    double jitter = 1e-10;
    for (int attempt = 0; attempt < 4; ++attempt) {
        try {
            if (attempt == 0) return cholesky_psd(sigma);
            Mat padded = sigma;
            for (std::size_t i = 0; i < padded.rows; ++i)
                padded.at(i, i) += jitter;
            Mat l = cholesky_psd(padded);
            jitter *= 10.0;
            return l;
        } catch (const CholeskyError&) {
            if (attempt == 3) throw;
            jitter *= (attempt == 0) ? 1.0 : 10.0;
        }
    }
    throw CholeskyError("unreachable");
}

namespace {

Vec sample_mvn(const Vec& mu, const Mat& l, SeedStream& stream) {
    const std::size_t k = mu.size();
    Vec z(k);
    for (std::size_t i = 0; i < k; ++i) z[i] = stream.next_normal();
    Vec x = matvec(l, z);
    for (std::size_t i = 0; i < k; ++i) x[i] += mu[i];
    return x;
}

Arch sample_arch(const GeneratorConfig& cfg, SeedStream& stream) {
    double u = stream.next_unit();
    if (u <= cfg.arch_probs[0]) return Arch::ARM;
    if (u <= cfg.arch_probs[0] + cfg.arch_probs[1]) return Arch::MIPS;
    return Arch::PPC;
}

}  // namespace

FirmwareDescriptor generate_one(const GeneratorConfig& cfg, const Mat& l_c,
                                const Mat& l_o, std::int64_t instance) {
    FirmwareDescriptor f;
    f.id = instance;

    SeedStream cs(cfg.base_seed, static_cast<std::uint64_t>(instance),
                  StreamPurpose::ConfigSample);
    f.config = sample_mvn(cfg.mu_c, l_c, cs);

    SeedStream os(cfg.base_seed, static_cast<std::uint64_t>(instance),
                  StreamPurpose::StructureSample);
    f.structure = sample_mvn(cfg.mu_o, l_o, os);

    SeedStream as(cfg.base_seed, static_cast<std::uint64_t>(instance),
                  StreamPurpose::ArchSample);
    f.metadata.arch = sample_arch(cfg, as);
    f.metadata.version_id = "v1." + std::to_string(instance);
    f.metadata.device_class = "synthetic";
    f.metadata.product_family = "simgen";
    return f;
}

std::vector<FirmwareDescriptor> generate(const GeneratorConfig& cfg) {
    cfg.validate();
    const Mat l_c = jittered_cholesky(cfg.sigma_c);
    const Mat l_o = jittered_cholesky(cfg.sigma_o);

    std::vector<FirmwareDescriptor> out(static_cast<std::size_t>(cfg.n));
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < cfg.n; ++i) {
        out[static_cast<std::size_t>(i)] = generate_one(cfg, l_c, l_o, i);
    }
    return out;
}

FirmwareDescriptor perturb(const FirmwareDescriptor& f, const ExposureLevel& e,
                           const Vec& eps_c, const Vec& eps_o) {
    if (eps_c.size() != f.k_c() || eps_o.size() != f.k_o())
        throw std::invalid_argument("perturb: noise dimension mismatch");
    FirmwareDescriptor out = f;
    for (std::size_t i = 0; i < out.config.size(); ++i)
        out.config[i] += e.alpha * eps_c[i];
    for (std::size_t i = 0; i < out.structure.size(); ++i)
        out.structure[i] += e.beta * eps_o[i];
    return out;
}

FirmwareDescriptor perturb_seeded(const FirmwareDescriptor& f,
                                  const ExposureLevel& e,
                                  std::uint64_t base_seed, bool paired) {
    // Unpaired mode shifts the purpose tag per level so each level gets an
    // independent draw.
    std::uint64_t level_offset =
        paired ? 0 : (static_cast<std::uint64_t>(e.level) + 1) << 8;
    SeedStream cs(base_seed, static_cast<std::uint64_t>(f.id),
                  static_cast<std::uint64_t>(StreamPurpose::PerturbConfig) +
                      level_offset);
    SeedStream os(base_seed, static_cast<std::uint64_t>(f.id),
                  static_cast<std::uint64_t>(StreamPurpose::PerturbStructure) +
                      level_offset);
    Vec eps_c(f.k_c()), eps_o(f.k_o());
    for (auto& x : eps_c) x = cs.next_normal();
    for (auto& x : eps_o) x = os.next_normal();
    return perturb(f, e, eps_c, eps_o);
}

namespace {

Vec json_to_vec(const json& j, std::size_t expected, const char* field) {
    if (j.is_null()) return Vec(expected, 0.0);
    if (!j.is_array())
        throw std::invalid_argument(std::string("descriptor: ") + field +
                                    " must be an array");
    Vec v;
    v.reserve(j.size());
    for (const auto& x : j) {
        if (!x.is_number())
            throw std::invalid_argument(std::string("descriptor: ") + field +
                                        " entries must be numbers");
        v.push_back(x.get<double>());
    }
    if (v.size() != expected)
        throw std::invalid_argument(
            std::string("descriptor: ") + field + " length " +
            std::to_string(v.size()) + " does not match declared dimension " +
            std::to_string(expected));
    if (!all_finite(v))
        throw std::invalid_argument(std::string("descriptor: ") + field +
                                    " contains non-finite values");
    return v;
}

std::string require_nonempty(const json& j, const char* field) {
    if (!j.contains(field) || !j[field].is_string() ||
        j[field].get<std::string>().empty())
        throw std::invalid_argument(std::string("descriptor: metadata.") +
                                    field + " must be a non-empty string");
    return j[field].get<std::string>();
}

}  // namespace

FirmwareDescriptor descriptor_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("descriptor: malformed JSON: ") +
                                    e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("descriptor: not an object");
    if (j.value("schema_version", 0) != 1)
        throw std::invalid_argument("descriptor: unsupported schema_version");
    if (!j.contains("k_c") || !j.contains("k_o"))
        throw std::invalid_argument("descriptor: k_c and k_o are required");

    FirmwareDescriptor f;
    f.id = j.value("id", std::int64_t{0});
    if (f.id < 0) throw std::invalid_argument("descriptor: negative id");
    const auto k_c = j["k_c"].get<std::size_t>();
    const auto k_o = j["k_o"].get<std::size_t>();
    if (k_c == 0 || k_o == 0)
        throw std::invalid_argument("descriptor: dimensions must be positive");

    if (!j.contains("metadata") || !j["metadata"].is_object())
        throw std::invalid_argument("descriptor: metadata object is required");
    const json& m = j["metadata"];
    f.metadata.arch = arch_from_string(require_nonempty(m, "arch"));
    f.metadata.version_id = require_nonempty(m, "version_id");
    f.metadata.device_class = require_nonempty(m, "device_class");
    f.metadata.product_family = require_nonempty(m, "product_family");

    f.config = json_to_vec(j.contains("config") ? j["config"] : json{}, k_c,
                           "config");
    f.structure = json_to_vec(j.contains("structure") ? j["structure"] : json{},
                              k_o, "structure");
    return f;
}

std::string descriptor_to_json_text(const FirmwareDescriptor& f) {
    json j;
    j["schema_version"] = 1;
    j["id"] = f.id;
    j["metadata"] = {{"arch", to_string(f.metadata.arch)},
                     {"version_id", f.metadata.version_id},
                     {"device_class", f.metadata.device_class},
                     {"product_family", f.metadata.product_family}};
    j["k_c"] = f.k_c();
    j["k_o"] = f.k_o();
    j["config"] = f.config;
    j["structure"] = f.structure;
    return j.dump();
}

FirmwareDescriptor load_descriptor(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("descriptor: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return descriptor_from_json_text(ss.str());
}

std::vector<FirmwareDescriptor> load_descriptor_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("descriptor: cannot open " + path);
    std::vector<FirmwareDescriptor> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(descriptor_from_json_text(line));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": " + e.what());
        }
    }
    return out;
}

void save_descriptor_lines(const std::vector<FirmwareDescriptor>& batch,
                           const std::string& path) {
    std::string body;
    for (const auto& f : batch) {
        body += descriptor_to_json_text(f);
        body += '\n';
    }
    atomic_write_file(path, body);
}

}  // namespace fwrisk
