#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "fwrisk/descriptors.hpp"
#include "fwrisk/reasoner.hpp"

namespace fwrisk {

struct AuxSignals {
    double uncertainty = 0.0;     // in [0,1]
    int reasoning_depth = 0;
    double wall_latency_ms = 0.0;
    std::optional<std::string> signature;  // chi, backend-supplied
    int retries = 0;
};

struct LayerEval {
    double display_risk = 0.0;  // 0-100
    AuxSignals aux;
};

struct BackendError : std::runtime_error {
    int layer;
    std::int64_t instance_id;
    BackendError(std::string what, int layer_, std::int64_t instance_id_)
        : std::runtime_error(std::move(what)),
          layer(layer_),
          instance_id(instance_id_) {}
};

class Backend {
public:
    virtual ~Backend() = default;
    /// Produces the layer's display risk and auxiliary signals. The
    /// embeddings are the synthetic forward pass of the descriptor; remote
    /// backends use them only as context and replace risk/aux fields.
    virtual LayerEval evaluate_layer(int layer, const FirmwareDescriptor& f,
                                     const LayerEmbeddings& emb,
                                     const ModelParams& p) = 0;
    virtual std::string name() const = 0;
};

/// Deterministic backend computing risks from the model itself. The
/// uncertainty surrogate u = 1 - |2p - 1| peaks at the decision boundary
/// and vanishes at saturation; reasoning depth is the layer index.
class SyntheticBackend : public Backend {
public:
    LayerEval evaluate_layer(int layer, const FirmwareDescriptor& f,
                             const LayerEmbeddings& emb,
                             const ModelParams& p) override;
    std::string name() const override { return "synthetic"; }
};

struct RemoteConfig {
    std::string endpoint;          // e.g. http://host:port[/path]
    std::string model = "fusion-review";
    int timeout_ms = 30000;
    int max_retries = 3;
    double temperature = 0.0;
    int retry_backoff_ms = 100;
    std::string api_key_env = "FWRISK_API_KEY";
};

/// Chat-completion client: posts the layer prompt, expects the first
/// content block to contain a JSON object {risk, uncertainty,
/// reasoning_depth}. One reprompt with a stricter instruction on parse
/// failure; transport failures retry up to max_retries.
class RemoteBackend : public Backend {
public:
    explicit RemoteBackend(RemoteConfig config);
    LayerEval evaluate_layer(int layer, const FirmwareDescriptor& f,
                             const LayerEmbeddings& emb,
                             const ModelParams& p) override;
    std::string name() const override { return "remote"; }

private:
    RemoteConfig config_;
    std::string api_key_;
    std::string host_base_;
    std::string path_;
};

/// Deterministic prompt: per-layer role preamble, descriptor fields as
/// labeled lists, and the reply contract.
std::string serialize_prompt(const FirmwareDescriptor& f, int layer);

/// First well-formed JSON object found in a text block, if any.
std::optional<std::string> extract_first_json_object(const std::string& text);

}  // namespace fwrisk
