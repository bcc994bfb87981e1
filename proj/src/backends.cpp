#include "fwrisk/backends.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace fwrisk {

using nlohmann::json;

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start)
        .count();
}

std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

}  // namespace

LayerEval SyntheticBackend::evaluate_layer(int layer,
                                           const FirmwareDescriptor& f,
                                           const LayerEmbeddings& emb,
                                           const ModelParams& p) {
    (void)f;
    const auto start = std::chrono::steady_clock::now();
    const double raw = raw_layer_risk(layer, emb, p);
    const double display = display_risk(layer, raw, p);
    LayerEval eval;
    eval.display_risk = display;
    const double prob = display / p.risk_scale;
    eval.aux.uncertainty = 1.0 - std::abs(2.0 * prob - 1.0);
    eval.aux.reasoning_depth = layer;
    eval.aux.wall_latency_ms = elapsed_ms(start);
    return eval;
}

std::string serialize_prompt(const FirmwareDescriptor& f, int layer) {
    static const char* kRoles[3] = {
        "You are a firmware configuration interpreter. Assess "
        "configuration-driven exposure for the descriptor below.",
        "You are a firmware structural analyzer. Assess structural "
        "irregularity for the descriptor below.",
        "You are a firmware semantic fusion reviewer. Combine configuration "
        "and structural evidence for the descriptor below."};
    if (layer < 1 || layer > 3)
        throw std::invalid_argument("serialize_prompt: layer must be 1..3");

    std::string out = kRoles[layer - 1];
    out += "\n\nmetadata:\n";
    out += "- arch: " + to_string(f.metadata.arch) + "\n";
    out += "- version_id: " + f.metadata.version_id + "\n";
    out += "- device_class: " + f.metadata.device_class + "\n";
    out += "- product_family: " + f.metadata.product_family + "\n";
    if (layer == 1 || layer == 3) {
        out += "configuration features (" + std::to_string(f.k_c()) + "):\n";
        for (std::size_t i = 0; i < f.config.size(); ++i)
            out += "- c" + std::to_string(i) + ": " +
                   format_number(f.config[i]) + "\n";
    }
    if (layer == 2 || layer == 3) {
        out += "structural features (" + std::to_string(f.k_o()) + "):\n";
        for (std::size_t i = 0; i < f.structure.size(); ++i)
            out += "- o" + std::to_string(i) + ": " +
                   format_number(f.structure[i]) + "\n";
    }
    out +=
        "\nReply with a single JSON object and nothing else: "
        "{\"risk\": <0-100>, \"uncertainty\": <0-1>, "
        "\"reasoning_depth\": <integer>}\n";
    return out;
}

std::optional<std::string> extract_first_json_object(const std::string& text) {
    for (std::size_t start = text.find('{'); start != std::string::npos;
         start = text.find('{', start + 1)) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (std::size_t i = start; i < text.size(); ++i) {
            const char ch = text[i];
            if (escaped) {
                escaped = false;
                continue;
            }
            if (ch == '\\') {
                escaped = true;
                continue;
            }
            if (ch == '"') in_string = !in_string;
            if (in_string) continue;
            if (ch == '{') ++depth;
            if (ch == '}') {
                --depth;
                if (depth == 0) {
                    std::string candidate = text.substr(start, i - start + 1);
                    if (json::accept(candidate)) return candidate;
                    break;
                }
            }
        }
    }
    return std::nullopt;
}

RemoteBackend::RemoteBackend(RemoteConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty())
        throw std::invalid_argument("remote backend: endpoint is required");
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0')
        throw std::invalid_argument("remote backend: credential environment "
                                    "variable " +
                                    config_.api_key_env + " is not set");
    api_key_ = key;

    // Split "scheme://host:port/path" into client base and request path.
    const auto scheme_end = config_.endpoint.find("://");
    const auto path_start = config_.endpoint.find(
        '/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start == std::string::npos) {
        host_base_ = config_.endpoint;
        path_ = "/v1/chat/completions";
    } else {
        host_base_ = config_.endpoint.substr(0, path_start);
        path_ = config_.endpoint.substr(path_start);
    }
}

LayerEval RemoteBackend::evaluate_layer(int layer, const FirmwareDescriptor& f,
                                        const LayerEmbeddings& emb,
                                        const ModelParams& p) {
    (void)emb;
    (void)p;
    const auto start = std::chrono::steady_clock::now();

    const std::string strict_suffix =
        "\nThe previous reply could not be parsed. Respond with ONLY the JSON "
        "object, no prose.\n";

    int retries = 0;
    bool reprompted = false;
    std::string prompt = serialize_prompt(f, layer);

    while (true) {
        httplib::Client client(host_base_);
        client.set_connection_timeout(0, config_.timeout_ms * 1000);
        client.set_read_timeout(0, config_.timeout_ms * 1000);
        client.set_write_timeout(0, config_.timeout_ms * 1000);

        json body = {
            {"model", config_.model},
            {"temperature", config_.temperature},
            {"messages", json::array({json{{"role", "user"},
                                           {"content", prompt}}})},
        };
        httplib::Headers headers = {
            {"Authorization", "Bearer " + api_key_},
        };
        auto res =
            client.Post(path_, headers, body.dump(), "application/json");

        const bool transport_failure =
            !res || res->status >= 500 || res->status == 429;
        if (transport_failure) {
            if (retries >= config_.max_retries) {
                LayerEval failed;
                failed.aux.wall_latency_ms = elapsed_ms(start);
                failed.aux.retries = retries;
                throw BackendError(
                    "remote backend: transport failure after " +
                        std::to_string(retries) + " retries (layer " +
                        std::to_string(layer) + ")",
                    layer, f.id);
            }
            ++retries;
            std::this_thread::sleep_for(
                std::chrono::milliseconds(config_.retry_backoff_ms));
            continue;
        }
        if (res->status != 200) {
            throw BackendError("remote backend: HTTP " +
                                   std::to_string(res->status) + " (layer " +
                                   std::to_string(layer) + ")",
                               layer, f.id);
        }

        std::string content;
        std::optional<std::string> obj_text;
        try {
            json reply = json::parse(res->body);
            content = reply.at("choices").at(0).at("message").at("content")
                          .get<std::string>();
            obj_text = extract_first_json_object(content);
        } catch (const json::exception&) {
            obj_text = std::nullopt;
        }

        json obj;
        bool valid = false;
        if (obj_text) {
            obj = json::parse(*obj_text);
            valid = obj.is_object() && obj.contains("risk") &&
                    obj.contains("uncertainty") &&
                    obj.contains("reasoning_depth") &&
                    obj["risk"].is_number() && obj["uncertainty"].is_number() &&
                    obj["reasoning_depth"].is_number_integer();
        }
        if (!valid) {
            if (reprompted) {
                throw BackendError("remote backend: unparseable reply after "
                                   "reprompt (layer " +
                                       std::to_string(layer) + ")",
                                   layer, f.id);
            }
            reprompted = true;
            prompt = serialize_prompt(f, layer) + strict_suffix;
            continue;
        }

        LayerEval eval;
        eval.display_risk =
            std::clamp(obj["risk"].get<double>(), 0.0, 100.0);
        eval.aux.uncertainty =
            std::clamp(obj["uncertainty"].get<double>(), 0.0, 1.0);
        eval.aux.reasoning_depth = obj["reasoning_depth"].get<int>();
        eval.aux.wall_latency_ms = elapsed_ms(start);
        eval.aux.retries = retries;
        if (obj.contains("signature") && obj["signature"].is_string())
            eval.aux.signature = obj["signature"].get<std::string>();
        return eval;
    }
}

}  // namespace fwrisk
