#pragma once

// Offline chat-completion test double. Listens on a loopback port and
// replies in the same wire shape as the production endpoint; supports
// failure injection for the retry paths.

#include <atomic>
#include <functional>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace fwrisk::testing {

class MockChatServer {
public:
    // content_fn maps the received user prompt to the reply content block.
    explicit MockChatServer(
        std::function<std::string(const std::string&)> content_fn)
        : content_fn_(std::move(content_fn)) {
        server_.Post("/v1/chat/completions", [this](const httplib::Request&
                                                        req,
                                                    httplib::Response& res) {
            requests_seen_++;
            if (fail_remaining_ > 0) {
                fail_remaining_--;
                res.status = 500;
                res.set_content("{\"error\":\"injected failure\"}",
                                "application/json");
                return;
            }
            nlohmann::json body = nlohmann::json::parse(req.body);
            last_model_ = body.value("model", "");
            const std::string prompt =
                body.at("messages").at(0).at("content").get<std::string>();
            last_prompt_ = prompt;
            nlohmann::json reply = {
                {"choices",
                 nlohmann::json::array(
                     {{{"message", {{"role", "assistant"},
                                    {"content", content_fn_(prompt)}}}}})}};
            res.set_content(reply.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~MockChatServer() {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    std::string endpoint() const {
        return "http://127.0.0.1:" + std::to_string(port_);
    }
    void fail_next(int n) { fail_remaining_ = n; }
    int requests_seen() const { return requests_seen_; }
    std::string last_prompt() const { return last_prompt_; }
    std::string last_model() const { return last_model_; }

private:
    std::function<std::string(const std::string&)> content_fn_;
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> fail_remaining_{0};
    std::atomic<int> requests_seen_{0};
    std::string last_prompt_;
    std::string last_model_;
};

}  // namespace fwrisk::testing
