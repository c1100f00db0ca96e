#include "granuscore/judge.hpp"

#include "granuscore/errors.hpp"
#include "granuscore/text_util.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

namespace granuscore {

using nlohmann::json;

JudgeClient::JudgeClient(JudgeConfig config, std::string grading_template)
    : config_(std::move(config)), template_(std::move(grading_template)) {
    for (const char* placeholder : {"{question}", "{target}", "{predicted_answer}"}) {
        if (template_.find(placeholder) == std::string::npos) {
            throw ConfigError(std::string("grading template missing placeholder ") + placeholder);
        }
    }
}

std::string JudgeClient::load_template(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ResolutionError("cannot open grading template: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

namespace {

void replace_all(std::string& s, const std::string& from, const std::string& to) {
    size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
}

} // namespace

std::string JudgeClient::render_prompt(const std::string& question, const std::string& gold,
                                       const std::string& answer) const {
    std::string prompt = template_;
    replace_all(prompt, "{question}", question);
    replace_all(prompt, "{target}", gold);
    replace_all(prompt, "{predicted_answer}", answer);
    return prompt;
}

JudgeVerdict JudgeClient::parse_reply(const std::string& reply) {
    JudgeVerdict v;
    v.raw_reply = reply;
    std::string low = ascii_lower(reply);
    // word verdicts first, then a bare letter grade
    if (low.find("not_attempted") != std::string::npos ||
        low.find("not attempted") != std::string::npos) {
        v.outcome = QaOutcome::not_attempted;
        return v;
    }
    if (low.find("incorrect") != std::string::npos) {
        v.outcome = QaOutcome::wrong;
        return v;
    }
    if (low.find("correct") != std::string::npos) {
        v.outcome = QaOutcome::correct;
        return v;
    }
    std::string t = trim(reply);
    if (t.size() == 1 || (t.size() >= 2 && (t[1] == ':' || t[1] == ')' || t[1] == '.'))) {
        switch (t[0]) {
            case 'A':
            case 'a': v.outcome = QaOutcome::correct; return v;
            case 'B':
            case 'b': v.outcome = QaOutcome::wrong; return v;
            case 'C':
            case 'c': v.outcome = QaOutcome::not_attempted; return v;
            default: break;
        }
    }
    v.outcome = QaOutcome::not_attempted;
    v.parse_failed = true;
    return v;
}

JudgeVerdict JudgeClient::grade(const std::string& question, const std::string& gold,
                                const std::string& answer) {
    json body = {{"model", config_.model},
                 {"messages",
                  json::array({{{"role", "user"},
                                {"content", render_prompt(question, gold, answer)}}})},
                 {"temperature", 0.0}};
    std::string payload = body.dump();

    std::string last_error;
    for (size_t attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            auto delay = std::chrono::duration<double>(config_.backoff_seconds *
                                                       static_cast<double>(1ULL << (attempt - 1)));
            std::this_thread::sleep_for(delay);
        }
        httplib::Client client(config_.host, config_.port);
        client.set_connection_timeout(config_.timeout_seconds);
        client.set_read_timeout(config_.timeout_seconds);
        httplib::Headers headers;
        if (!config_.api_key.empty()) {
            headers.emplace("Authorization", "Bearer " + config_.api_key);
        }
        auto res = client.Post(config_.path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport failure: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "server error: HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw BackendError("judge endpoint returned HTTP " + std::to_string(res->status) +
                                   ": " + res->body,
                               /*retriable=*/false);
        }
        json reply = json::parse(res->body, nullptr, false);
        if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty()) {
            JudgeVerdict v;
            v.parse_failed = true;
            v.outcome = QaOutcome::not_attempted;
            v.raw_reply = res->body;
            return v;
        }
        std::string content =
            reply["choices"][0].value("message", json::object()).value("content", "");
        return parse_reply(content);
    }
    throw BackendError("judge endpoint unreachable after " + std::to_string(config_.max_retries) +
                           " retries (" + last_error + ")",
                       /*retriable=*/true);
}

} // namespace granuscore
