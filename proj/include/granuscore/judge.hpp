#pragma once

#include "granuscore/datasets.hpp"

#include <string>

namespace granuscore {

struct JudgeConfig {
    std::string host = "127.0.0.1";
    int port = 443;
    std::string path = "/v1/chat/completions";
    std::string model = "";
    std::string api_key = "";
    size_t max_retries = 3;
    double backoff_seconds = 0.5;
    int timeout_seconds = 30;
};

struct JudgeVerdict {
    QaOutcome outcome = QaOutcome::not_attempted;
    bool parse_failed = false;
    std::string raw_reply;
};

// Grades one (question, gold, answer) triple through a chat-completion
// endpoint using a stored grading template with {question}/{target}/
// {predicted_answer} placeholders. Letter verdicts map A -> correct,
// B -> wrong, C -> not_attempted; an unparseable reply degrades to
// not_attempted with parse_failed set. Transport failures retry with
// exponential backoff and surface as a retriable BackendError afterwards.
class JudgeClient {
public:
    JudgeClient(JudgeConfig config, std::string grading_template);

    static std::string load_template(const std::string& path);

    JudgeVerdict grade(const std::string& question, const std::string& gold,
                       const std::string& answer);

    // Exposed for tests: prompt construction and reply parsing are pure.
    std::string render_prompt(const std::string& question, const std::string& gold,
                              const std::string& answer) const;
    static JudgeVerdict parse_reply(const std::string& reply);

private:
    JudgeConfig config_;
    std::string template_;
};

} // namespace granuscore
