#pragma once

// Chat-completions-compatible HTTP client used as a generator oracle.
// POST {base_url}/chat/completions with {model, messages, temperature};
// the returned message content is parsed through the trace grammar.

#include <optional>
#include <string>
#include <vector>

#include "svsr/oracle.hpp"
#include "svsr/trajectory.hpp"

namespace svsr {

struct RemoteEndpointConfig {
    std::string base_url = "http://localhost:8080";
    std::string model = "gpt-4o";
    std::string api_key_env = "SVSR_API_KEY"; // env var holding the bearer token
    double temperature = 0.7;
    int timeout_ms = 30000;
    int max_retries = 2;
    std::string prompt_dir = "prompts";
};

void check_valid(const RemoteEndpointConfig& cfg);

enum class RemoteErrorKind { Transport, HttpStatus, Unparseable };

struct RemoteError {
    RemoteErrorKind kind;
    std::string detail;
};

struct RemoteCallRecord {
    std::string action;
    std::string request_body;
    std::string response_body;
    int retries = 0;
    bool ok = false;
    std::string error;
};

struct PromptTemplates {
    std::string system;  // tag grammar + scaffolding instructions
    std::string solve;   // {statement} {answer_space} {gt_line}
    std::string verify;  // {statement} {answer} {strategy}
    std::string rectify; // {statement} {answer_space} {history} {gt_line}
};

PromptTemplates load_templates(const std::string& dir);

std::string fill_template(std::string tpl,
                          const std::vector<std::pair<std::string, std::string>>& subs);

class RemoteOracle : public GeneratorOracle {
public:
    explicit RemoteOracle(RemoteEndpointConfig cfg, bool reveal_gt = false);

    Step solve(const Problem& p, const Trajectory& history, Rng& rng) override;
    Step verify(const Problem& p, const std::string& answer, VerifyStrategy strategy,
                Rng& rng) override;
    Step rectify(const Problem& p, const Trajectory& history, Rng& rng) override;

    // Low-level call; never mutates oracle state on failure beyond the
    // call log. Retries transport failures up to cfg.max_retries.
    std::variant<Step, RemoteError> generate(const Problem& p, const Trajectory& history,
                                             StepKind action,
                                             std::optional<VerifyStrategy> strategy,
                                             std::optional<std::string> answer = {});

    const std::vector<RemoteCallRecord>& call_log() const { return log_; }
    std::size_t unparseable_count() const { return unparseable_; }

private:
    RemoteEndpointConfig cfg_;
    bool reveal_gt_;
    PromptTemplates templates_;
    std::vector<RemoteCallRecord> log_;
    std::size_t unparseable_ = 0;
};

} // namespace svsr
