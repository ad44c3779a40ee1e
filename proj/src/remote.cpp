#include "svsr/remote.hpp"

#include <cstdlib>
#include <filesystem>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "svsr/error.hpp"
#include "svsr/io.hpp"

namespace svsr {

void check_valid(const RemoteEndpointConfig& cfg) {
    if (cfg.timeout_ms <= 0) throw Error(ErrorCode::Config, "remote timeout must be > 0");
    if (cfg.max_retries < 0) throw Error(ErrorCode::Config, "remote retries must be >= 0");
    if (cfg.base_url.empty()) throw Error(ErrorCode::Config, "remote base_url is empty");
}

PromptTemplates load_templates(const std::string& dir) {
    auto path = [&](const char* name) {
        return (std::filesystem::path(dir) / name).string();
    };
    PromptTemplates t;
    t.system = read_file(path("system.txt"));
    t.solve = read_file(path("solve.txt"));
    t.verify = read_file(path("verify.txt"));
    t.rectify = read_file(path("rectify.txt"));
    return t;
}

std::string fill_template(std::string tpl,
                          const std::vector<std::pair<std::string, std::string>>& subs) {
    for (const auto& [key, value] : subs) {
        const std::string marker = "{" + key + "}";
        std::size_t pos = 0;
        while ((pos = tpl.find(marker, pos)) != std::string::npos) {
            tpl.replace(pos, marker.size(), value);
            pos += value.size();
        }
    }
    return tpl;
}

RemoteOracle::RemoteOracle(RemoteEndpointConfig cfg, bool reveal_gt)
    : cfg_(std::move(cfg)), reveal_gt_(reveal_gt) {
    if (const char* base = std::getenv("SVSR_API_BASE"); base && *base)
        cfg_.base_url = base;
    check_valid(cfg_);
    templates_ = load_templates(cfg_.prompt_dir);
}

namespace {

std::string join_space(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += ", ";
        out += s;
    }
    return out;
}

} // namespace

std::variant<Step, RemoteError> RemoteOracle::generate(
    const Problem& p, const Trajectory& history, StepKind action,
    std::optional<VerifyStrategy> strategy, std::optional<std::string> answer) {
    const std::string gt_line =
        reveal_gt_ ? "The correct final answer is " + p.gt_answer + "." : "";
    std::string user;
    switch (action) {
        case StepKind::Solve:
            user = fill_template(templates_.solve,
                                 {{"statement", p.statement},
                                  {"answer_space", join_space(p.answer_space)},
                                  {"gt_line", gt_line}});
            break;
        case StepKind::Verify:
            user = fill_template(
                templates_.verify,
                {{"statement", p.statement},
                 {"answer", answer.value_or("")},
                 {"strategy", strategy ? to_string(*strategy) : "direct"},
                 {"gt_line", gt_line}});
            break;
        case StepKind::Rectify:
            user = fill_template(templates_.rectify,
                                 {{"statement", p.statement},
                                  {"answer_space", join_space(p.answer_space)},
                                  {"history", render(history)},
                                  {"gt_line", gt_line}});
            break;
    }

    nlohmann::json body = {
        {"model", cfg_.model},
        {"messages",
         {{{"role", "system"}, {"content", templates_.system}},
          {{"role", "user"}, {"content", user}}}},
        {"temperature", cfg_.temperature},
    };

    RemoteCallRecord rec;
    rec.action = to_string(action);
    rec.request_body = body.dump();

    httplib::Client client(cfg_.base_url);
    client.set_connection_timeout(0, cfg_.timeout_ms * 1000);
    client.set_read_timeout(cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000);
    httplib::Headers headers;
    if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key)
        headers.emplace("Authorization", std::string("Bearer ") + key);

    httplib::Result res;
    std::string transport_error;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        rec.retries = attempt;
        res = client.Post("/chat/completions", headers, rec.request_body,
                          "application/json");
        if (res && res->status < 500) break;
        transport_error = res ? "HTTP " + std::to_string(res->status)
                              : httplib::to_string(res.error());
    }
    if (!res || res->status >= 500) {
        rec.error = "transport failure: " + transport_error;
        log_.push_back(rec);
        return RemoteError{RemoteErrorKind::Transport, rec.error};
    }
    rec.response_body = res->body;
    if (res->status != 200) {
        rec.error = "HTTP " + std::to_string(res->status);
        log_.push_back(rec);
        return RemoteError{RemoteErrorKind::HttpStatus, rec.error};
    }

    std::string content;
    try {
        const auto j = nlohmann::json::parse(res->body);
        content = j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        rec.error = std::string("malformed response: ") + e.what();
        log_.push_back(rec);
        ++unparseable_;
        return RemoteError{RemoteErrorKind::Unparseable, rec.error};
    }

    const auto step = parse_step(content);
    if (const auto* err = std::get_if<ParseError>(&step)) {
        rec.error = "unparseable step: " + err->reason;
        log_.push_back(rec);
        ++unparseable_;
        return RemoteError{RemoteErrorKind::Unparseable, rec.error};
    }
    rec.ok = true;
    log_.push_back(rec);
    return std::get<Step>(step);
}

namespace {

Step require_kind(std::variant<Step, RemoteError> result, StepKind want) {
    if (const auto* err = std::get_if<RemoteError>(&result))
        throw Error(ErrorCode::Remote, err->detail);
    Step s = std::get<Step>(std::move(result));
    if (s.kind != want)
        throw Error(ErrorCode::Remote,
                    std::string("remote model returned a ") + to_string(s.kind) +
                        " step where " + to_string(want) + " was requested");
    return s;
}

} // namespace

Step RemoteOracle::solve(const Problem& p, const Trajectory& history, Rng&) {
    return require_kind(generate(p, history, StepKind::Solve, {}), StepKind::Solve);
}

Step RemoteOracle::verify(const Problem& p, const std::string& answer,
                          VerifyStrategy strategy, Rng&) {
    return require_kind(generate(p, {}, StepKind::Verify, strategy, answer),
                        StepKind::Verify);
}

Step RemoteOracle::rectify(const Problem& p, const Trajectory& history, Rng&) {
    return require_kind(generate(p, history, StepKind::Rectify, {}), StepKind::Rectify);
}

} // namespace svsr
