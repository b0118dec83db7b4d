// SPDX-License-Identifier: Apache-2.0
#include <layoutloop/error.hpp>
#include <layoutloop/image_io.hpp>
#include <layoutloop/json_io.hpp>
#include <layoutloop/service.hpp>

#include <boost/beast/core/detail/base64.hpp>
#include <httplib.h>

#include <cctype>

namespace layoutloop
{

std::string decode_base64(std::string_view text)
{
    std::string compact;
    compact.reserve(text.size());
    for (char c: text)
        if (!std::isspace(static_cast<unsigned char>(c)))
            compact += c;
    size_t padding = 0;
    while (!compact.empty() && compact.back() == '=')
    {
        compact.pop_back();
        ++padding;
    }
    if (padding > 2 || compact.size() % 4 == 1 || (padding > 0 && (compact.size() + padding) % 4 != 0))
        throw InputError("background_b64 is not valid base64");
    // the decoder stops at the first partial quartet, so restore the padding it expects
    compact.append((4 - compact.size() % 4) % 4, '=');
    namespace b64 = boost::beast::detail::base64;
    std::string out(b64::decoded_size(compact.size()), '\0');
    const auto [written, read] = b64::decode(out.data(), compact.data(), compact.size());
    for (size_t i = read; i < compact.size(); ++i)
        if (compact[i] != '=')
            throw InputError("background_b64 is not valid base64");
    out.resize(written);
    return out;
}

namespace
{

struct BadRequest
{
    std::string code;
    std::string detail;
};

RewardService::Response json_response(int status, const Json& body)
{
    return { status, body.dump() };
}

RewardService::Response error_response(int status, const std::string& code, const std::string& detail)
{
    return json_response(status, Json { { "error", code }, { "detail", detail } });
}

nlohmann::json parse_body(const std::string& body)
{
    auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded())
        throw BadRequest { "invalid_json", "request body is not valid JSON" };
    if (!j.is_object())
        throw BadRequest { "invalid_json", "request body must be a JSON object" };
    return j;
}

std::string required_string(const nlohmann::json& j, const char* key)
{
    if (!j.contains(key) || !j[key].is_string())
        throw BadRequest { "missing_field", std::string("'") + key + "' must be a string" };
    return j[key].get<std::string>();
}

} // namespace

struct RewardService::Impl
{
    RunConfig cfg;
    ScorerSetup setup;
    ScoreOptions options;
    httplib::Server server;
    int port = -1;

    struct LayoutRequest
    {
        LayoutDocument doc;
        std::string svg;
        LuminanceRaster background;
        std::string background_path;
        std::string target_text;
    };

    LayoutRequest read_layout_request(const std::string& body) const
    {
        const auto j = parse_body(body);
        LayoutRequest r;
        r.svg = required_string(j, "svg");
        r.target_text = required_string(j, "target_text");
        try
        {
            r.doc = parse_svg(r.svg).document;
        }
        catch (const Error& e)
        {
            throw BadRequest { "invalid_svg", e.what() };
        }
        const bool has_path = j.contains("background_path") && !j["background_path"].is_null();
        const bool has_b64 = j.contains("background_b64") && !j["background_b64"].is_null();
        if (has_path == has_b64)
            throw BadRequest { "missing_field", "exactly one of 'background_path' and 'background_b64' is required" };
        try
        {
            if (has_path)
            {
                r.background_path = required_string(j, "background_path");
                r.background = load_image(resolve_background(cfg, r.background_path));
            }
            else
            {
                const auto bytes = decode_base64(required_string(j, "background_b64"));
                r.background = decode_image(
                    std::span(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()));
            }
        }
        catch (const Error& e)
        {
            throw BadRequest { "invalid_background", e.what() };
        }
        return r;
    }

    ScoreOptions options_for(const LayoutRequest& r) const
    {
        ScoreOptions o = options;
        o.svg = r.svg;
        o.background_path = r.background_path;
        return o;
    }
};

RewardService::RewardService(RunConfig cfg): _impl(std::make_unique<Impl>())
{
    _impl->cfg = std::move(cfg);
    _impl->setup = make_scorer(_impl->cfg);
    _impl->options = score_options(_impl->cfg, _impl->setup.stats);

    auto route = [this](auto handler) {
        return [this, handler](const httplib::Request& req, httplib::Response& res) {
            const Response r = (this->*handler)(req.body);
            res.status = r.status;
            res.set_content(r.body, "application/json");
        };
    };
    auto& server = _impl->server;
    server.Post("/score", route(&RewardService::score));
    server.Post("/rm_score", route(&RewardService::rm_score));
    server.Post("/advantages", route(&RewardService::advantages));
    server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
        const Response r = health();
        res.status = r.status;
        res.set_content(r.body, "application/json");
    });
}

RewardService::~RewardService()
{
    stop();
}

RewardService::Response RewardService::score(const std::string& body) const
{
    try
    {
        const auto r = _impl->read_layout_request(body);
        const auto breakdown =
            score_layout(r.doc, r.background, r.target_text, *_impl->setup.scorer, _impl->options_for(r));
        return json_response(200, to_json(breakdown));
    }
    catch (const BadRequest& e)
    {
        return error_response(400, e.code, e.detail);
    }
    catch (const ProviderError& e)
    {
        Json j { { "error", "provider_failure" }, { "detail", e.what() }, { "partial", to_json(e.partial()) } };
        return json_response(502, j);
    }
    catch (const std::exception& e)
    {
        return error_response(500, "internal", e.what());
    }
}

RewardService::Response RewardService::rm_score(const std::string& body) const
{
    try
    {
        if (dynamic_cast<const ServiceScorer*>(_impl->setup.scorer.get()))
            return error_response(501, "unsupported", "this server forwards layout scoring to another service");
        const auto r = _impl->read_layout_request(body);
        const auto& o = _impl->options;
        const auto analysis = analyze_layout(r.doc, r.background, r.target_text, o.ocr, o.advance);
        const ScoringContext ctx { r.doc, r.svg, r.background_path, r.target_text, analysis };
        return json_response(200, Json { { "score", _impl->setup.scorer->raw_score(ctx) } });
    }
    catch (const BadRequest& e)
    {
        return error_response(400, e.code, e.detail);
    }
    catch (const std::exception& e)
    {
        return error_response(500, "internal", e.what());
    }
}

RewardService::Response RewardService::advantages(const std::string& body) const
{
    try
    {
        const auto j = parse_body(body);
        const std::string scheme = required_string(j, "scheme");
        if (scheme != "outcome" && scheme != "process")
            throw BadRequest { "invalid_scheme", "scheme must be 'outcome' or 'process'" };
        double gamma = _impl->cfg.reward.gamma;
        if (j.contains("gamma"))
        {
            if (!j["gamma"].is_number())
                throw BadRequest { "invalid_field", "'gamma' must be a number" };
            gamma = j["gamma"].get<double>();
        }
        int n_max = _impl->cfg.n_max;
        if (j.contains("n_max"))
        {
            if (!j["n_max"].is_number_integer() || j["n_max"].get<int>() < 1)
                throw BadRequest { "invalid_field", "'n_max' must be a positive integer" };
            n_max = j["n_max"].get<int>();
        }
        if (!j.contains("groups") || !j["groups"].is_array())
            throw BadRequest { "missing_field", "'groups' must be an array" };

        std::vector<RolloutGroup> groups;
        try
        {
            for (const auto& g: j["groups"])
            {
                groups.push_back(group_from_json(g));
                if (groups.back().rollouts.empty())
                    throw InputError("group '" + groups.back().query_id + "' is empty");
                for (const auto& r: groups.back().rollouts)
                    r.validate(n_max);
            }
        }
        catch (const InputError& e)
        {
            throw BadRequest { "invalid_rollout", e.what() };
        }

        const auto result = scheme == "outcome" ? outcome_advantages(groups, gamma) : process_advantages(groups, n_max);
        Json records = Json::array();
        for (const auto& r: result.records)
            records.push_back(to_json(r));
        return json_response(200, Json { { "scheme", scheme }, { "advantages", records }, { "flags", result.flags } });
    }
    catch (const BadRequest& e)
    {
        return error_response(400, e.code, e.detail);
    }
    catch (const std::exception& e)
    {
        return error_response(500, "internal", e.what());
    }
}

RewardService::Response RewardService::health() const
{
    return json_response(200, Json { { "status", "ok" }, { "version", LAYOUTLOOP_VERSION } });
}

int RewardService::bind()
{
    auto& impl = *_impl;
    if (impl.cfg.port == 0)
        impl.port = impl.server.bind_to_any_port(impl.cfg.host);
    else
        impl.port = impl.server.bind_to_port(impl.cfg.host, impl.cfg.port) ? impl.cfg.port : -1;
    if (impl.port < 0)
        throw IoError("cannot bind " + impl.cfg.host + ":" + std::to_string(impl.cfg.port));
    return impl.port;
}

void RewardService::run()
{
    if (_impl->port < 0)
        throw Error("run() called before bind()");
    _impl->server.listen_after_bind();
}

void RewardService::wait_until_ready() const
{
    _impl->server.wait_until_ready();
}

void RewardService::stop()
{
    if (_impl && _impl->server.is_running())
        _impl->server.stop();
}

} // namespace layoutloop
