// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <layoutloop/config.hpp>

#include <memory>
#include <string>

namespace layoutloop
{

/// Reward server. Endpoints:
///   POST /score       {svg, background_path | background_b64, target_text} -> reward breakdown
///   POST /rm_score    same body -> {score}, the raw layout score of the configured scorer
///   POST /advantages  {groups, scheme, gamma?, n_max?} -> {scheme, advantages, flags}
///   GET  /health      -> {status, version}
/// Invalid payloads get 400 with an "error" code and "detail"; scorer failures get 502.
class RewardService
{
  public:
    struct Response
    {
        int status = 200;
        std::string body;
    };

    /// Builds the scorer from the config; everything is read-only afterwards.
    explicit RewardService(RunConfig cfg);
    ~RewardService();
    RewardService(const RewardService&) = delete;
    RewardService& operator=(const RewardService&) = delete;

    /// Request handlers, usable without a socket.
    [[nodiscard]] Response score(const std::string& body) const;
    [[nodiscard]] Response rm_score(const std::string& body) const;
    [[nodiscard]] Response advantages(const std::string& body) const;
    [[nodiscard]] Response health() const;

    /// Binds the configured host; port 0 picks a free port. Returns the bound port.
    int bind();
    /// Serves until stop(). Requires bind().
    void run();
    /// Blocks until run() has started accepting connections.
    void wait_until_ready() const;
    void stop();

  private:
    struct Impl;
    std::unique_ptr<Impl> _impl;
};

/// Strict base64 decoding (padding optional, whitespace ignored). Throws InputError.
[[nodiscard]] std::string decode_base64(std::string_view text);

} // namespace layoutloop
