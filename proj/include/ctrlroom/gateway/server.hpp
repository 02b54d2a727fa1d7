#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include "ctrlroom/gateway/room.hpp"

namespace ctrlroom::gateway {

enum class RoomMode { isolated, shared };

struct ServerOptions {
    std::uint16_t port = 8080;  // 0 picks a free port
    std::string address = "127.0.0.1";
    std::filesystem::path static_dir;  // empty: no HTTP assets
    RoomMode room_mode = RoomMode::isolated;
    std::size_t outbox_capacity = 256;
    Millis tick_interval{20};
    Clock clock;  // defaults to the steady clock
};

// WebSocket sessions and static files on the same port. Any HTTP request that
// asks for a WebSocket upgrade becomes a session; other GETs are served from
// static_dir.
class Server {
public:
    /// Binds immediately; throws std::system_error when the address is taken.
    Server(harness::PipelineConfig config, ServerOptions options);
    ~Server();

    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    std::uint16_t port() const;

    /// Serves until stop() is called. Runs handlers on the calling thread.
    void run();

    /// Safe from any thread.
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace ctrlroom::gateway
