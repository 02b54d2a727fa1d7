#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "ctrlroom/gateway/protocol.hpp"
#include "ctrlroom/harness/scenario.hpp"

namespace ctrlroom::gateway {

using Clock = std::function<Millis()>;

/// Wall clock in milliseconds since the first call.
Clock steady_clock();

// A pointer held through the UI stands in for an arm: the ray starts at this
// virtual shoulder, in front of the screen centre.
inline constexpr double kVirtualShoulder[3] = {0.0, 1.5, 3.0};

// Text arrives whole, so the utterance interval is estimated from its length.
inline constexpr Millis kSpeechPerChar{70};

/// Screen-plane point for normalized pointer coordinates.
geometry::Vec3 pointer_to_screen(double u, double v, const geometry::ScreenLayout& layout);

// One room's pipeline. Not thread safe; Room serializes access. Every input is
// stamped with the clock reading it is handled at (bumped to keep stamps
// strictly increasing) and processed immediately, so the fusion reorder buffer
// is not used here.
class Pipeline {
public:
    struct Reply {
        std::vector<WireMessage> broadcast;  // to every client of the room
        std::vector<WireMessage> direct;     // to the sender only
    };

    explicit Pipeline(harness::PipelineConfig config);

    Reply handle_text(std::string_view text, Millis now);
    Reply handle(const WireMessage& message, Millis now);

    /// Fires due grace deadlines.
    Reply tick(Millis now);

    WireMessage snapshot() const;
    std::uint64_t revision() const { return revision_; }
    const environment::RoomState& room() const { return room_; }
    const fusion::FusionEngine& engine() const { return *engine_; }

private:
    Millis stamp(Millis now);
    void reset();
    void drain(Millis t, Reply& reply);
    void on_speech(const SpeechEvent& e, Millis t, Reply& reply);
    void on_pointer(const PointerEvent& e, Millis t, Reply& reply);

    harness::PipelineConfig config_;
    std::unique_ptr<geometry::PointingTracker> tracker_;
    std::unique_ptr<fusion::FusionEngine> engine_;
    environment::RoomState room_;
    std::uint64_t revision_ = 0;
    bool dirty_ = false;
    std::optional<Millis> last_stamp_;
};

using ClientId = std::uint64_t;

// Fan-out with a bounded outbox per client. Delivery never blocks the
// pipeline: a client whose outbox is full loses its backlog, gets a single
// slow_consumer error and nothing after it; the transport should then close.
class Room {
public:
    Room(harness::PipelineConfig config, Clock clock, std::size_t outbox_capacity = 256);

    /// wake runs (under the room lock) whenever the client's outbox gains messages.
    /// The new client receives the current snapshot.
    ClientId attach(std::function<void()> wake = {});
    void detach(ClientId id);

    void receive(ClientId from, std::string_view text);
    void tick();

    /// Removes and returns the queued messages.
    std::vector<std::string> take(ClientId id);
    bool dropped(ClientId id) const;
    std::size_t clients() const;

    std::uint64_t revision() const;
    environment::RoomState state() const;

private:
    struct Outbox {
        std::deque<std::string> queue;
        bool dropped = false;
        std::function<void()> wake;
    };

    void deliver(Outbox& box, const WireMessage& m);
    void dispatch(ClientId from, const Pipeline::Reply& reply);

    mutable std::mutex mutex_;
    Pipeline pipeline_;
    Clock clock_;
    std::size_t capacity_;
    std::map<ClientId, Outbox> outboxes_;
    ClientId next_id_ = 1;
};

}  // namespace ctrlroom::gateway
