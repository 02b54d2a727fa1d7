#include "ctrlroom/gateway/room.hpp"

#include <chrono>

#include "ctrlroom/errors.hpp"

namespace ctrlroom::gateway {

Clock steady_clock() {
    const auto origin = std::chrono::steady_clock::now();
    return [origin] {
        return std::chrono::duration_cast<Millis>(std::chrono::steady_clock::now() - origin);
    };
}

geometry::Vec3 pointer_to_screen(double u, double v, const geometry::ScreenLayout& layout) {
    return {u * layout.width - layout.width / 2.0, (1.0 - v) * layout.height, 0.0};
}

Pipeline::Pipeline(harness::PipelineConfig config) : config_(std::move(config)) {
    if (!config_.model) config_.model = harness::default_model();
    config_.pointing.validate();
    config_.fusion.reorder_bound = Millis{0};
    reset();
    dirty_ = false;
}

void Pipeline::reset() {
    tracker_ = std::make_unique<geometry::PointingTracker>(config_.pointing);
    engine_ = std::make_unique<fusion::FusionEngine>(config_.fusion);
    engine_->on_revision = [this](const fusion::DialogueState&) { dirty_ = true; };
    room_ = environment::RoomState{};
    dirty_ = true;
}

Millis Pipeline::stamp(Millis now) {
    Millis t = now;
    if (last_stamp_ && t <= *last_stamp_) t = *last_stamp_ + Millis{1};
    last_stamp_ = t;
    return t;
}

WireMessage Pipeline::snapshot() const {
    return state_snapshot(revision_, room_, summarize(engine_->state()));
}

Pipeline::Reply Pipeline::handle_text(std::string_view text, Millis now) {
    try {
        return handle(parse_message(text), now);
    } catch (const ProtocolError& e) {
        Reply r;
        r.direct.push_back(error_message("malformed", e.what()));
        return r;
    }
}

Pipeline::Reply Pipeline::handle(const WireMessage& message, Millis now) {
    Reply reply;
    if (!is_inbound(message.kind)) {
        reply.direct.push_back(
            error_message("unexpected_kind", std::string(to_string(message.kind)) + " is server-to-client only"));
        return reply;
    }
    try {
        switch (message.kind) {
            case MessageKind::speech_event: {
                const auto e = decode_speech(message.payload);
                on_speech(e, stamp(now), reply);
                break;
            }
            case MessageKind::pointer_event: {
                const auto e = decode_pointer(message.payload);
                on_pointer(e, stamp(now), reply);
                break;
            }
            default: {
                const auto c = decode_control(message.payload);
                if (c.action == ControlAction::snapshot) {
                    reply.direct.push_back(snapshot());
                } else {
                    reset();
                    drain(stamp(now), reply);
                }
                break;
            }
        }
    } catch (const ProtocolError& e) {
        reply.direct.push_back(error_message("invalid_payload", e.what()));
    } catch (const Error& e) {
        reply.direct.push_back(error_message("rejected_input", e.what()));
    }
    return reply;
}

Pipeline::Reply Pipeline::tick(Millis now) {
    Reply reply;
    drain(stamp(now), reply);
    return reply;
}

void Pipeline::on_speech(const SpeechEvent& e, Millis t, Reply& reply) {
    const Millis length{kSpeechPerChar.count() * static_cast<std::int64_t>(e.text.size())};
    engine_->submit(nlu::understand(*config_.model, e.text, t - length, t));
    drain(t, reply);
}

void Pipeline::on_pointer(const PointerEvent& e, Millis t, Reply& reply) {
    if (!e.pressed) {
        tracker_->end_episode();
        geometry::PointingDistribution empty;
        empty.window_start = empty.window_end = t;
        reply.broadcast.push_back(distribution_update(empty, false));
        drain(t, reply);
        return;
    }
    const auto& layout = config_.pointing.layout;
    geometry::PointingSample sample;
    if (e.uv) {
        const geometry::Vec3 shoulder(kVirtualShoulder[0], kVirtualShoulder[1], kVirtualShoulder[2]);
        const geometry::Vec3 target = pointer_to_screen((*e.uv)[0], (*e.uv)[1], layout);
        sample.timestamp = t;
        sample.ray_origin = shoulder;
        sample.ray_direction = (target - shoulder).normalized();
        // Bin the exact target rather than the re-intersected ray, so edge
        // coordinates stay on the screen.
        sample.hit = layout.cell_at(target.x(), target.y());
    } else {
        const geometry::Vec3 o(e.ray->origin[0], e.ray->origin[1], e.ray->origin[2]);
        const geometry::Vec3 d(e.ray->direction[0], e.ray->direction[1], e.ray->direction[2]);
        sample = geometry::cast_ray(t, o, o + d.normalized(), layout);
    }
    const auto gesture = tracker_->push_sample(sample);
    reply.broadcast.push_back(distribution_update(tracker_->distribution(), true));
    if (gesture) engine_->submit(*gesture);
    drain(t, reply);
}

void Pipeline::drain(Millis t, Reply& reply) {
    for (const auto& out : engine_->advance(t + Millis{1})) {
        if (const auto* ic = std::get_if<fusion::IssuedCommand>(&out)) {
            reply.broadcast.push_back(command_issued(*ic));
            auto applied = environment::apply(room_, ic->command);
            if (auto* next = std::get_if<environment::RoomState>(&applied)) {
                room_ = std::move(*next);
                dirty_ = true;
            } else {
                const auto& rej = std::get<environment::Rejection>(applied);
                reply.broadcast.push_back(
                    error_message("command_rejected", std::string(to_string(rej.reason)) + ": " + rej.detail));
            }
        } else {
            reply.broadcast.push_back(clarification_needed(std::get<fusion::Clarification>(out)));
        }
    }
    if (dirty_) {
        dirty_ = false;
        ++revision_;
        reply.broadcast.push_back(snapshot());
    }
}

Room::Room(harness::PipelineConfig config, Clock clock, std::size_t outbox_capacity)
    : pipeline_(std::move(config)), clock_(std::move(clock)), capacity_(outbox_capacity) {
    if (!clock_) clock_ = steady_clock();
    if (capacity_ < 2) throw InvalidInputError("outbox capacity must be at least 2");
}

ClientId Room::attach(std::function<void()> wake) {
    std::lock_guard lock(mutex_);
    const ClientId id = next_id_++;
    auto& box = outboxes_[id];
    box.wake = std::move(wake);
    deliver(box, pipeline_.snapshot());
    return id;
}

void Room::detach(ClientId id) {
    std::lock_guard lock(mutex_);
    outboxes_.erase(id);
}

void Room::receive(ClientId from, std::string_view text) {
    std::lock_guard lock(mutex_);
    dispatch(from, pipeline_.handle_text(text, clock_()));
}

void Room::tick() {
    std::lock_guard lock(mutex_);
    dispatch(0, pipeline_.tick(clock_()));
}

void Room::dispatch(ClientId from, const Pipeline::Reply& reply) {
    for (const auto& m : reply.broadcast) {
        for (auto& [_, box] : outboxes_) deliver(box, m);
    }
    if (auto it = outboxes_.find(from); it != outboxes_.end()) {
        for (const auto& m : reply.direct) deliver(it->second, m);
    }
}

void Room::deliver(Outbox& box, const WireMessage& m) {
    if (box.dropped) return;
    if (box.queue.size() >= capacity_) {
        box.queue.clear();
        box.queue.push_back(serialize(error_message("slow_consumer", "outbox overflowed; closing")));
        box.dropped = true;
    } else {
        box.queue.push_back(serialize(m));
    }
    if (box.wake) box.wake();
}

std::vector<std::string> Room::take(ClientId id) {
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    if (auto it = outboxes_.find(id); it != outboxes_.end()) {
        out.assign(std::make_move_iterator(it->second.queue.begin()),
                   std::make_move_iterator(it->second.queue.end()));
        it->second.queue.clear();
    }
    return out;
}

bool Room::dropped(ClientId id) const {
    std::lock_guard lock(mutex_);
    const auto it = outboxes_.find(id);
    return it == outboxes_.end() || it->second.dropped;
}

std::size_t Room::clients() const {
    std::lock_guard lock(mutex_);
    return outboxes_.size();
}

std::uint64_t Room::revision() const {
    std::lock_guard lock(mutex_);
    return pipeline_.revision();
}

environment::RoomState Room::state() const {
    std::lock_guard lock(mutex_);
    return pipeline_.room();
}

}  // namespace ctrlroom::gateway
