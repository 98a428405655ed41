#include "bplab/log.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace bplab::log {
namespace {

std::mutex g_mutex;
Level g_min_level = Level::Warn;

const char* level_name(Level level) {
    switch (level) {
        case Level::Debug: return "debug";
        case Level::Info: return "info";
        case Level::Warn: return "warn";
        case Level::Error: return "error";
    }
    return "?";
}

Sink& sink_ref() {
    static Sink sink = [](Level level, std::string_view message) {
        std::cerr << "[" << level_name(level) << "] " << message << '\n';
    };
    return sink;
}

}  // namespace

Sink set_sink(Sink sink) {
    std::lock_guard lock(g_mutex);
    Sink old = std::move(sink_ref());
    sink_ref() = std::move(sink);
    return old;
}

Level set_min_level(Level level) {
    std::lock_guard lock(g_mutex);
    return std::exchange(g_min_level, level);
}

void write(Level level, std::string_view message) {
    std::lock_guard lock(g_mutex);
    if (level < g_min_level || !sink_ref()) return;
    sink_ref()(level, message);
}

}  // namespace bplab::log
