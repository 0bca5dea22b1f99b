#include "chordjam/session_service.hpp"

#include <chrono>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

namespace chordjam {

namespace {

using nlohmann::json;

const json& require(const json& j, const char* key) {
  if (!j.contains(key)) throw ProtocolError(std::string("missing field \"") + key + "\"");
  return j[key];
}

int require_int(const json& j, const char* key, int lo, int hi) {
  const json& v = require(j, key);
  if (!v.is_number_integer()) throw ProtocolError(std::string("field \"") + key + "\" must be an integer");
  const auto value = v.get<long long>();
  if (value < lo || value > hi) throw ProtocolError(std::string("field \"") + key + "\" out of range");
  return static_cast<int>(value);
}

double require_time(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_number()) throw ProtocolError(std::string("field \"") + key + "\" must be a number");
  const double t = v.get<double>();
  if (!(t >= 0.0)) throw ProtocolError(std::string("field \"") + key + "\" must be non-negative");
  return t;
}

}  // namespace

InboundMessage parse_inbound(std::string_view frame) {
  json j;
  try {
    j = json::parse(frame);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ProtocolError("frame is not a JSON object");
  const json& type = require(j, "type");
  if (!type.is_string()) throw ProtocolError("field \"type\" must be a string");
  const auto kind = type.get<std::string>();
  if (kind == "note_on") {
    return NoteOnMessage{require_int(j, "pitch", 0, 127), j.contains("velocity") ? require_int(j, "velocity", 0, 127) : 64,
                         require_time(j, "time_ms")};
  }
  if (kind == "note_off") return NoteOffMessage{require_int(j, "pitch", 0, 127), require_time(j, "time_ms")};
  if (kind == "bar") {
    BarMessage bar{require_int(j, "index", 0, std::numeric_limits<int>::max()), std::nullopt};
    if (j.contains("time_ms")) bar.time_ms = require_time(j, "time_ms");
    return bar;
  }
  if (kind == "config") {
    ConfigMessage config;
    if (j.contains("alpha")) {
      if (!j["alpha"].is_number()) throw ProtocolError("field \"alpha\" must be a number");
      config.alpha = j["alpha"].get<double>();
      if (!(*config.alpha >= 0.0 && *config.alpha <= 1.0)) throw ProtocolError("alpha must lie in [0,1]");
    }
    if (j.contains("vocabulary")) {
      if (!j["vocabulary"].is_string()) throw ProtocolError("field \"vocabulary\" must be a string");
      try {
        config.vocabulary = parse_vocabulary_mode(j["vocabulary"].get<std::string>());
      } catch (const ValidationError& e) {
        throw ProtocolError(e.what());
      }
    }
    if (j.contains("tempo_bpm")) {
      if (!j["tempo_bpm"].is_number()) throw ProtocolError("field \"tempo_bpm\" must be a number");
      config.tempo_bpm = j["tempo_bpm"].get<double>();
      if (!(*config.tempo_bpm > 0.0)) throw ProtocolError("tempo_bpm must be positive");
    }
    return config;
  }
  throw ProtocolError("unknown message type \"" + kind + "\"");
}

std::string encode(const InboundMessage& message) {
  nlohmann::ordered_json j;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, NoteOnMessage>) {
          j = {{"type", "note_on"}, {"pitch", m.pitch}, {"velocity", m.velocity}, {"time_ms", m.time_ms}};
        } else if constexpr (std::is_same_v<T, NoteOffMessage>) {
          j = {{"type", "note_off"}, {"pitch", m.pitch}, {"time_ms", m.time_ms}};
        } else if constexpr (std::is_same_v<T, BarMessage>) {
          j = {{"type", "bar"}, {"index", m.index}};
          if (m.time_ms) j["time_ms"] = *m.time_ms;
        } else {
          j["type"] = "config";
          if (m.alpha) j["alpha"] = *m.alpha;
          if (m.vocabulary) j["vocabulary"] = std::string(to_string(*m.vocabulary));
          if (m.tempo_bpm) j["tempo_bpm"] = *m.tempo_bpm;
        }
      },
      message);
  return j.dump();
}

std::string encode(const ChordMessage& message) {
  nlohmann::ordered_json j;
  j["type"] = "chord";
  j["bar_index"] = message.bar_index;
  j["root"] = std::string(message.chord.root().name());
  j["quality"] = std::string(to_string(message.chord.quality()));
  j["source"] = std::string(to_string(message.source));
  j["latency_ms"] = message.latency_ms;
  return j.dump();
}

std::string encode(const ErrorMessage& message) {
  nlohmann::ordered_json j;
  j["type"] = "error";
  j["message"] = message.message;
  return j.dump();
}

std::string without_latency(std::string_view frame) {
  auto j = nlohmann::ordered_json::parse(frame);
  if (j.contains("latency_ms")) j["latency_ms"] = 0.0;
  return j.dump();
}

LiveSession::LiveSession(std::shared_ptr<const HmmModel> model, double alpha, double tempo_bpm)
    : model_(std::move(model)), alpha_(alpha), tempo_bpm_(tempo_bpm) {
  if (!model_) throw std::invalid_argument("live session requires a loaded model");
  validate_alpha(alpha_);
}

void LiveSession::credit(int pitch, double from_ms, double to_ms) {
  from_ms = std::max(from_ms, bar_start_ms_);
  if (to_ms > from_ms) bar_mass_[pitch % PitchClass::kCount] += to_ms - from_ms;
}

LiveSession::Reply LiveSession::handle(std::string_view frame) {
  if (aborted_) return {{encode(ErrorMessage{"session already aborted"})}, true};
  InboundMessage message;
  try {
    message = parse_inbound(frame);
  } catch (const ProtocolError& e) {
    return {{encode(ErrorMessage{e.what()})}, false};
  }

  auto touch = [&](double t) {
    if (!saw_event_) bar_start_ms_ = std::min(bar_start_ms_, t);
    if (!saw_event_ && !last_bar_) bar_start_ms_ = t;
    last_event_ms_ = saw_event_ ? std::max(last_event_ms_, t) : t;
    saw_event_ = true;
  };

  if (auto* on = std::get_if<NoteOnMessage>(&message)) {
    touch(on->time_ms);
    if (on->velocity == 0) {
      message = NoteOffMessage{on->pitch, on->time_ms};
    } else {
      sounding_.emplace(on->pitch, Sounding{on->time_ms, on->velocity});
      return {};
    }
  }
  if (auto* off = std::get_if<NoteOffMessage>(&message)) {
    touch(off->time_ms);
    const auto it = sounding_.find(off->pitch);
    if (it != sounding_.end()) {
      credit(off->pitch, it->second.start_ms, off->time_ms);
      sounding_.erase(it);
    }
    return {};
  }
  if (auto* config = std::get_if<ConfigMessage>(&message)) {
    if (engine_) return {{encode(ErrorMessage{"config is only accepted before the first bar"})}, false};
    Reply reply;
    if (config->vocabulary && *config->vocabulary != model_->vocabulary.mode()) {
      reply.frames.push_back(encode(ErrorMessage{"model vocabulary is " +
                                                 std::string(to_string(model_->vocabulary.mode())) + ", not " +
                                                 std::string(to_string(*config->vocabulary))}));
    }
    if (config->alpha) alpha_ = *config->alpha;
    if (config->tempo_bpm) tempo_bpm_ = *config->tempo_bpm;
    return reply;
  }
  return close_bar(std::get<BarMessage>(message));
}

LiveSession::Reply LiveSession::close_bar(const BarMessage& bar) {
  const auto received = std::chrono::steady_clock::now();
  if (last_bar_ && bar.index <= *last_bar_) {
    aborted_ = true;
    return {{encode(ErrorMessage{"bar index " + std::to_string(bar.index) + " does not follow " +
                                 std::to_string(*last_bar_) + "; session aborted"})},
            true};
  }
  last_bar_ = bar.index;
  const double bar_length_ms = 4.0 * 60000.0 / tempo_bpm_;
  double boundary = bar_start_ms_ + bar_length_ms;
  if (bar.time_ms) {
    boundary = *bar.time_ms;
  } else if (saw_event_) {
    boundary = std::max(boundary, last_event_ms_);
  }
  // Notes still held at the boundary are closed there.
  for (const auto& [pitch, note] : sounding_) credit(pitch, note.start_ms, boundary);
  sounding_.clear();
  const auto histogram = PitchHistogram::from_weights(bar_mass_);
  bar_mass_.fill(0.0);
  bar_start_ms_ = boundary;
  last_event_ms_ = boundary;

  if (!engine_) engine_.emplace(model_, SessionConfig{alpha_, 0});
  const auto prediction = engine_->next_chord_prediction(histogram);
  ChordMessage out{bar.index, prediction.predicted, prediction.source, 0.0};
  out.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - received).count();
  return {{encode(out)}, false};
}

bool run_session(std::istream& in, std::ostream& out, std::shared_ptr<const HmmModel> model, double alpha) {
  LiveSession session(std::move(model), alpha);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto reply = session.handle(line);
    for (const auto& frame : reply.frames) out << frame << '\n';
    out.flush();
    if (reply.abort) return false;
  }
  return true;
}

}  // namespace chordjam
