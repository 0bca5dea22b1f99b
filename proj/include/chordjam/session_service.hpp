#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "chordjam/model.hpp"
#include "chordjam/predictor.hpp"

namespace chordjam {

// Inbound frames (one JSON object per line, discriminated by "type").
struct NoteOnMessage {
  int pitch = 60;
  int velocity = 64;
  double time_ms = 0.0;
};
struct NoteOffMessage {
  int pitch = 60;
  double time_ms = 0.0;
};
struct BarMessage {
  int index = 0;
  std::optional<double> time_ms;  // boundary time; derived from tempo when absent
};
struct ConfigMessage {
  std::optional<double> alpha;
  std::optional<VocabularyMode> vocabulary;
  std::optional<double> tempo_bpm;
};
using InboundMessage = std::variant<NoteOnMessage, NoteOffMessage, BarMessage, ConfigMessage>;

// Outbound frames.
struct ChordMessage {
  int bar_index = 0;
  Chord chord;
  PredictionSource source = PredictionSource::Fallback;
  double latency_ms = 0.0;
};
struct ErrorMessage {
  std::string message;
};

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

InboundMessage parse_inbound(std::string_view frame);
std::string encode(const InboundMessage& message);
std::string encode(const ChordMessage& message);
std::string encode(const ErrorMessage& message);

/// Copy of a chord frame with latency_ms zeroed, for comparing traces.
std::string without_latency(std::string_view frame);

/// Bar-clocked accompaniment over the session protocol. Notes are grouped
/// into the current bar; each bar message closes it, runs the engine and
/// answers with a chord frame for that bar.
class LiveSession {
 public:
  LiveSession(std::shared_ptr<const HmmModel> model, double alpha = 0.5, double tempo_bpm = 120.0);

  struct Reply {
    std::vector<std::string> frames;
    bool abort = false;
  };

  Reply handle(std::string_view frame);

  bool aborted() const { return aborted_; }
  const Session* engine() const { return engine_ ? &*engine_ : nullptr; }

 private:
  struct Sounding {
    double start_ms;
    int velocity;
  };

  Reply close_bar(const BarMessage& bar);
  void credit(int pitch, double from_ms, double to_ms);

  std::shared_ptr<const HmmModel> model_;
  double alpha_;
  double tempo_bpm_;
  std::optional<Session> engine_;
  std::optional<int> last_bar_;
  double bar_start_ms_ = 0.0;
  double last_event_ms_ = 0.0;
  bool saw_event_ = false;
  std::multimap<int, Sounding> sounding_;
  std::array<double, PitchClass::kCount> bar_mass_{};
  bool aborted_ = false;
};

/// Standard-stream transport: one frame per input line, replies written one
/// per line and flushed. Returns false when the session was aborted.
bool run_session(std::istream& in, std::ostream& out, std::shared_ptr<const HmmModel> model, double alpha = 0.5);

/// WebSocket endpoint carrying the same frames as text messages, one session
/// per connection.
class SessionServer {
 public:
  SessionServer(std::shared_ptr<const HmmModel> model, double alpha, unsigned short port,
                const std::string& address = "127.0.0.1");
  ~SessionServer();
  SessionServer(const SessionServer&) = delete;
  SessionServer& operator=(const SessionServer&) = delete;

  /// Bound port (useful when constructed with port 0).
  unsigned short port() const;
  /// Serves until stop() is called.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace chordjam
