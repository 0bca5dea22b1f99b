#include "chordjam/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <nlohmann/json.hpp>

namespace chordjam {

namespace pt = boost::property_tree;

namespace {

int mod12(int v) { return ((v % 12) + 12) % 12; }

int step_value(char step) {
  switch (step) {
    case 'C': return 0;
    case 'D': return 2;
    case 'E': return 4;
    case 'F': return 5;
    case 'G': return 7;
    case 'A': return 9;
    case 'B': return 11;
    default: return -1;
  }
}

int parse_int(const std::string& text, const std::string& what, int bar) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used == 0 || std::floor(value) != value) throw std::invalid_argument(text);
    return static_cast<int>(value);
  } catch (const std::exception&) {
    throw ParseError("bad <" + what + "> value \"" + text + "\"", bar);
  }
}

int parse_alter(const pt::ptree& node, const std::string& key, int bar) {
  const auto alter = node.get_optional<std::string>(key);
  if (!alter) return 0;
  return parse_int(*alter, key, bar);
}

PitchClass key_root(int fifths, KeyMode mode) {
  const int major_root = mod12(fifths * 7);
  return PitchClass(mode == KeyMode::Major ? major_root : mod12(major_root + 9));
}

int key_fifths(const KeySegment& key) {
  const int major_root = key.mode == KeyMode::Major ? key.root.value() : mod12(key.root.value() + 3);
  const int fifths = mod12(major_root * 7);
  return fifths > 5 ? fifths - 12 : fifths;
}

struct PartContent {
  std::vector<Bar> bars;
  std::vector<std::vector<Chord>> harmony;
  std::vector<KeySegment> keys;
  std::optional<int> divisions;
  bool has_notes = false;
};

PartContent read_part(const pt::ptree& part) {
  PartContent out;
  std::optional<int> divisions;
  int bar = 0;
  for (const auto& [tag, measure] : part) {
    if (tag != "measure") continue;
    Bar current{.index = bar, .notes = {}};
    std::vector<Chord> chords;
    QuarterTime position{0};
    QuarterTime last_onset{0};

    auto duration_of = [&](const pt::ptree& node) -> QuarterTime {
      const auto text = node.get_optional<std::string>("duration");
      if (!text) throw ParseError("missing <duration>", bar);
      if (!divisions) throw ParseError("missing <divisions> before first duration", bar);
      const int ticks = parse_int(*text, "duration", bar);
      if (ticks < 0) throw ParseError("negative <duration>", bar);
      return QuarterTime(ticks, *divisions);
    };

    for (const auto& [child_tag, child] : measure) {
      if (child_tag == "attributes") {
        if (auto d = child.get_optional<std::string>("divisions")) {
          const int value = parse_int(*d, "divisions", bar);
          if (value <= 0) throw ParseError("<divisions> must be positive", bar);
          divisions = value;
          if (!out.divisions) out.divisions = value;
        }
        if (auto key = child.get_child_optional("key")) {
          if (auto fifths = key->get_optional<std::string>("fifths")) {
            const KeyMode mode = key->get<std::string>("mode", "major") == "minor" ? KeyMode::Minor : KeyMode::Major;
            KeySegment seg{bar, key_root(parse_int(*fifths, "fifths", bar), mode), mode};
            if (out.keys.empty() || out.keys.back().root != seg.root || out.keys.back().mode != seg.mode) {
              if (!out.keys.empty() && out.keys.back().start_bar == bar) {
                out.keys.back() = seg;
              } else {
                out.keys.push_back(seg);
              }
            }
          }
        }
      } else if (child_tag == "harmony") {
        const auto step = child.get_optional<std::string>("root.root-step");
        if (!step || step->size() != 1 || step_value(step->front()) < 0) {
          throw ParseError("harmony without a valid <root-step>", bar);
        }
        const PitchClass root(mod12(step_value(step->front()) + parse_alter(child, "root.root-alter", bar)));
        const std::string kind = child.get<std::string>("kind", "");
        std::vector<std::string> degrees;
        for (const auto& [dtag, degree] : child) {
          if (dtag == "degree") degrees.push_back(degree.get<std::string>("degree-value", ""));
        }
        try {
          chords.push_back(simplify_chord(root, kind, degrees));
        } catch (const UnknownChordKind& e) {
          throw ParseError(e.what(), bar);
        }
      } else if (child_tag == "note") {
        if (child.get_child_optional("grace")) continue;
        const QuarterTime duration = duration_of(child);
        const bool is_chord_tone = child.get_child_optional("chord").has_value();
        const QuarterTime onset = is_chord_tone ? last_onset : position;
        if (!is_chord_tone) {
          last_onset = position;
          position += duration;
        }
        if (child.get_child_optional("rest")) continue;
        const auto step = child.get_optional<std::string>("pitch.step");
        const auto octave = child.get_optional<std::string>("pitch.octave");
        if (!step || step->size() != 1 || step_value(step->front()) < 0 || !octave) {
          throw ParseError("note without a valid <pitch>", bar);
        }
        const int midi = (parse_int(*octave, "octave", bar) + 1) * 12 + step_value(step->front()) +
                         parse_alter(child, "pitch.alter", bar);
        if (midi < 0 || midi > 127) throw ParseError("pitch outside MIDI range", bar);
        if (duration <= 0) continue;
        int velocity = 64;
        if (auto dyn = child.get_optional<double>("<xmlattr>.dynamics")) {
          velocity = std::clamp(static_cast<int>(std::lround(*dyn * 0.9)), 0, 127);
        }
        current.notes.push_back({midi, onset, duration, velocity});
        out.has_notes = true;
      } else if (child_tag == "backup") {
        position -= duration_of(child);
        if (position < 0) position = 0;
      } else if (child_tag == "forward") {
        position += duration_of(child);
      }
    }
    std::stable_sort(current.notes.begin(), current.notes.end(),
                     [](const NoteEvent& a, const NoteEvent& b) { return a.onset < b.onset; });
    out.bars.push_back(std::move(current));
    out.harmony.push_back(std::move(chords));
    ++bar;
  }
  return out;
}

std::string xml_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string_view musicxml_kind(ChordQuality quality) {
  switch (quality) {
    case ChordQuality::Major: return "major";
    case ChordQuality::Minor: return "minor";
    case ChordQuality::Augmented: return "augmented";
    case ChordQuality::Diminished: return "diminished";
    case ChordQuality::Suspended: return "suspended-fourth";
  }
  return "major";
}

void write_pitch_class(std::ostream& os, std::string_view indent, std::string_view step_tag,
                       std::string_view alter_tag, PitchClass pc) {
  const auto name = pc.name();
  os << indent << "<" << step_tag << ">" << name.front() << "</" << step_tag << ">\n";
  if (name.size() > 1) os << indent << "<" << alter_tag << ">1</" << alter_tag << ">\n";
}

}  // namespace

ParseError::ParseError(const std::string& what, std::optional<int> bar_index)
    : std::runtime_error(bar_index ? "bar " + std::to_string(*bar_index) + ": " + what : what),
      bar_index_(bar_index) {}

std::span<const Chord> Score::harmony_at(int bar_index) const {
  for (const auto& entry : harmony) {
    if (entry.bar_index == bar_index) return entry.chords;
  }
  return {};
}

const KeySegment* Score::key_at(int bar_index) const {
  const KeySegment* found = nullptr;
  for (const auto& seg : key_segments) {
    if (seg.start_bar <= bar_index) found = &seg;
  }
  return found;
}

void validate(const Score& score) {
  for (std::size_t i = 1; i < score.bars.size(); ++i) {
    if (score.bars[i].index <= score.bars[i - 1].index) {
      throw ValidationError("bar indices are not strictly increasing at bar " + std::to_string(score.bars[i].index));
    }
  }
  for (const auto& entry : score.harmony) {
    const bool exists = std::any_of(score.bars.begin(), score.bars.end(),
                                    [&](const Bar& b) { return b.index == entry.bar_index; });
    if (!exists) throw ValidationError("harmony addresses missing bar " + std::to_string(entry.bar_index));
  }
}

Score parse_musicxml(std::string_view document) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(document)};
    pt::read_xml(in, tree, pt::xml_parser::trim_whitespace | pt::xml_parser::no_comments);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(std::string("malformed XML: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  const auto root = tree.get_child_optional("score-partwise");
  if (!root) throw ParseError("not a partwise MusicXML document (missing <score-partwise>)");

  std::vector<PartContent> parts;
  for (const auto& [tag, part] : *root) {
    if (tag == "part") parts.push_back(read_part(part));
  }
  if (parts.empty()) throw ParseError("document has no <part>");

  Score score;
  score.title = root->get<std::string>("work.work-title", root->get<std::string>("movement-title", ""));
  const auto melody = std::find_if(parts.begin(), parts.end(), [](const PartContent& p) { return p.has_notes; });
  const PartContent& lead = melody != parts.end() ? *melody : parts.front();
  score.bars = lead.bars;
  score.divisions = lead.divisions.value_or(0);
  if (score.divisions <= 0) {
    const auto with_div = std::find_if(parts.begin(), parts.end(),
                                       [](const PartContent& p) { return p.divisions.value_or(0) > 0; });
    if (with_div == parts.end()) throw ParseError("missing <divisions>");
    score.divisions = *with_div->divisions;
  }
  score.key_segments = lead.keys;
  if (score.key_segments.empty()) {
    for (const auto& p : parts) {
      if (!p.keys.empty()) {
        score.key_segments = p.keys;
        break;
      }
    }
  }
  for (std::size_t bar = 0; bar < score.bars.size(); ++bar) {
    BarHarmony entry{static_cast<int>(bar), {}};
    for (const auto& p : parts) {
      if (bar < p.harmony.size()) entry.chords.insert(entry.chords.end(), p.harmony[bar].begin(), p.harmony[bar].end());
    }
    if (!entry.chords.empty()) score.harmony.push_back(std::move(entry));
  }
  return score;
}

Score parse_musicxml_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_musicxml(buf.str());
}

std::string serialize_musicxml(const Score& score) {
  // Pick a tick size that represents every onset and duration exactly.
  std::int64_t divisions = std::max(1, score.divisions);
  for (const auto& bar : score.bars) {
    for (const auto& note : bar.notes) {
      divisions = std::lcm(divisions, note.onset.denominator());
      divisions = std::lcm(divisions, note.duration.denominator());
    }
  }
  auto ticks = [&](QuarterTime t) { return boost::rational_cast<std::int64_t>(t * divisions); };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
     << "<!DOCTYPE score-partwise PUBLIC \"-//Recordare//DTD MusicXML 3.1 Partwise//EN\" "
        "\"http://www.musicxml.org/dtds/partwise.dtd\">\n"
     << "<score-partwise version=\"3.1\">\n"
     << "  <work>\n    <work-title>" << xml_escape(score.title) << "</work-title>\n  </work>\n"
     << "  <part-list>\n    <score-part id=\"P1\">\n      <part-name>Melody</part-name>\n"
     << "    </score-part>\n  </part-list>\n"
     << "  <part id=\"P1\">\n";
  for (std::size_t i = 0; i < score.bars.size(); ++i) {
    const Bar& bar = score.bars[i];
    os << "    <measure number=\"" << (i + 1) << "\">\n";
    const KeySegment* key_change = nullptr;
    for (const auto& seg : score.key_segments) {
      if (seg.start_bar == bar.index) key_change = &seg;
    }
    if (i == 0 || key_change) {
      os << "      <attributes>\n";
      if (i == 0) os << "        <divisions>" << divisions << "</divisions>\n";
      if (key_change) {
        os << "        <key>\n          <fifths>" << key_fifths(*key_change) << "</fifths>\n"
           << "          <mode>" << (key_change->mode == KeyMode::Minor ? "minor" : "major") << "</mode>\n"
           << "        </key>\n";
      }
      if (i == 0) os << "        <time>\n          <beats>4</beats>\n          <beat-type>4</beat-type>\n        </time>\n";
      os << "      </attributes>\n";
    }
    for (const Chord& chord : score.harmony_at(bar.index)) {
      os << "      <harmony>\n        <root>\n";
      write_pitch_class(os, "          ", "root-step", "root-alter", chord.root());
      os << "        </root>\n        <kind>" << musicxml_kind(chord.quality()) << "</kind>\n      </harmony>\n";
    }
    std::int64_t position = 0;
    for (const auto& note : bar.notes) {
      const std::int64_t onset = ticks(note.onset);
      if (onset > position) {
        os << "      <note>\n        <rest/>\n        <duration>" << (onset - position) << "</duration>\n      </note>\n";
      } else if (onset < position) {
        os << "      <backup>\n        <duration>" << (position - onset) << "</duration>\n      </backup>\n";
      }
      os << "      <note dynamics=\"" << note.velocity / 0.9 << "\">\n        <pitch>\n";
      write_pitch_class(os, "          ", "step", "alter", pitch_class(note.pitch));
      os << "          <octave>" << (note.pitch / 12 - 1) << "</octave>\n        </pitch>\n"
         << "        <duration>" << ticks(note.duration) << "</duration>\n      </note>\n";
      position = onset + ticks(note.duration);
    }
    os << "    </measure>\n";
  }
  os << "  </part>\n</score-partwise>\n";
  return os.str();
}

Score transpose_to_c(const Score& score) {
  if (score.key_segments.empty()) throw ValidationError("cannot transpose a score without key signature");
  Score out = score;
  auto shift_for = [&](int bar_index) {
    const KeySegment* seg = score.key_at(bar_index);
    if (!seg) seg = &score.key_segments.front();
    const int tonic_target = seg->mode == KeyMode::Major ? 0 : 9;
    return mod12(seg->root.value() - tonic_target);
  };
  for (auto& bar : out.bars) {
    const int down = shift_for(bar.index);
    for (auto& note : bar.notes) {
      note.pitch -= down;
      if (note.pitch < 0) note.pitch += 12;
    }
  }
  for (auto& entry : out.harmony) {
    const int down = shift_for(entry.bar_index);
    for (auto& chord : entry.chords) chord = chord.transposed(-down);
  }
  out.key_segments = {KeySegment{0, PitchClass(0), KeyMode::Major}};
  return out;
}

FilterResult filter_score(const Score& score, const FilterPolicy& policy) {
  if (policy.max_chord_changes_per_bar < 1) throw ValidationError("max_chord_changes_per_bar must be >= 1");
  try {
    validate(score);
  } catch (const ValidationError& e) {
    return {std::nullopt, e.what()};
  }
  if (score.bars.size() < 2) return {std::nullopt, "too short: " + std::to_string(score.bars.size()) + " bar(s)"};
  for (const auto& entry : score.harmony) {
    if (static_cast<int>(entry.chords.size()) > policy.max_chord_changes_per_bar) {
      return {std::nullopt,
              "bar " + std::to_string(entry.bar_index) + ": " + std::to_string(entry.chords.size()) + " chord changes"};
    }
  }
  if (score.harmony_at(score.bars.front().index).empty()) return {std::nullopt, "no chord annotation at bar 0"};
  if (score.key_segments.empty()) return {std::nullopt, "missing key signature"};
  if (score.key_segments.size() > 1 && !policy.allow_key_modulation) {
    return {std::nullopt, "key modulation at bar " + std::to_string(score.key_segments[1].start_bar)};
  }
  Score transposed = transpose_to_c(score);
  for (const auto& entry : transposed.harmony) {
    for (const auto& chord : entry.chords) {
      if (!policy.vocabulary.contains(chord)) {
        return {std::nullopt, "bar " + std::to_string(entry.bar_index) + ": chord " + chord.name() + " outside " +
                                  std::string(to_string(policy.vocabulary.mode())) + " vocabulary"};
      }
    }
  }
  return {std::move(transposed), {}};
}

TrainingSequence to_training_sequence(const Score& score) {
  if (score.bars.size() < 2) {
    throw ValidationError("training sequence needs at least 2 bars, score has " + std::to_string(score.bars.size()));
  }
  TrainingSequence seq;
  std::optional<Chord> active;
  for (const auto& bar : score.bars) {
    const auto chords = score.harmony_at(bar.index);
    if (!chords.empty()) active = chords.front();
    if (!active) throw ValidationError("no chord annotation at or before bar " + std::to_string(bar.index));
    seq.chords.push_back(*active);
    seq.histograms.push_back(bar_histogram(bar));
  }
  return seq;
}

std::string to_json_line(const ManifestRecord& record) {
  nlohmann::ordered_json j;
  j["path"] = record.path;
  j["status"] = record.accepted ? "accepted" : "rejected";
  if (!record.reason.empty()) j["reason"] = record.reason;
  return j.dump();
}

ManifestRecord parse_manifest_line(std::string_view line) {
  const auto j = nlohmann::json::parse(line);
  ManifestRecord record;
  record.path = j.at("path").get<std::string>();
  const auto status = j.at("status").get<std::string>();
  if (status != "accepted" && status != "rejected") throw ValidationError("bad manifest status: " + status);
  record.accepted = status == "accepted";
  record.reason = j.value("reason", "");
  return record;
}

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path.string());
  std::vector<ManifestRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    records.push_back(parse_manifest_line(line));
  }
  return records;
}

std::vector<Song> load_corpus(const std::filesystem::path& manifest, const FilterPolicy& policy) {
  std::vector<Song> songs;
  const auto base = manifest.parent_path();
  for (const auto& record : read_manifest(manifest)) {
    if (!record.accepted) continue;
    std::filesystem::path file(record.path);
    if (file.is_relative()) file = base / file;
    auto result = filter_score(parse_musicxml_file(file), policy);
    if (!result) continue;
    Song song{record.path, std::move(*result.accepted), {}};
    song.sequence = to_training_sequence(song.score);
    songs.push_back(std::move(song));
  }
  return songs;
}

}  // namespace chordjam
