#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "chordjam/evaluation.hpp"
#include "chordjam/ingest.hpp"
#include "chordjam/model.hpp"
#include "chordjam/predictor.hpp"
#include "chordjam/session_service.hpp"
#include "chordjam/stats.hpp"
#include "chordjam/synth.hpp"
#include "chordjam/viterbi.hpp"
#include "chordjam/vom.hpp"

namespace py = pybind11;
using namespace chordjam;

namespace {

PitchHistogram histogram_from(const std::vector<double>& weights) {
  if (weights.size() != PitchClass::kCount) throw ValidationError("histogram needs 12 weights");
  return PitchHistogram::from_weights(std::span<const double, PitchClass::kCount>(weights.data(), PitchClass::kCount));
}

std::vector<std::vector<double>> rows(const Matrix& m) {
  std::vector<std::vector<double>> out;
  for (std::size_t r = 0; r < m.rows(); ++r) out.emplace_back(m.row(r).begin(), m.row(r).end());
  return out;
}

std::vector<TrainingSequence> sequences_of(const py::list& items) {
  std::vector<TrainingSequence> out;
  for (const auto& item : items) {
    if (py::isinstance<Song>(item)) {
      out.push_back(item.cast<const Song&>().sequence);
    } else {
      out.push_back(item.cast<TrainingSequence>());
    }
  }
  return out;
}

py::dict prediction_dict(const BarPrediction& p) {
  py::dict d;
  d["bar_index"] = p.bar_index;
  d["inferred"] = p.inferred;
  d["predicted"] = p.predicted;
  d["source"] = std::string(to_string(p.source));
  d["latency_ms"] = p.latency_ms;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Chord inference and next-chord prediction";

  py::register_exception<ModelError>(m, "ModelError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ProtocolError>(m, "ProtocolError", PyExc_ValueError);

  py::class_<Chord>(m, "Chord")
      .def(py::init(&Chord::parse), py::arg("name"))
      .def_static("from_id", &Chord::from_id)
      .def_property_readonly("name", &Chord::name)
      .def_property_readonly("root", [](const Chord& c) { return std::string(c.root().name()); })
      .def_property_readonly("quality", [](const Chord& c) { return std::string(to_string(c.quality())); })
      .def_property_readonly("id", &Chord::id)
      .def_property_readonly("triad", [](const Chord& c) {
        std::vector<int> out;
        for (auto pc : c.triad()) out.push_back(pc.value());
        return out;
      })
      .def("__eq__", [](const Chord& a, const Chord& b) { return a == b; })
      .def("__hash__", &Chord::id)
      .def("__repr__", [](const Chord& c) { return "Chord('" + c.name() + "')"; });

  py::class_<PitchHistogram>(m, "PitchHistogram")
      .def_static("from_weights", &histogram_from, py::arg("weights"))
      .def_static("silence", &PitchHistogram::silence)
      .def_property_readonly("mass", [](const PitchHistogram& h) { return std::vector<double>(h.mass.begin(), h.mass.end()); })
      .def_readonly("silent", &PitchHistogram::silent);

  py::class_<TrainingSequence>(m, "TrainingSequence")
      .def(py::init([](std::vector<Chord> chords, std::vector<PitchHistogram> histograms) {
             TrainingSequence s;
             s.chords = std::move(chords);
             s.histograms = std::move(histograms);
             return s;
           }),
           py::arg("chords"), py::arg("histograms"))
      .def_readonly("chords", &TrainingSequence::chords)
      .def_readonly("histograms", &TrainingSequence::histograms)
      .def("__len__", &TrainingSequence::size);

  py::class_<Song>(m, "Song")
      .def_readonly("id", &Song::id)
      .def_readonly("sequence", &Song::sequence)
      .def("__repr__", [](const Song& s) { return "<Song " + s.id + ", " + std::to_string(s.sequence.size()) + " bars>"; });

  m.def(
      "read_musicxml",
      [](const std::filesystem::path& path) { return to_training_sequence(transpose_to_c(parse_musicxml_file(path))); },
      py::arg("path"), "Parse a MusicXML file, transpose it to C and return its bar sequence.");
  m.def(
      "load_corpus",
      [](const std::filesystem::path& manifest, const std::string& vocabulary) {
        FilterPolicy policy;
        policy.vocabulary = ChordVocabulary(parse_vocabulary_mode(vocabulary));
        return load_corpus(manifest, policy);
      },
      py::arg("manifest"), py::arg("vocabulary") = "full60");
  m.def(
      "synth_corpus",
      [](int songs, int min_period, int max_period, int repetitions, int notes_per_bar, double sharpness,
         const std::string& style, std::uint64_t seed) {
        SynthCorpusSpec spec{songs, min_period, max_period, repetitions, notes_per_bar, sharpness,
                             MelodyStyle::Sampled, seed};
        if (style == "root-only") {
          spec.style = MelodyStyle::RootOnly;
        } else if (style != "sampled") {
          throw ValidationError("style must be \"sampled\" or \"root-only\"");
        }
        return synth_corpus(spec);
      },
      py::arg("songs") = 100, py::arg("min_period") = 4, py::arg("max_period") = 8, py::arg("repetitions") = 8,
      py::arg("notes_per_bar") = 8, py::arg("sharpness") = 0.9, py::arg("style") = "sampled", py::arg("seed") = 42);

  py::class_<HmmModel, std::shared_ptr<HmmModel>>(m, "HmmModel")
      .def_property_readonly("vocabulary", [](const HmmModel& h) { return std::string(to_string(h.vocabulary.mode())); })
      .def_property_readonly("chords", [](const HmmModel& h) { return std::vector<Chord>(h.vocabulary.chords().begin(), h.vocabulary.chords().end()); })
      .def_readonly("epsilon", &HmmModel::epsilon)
      .def_readonly("pi", &HmmModel::pi)
      .def_property_readonly("transitions", [](const HmmModel& h) { return rows(h.transitions); })
      .def_property_readonly("emissions", [](const HmmModel& h) { return rows(h.emissions); })
      .def("__len__", &HmmModel::size)
      .def("to_json", &model_to_json)
      .def_static("from_json", [](const std::string& text) { return std::make_shared<HmmModel>(model_from_json(text)); })
      .def("save", [](const HmmModel& h, const std::filesystem::path& p) { save_model(h, p); })
      .def_static("load", [](const std::filesystem::path& p) { return std::make_shared<HmmModel>(load_model(p)); })
      .def("__eq__", [](const HmmModel& a, const HmmModel& b) { return a == b; });

  m.def(
      "train_model",
      [](const py::list& corpus, const std::string& vocabulary, double epsilon) {
        const auto seqs = sequences_of(corpus);
        return std::make_shared<HmmModel>(train_model(seqs, ChordVocabulary(parse_vocabulary_mode(vocabulary)), epsilon));
      },
      py::arg("corpus"), py::arg("vocabulary") = "diatonic7", py::arg("epsilon") = kDefaultSmoothing,
      "Train from a list of Song or TrainingSequence objects.");

  m.def(
      "viterbi",
      [](const std::vector<PitchHistogram>& history, const HmmModel& model, double alpha) {
        auto r = viterbi(history, model, alpha);
        return py::make_tuple(r.path, r.log_score);
      },
      py::arg("histograms"), py::arg("model"), py::arg("alpha") = 0.5, "Most likely chord path and its score.");

  py::class_<Session>(m, "Session")
      .def(py::init([](std::shared_ptr<HmmModel> model, double alpha, std::size_t max_depth) {
             return Session(std::move(model), SessionConfig{alpha, max_depth});
           }),
           py::arg("model"), py::arg("alpha") = 0.5, py::arg("max_depth") = 0)
      .def("next_chord_prediction",
           [](Session& s, const PitchHistogram& bar) { return prediction_dict(s.next_chord_prediction(bar)); })
      .def_property_readonly("inferred", &Session::inferred)
      .def_property_readonly("bar_count", &Session::bar_count);

  py::class_<VomTree>(m, "VomTree")
      .def(py::init<std::size_t>(), py::arg("max_depth") = 0)
      .def("learn_sequence", [](VomTree& t, const std::vector<int>& s) { t.learn_sequence(s); })
      .def("query",
           [](const VomTree& t, const std::vector<int>& context) -> py::object {
             const auto d = t.query(context);
             if (!d) return py::none();
             py::dict out;
             out["counts"] = d->counts;
             out["depth"] = d->depth;
             return out;
           })
      .def("predict", [](const VomTree& t, const std::vector<int>& context) { return t.predict(context); })
      .def("dump", py::overload_cast<>(&VomTree::dump, py::const_))
      .def("clear", &VomTree::clear)
      .def_property_readonly("node_count", &VomTree::node_count);

  py::class_<LiveSession>(m, "LiveSession")
      .def(py::init([](std::shared_ptr<HmmModel> model, double alpha, double tempo) {
             return std::make_unique<LiveSession>(std::move(model), alpha, tempo);
           }),
           py::arg("model"), py::arg("alpha") = 0.5, py::arg("tempo_bpm") = 120.0)
      .def("handle",
           [](LiveSession& s, const std::string& frame) {
             auto r = s.handle(frame);
             return py::make_tuple(r.frames, r.abort);
           })
      .def_property_readonly("aborted", &LiveSession::aborted);

  m.def(
      "_cross_validate",
      [](const std::vector<Song>& corpus, std::size_t k, const std::string& setting, std::uint64_t seed, double alpha,
         std::optional<std::string> vocabulary) {
        EvalOptions options;
        options.alpha = alpha;
        if (vocabulary) options.vocabulary = parse_vocabulary_mode(*vocabulary);
        py::gil_scoped_release release;
        return report_to_json(cross_validate(corpus, k, parse_setting(setting), seed, options));
      },
      py::arg("corpus"), py::arg("k"), py::arg("setting"), py::arg("seed"), py::arg("alpha"), py::arg("vocabulary"));
  m.def(
      "_latency_benchmark",
      [](std::size_t bars, const std::string& vocabulary, std::size_t repetitions, std::uint64_t seed) {
        py::gil_scoped_release release;
        return latency_to_json(latency_benchmark(bars, parse_vocabulary_mode(vocabulary), repetitions, seed));
      },
      py::arg("bars"), py::arg("vocabulary"), py::arg("repetitions"), py::arg("seed"));
  m.def(
      "paired_t_test_one_sided",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        const auto r = stats::paired_t_test_one_sided(a, b);
        return py::make_tuple(r.t_statistic, r.degrees_of_freedom, r.p_value_one_sided);
      },
      py::arg("a"), py::arg("b"), "One-sided paired t-test of mean(a - b) > 0: (t, df, p).");
  m.def("settings", [] {
    std::vector<std::string> out;
    for (auto s : all_settings()) out.emplace_back(to_string(s));
    return out;
  });
}
