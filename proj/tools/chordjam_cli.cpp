// chordjam command-line entry point.
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/cfg/env.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "chordjam/evaluation.hpp"
#include "chordjam/ingest.hpp"
#include "chordjam/model.hpp"
#include "chordjam/predictor.hpp"
#include "chordjam/session_service.hpp"
#include "chordjam/synth.hpp"
#include "chordjam/viterbi.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using namespace chordjam;

namespace {

constexpr int kUsageError = 2;

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

bool is_histogram_stream(const fs::path& path) {
  const auto ext = path.extension().string();
  return ext == ".jsonl" || ext == ".ndjson";
}

// One histogram per line: a 12-element array or {"mass": [...]}. An all-zero
// or empty line marks a silent bar.
ObservationHistory read_histograms(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  ObservationHistory out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line);
    if (j.is_object()) j = j.at("mass");
    if (!j.is_array() || (!j.empty() && j.size() != PitchClass::kCount)) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected 12 pitch-class weights");
    }
    std::array<double, PitchClass::kCount> weights{};
    for (std::size_t i = 0; i < j.size(); ++i) weights[i] = j[i].get<double>();
    out.push_back(PitchHistogram::from_weights(weights));
  }
  return out;
}

ObservationHistory read_observations(const fs::path& path) {
  if (is_histogram_stream(path)) return read_histograms(path);
  Score score = parse_musicxml_file(path);
  if (!score.key_segments.empty()) score = transpose_to_c(score);
  ObservationHistory out;
  for (const auto& bar : score.bars) out.push_back(bar_histogram(bar));
  return out;
}

std::shared_ptr<const HmmModel> load_shared_model(const fs::path& path) {
  return std::make_shared<const HmmModel>(load_model(path));
}

FilterPolicy policy_for(VocabularyMode mode) {
  FilterPolicy policy;
  policy.vocabulary = ChordVocabulary(mode);
  return policy;
}

std::vector<fs::path> collect_scores(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& input : inputs) {
    if (fs::is_directory(input)) {
      for (const auto& entry : fs::recursive_directory_iterator(input)) {
        const auto ext = entry.path().extension().string();
        if (entry.is_regular_file() && (ext == ".xml" || ext == ".musicxml")) files.push_back(entry.path());
      }
    } else {
      files.emplace_back(input);
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string manifest_path_for(const fs::path& file, const std::optional<fs::path>& manifest) {
  if (!manifest) return file.string();
  const auto base = fs::absolute(*manifest).parent_path();
  return fs::proximate(fs::absolute(file), base).generic_string();
}

// Emits lines to `out_path` (or stdout when empty).
struct Sink {
  explicit Sink(const std::string& out_path) {
    if (!out_path.empty()) {
      fs::path p(out_path);
      if (p.has_parent_path()) fs::create_directories(p.parent_path());
      file_.open(p);
      if (!file_) throw std::runtime_error("cannot write " + out_path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

SessionServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("chordjam");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  spdlog::cfg::load_env_levels();  // SPDLOG_LEVEL=debug|info|warn|...

  CLI::App app{"Chord accompaniment engine: HMM chord inference with variable-order continuation"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Filter MusicXML files into a corpus manifest");
  std::vector<std::string> ingest_inputs;
  std::string ingest_out;
  std::string ingest_vocab = "diatonic7";
  int max_changes = 1;
  bool no_modulation = false;
  ingest->add_option("inputs", ingest_inputs, "MusicXML files or directories")->required();
  ingest->add_option("--out", ingest_out, "Manifest path (default: stdout)");
  ingest->add_option("--vocab", ingest_vocab, "full60 | diatonic7")->check(CLI::IsMember({"full60", "diatonic7"}));
  ingest->add_option("--max-changes", max_changes, "Maximum chord symbols per bar")->check(CLI::PositiveNumber);
  ingest->add_flag("--no-modulation", no_modulation, "Reject scores that change key");

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic periodic corpus as MusicXML plus manifest");
  SynthCorpusSpec synth_spec;
  std::string synth_dir;
  std::string synth_style = "sampled";
  synth->add_option("--out-dir", synth_dir, "Output directory")->required();
  synth->add_option("--songs", synth_spec.songs)->check(CLI::PositiveNumber);
  synth->add_option("--min-period", synth_spec.min_period)->check(CLI::Range(2, 64));
  synth->add_option("--max-period", synth_spec.max_period)->check(CLI::Range(2, 64));
  synth->add_option("--repetitions", synth_spec.repetitions)->check(CLI::PositiveNumber);
  synth->add_option("--notes-per-bar", synth_spec.notes_per_bar)->check(CLI::PositiveNumber);
  synth->add_option("--sharpness", synth_spec.profile_sharpness)->check(CLI::Range(0.0, 1.0));
  synth->add_option("--style", synth_style)->check(CLI::IsMember({"sampled", "root-only"}));
  synth->add_option("--seed", synth_spec.seed);

  // train
  auto* train = app.add_subcommand("train", "Train HMM parameters from a corpus manifest");
  std::string train_corpus, train_out, train_stats;
  std::string train_vocab = "diatonic7";
  double train_epsilon = kDefaultSmoothing;
  train->add_option("--corpus", train_corpus, "Corpus manifest")->required()->check(CLI::ExistingFile);
  train->add_option("--vocab", train_vocab)->check(CLI::IsMember({"full60", "diatonic7"}));
  train->add_option("--out", train_out, "Model file")->required();
  train->add_option("--epsilon", train_epsilon, "Additive smoothing")->check(CLI::PositiveNumber);
  train->add_option("--stats", train_stats, "Write the training stats report here");

  // infer
  auto* infer = app.add_subcommand("infer", "Viterbi chord sequence for a score or histogram stream");
  std::string infer_model, infer_input;
  double infer_alpha = 0.5;
  infer->add_option("--model", infer_model)->required()->check(CLI::ExistingFile);
  infer->add_option("--input", infer_input, "MusicXML or .jsonl histograms")->required()->check(CLI::ExistingFile);
  infer->add_option("--alpha", infer_alpha)->check(CLI::Range(0.0, 1.0));

  // predict
  auto* predict = app.add_subcommand("predict", "Per-bar prediction trace as NDJSON");
  std::string predict_model, predict_input;
  double predict_alpha = 0.5;
  std::size_t predict_depth = 0;
  predict->add_option("--model", predict_model)->required()->check(CLI::ExistingFile);
  predict->add_option("--input", predict_input, "MusicXML or .jsonl histograms")->required()->check(CLI::ExistingFile);
  predict->add_option("--alpha", predict_alpha)->check(CLI::Range(0.0, 1.0));
  predict->add_option("--max-depth", predict_depth, "Maximum VOM context depth (0 = unbounded)");

  // eval
  auto* eval = app.add_subcommand("eval", "k-fold cross-validated accuracy of one or all settings");
  std::string eval_setting = "hmm_vom_7";
  std::size_t eval_folds = 10;
  std::uint64_t eval_seed = 42;
  std::uint64_t eval_synth_seed = 42;
  std::string eval_corpus, eval_out, eval_vocab;
  EvalOptions eval_options;
  std::vector<std::string> setting_names{"all"};
  for (auto s : all_settings()) setting_names.emplace_back(to_string(s));
  eval->add_option("--setting", eval_setting)->check(CLI::IsMember(setting_names));
  eval->add_option("--folds", eval_folds)->check(CLI::Range(2, 1000));
  eval->add_option("--seed", eval_seed, "Fold shuffle seed");
  eval->add_option("--corpus", eval_corpus, "Corpus manifest (default: synthetic corpus)")->check(CLI::ExistingFile);
  eval->add_option("--synth-seed", eval_synth_seed, "Seed of the default synthetic corpus");
  eval->add_option("--alpha", eval_options.alpha)->check(CLI::Range(0.0, 1.0));
  eval->add_option("--vocab", eval_vocab, "Override the setting's vocabulary")
      ->check(CLI::IsMember({"full60", "diatonic7"}));
  eval->add_option("--out", eval_out, "Write the JSON report here instead of stdout");

  // bench
  auto* bench = app.add_subcommand("bench", "Per-bar prediction latency");
  std::size_t bench_bars = 240, bench_reps = 5;
  std::string bench_vocab = "diatonic7";
  std::uint64_t bench_seed = 7;
  bench->add_option("--bars", bench_bars)->check(CLI::PositiveNumber);
  bench->add_option("--reps", bench_reps)->check(CLI::PositiveNumber);
  bench->add_option("--vocab", bench_vocab)->check(CLI::IsMember({"full60", "diatonic7"}));
  bench->add_option("--seed", bench_seed);

  // serve
  auto* serve = app.add_subcommand("serve", "Live session over stdio or WebSocket");
  std::string serve_model, serve_address = "127.0.0.1";
  unsigned short serve_port = 8765;
  double serve_alpha = 0.5;
  bool serve_stdio = false;
  serve->add_option("--model", serve_model)->required()->check(CLI::ExistingFile);
  serve->add_option("--port", serve_port);
  serve->add_option("--address", serve_address);
  serve->add_option("--alpha", serve_alpha)->check(CLI::Range(0.0, 1.0));
  serve->add_flag("--stdio", serve_stdio, "Speak the protocol on stdin/stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*ingest) {
      FilterPolicy policy = policy_for(parse_vocabulary_mode(ingest_vocab));
      policy.max_chord_changes_per_bar = max_changes;
      policy.allow_key_modulation = !no_modulation;
      std::optional<fs::path> manifest;
      if (!ingest_out.empty()) manifest = ingest_out;
      Sink sink(ingest_out);
      std::size_t accepted = 0, total = 0;
      for (const auto& file : collect_scores(ingest_inputs)) {
        ManifestRecord record{manifest_path_for(file, manifest), false, ""};
        try {
          const auto result = filter_score(parse_musicxml_file(file), policy);
          record.accepted = result.accepted.has_value();
          record.reason = result.reason;
        } catch (const std::exception& e) {
          record.reason = e.what();
        }
        ++total;
        accepted += record.accepted;
        sink.stream() << to_json_line(record) << '\n';
      }
      spdlog::info("ingest: {} of {} scores accepted", accepted, total);
    } else if (*synth) {
      synth_spec.style = synth_style == "root-only" ? MelodyStyle::RootOnly : MelodyStyle::Sampled;
      if (synth_spec.min_period > synth_spec.max_period) throw CLI::ValidationError("--min-period exceeds --max-period");
      const auto songs = synth_corpus(synth_spec);
      const fs::path dir(synth_dir);
      fs::create_directories(dir);
      std::ofstream manifest(dir / "manifest.jsonl");
      for (const auto& song : songs) {
        const auto name = song.id + ".musicxml";
        write_text(dir / name, serialize_musicxml(song.score));
        manifest << to_json_line(ManifestRecord{name, true, ""}) << '\n';
      }
      ordered_json summary;
      summary["manifest"] = (dir / "manifest.jsonl").string();
      summary["songs"] = songs.size();
      summary["seed"] = synth_spec.seed;
      std::cout << summary.dump() << '\n';
    } else if (*train) {
      const auto mode = parse_vocabulary_mode(train_vocab);
      const auto corpus = load_corpus(train_corpus, policy_for(mode));
      if (corpus.empty()) throw std::runtime_error("no usable songs in " + train_corpus);
      std::vector<TrainingSequence> sequences;
      for (const auto& song : corpus) sequences.push_back(song.sequence);
      const auto model = train_model(sequences, ChordVocabulary(mode), train_epsilon);
      save_model(model, train_out);
      if (!train_stats.empty()) write_text(train_stats, training_stats_json(sequences, model));
      ordered_json summary;
      summary["model"] = train_out;
      summary["vocabulary"] = std::string(to_string(mode));
      summary["songs"] = corpus.size();
      summary["epsilon"] = train_epsilon;
      std::cout << summary.dump() << '\n';
    } else if (*infer) {
      const auto model = load_model(infer_model);
      const auto history = read_observations(infer_input);
      const auto result = viterbi(history, model, infer_alpha);
      ordered_json out;
      out["alpha"] = infer_alpha;
      out["chords"] = json::array();
      for (const auto& c : result.path) out["chords"].push_back(c.name());
      out["log_score"] = result.log_score;
      std::cout << out.dump() << '\n';
    } else if (*predict) {
      auto model = load_shared_model(predict_model);
      const auto history = read_observations(predict_input);
      Session session(model, SessionConfig{predict_alpha, predict_depth});
      for (const auto& bar : history) {
        const auto p = session.next_chord_prediction(bar);
        ordered_json rec;
        rec["bar_index"] = p.bar_index;
        rec["inferred_chord"] = p.inferred.name();
        rec["predicted_next_chord"] = p.predicted.name();
        rec["source"] = std::string(to_string(p.source));
        rec["latency_ms"] = p.latency_ms;
        std::cout << rec.dump() << '\n';
      }
    } else if (*eval) {
      if (!eval_vocab.empty()) eval_options.vocabulary = parse_vocabulary_mode(eval_vocab);
      std::vector<Setting> settings;
      if (eval_setting == "all") {
        settings.assign(all_settings().begin(), all_settings().end());
      } else {
        settings.push_back(parse_setting(eval_setting));
      }
      std::vector<EvalReport> reports;
      for (auto setting : settings) {
        const auto mode = eval_options.vocabulary.value_or(default_vocabulary(setting));
        std::vector<Song> corpus;
        if (eval_corpus.empty()) {
          SynthCorpusSpec spec;
          spec.seed = eval_synth_seed;
          corpus = synth_corpus(spec);
        } else {
          // Load with the widest vocabulary; cross_validate drops songs the
          // setting cannot represent.
          corpus = load_corpus(eval_corpus, policy_for(VocabularyMode::Full60));
        }
        auto report = cross_validate(corpus, eval_folds, setting, eval_seed, eval_options);
        for (const auto& w : report.warnings) spdlog::warn("{}: {}", to_string(setting), w);
        spdlog::info("{} ({}): {:.2f}%", to_string(setting), to_string(mode), 100.0 * report.mean_accuracy);
        reports.push_back(std::move(report));
      }
      std::string text;
      if (reports.size() == 1) {
        text = report_to_json(reports.front());
      } else {
        ordered_json all = ordered_json::array();
        for (const auto& r : reports) all.push_back(ordered_json::parse(report_to_json(r)));
        text = all.dump(2) + "\n";
      }
      if (eval_out.empty()) {
        std::cout << text;
      } else {
        write_text(eval_out, text);
      }
      std::cerr << format_results_table(reports);
    } else if (*bench) {
      const auto report = latency_benchmark(bench_bars, parse_vocabulary_mode(bench_vocab), bench_reps, bench_seed);
      std::cout << latency_to_json(report);
    } else if (*serve) {
      auto model = load_shared_model(serve_model);
      if (serve_stdio) return run_session(std::cin, std::cout, model, serve_alpha) ? 0 : 1;
      SessionServer server(model, serve_alpha, serve_port, serve_address);
      g_server = &server;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      ordered_json ready;
      ready["listening"] = serve_address;
      ready["port"] = server.port();
      std::cout << ready.dump() << std::endl;
      server.run();
      g_server = nullptr;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << '\n' << app.help();
    return kUsageError;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
