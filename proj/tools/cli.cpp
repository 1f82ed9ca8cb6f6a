#include "cli.h"

#include <CLI11.hpp>
#include <atomic>
#include <cstdlib>
#include <csignal>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <httplib.h>
#include <iostream>
#include <optional>
#include <thread>

#include "ppx/agreement.h"
#include "ppx/annotation_service.h"
#include "ppx/backends.h"
#include "ppx/corpus.h"
#include "ppx/experiment_runner.h"
#include "ppx/explainer.h"
#include "ppx/finetune_export.h"
#include "ppx/hier_classifier.h"
#include "ppx/manifest.h"
#include "ppx/metrics.h"
#include "ppx/text_util.h"

namespace ppx::cli {

namespace fs = std::filesystem;

namespace {

// Input problem the user can fix; printed with a hint and exit status 2.
struct UsageError : std::runtime_error {
  UsageError(const std::string& msg, std::string hint) : std::runtime_error(msg), hint(std::move(hint)) {}
  std::string hint;
};

struct BackendFlags {
  std::string stub;
  std::string endpoint;
  int max_in_flight = 4;
  int max_attempts = 3;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--stub", stub, "Scripted backend file; no network is used")->check(CLI::ExistingFile);
    cmd->add_option("--endpoint", endpoint, "Chat-completions base URL, e.g. http://localhost:8000/v1");
    cmd->add_option("--max-in-flight", max_in_flight, "Concurrent requests")->check(CLI::Range(1, 1024));
    cmd->add_option("--max-attempts", max_attempts, "Attempts per request")->check(CLI::Range(1, 20));
  }

  bool stubbed() const { return !stub.empty(); }

  std::shared_ptr<Backend> make(const std::string& fallback_endpoint = {}) const {
    if (!stub.empty()) return std::make_shared<StubBackend>(StubBackend::load(stub));
    const std::string url = endpoint.empty() ? fallback_endpoint : endpoint;
    if (url.empty()) {
      throw UsageError("no backend selected",
                       "pass --stub <script> for an offline run or --endpoint <url> for a live model");
    }
    HttpBackend::Options o;
    o.endpoint = url;
    if (const char* key = std::getenv("PPX_API_KEY")) o.api_key = key;
    return std::make_shared<HttpBackend>(o);
  }

  GatewayOptions gateway() const {
    GatewayOptions g;
    g.max_in_flight = max_in_flight;
    g.retry.max_attempts = max_attempts;
    return g;
  }
};

struct SamplingFlags {
  double temperature = 0.6;
  double top_p = 0.9;
  int top_k = 50;
  bool greedy = false;
  int max_tokens = 512;
  std::optional<int64_t> seed;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--temperature", temperature, "Sampling temperature");
    cmd->add_option("--top-p", top_p, "Nucleus sampling mass");
    cmd->add_option("--top-k", top_k, "Top-k cutoff, 0 disables");
    cmd->add_flag("--greedy", greedy, "Greedy decoding");
    cmd->add_option("--max-tokens", max_tokens, "Completion token limit");
    cmd->add_option("--seed", seed, "Sampling seed forwarded to the backend");
  }

  GenerationConfig config() const {
    GenerationConfig g;
    g.temperature = temperature;
    g.top_p = top_p;
    g.top_k = top_k;
    g.greedy = greedy;
    g.max_tokens = max_tokens;
    g.seed = seed;
    g.validate();
    return g;
  }
};

fs::path resolve_taxonomy(const std::string& name_or_path) {
  if (fs::exists(name_or_path)) return name_or_path;
  const std::string file = name_or_path + ".taxonomy";
  std::vector<fs::path> dirs = {"taxonomies"};
  if (const char* env = std::getenv("PPX_TAXONOMY_DIR")) dirs.insert(dirs.begin(), env);
  dirs.emplace_back(PPX_TAXONOMY_DIR);
  for (const auto& d : dirs) {
    if (fs::exists(d / file)) return d / file;
  }
  throw UsageError(fmt::format("taxonomy '{}' not found", name_or_path),
                   "pass a taxonomy file path or one of: opp115, goppc150, capp130, appcp100 "
                   "(set PPX_TAXONOMY_DIR to search elsewhere)");
}

void require_file(const std::string& path, std::string_view what) {
  if (!fs::exists(path)) {
    throw UsageError(fmt::format("{} '{}' does not exist", what, path), "check the path and try again");
  }
}

void write_text(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, fmt::format("cannot write '{}'", path.string()));
  out << content;
}

class ManifestScope {
 public:
  ManifestScope(std::string command, const std::vector<std::string>& args, bool pinned)
      : pinned_(pinned) {
    m_.command = std::move(command);
    m_.arguments = args;
    m_.started_at = utc_timestamp(pinned);
  }
  void input(const std::string& path) {
    if (!path.empty() && fs::is_regular_file(path)) m_.input_digests[path] = sha256_file(path);
  }
  void finish(const fs::path& dir) {
    m_.finished_at = utc_timestamp(pinned_);
    write_manifest(dir, m_);
  }

 private:
  RunManifest m_;
  bool pinned_;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (const auto& part : text::split(s, ',')) {
    auto t = text::trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string corpus, taxonomy, out;
  std::optional<uint64_t> split_seed;
  std::string ratios = "0.8,0.1,0.1";
};

int run_ingest(const IngestArgs& a, const std::vector<std::string>& argv) {
  require_file(a.corpus, "corpus");
  const Taxonomy t = Taxonomy::load(resolve_taxonomy(a.taxonomy));
  Corpus c = load_corpus(a.corpus, t);
  if (a.split_seed) {
    const auto parts = split_list(a.ratios);
    if (parts.size() != 3) throw UsageError("--ratios needs three values", "e.g. --ratios 0.8,0.1,0.1");
    SplitRatios r{std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2])};
    c = make_split(c, r, *a.split_seed);
  }
  nlohmann::ordered_json summary;
  summary["taxonomy"] = t.name();
  summary["segments"] = c.size();
  nlohmann::ordered_json splits = nlohmann::ordered_json::object();
  for (const auto& [name, ids] : c.splits) splits[name] = ids.size();
  summary["splits"] = splits;
  nlohmann::ordered_json freq = nlohmann::ordered_json::object();
  for (int level = 1; level <= t.max_level(); ++level) freq[std::to_string(level)] = label_frequencies(c, t, level);
  summary["label_frequencies"] = freq;
  std::cout << summary.dump(2) << '\n';

  if (!a.out.empty()) {
    ManifestScope manifest("ingest", argv, true);
    manifest.input(a.corpus);
    fs::create_directories(a.out);
    std::ofstream out(fs::path(a.out) / "corpus.jsonl", std::ios::binary);
    write_corpus(out, c);
    write_text(fs::path(a.out) / "summary.json", summary.dump(2) + "\n");
    manifest.finish(a.out);
  }
  return kExitOk;
}

struct ClassifyArgs {
  std::string corpus, taxonomy, bank, out, kind = "WITH_DEFINITIONS", split = "test", model = "default";
  int max_depth = 0;
  int parallelism = 1;
  BackendFlags backend;
  SamplingFlags sampling;
};

int run_classify(const ClassifyArgs& a, const std::vector<std::string>& argv) {
  require_file(a.corpus, "corpus");
  const fs::path tax_path = resolve_taxonomy(a.taxonomy);
  const Taxonomy t = Taxonomy::load(tax_path);
  const Corpus c = load_corpus(a.corpus, t);
  ExampleBank bank;
  if (!a.bank.empty()) {
    require_file(a.bank, "example bank");
    bank = ExampleBank::load(a.bank);
  }
  ClassifierSettings s;
  s.kind = parse_prompt_kind(a.kind);
  if (exemplars_required(s.kind) > 0 && a.bank.empty()) {
    throw UsageError(fmt::format("{} needs an example bank", to_string(s.kind)), "pass --bank <file>");
  }
  s.config = a.sampling.config();
  s.max_depth = a.max_depth > 0 ? a.max_depth : std::min(default_max_depth(t.name()), t.max_level());
  s.model = a.model;

  ManifestScope manifest("classify", argv, a.backend.stubbed());
  for (const auto& p : {a.corpus, tax_path.string(), a.bank, a.backend.stub}) manifest.input(p);
  Gateway gw(a.backend.make(), a.backend.gateway());
  const auto results = classify_corpus(c, a.split, t, bank, gw, s, a.parallelism);

  fs::create_directories(a.out);
  write_predictions(fs::path(a.out) / "predictions.jsonl", results);
  {
    std::ofstream journal(fs::path(a.out) / "journal.jsonl", std::ios::binary);
    gw.write_journal(journal);
  }
  manifest.finish(a.out);
  size_t failed = 0;
  for (const auto& r : results) failed += r.failed ? 1 : 0;
  std::cout << fmt::format("classified {} segment(s), {} failed, {} gateway call(s) -> {}\n", results.size(),
                           failed, gw.call_count(), a.out);
  for (const auto& r : results) {
    if (r.failed) std::cerr << fmt::format("  {}: {}\n", r.segment_id, r.error);
  }
  return failed ? kExitPartial : kExitOk;
}

struct EvalArgs {
  std::string gold, pred, taxonomy, split, mode, out;
  int max_depth = 0;
  bool include_other = false;
};

int run_eval(const EvalArgs& a, const std::vector<std::string>& argv) {
  require_file(a.gold, "gold corpus");
  require_file(a.pred, "predictions file");
  const fs::path tax_path = resolve_taxonomy(a.taxonomy);
  const Taxonomy t = Taxonomy::load(tax_path);
  const Corpus c = load_corpus(a.gold, t);
  const auto preds = read_predictions(a.pred, t);
  const int depth = a.max_depth > 0 ? a.max_depth : std::min(default_max_depth(t.name()), t.max_level());
  LabelMode mode = depth == 1 ? LabelMode::kLevel1 : LabelMode::kAll;
  if (a.mode == "level1") mode = LabelMode::kLevel1;
  else if (a.mode == "all") mode = LabelMode::kAll;
  else if (!a.mode.empty()) throw UsageError(fmt::format("unknown --mode '{}'", a.mode), "use level1 or all");

  LabelSets gold, pred;
  for (const auto& p : preds) pred[p.id] = p.failed ? std::set<std::string>{} : expand_labels(p.predicted, mode);
  if (a.split.empty()) {
    for (const auto& p : preds) {
      if (!c.find(p.id)) throw Error(ErrorCode::kIdMismatch, fmt::format("predicted segment '{}' is not in the gold corpus", p.id));
      gold[p.id] = expand_labels(c.gold(p.id).labels, mode);
    }
  } else {
    for (size_t idx : c.select(a.split)) gold[c.segments[idx].id] = expand_labels(c.annotations[idx].labels, mode);
  }
  const LabelReport report = aggregate(confusion(gold, pred, label_universe(t, mode, depth, a.include_other)));
  const std::string table = format_report(report);
  std::cout << table;
  if (!a.out.empty()) {
    ManifestScope manifest("eval", argv, true);
    for (const auto& p : {a.gold, a.pred, tax_path.string()}) manifest.input(p);
    fs::create_directories(a.out);
    write_report(fs::path(a.out) / "report.json", report);
    write_text(fs::path(a.out) / "report.txt", table);
    manifest.finish(a.out);
  }
  return kExitOk;
}

struct ExportArgs {
  std::string corpus, taxonomy, split = "train", levels = "1", out;
  bool multitask = false;
  uint64_t seed = 7;
};

int run_export(const ExportArgs& a, const std::vector<std::string>& argv) {
  require_file(a.corpus, "corpus");
  const fs::path tax_path = resolve_taxonomy(a.taxonomy);
  const Taxonomy t = Taxonomy::load(tax_path);
  const Corpus c = load_corpus(a.corpus, t);
  std::vector<int> levels;
  for (const auto& l : split_list(a.levels)) {
    try {
      levels.push_back(std::stoi(l));
    } catch (const std::exception&) {
      throw UsageError(fmt::format("bad level '{}'", l), "use a comma list such as --levels 1,2");
    }
  }
  const std::string stem = fs::path(a.corpus).stem().string();
  ManifestScope manifest("export-finetune", argv, true);
  manifest.input(a.corpus);
  manifest.input(tax_path.string());
  fs::create_directories(a.out);
  for (int level : levels) {
    const auto records = export_level_task(c, t, level, a.split);
    const auto name = instruction_file_name(stem, std::to_string(level), a.split);
    write_instructions(fs::path(a.out) / name, records);
    std::cout << fmt::format("{}: {} record(s)\n", name, records.size());
  }
  if (a.multitask) {
    const auto records = export_multitask(c, t, levels, a.split, a.seed);
    const auto name = instruction_file_name(stem, "multi", a.split);
    write_instructions(fs::path(a.out) / name, records);
    std::cout << fmt::format("{}: {} record(s)\n", name, records.size());
  }
  manifest.finish(a.out);
  return kExitOk;
}

struct RunArgs {
  std::string plan, out, replay, base_dir;
  int parallelism = 1;
  BackendFlags backend;
};

int run_run(const RunArgs& a, const std::vector<std::string>& argv) {
  require_file(a.plan, "plan");
  const ExperimentPlan plan = load_plan(a.plan, a.base_dir);
  RunOptions o;
  o.out_dir = a.out;
  o.parallelism = a.parallelism;
  o.gateway = a.backend.gateway();
  const bool offline = a.backend.stubbed() || !a.replay.empty();
  if (!a.replay.empty()) {
    require_file(a.replay, "journal");
    o.backend = std::make_shared<ReplayBackend>(ReplayBackend::load(a.replay));
  } else {
    o.backend = a.backend.make(plan.endpoint);
  }
  ManifestScope manifest("run", argv, offline);
  for (const auto& p : {a.plan, plan.corpus.string(), plan.taxonomy.string(), plan.bank.string(),
                        a.backend.stub, a.replay}) {
    manifest.input(p);
  }
  const RunSummary summary = run_plan(plan, o);
  manifest.finish(a.out);
  std::cout << text::read_file((fs::path(a.out) / "comparison.txt").string());
  return summary.partial_failure() ? kExitPartial : kExitOk;
}

struct CompareArgs {
  std::vector<std::string> inputs;
  std::string baseline, subset, out;
};

int run_compare(const CompareArgs& a, const std::vector<std::string>& argv) {
  std::optional<BaselineFile> baseline;
  if (!a.baseline.empty()) {
    require_file(a.baseline, "baseline file");
    baseline = load_baseline(a.baseline);
  }
  std::optional<std::vector<std::string>> subset;
  if (!a.subset.empty()) {
    if (baseline && baseline->subsets.count(a.subset)) {
      subset = baseline->subsets.at(a.subset);
    } else if (a.subset.find(',') != std::string::npos) {
      subset = split_list(a.subset);
    } else {
      throw UsageError(fmt::format("unknown subset '{}'", a.subset),
                       "name a subset declared in the baseline file or pass a comma-separated label list");
    }
  }
  std::vector<fs::path> inputs(a.inputs.begin(), a.inputs.end());
  const ComparisonTable table = compare(inputs, baseline ? &*baseline : nullptr, subset);
  const std::string text = table.format();
  std::cout << text;
  if (!a.out.empty()) {
    ManifestScope manifest("compare", argv, true);
    manifest.input(a.baseline);
    fs::create_directories(a.out);
    write_text(fs::path(a.out) / "comparison.txt", text);
    manifest.finish(a.out);
  }
  return kExitOk;
}

struct ExplainArgs {
  std::string corpus, taxonomy = "opp115", decoys, out, model = "default";
  size_t n = 100;
  uint64_t seed = 7;
  int parallelism = 1;
  BackendFlags backend;
};

int run_explain(const ExplainArgs& a, const std::vector<std::string>& argv) {
  require_file(a.corpus, "corpus");
  const fs::path tax_path = resolve_taxonomy(a.taxonomy);
  const Taxonomy t = Taxonomy::load(tax_path);
  const Corpus c = load_corpus(a.corpus, t);
  const auto sample = sample_for_study(c, a.n, a.seed);
  std::vector<ExplanationItem> decoys;
  if (!a.decoys.empty()) {
    require_file(a.decoys, "decoy file");
    decoys = load_decoys(a.decoys, c, t);
  }
  ManifestScope manifest("explain", argv, a.backend.stubbed());
  for (const auto& p : {a.corpus, tax_path.string(), a.decoys, a.backend.stub}) manifest.input(p);

  Gateway gw(a.backend.make(), a.backend.gateway());
  const GenerationConfig cfg = default_explanation_config();
  std::vector<ExplanationItem> items(sample.size());
  std::vector<std::string> errors(sample.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < sample.size(); i = next.fetch_add(1)) {
      try {
        items[i] = explain(sample[i], study_categories(c.gold(sample[i].id)), t, gw, cfg, a.model);
      } catch (const Error& e) {
        errors[i] = e.what();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (int k = 0; k < std::max(1, a.parallelism); ++k) pool.emplace_back(worker);
  }
  std::vector<ExplanationItem> ok;
  size_t failed = 0;
  for (size_t i = 0; i < items.size(); ++i) {
    if (errors[i].empty()) {
      ok.push_back(std::move(items[i]));
    } else {
      ++failed;
      std::cerr << fmt::format("  {}: {}\n", sample[i].id, errors[i]);
    }
  }
  const auto batch = assemble_batch(std::move(ok), std::move(decoys), a.seed);
  fs::create_directories(a.out);
  write_batch(fs::path(a.out) / "batch.jsonl", batch);
  write_key(fs::path(a.out) / "key.private.jsonl", batch);
  {
    std::ofstream journal(fs::path(a.out) / "journal.jsonl", std::ios::binary);
    gw.write_journal(journal);
  }
  manifest.finish(a.out);
  std::cout << fmt::format("batch of {} item(s) written to {} ({} explanation(s) failed)\n", batch.size(), a.out,
                           failed);
  return failed ? kExitPartial : kExitOk;
}

struct ServeArgs {
  std::string batch, ratings, annotators, host = "127.0.0.1", ui;
  int port = 8080;
};

std::atomic<httplib::Server*> g_server{nullptr};

int run_serve(const ServeArgs& a) {
  require_file(a.batch, "batch file");
  const auto annotators = split_list(a.annotators);
  if (annotators.empty()) throw UsageError("no annotators given", "pass --annotators alice,bob,carol");
  AnnotationService service(read_batch(a.batch), annotators, a.ratings);
  httplib::Server server;
  std::optional<fs::path> ui;
  if (!a.ui.empty()) ui = fs::path(a.ui);
  service.bind(server, ui);
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (auto* s = g_server.load()) s->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (auto* s = g_server.load()) s->stop();
  });
  std::cout << fmt::format("serving {} item(s) for {} annotator(s) on http://{}:{}\n", read_batch(a.batch).size(),
                           annotators.size(), a.host, a.port)
            << std::flush;
  const bool ok = server.listen(a.host, a.port);
  g_server = nullptr;
  if (!ok) {
    throw UsageError(fmt::format("cannot listen on {}:{}", a.host, a.port), "pick a free port with --port");
  }
  return kExitOk;
}

struct AgreementArgs {
  std::string ratings, key, out;
  bool strict = false;
};

int run_agreement(const AgreementArgs& a, const std::vector<std::string>& argv) {
  require_file(a.ratings, "ratings journal");
  require_file(a.key, "unblinding key");
  const auto ratings = read_ratings(a.ratings);
  const auto key = read_key(a.key);
  const ScoreTable table = average_scores(ratings, key);
  std::string out = format_score_table(table);
  nlohmann::ordered_json kappas = nlohmann::ordered_json::array();
  out += "\nFleiss' kappa\n";
  for (Metric m : kAllMetrics) {
    const KappaResult k = fleiss_kappa(ratings, m, a.strict);
    out += fmt::format("{:<18} {:>7.3f}  items={} raters={}{}\n", to_string(m), k.kappa, k.n_items, k.n_raters,
                       k.degenerate ? "  (degenerate: one category used throughout)" : "");
    if (!k.excluded_items.empty()) {
      out += fmt::format("  excluded for missing ratings: {}\n", text::join(k.excluded_items, ", "));
    }
    nlohmann::ordered_json j;
    j["metric"] = std::string(to_string(m));
    j["kappa"] = k.kappa;
    j["n_items"] = k.n_items;
    j["n_raters"] = k.n_raters;
    j["degenerate"] = k.degenerate;
    j["excluded_items"] = k.excluded_items;
    kappas.push_back(std::move(j));
  }
  std::cout << out;
  if (!a.out.empty()) {
    ManifestScope manifest("agreement", argv, true);
    manifest.input(a.ratings);
    manifest.input(a.key);
    fs::create_directories(a.out);
    write_text(fs::path(a.out) / "agreement.txt", out);
    write_text(fs::path(a.out) / "kappa.json", kappas.dump(2) + "\n");
    manifest.finish(a.out);
  }
  return kExitOk;
}

bool is_usage_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::kRetriesExhausted:
    case ErrorCode::kClientError:
    case ErrorCode::kUnparseableOutput:
      return false;
    default:
      return true;
  }
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"Privacy-policy concept classification toolkit", "ppx"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));
  const std::vector<std::string> argv(args.begin() + (args.empty() ? 0 : 1), args.end());

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Validate a corpus and summarize label frequencies");
  c_ingest->add_option("--corpus", ingest.corpus, "Corpus records file")->required();
  c_ingest->add_option("--taxonomy", ingest.taxonomy, "Taxonomy name or file")->required();
  c_ingest->add_option("--split-seed", ingest.split_seed, "Re-split by document with this seed");
  c_ingest->add_option("--ratios", ingest.ratios, "train,val,test fractions");
  c_ingest->add_option("--out", ingest.out, "Write the validated corpus and summary here");

  ClassifyArgs classify;
  auto* c_classify = app.add_subcommand("classify", "Cascaded classification of a corpus split");
  c_classify->add_option("--corpus", classify.corpus, "Corpus records file")->required();
  c_classify->add_option("--taxonomy", classify.taxonomy, "Taxonomy name or file")->required();
  c_classify->add_option("--split", classify.split, "train, val, test or all");
  c_classify->add_option("--kind", classify.kind, "Prompt kind (TASK_ONLY..CHAIN_OF_THOUGHT or p1..p5)");
  c_classify->add_option("--bank", classify.bank, "Example bank for the few-shot kinds");
  c_classify->add_option("--max-depth", classify.max_depth, "Cascade depth (default per taxonomy)");
  c_classify->add_option("--model", classify.model, "Model name sent to the backend");
  c_classify->add_option("--parallelism", classify.parallelism, "Concurrent segments")->check(CLI::Range(1, 256));
  c_classify->add_option("--out", classify.out, "Output directory")->required();
  classify.backend.add_to(c_classify);
  classify.sampling.add_to(c_classify);

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Score predictions against gold labels");
  c_eval->add_option("--gold", eval.gold, "Gold corpus file")->required();
  c_eval->add_option("--pred", eval.pred, "Predictions file")->required();
  c_eval->add_option("--taxonomy", eval.taxonomy, "Taxonomy name or file")->required();
  c_eval->add_option("--split", eval.split, "Score this split (default: the predicted ids)");
  c_eval->add_option("--mode", eval.mode, "level1 or all");
  c_eval->add_option("--max-depth", eval.max_depth, "Deepest level scored in 'all' mode");
  c_eval->add_flag("--include-other", eval.include_other, "Score OTHER as a label");
  c_eval->add_option("--out", eval.out, "Write report.json and report.txt here");

  ExportArgs exp;
  auto* c_export = app.add_subcommand("export-finetune", "Write instruction-tuning records");
  c_export->add_option("--corpus", exp.corpus, "Corpus records file")->required();
  c_export->add_option("--taxonomy", exp.taxonomy, "Taxonomy name or file")->required();
  c_export->add_option("--split", exp.split, "train, val, test or all");
  c_export->add_option("--levels", exp.levels, "Comma list of levels, e.g. 1,2");
  c_export->add_flag("--multitask", exp.multitask, "Also write the merged, shuffled corpus");
  c_export->add_option("--seed", exp.seed, "Shuffle seed for the merged corpus");
  c_export->add_option("--out", exp.out, "Output directory")->required();

  RunArgs run;
  auto* c_run = app.add_subcommand("run", "Run an experiment plan");
  c_run->add_option("plan", run.plan, "Plan file")->required();
  c_run->add_option("--out", run.out, "Run directory")->required();
  c_run->add_option("--replay", run.replay, "Serve responses from a recorded journal");
  c_run->add_option("--base-dir", run.base_dir, "Resolve relative plan paths against this directory");
  c_run->add_option("--parallelism", run.parallelism, "Concurrent segments per cell")->check(CLI::Range(1, 256));
  run.backend.add_to(c_run);

  CompareArgs cmp;
  auto* c_compare = app.add_subcommand("compare", "Compare reports side by side with baselines");
  c_compare->add_option("inputs", cmp.inputs, "Run directories, cell directories or report files")->required();
  c_compare->add_option("--baseline", cmp.baseline, "Baseline values file");
  c_compare->add_option("--subset", cmp.subset, "Subset name from the baseline file, or a comma list");
  c_compare->add_option("--out", cmp.out, "Write comparison.txt here");

  ExplainArgs explain_args;
  auto* c_explain = app.add_subcommand("explain", "Generate explanations and a blinded rating batch");
  c_explain->add_option("--corpus", explain_args.corpus, "Corpus records file")->required();
  c_explain->add_option("--taxonomy", explain_args.taxonomy, "Taxonomy name or file");
  c_explain->add_option("--n", explain_args.n, "Segments to sample");
  c_explain->add_option("--seed", explain_args.seed, "Sampling and shuffling seed");
  c_explain->add_option("--decoys", explain_args.decoys, "Authored decoy explanations");
  c_explain->add_option("--model", explain_args.model, "Model name sent to the backend");
  c_explain->add_option("--parallelism", explain_args.parallelism, "Concurrent requests")->check(CLI::Range(1, 256));
  c_explain->add_option("--out", explain_args.out, "Output directory")->required();
  explain_args.backend.add_to(c_explain);

  ServeArgs serve;
  auto* c_serve = app.add_subcommand("serve", "Serve the annotation API and UI assets");
  c_serve->add_option("--batch", serve.batch, "Annotator-facing batch file")->required();
  c_serve->add_option("--ratings", serve.ratings, "Rating journal (created if missing)")->required();
  c_serve->add_option("--annotators", serve.annotators, "Comma list of annotator ids")->required();
  c_serve->add_option("--host", serve.host, "Bind address");
  c_serve->add_option("--port", serve.port, "Port")->check(CLI::Range(1, 65535));
  c_serve->add_option("--ui", serve.ui, "Directory of built UI assets");

  AgreementArgs agree;
  auto* c_agree = app.add_subcommand("agreement", "Average scores by source and Fleiss' kappa");
  c_agree->add_option("ratings", agree.ratings, "Rating journal")->required();
  c_agree->add_option("--key", agree.key, "Private unblinding key")->required();
  c_agree->add_flag("--strict", agree.strict, "Fail on items with missing ratings");
  c_agree->add_option("--out", agree.out, "Write agreement.txt and kappa.json here");

  try {
    std::vector<std::string> reversed(argv.rbegin(), argv.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << "run 'ppx --help' for the list of subcommands\n";
    return kExitUsage;
  }

  try {
    if (*c_ingest) return run_ingest(ingest, argv);
    if (*c_classify) return run_classify(classify, argv);
    if (*c_eval) return run_eval(eval, argv);
    if (*c_export) return run_export(exp, argv);
    if (*c_run) return run_run(run, argv);
    if (*c_compare) return run_compare(cmp, argv);
    if (*c_explain) return run_explain(explain_args, argv);
    if (*c_serve) return run_serve(serve);
    if (*c_agree) return run_agreement(agree, argv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\nhint: " << e.hint << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (is_usage_code(e.code())) {
      std::cerr << "hint: fix the input named above and rerun; nothing was written past the failing step\n";
      return kExitUsage;
    }
    return kExitPartial;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPartial;
  }
  return kExitUsage;
}

int dispatch(int argc, const char* const* argv) {
  return dispatch(std::vector<std::string>(argv, argv + argc));
}

}  // namespace ppx::cli
