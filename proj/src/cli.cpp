#include "sentalign/cli.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>

#include "sentalign/embedding.hpp"
#include "sentalign/errors.hpp"
#include "sentalign/io.hpp"
#include "sentalign/metrics.hpp"
#include "sentalign/simd.hpp"
#include "sentalign/solvers.hpp"
#include "sentalign/synth.hpp"
#include "sentalign/version.hpp"

namespace sentalign::cli {
namespace fs = std::filesystem;
namespace {

struct PairInputs {
  std::string source;
  std::string target;
  std::string manifest;
  std::string gold;
};

void add_pair_inputs(CLI::App* cmd, PairInputs& in, bool with_gold) {
  cmd->add_option("--source", in.source, "Source-language embeddings (SEMB or .tsv)");
  cmd->add_option("--target", in.target, "Target-language embeddings (SEMB or .tsv)");
  cmd->add_option("--manifest", in.manifest, "JSON pair manifest instead of --source/--target");
  if (with_gold) cmd->add_option("--gold", in.gold, "Gold scores, one per line in [0,5]");
}

io::LoadedPairs load_pairs(const PairInputs& in, bool need_gold) {
  io::PairManifest m;
  if (!in.manifest.empty()) {
    if (!in.source.empty() || !in.target.empty()) {
      throw ParameterError("--manifest cannot be combined with --source/--target");
    }
    m = io::read_manifest(in.manifest);
  } else {
    if (in.source.empty() || in.target.empty()) {
      throw ParameterError("--source and --target are required (or --manifest)");
    }
    m.source_path = in.source;
    m.target_path = in.target;
  }
  if (!in.gold.empty()) m.gold_path = fs::path(in.gold);
  if (need_gold && !m.gold_path) throw ParameterError("--gold is required");
  return io::load_manifest(m);
}

class Cli {
 public:
  Cli(std::ostream& out, std::ostream& err) : out_(out), err_(err) { build(); }

  int run(std::span<const std::string> args) {
    std::vector<std::string> storage;
    storage.reserve(args.size() + 1);
    storage.emplace_back(kToolName);
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : storage) argv.push_back(s.data());

    try {
      app_.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
      out_ << app_.help();
      return kOk;
    } catch (const CLI::CallForAllHelp&) {
      out_ << app_.help("", CLI::AppFormatMode::All);
      return kOk;
    } catch (const CLI::CallForVersion&) {
      out_ << kVersion << '\n';
      return kOk;
    } catch (const CLI::ParseError& e) {
      err_ << "error: " << e.what() << '\n';
      return kUsage;
    }

    if (!action_) {
      err_ << app_.help();
      return kUsage;
    }
    try {
      action_();
      return kOk;
    } catch (const ParameterError& e) {
      err_ << "error: " << e.what() << '\n';
      return kUsage;
    } catch (const DataError& e) {
      err_ << "error: " << e.what() << '\n';
      return kDataError;
    } catch (const NumericalError& e) {
      err_ << "error: " << e.what() << '\n';
      return kNumericalFailure;
    } catch (const std::exception& e) {
      err_ << "error: " << e.what() << '\n';
      return kDataError;
    }
  }

 private:
  void build() {
    app_.description("Cross-lingual sentence embedding alignment and evaluation");
    app_.set_version_flag("--version", std::string(kVersion));
    app_.require_subcommand(0, 1);
    app_.add_option("--simd", simd_, "Kernel backend: auto, scalar, avx2, neon")
        ->check(CLI::IsMember({"auto", "scalar", "avx2", "neon"}));
    add_pool();
    add_fit();
    add_apply();
    add_eval_align();
    add_eval_sts();
    add_synth();
    add_export_2d();
    add_diff();
  }

  void select_backend() {
    if (simd_ == "auto") return;
    const simd::Backend b = simd_ == "scalar" ? simd::Backend::scalar
                            : simd_ == "avx2" ? simd::Backend::avx2
                                              : simd::Backend::neon;
    if (!simd::set_backend(b)) {
      throw ParameterError(fmt::format("SIMD backend '{}' is not available on this CPU", simd_));
    }
  }

  void on(CLI::App* cmd, std::function<void()> fn) {
    cmd->callback([this, fn = std::move(fn)] {
      action_ = [this, fn] {
        select_backend();
        fn();
      };
    });
  }

  void add_pool() {
    auto* cmd = app_.add_subcommand("pool", "Mean-pool token matrices into sentence embeddings");
    cmd->add_option("--tokens", pool_.tokens, "Token matrices (SEMB or .tsv), one per sentence")
        ->required()
        ->expected(1, -1);
    cmd->add_option("--out", pool_.out, "Output SEMB")->required();
    cmd->add_option("--dtype", pool_.dtype, "f32 or f64")->capture_default_str();
    on(cmd, [this] {
      std::vector<TokenEmbeddingMatrix> mats;
      mats.reserve(pool_.tokens.size());
      for (std::size_t i = 0; i < pool_.tokens.size(); ++i) {
        try {
          mats.emplace_back(load_token_matrix(pool_.tokens[i]));
        } catch (const DataError& e) {
          throw DataError(fmt::format("token matrix {}: {}", i, e.what()));
        }
      }
      const EmbeddingMatrix pooled = stack_pooled(mats);
      io::write_semb(pooled, pool_.out, io::parse_dtype(pool_.dtype));
      fmt::print(err_, "pool: wrote {}x{} to {}\n", pooled.rows(), pooled.cols(), pool_.out);
      nlohmann::ordered_json j;
      j["out"] = pool_.out;
      j["rows"] = pooled.rows();
      j["cols"] = pooled.cols();
      out_ << j.dump() << '\n';
    });
  }

  static TokenEmbeddingMatrix load_token_matrix(const fs::path& path) {
    return TokenEmbeddingMatrix(io::read_matrix_any(path).matrix());
  }

  void add_fit() {
    auto* cmd = app_.add_subcommand("fit", "Fit a cross-lingual projection");
    cmd->add_option("--method", fit_.method, "lsq, procrustes or sgd")
        ->required()
        ->check(CLI::IsMember({"lsq", "least_squares", "procrustes", "sgd"}));
    add_pair_inputs(cmd, fit_.pairs, false);
    cmd->add_option("--out", fit_.out, "Output projection SEMB (metadata goes to <out>.json)")
        ->required();
    cmd->add_option("--solver", fit_.solver, "Least-squares solver: pinv or gram")
        ->check(CLI::IsMember({"pinv", "gram"}));
    cmd->add_option("--ridge", fit_.ridge, "Ridge term added to the Gram matrix (selects gram)");
    cmd->add_option("--rcond", fit_.lsq.rcond, "Relative singular value cutoff for pinv")
        ->capture_default_str();
    cmd->add_option("--lr", fit_.sgd.learning_rate, "SGD learning rate")->capture_default_str();
    cmd->add_option("--epochs", fit_.sgd.epochs, "SGD maximum epochs")->capture_default_str();
    cmd->add_option("--batch", fit_.sgd.batch_size, "SGD mini-batch size")->capture_default_str();
    cmd->add_option("--tol", fit_.sgd.tol, "SGD stopping MSE")->capture_default_str();
    cmd->add_option("--seed", fit_.sgd.seed, "SGD shuffling/initialization seed")
        ->capture_default_str();
    cmd->add_option("--init", fit_.init, "SGD initialization: zeros or gaussian")
        ->check(CLI::IsMember({"zeros", "gaussian"}));
    cmd->add_option("--init-sigma", fit_.sgd.init_sigma, "Std-dev for gaussian initialization")
        ->capture_default_str();
    cmd->add_flag("--center", fit_.pre.center, "Subtract column means before fitting");
    cmd->add_flag("--unit-norm", fit_.pre.unit_norm, "Scale rows to unit norm before fitting");
    on(cmd, [this] { do_fit(); });
  }

  void do_fit() {
    const io::LoadedPairs pairs = load_pairs(fit_.pairs, false);
    const ParallelCorpus corpus = preprocess(pairs.corpus, fit_.pre);
    const FitMethod method = parse_fit_method(fit_.method);
    fmt::print(err_, "fit: {} on {} pairs, d={}\n", to_string(method), corpus.pairs(),
               corpus.dim());

    std::optional<ProjectionMatrix> proj;
    switch (method) {
      case FitMethod::least_squares: {
        LeastSquaresOptions opts = fit_.lsq;
        if (fit_.ridge) opts.ridge = *fit_.ridge;
        if (fit_.solver == "gram" || (fit_.solver.empty() && opts.ridge > 0.0)) {
          opts.solver = LeastSquaresSolver::gram;
        }
        proj = fit_least_squares(corpus, opts);
        break;
      }
      case FitMethod::procrustes:
        proj = fit_procrustes(corpus);
        break;
      case FitMethod::sgd: {
        SgdConfig cfg = fit_.sgd;
        cfg.init = fit_.init == "gaussian" ? SgdInit::gaussian : SgdInit::zeros;
        proj = fit_sgd(corpus, cfg);
        break;
      }
    }
    FitDiagnostics diag = proj->diagnostics();
    diag.preprocessing = fit_.pre;
    const ProjectionMatrix stored(proj->matrix(), proj->method(), std::move(diag));
    io::write_projection(stored, fit_.out);
    fmt::print(err_, "fit: residual {:.6g}, wrote {}\n", stored.diagnostics().residual_frobenius,
               fit_.out);
    auto j = io::projection_metadata(stored);
    j["out"] = fit_.out;
    j["n_pairs"] = corpus.pairs();
    out_ << j.dump() << '\n';
  }

  void add_apply() {
    auto* cmd = app_.add_subcommand("apply", "Map embeddings through a fitted projection");
    cmd->add_option("--proj", apply_.proj, "Projection SEMB")->required();
    cmd->add_option("--in", apply_.in, "Input embeddings")->required();
    cmd->add_option("--out", apply_.out, "Output SEMB")->required();
    cmd->add_option("--dtype", apply_.dtype, "f32 or f64")->capture_default_str();
    on(cmd, [this] {
      const ProjectionMatrix proj = io::read_projection(apply_.proj);
      const EmbeddingMatrix in =
          preprocess(io::read_matrix_any(apply_.in), proj.diagnostics().preprocessing);
      const EmbeddingMatrix mapped = apply_projection(proj, in);
      io::write_semb(mapped, apply_.out, io::parse_dtype(apply_.dtype));
      fmt::print(err_, "apply: wrote {}x{} to {}\n", mapped.rows(), mapped.cols(), apply_.out);
      nlohmann::ordered_json j;
      j["out"] = apply_.out;
      j["rows"] = mapped.rows();
      j["cols"] = mapped.cols();
      out_ << j.dump() << '\n';
    });
  }

  // Shared by eval-align and eval-sts.
  struct EvalArgs {
    PairInputs pairs;
    std::string proj;
    std::string report;
    Preprocessing pre;
    bool per_pair = false;
  };

  void add_eval_options(CLI::App* cmd, EvalArgs& args, bool with_gold) {
    add_pair_inputs(cmd, args.pairs, with_gold);
    cmd->add_option("--proj", args.proj, "Projection to apply to the source side");
    cmd->add_option("--report", args.report, "Output JSON report")->required();
    cmd->add_flag("--center", args.pre.center,
                  "Center columns first (taken from projection metadata when --proj is given)");
    cmd->add_flag("--unit-norm", args.pre.unit_norm,
                  "Unit-normalize rows first (taken from projection metadata with --proj)");
    cmd->add_flag("--per-pair", args.per_pair, "Include per-pair cosines in the report");
  }

  void run_eval(const EvalArgs& args, bool sts) {
    const io::LoadedPairs pairs = load_pairs(args.pairs, sts);
    std::optional<ProjectionMatrix> proj;
    Preprocessing pre = args.pre;
    if (!args.proj.empty()) {
      proj = io::read_projection(args.proj);
      const Preprocessing& fitted = proj->diagnostics().preprocessing;
      pre.center = pre.center || fitted.center;
      pre.unit_norm = pre.unit_norm || fitted.unit_norm;
    }
    const ParallelCorpus corpus = preprocess(pairs.corpus, pre);
    const ProjectionMatrix* p = proj ? &*proj : nullptr;
    AlignmentReport report = sts ? sts_eval(corpus, *pairs.gold, p) : avg_pair_cosine(corpus, p);
    if (!args.per_pair) report.per_pair_cosine.reset();
    report.timestamp = io::utc_timestamp();
    io::write_report_json(report, args.report);

    auto j = io::report_to_json(report);
    j["report"] = args.report;
    out_ << j.dump() << '\n';
    if (sts) {
      fmt::print(err_, "eval-sts: spearman {:.2f} pearson {:.2f} (x100) over {} pairs\n",
                 to_percentile(*report.spearman), to_percentile(*report.pearson), report.n_pairs);
    } else {
      fmt::print(err_, "eval-align: avg cosine {:.6f} over {} pairs\n", report.avg_cosine,
                 report.n_pairs);
    }
  }

  void add_eval_align() {
    auto* cmd = app_.add_subcommand("eval-align", "Average cosine of translated pairs")
                    ->alias("eval_align");
    add_eval_options(cmd, align_, false);
    on(cmd, [this] { run_eval(align_, false); });
  }

  void add_eval_sts() {
    auto* cmd =
        app_.add_subcommand("eval-sts", "Spearman/Pearson of pair cosines against gold scores")
            ->alias("eval_sts");
    add_eval_options(cmd, sts_, true);
    on(cmd, [this] { run_eval(sts_, true); });
  }

  void add_synth() {
    auto* cmd = app_.add_subcommand("synth", "Generate a synthetic corpus with a planted map");
    cmd->add_option("--n", synth_.spec.n, "Number of pairs")->required();
    cmd->add_option("--d", synth_.spec.d, "Embedding dimension")->required();
    cmd->add_option("--map", synth_.map, "orthogonal, general or identity")
        ->required()
        ->check(CLI::IsMember({"orthogonal", "general", "identity"}));
    cmd->add_option("--noise", synth_.spec.noise_sigma, "Target noise std-dev")
        ->capture_default_str();
    cmd->add_option("--seed", synth_.spec.seed, "Random seed")->capture_default_str();
    cmd->add_option("--scale", synth_.spec.source_scale, "Source row scale")
        ->capture_default_str();
    cmd->add_option("--out-prefix", synth_.prefix, "Output prefix")->required();
    cmd->add_option("--dtype", synth_.dtype, "f32 or f64")->capture_default_str();
    on(cmd, [this] {
      synth_.spec.map_kind = parse_map_kind(synth_.map);
      const SynthCorpus s = generate(synth_.spec);
      const io::Dtype dtype = io::parse_dtype(synth_.dtype);
      const std::string src = synth_.prefix + ".source.semb";
      const std::string tgt = synth_.prefix + ".target.semb";
      const std::string map = synth_.prefix + ".map.semb";
      const std::string manifest = synth_.prefix + ".manifest.json";
      io::write_semb(s.corpus.source(), src, dtype);
      io::write_semb(s.corpus.target(), tgt, dtype);
      io::write_semb(s.true_map, map, io::Dtype::f64);
      io::PairManifest m;
      m.source_path = fs::path(src).filename();
      m.target_path = fs::path(tgt).filename();
      m.source_lang = s.corpus.source_lang();
      m.target_lang = s.corpus.target_lang();
      m.notes = fmt::format("synthetic {} map, n={}, d={}, noise={}, seed={}", synth_.map,
                            synth_.spec.n, synth_.spec.d, synth_.spec.noise_sigma,
                            synth_.spec.seed);
      io::write_manifest(m, manifest);
      fmt::print(err_, "synth: {} pairs, d={}, {} map -> {}.*\n", synth_.spec.n, synth_.spec.d,
                 synth_.map, synth_.prefix);
      nlohmann::ordered_json j;
      j["source"] = src;
      j["target"] = tgt;
      j["map"] = map;
      j["manifest"] = manifest;
      out_ << j.dump() << '\n';
    });
  }

  void add_export_2d() {
    auto* cmd = app_.add_subcommand("export-2d", "Write a 2-D PCA projection as x<TAB>y lines")
                    ->alias("export_2d");
    cmd->add_option("--in", export_.in, "Input embeddings")->required();
    cmd->add_option("--out", export_.out, "Output TSV")->required();
    on(cmd, [this] {
      const EmbeddingMatrix m = io::read_matrix_any(export_.in);
      io::export_2d(m, export_.out);
      fmt::print(err_, "export-2d: wrote {} points to {}\n", m.rows(), export_.out);
    });
  }

  void add_diff() {
    auto* cmd = app_.add_subcommand("diff", "Compare two matrices (e.g. projections)");
    cmd->add_option("--a", diff_.a, "First SEMB")->required();
    cmd->add_option("--b", diff_.b, "Second SEMB")->required();
    cmd->add_option("--tol", diff_.tol, "Fail (exit 2) when the Frobenius distance exceeds this");
    on(cmd, [this] {
      const Matrix a = io::read_semb_matrix(diff_.a);
      const Matrix b = io::read_semb_matrix(diff_.b);
      if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DataError(fmt::format("shape mismatch: {}x{} vs {}x{}", a.rows(), a.cols(),
                                    b.rows(), b.cols()));
      }
      const double frob = frobenius_distance(a, b);
      nlohmann::ordered_json j;
      j["frobenius"] = frob;
      j["max_abs"] = max_abs_difference(a, b);
      if (diff_.tol) {
        j["tol"] = *diff_.tol;
        j["within_tol"] = frob <= *diff_.tol;
      }
      out_ << j.dump() << '\n';
      if (diff_.tol && frob > *diff_.tol) {
        throw DataError(fmt::format("matrices differ by {:g} > tol {:g}", frob, *diff_.tol));
      }
    });
  }

  std::ostream& out_;
  std::ostream& err_;
  CLI::App app_{"sentalign", kToolName};
  std::function<void()> action_;
  std::string simd_ = "auto";

  struct {
    std::vector<std::string> tokens;
    std::string out;
    std::string dtype = "f32";
  } pool_;
  struct {
    std::string method;
    PairInputs pairs;
    std::string out;
    std::string solver;
    std::optional<double> ridge;
    LeastSquaresOptions lsq;
    SgdConfig sgd;
    std::string init = "zeros";
    Preprocessing pre;
  } fit_;
  struct {
    std::string proj;
    std::string in;
    std::string out;
    std::string dtype = "f32";
  } apply_;
  EvalArgs align_;
  EvalArgs sts_;
  struct {
    SynthSpec spec;
    std::string map;
    std::string prefix;
    std::string dtype = "f64";
  } synth_;
  struct {
    std::string in;
    std::string out;
  } export_;
  struct {
    std::string a;
    std::string b;
    std::optional<double> tol;
  } diff_;
};

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  Cli cli(out, err);
  return cli.run(args);
}

}  // namespace sentalign::cli
