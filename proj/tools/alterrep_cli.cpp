// alterrep command-line tool. Every subcommand is deterministic given its
// flags and input files.
//
// Exit status:
//   0 success            5 non_finite          9 format
//   1 unexpected error   6 degenerate_input
//   2 usage              7 concept_exhausted
//   3 invalid_argument   8 io
//   4 dimension_mismatch

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "alterrep/alterrep.hpp"

namespace fs = std::filesystem;
using namespace alterrep;

namespace {

int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return 3;
    case ErrorCode::dimension_mismatch: return 4;
    case ErrorCode::non_finite: return 5;
    case ErrorCode::degenerate_input: return 6;
    case ErrorCode::concept_exhausted: return 7;
    case ErrorCode::io: return 8;
    case ErrorCode::format: return 9;
  }
  return 1;
}

const fs::path& parent_made(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  return path;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(parent_made(path));
  require(static_cast<bool>(out), ErrorCode::io, "cannot write '" + path.string() + "'");
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::io, "cannot open '" + path.string() + "'");
  return in;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

const grammar::Lexicon& lexicon_from(const std::string& path, grammar::Lexicon& storage) {
  if (path.empty()) return grammar::builtin_lexicon();
  storage = grammar::load_lexicon(path);
  return storage;
}

Solver parse_solver(const std::string& s) {
  if (s == "dual_cd") return Solver::dual_cd;
  if (s == "sgd") return Solver::sgd;
  fail(ErrorCode::invalid_argument, "unknown solver '" + s + "'");
}

struct SynthFlags {
  long d = 64;
  long k = 4;
  double signal = 3.0;
  double noise = 0.5;
  long n = 2000;
  std::uint64_t seed = 0;
  std::string noise_model = "complement";

  void add(CLI::App* cmd) {
    cmd->add_option("--d", d, "dimension")->capture_default_str();
    cmd->add_option("--k", k, "planted directions")->capture_default_str();
    cmd->add_option("--signal", signal, "planted signal scale")->capture_default_str();
    cmd->add_option("--noise", noise, "noise standard deviation")->capture_default_str();
    cmd->add_option("--n", n, "samples per class")->capture_default_str();
    cmd->add_option("--seed", seed, "generator seed")->capture_default_str();
    cmd->add_option("--noise-model", noise_model, "complement or isotropic")
        ->check(CLI::IsMember({"complement", "isotropic"}))
        ->capture_default_str();
  }

  PlantedSpec spec() const {
    return make_planted_spec(d, k, signal, noise, n, seed,
                             noise_model == "isotropic" ? NoiseModel::isotropic : NoiseModel::complement);
  }
};

void write_sign_sidecar(const fs::path& path, const BatchCounterfactual& batch) {
  auto out = open_out(path);
  out << "row,sign_check,flipped,nonstrict\n";
  for (std::size_t i = 0; i < batch.rows.size(); ++i) {
    const auto& r = batch.rows[i];
    out << i << ',' << (r.sign_check ? "true" : "false") << ',' << r.flipped_directions.size() << ','
        << r.nonstrict_directions.size() << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concept subspaces, counterfactual representations and agreement reports"};
  app.require_subcommand(1);

  // gen-train ---------------------------------------------------------------
  struct {
    std::string out, lexicon;
    long n = 4800;
    std::uint64_t seed = 0;
    bool exclude_head = false;
  } gt;
  auto* gen_train = app.add_subcommand("gen-train", "training sentences for the seven constructions plus probe labels");
  gen_train->add_option("--out", gt.out, "output directory")->required();
  gen_train->add_option("--n", gt.n, "sentences per construction")->capture_default_str();
  gen_train->add_option("--seed", gt.seed)->capture_default_str();
  gen_train->add_option("--lexicon", gt.lexicon, "lexicon file (default: built-in)");
  gen_train->add_flag("--exclude-head", gt.exclude_head, "drop sentence-initial determiner and head from negatives");
  gen_train->callback([&] {
    grammar::Lexicon storage;
    const auto& lex = lexicon_from(gt.lexicon, storage);
    const auto sets = grammar::generate_training_sets(lex, gt.n, gt.seed);
    fs::create_directories(gt.out);
    for (auto c : grammar::kConstructions) {
      auto out = open_out(fs::path(gt.out) / (std::string(grammar::to_string(c)) + ".tsv"));
      grammar::write_sentences(out, sets[c]);
    }
    for (auto rc : grammar::kRcTypes) {
      const auto labels = grammar::label_probe_examples(grammar::probe_training_records(sets, rc),
                                                        {gt.exclude_head, derive_seed(gt.seed, {1})});
      auto out = open_out(fs::path(gt.out) / ("labels_" + std::string(grammar::to_string(rc)) + ".tsv"));
      grammar::write_probe_labels(out, labels);
    }
  });

  // gen-eval ----------------------------------------------------------------
  struct {
    std::string out, lexicon;
    long n = 1750;
    std::uint64_t seed = 0;
  } ge;
  auto* gen_eval = app.add_subcommand("gen-eval", "masked copula agreement items");
  gen_eval->add_option("--out", ge.out, "output file")->required();
  gen_eval->add_option("--n", ge.n, "items per construction and condition")->capture_default_str();
  gen_eval->add_option("--seed", ge.seed)->capture_default_str();
  gen_eval->add_option("--lexicon", ge.lexicon, "lexicon file (default: built-in)");
  gen_eval->callback([&] {
    grammar::Lexicon storage;
    const auto& lex = lexicon_from(ge.lexicon, storage);
    auto out = open_out(ge.out);
    grammar::write_agreement(out, grammar::generate_agreement_suite(lex, ge.n, ge.seed));
  });

  // inlp-train --------------------------------------------------------------
  struct {
    std::string in, out, name = "rc", solver = "dual_cd";
    long m = 8;
    std::uint64_t seed = 0;
    bool early_stop = false;
  } it;
  auto* inlp_train = app.add_subcommand("inlp-train", "concept subspace by iterative nullspace projection");
  inlp_train->add_option("--in", it.in, "labeled RepFile")->required();
  inlp_train->add_option("--out", it.out, "SubspaceFile")->required();
  inlp_train->add_option("--m", it.m, "INLP iterations")->capture_default_str();
  inlp_train->add_option("--seed", it.seed)->capture_default_str();
  inlp_train->add_option("--name", it.name, "concept name")->capture_default_str();
  inlp_train->add_option("--solver", it.solver, "dual_cd or sgd")
      ->check(CLI::IsMember({"dual_cd", "sgd"}))
      ->capture_default_str();
  inlp_train->add_flag("--early-stop", it.early_stop, "stop once accuracy reaches the majority baseline");
  inlp_train->callback([&] {
    const auto data = io::labeled_rows(io::read_rep(it.in));
    InlpConfig config;
    config.m = it.m;
    config.train.seed = it.seed;
    config.train.solver = parse_solver(it.solver);
    config.early_stop = it.early_stop;
    config.concept_name = it.name;
    io::write_subspace(parent_made(it.out), run_inlp(data, config));
  });

  // counterfactual ----------------------------------------------------------
  struct {
    std::string in, subspace, out, sidecar, polarity = "positive";
    double alpha = 4.0;
    bool amnesic = false;
    bool f32 = false;
  } cf;
  auto* counter = app.add_subcommand("counterfactual", "counterfactual (or amnesic) representations");
  counter->add_option("--in", cf.in, "RepFile")->required();
  counter->add_option("--subspace", cf.subspace, "SubspaceFile")->required();
  counter->add_option("--out", cf.out, "output RepFile")->required();
  counter->add_option("--polarity", cf.polarity, "positive or negative")
      ->check(CLI::IsMember({"positive", "negative"}))
      ->capture_default_str();
  counter->add_option("--alpha", cf.alpha, "rowspace scale")->capture_default_str();
  counter->add_option("--sidecar", cf.sidecar, "sign-check CSV (default: <out>.signcheck.csv)");
  counter->add_flag("--amnesic", cf.amnesic, "project onto the nullspace instead");
  counter->add_flag("--f32", cf.f32, "write lossy 32-bit output");
  counter->callback([&] {
    const auto rep = io::read_rep(cf.in);
    const auto subspace = io::read_subspace(cf.subspace);
    require_same_dim(subspace.dim(), rep.matrix.cols(), "counterfactual input vs subspace");
    const io::RepWriteOptions options{cf.f32 ? io::Dtype::f32 : io::Dtype::f64, cf.f32};
    if (cf.amnesic) {
      io::write_rep(parent_made(cf.out), subspace.basis.project_rows_nullspace(rep.matrix), rep.labels, options);
      return;
    }
    const InterventionConfig config{parse_polarity(cf.polarity), cf.alpha, -1};
    const auto batch = counterfactual_batch(rep.matrix, subspace, config);
    io::write_rep(parent_made(cf.out), batch.vectors, rep.labels, options);
    write_sign_sidecar(cf.sidecar.empty() ? fs::path(cf.out + ".signcheck.csv") : fs::path(cf.sidecar), batch);
  });

  // random-subspace ---------------------------------------------------------
  struct {
    std::string out;
    long d = 768, m = 8;
    std::uint64_t seed = 0;
  } rs;
  auto* random_sub = app.add_subcommand("random-subspace", "random orthonormal baseline subspace");
  random_sub->add_option("--out", rs.out, "SubspaceFile")->required();
  random_sub->add_option("--d", rs.d, "dimension")->capture_default_str();
  random_sub->add_option("--m", rs.m, "directions")->capture_default_str();
  random_sub->add_option("--seed", rs.seed)->capture_default_str();
  random_sub->callback([&] { io::write_subspace(parent_made(rs.out), random_subspace(rs.d, rs.m, rs.seed)); });

  // probe-curve -------------------------------------------------------------
  struct {
    std::vector<std::string> in;
    std::string out;
    std::uint64_t seed = 0;
  } pc;
  auto* probe = app.add_subcommand("probe-curve", "held-out first-iteration probe accuracy per layer");
  probe->add_option("--in", pc.in, "labeled RepFiles, one per layer in order")->required();
  probe->add_option("--out", pc.out, "CSV output")->required();
  probe->add_option("--seed", pc.seed)->capture_default_str();
  probe->callback([&] {
    std::vector<LabeledSet> layers;
    for (const auto& path : pc.in) layers.push_back(io::labeled_rows(io::read_rep(path)));
    TrainConfig config;
    config.seed = pc.seed;
    auto out = open_out(pc.out);
    out << "layer,heldout_accuracy,train_accuracy,heldout_majority\n";
    for (const auto& p : probe_curve(layers, config)) {
      out << p.layer << ',' << fmt(p.heldout_accuracy) << ',' << fmt(p.train_accuracy) << ','
          << fmt(p.heldout_majority) << '\n';
    }
  });

  // synth-gen ---------------------------------------------------------------
  SynthFlags sg;
  struct {
    std::string out, planted;
  } sgo;
  auto* synth_gen = app.add_subcommand("synth-gen", "labeled synthetic representations with a planted concept");
  sg.add(synth_gen);
  synth_gen->add_option("--out", sgo.out, "labeled RepFile")->required();
  synth_gen->add_option("--planted", sgo.planted, "write the planted basis as a SubspaceFile");
  synth_gen->callback([&] {
    const auto spec = sg.spec();
    const auto data = generate(spec);
    io::write_rep(parent_made(sgo.out), data.representations, data.labels);
    if (!sgo.planted.empty()) {
      ConceptSubspace planted{spec.planted_basis, {}, "planted", SubspaceSource::trained};
      io::write_subspace(parent_made(sgo.planted), planted);
    }
  });

  // synth-eval --------------------------------------------------------------
  SynthFlags se;
  struct {
    std::string subspace, out;
    long m = 8;
    double alpha = 4.0;
  } seo;
  auto* synth_eval = app.add_subcommand("synth-eval", "recovery and selectivity of a subspace against the planted one");
  se.add(synth_eval);
  synth_eval->add_option("--subspace", seo.subspace, "SubspaceFile (default: run INLP on the generated data)");
  synth_eval->add_option("--m", seo.m, "INLP iterations when no subspace is given")->capture_default_str();
  synth_eval->add_option("--alpha", seo.alpha)->capture_default_str();
  synth_eval->add_option("--out", seo.out, "key,value CSV (default: stdout)");
  synth_eval->callback([&] {
    const auto spec = se.spec();
    const auto data = generate(spec);
    ConceptSubspace subspace;
    if (seo.subspace.empty()) {
      InlpConfig config;
      config.m = seo.m;
      config.train.seed = spec.seed;
      subspace = run_inlp(data, config);
    } else {
      subspace = io::read_subspace(seo.subspace);
    }
    require_same_dim(spec.d, subspace.dim(), "synth-eval subspace");
    PlantedSpec heldout = spec;
    heldout.seed = derive_seed(spec.seed, {2});
    const auto test = generate(heldout);
    const auto angles = principal_angles(spec.planted_basis, subspace.basis);
    LabeledSet removed_train{subspace.basis.project_rows_nullspace(data.representations), data.labels};
    LabeledSet removed_test{subspace.basis.project_rows_nullspace(test.representations), test.labels};
    TrainConfig probe_config;
    probe_config.seed = spec.seed;
    const auto post = train_linear(removed_train, probe_config);
    const auto effect = intervention_effect(heldout, concept_predictor(spec), subspace, seo.alpha);

    std::ostringstream table;
    table << "key,value\n";
    double max_angle = 0.0;
    for (std::size_t i = 0; i < angles.size(); ++i) {
      table << "angle_deg_" << i << ',' << fmt(radians_to_degrees(angles[i])) << '\n';
      max_angle = std::max(max_angle, radians_to_degrees(angles[i]));
    }
    table << "max_angle_deg," << fmt(max_angle) << '\n';
    for (std::size_t i = 0; i < subspace.per_iteration_accuracy.size(); ++i) {
      table << "iteration_accuracy_" << i << ',' << fmt(subspace.per_iteration_accuracy[i]) << '\n';
    }
    table << "post_removal_heldout_accuracy," << fmt(accuracy(post, removed_test)) << '\n';
    table << "flip_rate_concept," << fmt(effect.flip_rate_concept) << '\n';
    table << "flip_rate_random," << fmt(effect.flip_rate_random) << '\n';
    if (seo.out.empty()) {
      std::cout << table.str();
    } else {
      open_out(seo.out) << table.str();
    }
  });

  // report ------------------------------------------------------------------
  struct {
    std::vector<std::string> in;
    std::string out, plots;
  } rp;
  auto* report = app.add_subcommand("report", "aggregate agreement records into the results CSV");
  report->add_option("--in", rp.in, "AgreementRecord CSV files")->required();
  report->add_option("--out", rp.out, "results CSV")->required();
  report->add_option("--plots", rp.plots, "directory for SVG figures");
  report->callback([&] {
    std::vector<metrics::AgreementRecord> records;
    for (const auto& path : rp.in) {
      auto in = open_in(path);
      auto part = metrics::read_records(in);
      records.insert(records.end(), part.begin(), part.end());
    }
    const auto result = metrics::aggregate(records);
    auto out = open_out(rp.out);
    metrics::write_results(out, result);
    if (!rp.plots.empty()) metrics::write_figures(result, rp.plots);
  });

  // sweep -------------------------------------------------------------------
  SynthFlags sw;
  sw.d = 128;
  sw.n = 1000;
  struct {
    std::string param, out;
    std::vector<double> values;
    long m = 8;
    double alpha = 4.0;
  } swo;
  auto* sweep = app.add_subcommand("sweep", "synthetic intervention grid over m or alpha");
  sw.add(sweep);
  sweep->add_option("--param", swo.param, "m or alpha")->required()->check(CLI::IsMember({"m", "alpha"}));
  sweep->add_option("--values", swo.values, "grid values (default: 4,8,16,32,64 for m; 1,2,4,6,8 for alpha)")
      ->delimiter(',');
  sweep->add_option("--m", swo.m, "fixed m for an alpha sweep")->capture_default_str();
  sweep->add_option("--alpha", swo.alpha, "fixed alpha for an m sweep")->capture_default_str();
  sweep->add_option("--out", swo.out, "output directory")->required();
  sweep->callback([&] {
    if (swo.values.empty()) {
      swo.values = swo.param == "m" ? std::vector<double>{4, 8, 16, 32, 64} : std::vector<double>{1, 2, 4, 6, 8};
    }
    const auto spec = sw.spec();
    const auto train = generate(spec);
    PlantedSpec heldout = spec;
    heldout.seed = derive_seed(spec.seed, {2});
    const auto test = generate(heldout);
    const auto predictor = concept_predictor(spec);
    fs::create_directories(swo.out);

    std::map<long, ConceptSubspace> trained;
    auto trained_for = [&](long m) -> const ConceptSubspace& {
      auto found = trained.find(m);
      if (found != trained.end()) return found->second;
      InlpConfig config;
      config.m = m;
      config.train.seed = spec.seed;
      return trained.emplace(m, run_inlp(train, config)).first->second;
    };

    metrics::Plot plot{"Synthetic sweep over " + swo.param, swo.param, "mean P(Err)", {}};
    std::map<std::string, metrics::Series> series;
    for (double value : swo.values) {
      const long m = swo.param == "m" ? static_cast<long>(value) : swo.m;
      const double alpha = swo.param == "alpha" ? value : swo.alpha;
      require(m >= 1 && static_cast<double>(m) == (swo.param == "m" ? value : static_cast<double>(m)),
              ErrorCode::invalid_argument, "m values must be positive integers");
      const ConceptSubspace& subspace = trained_for(m);
      const ConceptSubspace baseline = random_subspace(spec.d, m, derive_seed(spec.seed, {3}));

      auto records = synthetic_records(test, predictor, nullptr, std::nullopt);
      for (Polarity p : {Polarity::positive, Polarity::negative}) {
        for (const ConceptSubspace* s : {&subspace, &baseline}) {
          auto part = synthetic_records(test, predictor, s, InterventionConfig{p, alpha, -1});
          records.insert(records.end(), part.begin(), part.end());
        }
      }
      const auto result = metrics::aggregate(records);
      auto out = open_out(fs::path(swo.out) / ("results_" + swo.param + "_" + fmt(value) + ".csv"));
      metrics::write_results(out, result);
      for (const auto& row : result.rows) {
        if (row.key.polarity == "none") continue;
        const std::string name = row.key.condition + " " + row.key.polarity + " " + row.key.subspace_source;
        series[name].name = name;
        series[name].points.push_back({value, row.mean_p_err, 2.0 * row.se_p_err});
      }
    }
    for (auto& [name, s] : series) plot.series.push_back(std::move(s));
    auto svg = open_out(fs::path(swo.out) / ("sweep_" + swo.param + ".svg"));
    metrics::write_svg(svg, plot);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e);
    return status == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_status(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: io: " << e.what() << '\n';
    return exit_status(ErrorCode::io);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
