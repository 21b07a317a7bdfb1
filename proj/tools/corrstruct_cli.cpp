// Command-line surface for the common-structure extraction pipeline:
// estimate, fit (eig | mace | mh), verify, bits, complexity, preprocess.
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "corrstruct/bits.hpp"
#include "corrstruct/complexity.hpp"
#include "corrstruct/core.hpp"
#include "corrstruct/json_io.hpp"
#include "corrstruct/mace.hpp"
#include "corrstruct/mhscore.hpp"
#include "corrstruct/preprocess.hpp"
#include "corrstruct/spectral.hpp"
#include "corrstruct/theory.hpp"

namespace {

using corrstruct::json;

constexpr const char* kToolVersion = "0.1.0";

// exit codes: 0 ok, 1 verification failure, 2 input error, 3 capacity,
// 4 numerical (divergence / degeneracy)
int exit_code_for(corrstruct::ErrorKind kind) {
  switch (kind) {
    case corrstruct::ErrorKind::Io:
    case corrstruct::ErrorKind::Format:
    case corrstruct::ErrorKind::Domain:
      return 2;
    case corrstruct::ErrorKind::Capacity:
      return 3;
    case corrstruct::ErrorKind::Numerical:
      return 4;
  }
  return 2;
}

// capacity caps, overridable through the environment
std::size_t joint_cell_cap() {
  if (const char* v = std::getenv("CORRSTRUCT_JOINT_CAP")) return std::stoull(v);
  return corrstruct::kDefaultJointCellCap;
}
int dense_cap() {
  if (const char* v = std::getenv("CORRSTRUCT_DENSE_CAP")) return std::stoi(v);
  return corrstruct::kDefaultDenseCap;
}

std::string sha256_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw corrstruct::IoError("cannot open file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  const std::string data = ss.str();

  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

struct RunContext {
  std::string command;
  json config = json::object();
  json input_hashes = json::object();
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void add_input(const std::string& path) { input_hashes[path] = sha256_file(path); }

  json manifest() const {
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    return {{"command", command},
            {"config", config},
            {"inputs", input_hashes},
            {"tool_version", kToolVersion},
            {"wall_time_ms", ms}};
  }
};

void write_output(json payload, const RunContext& ctx, const std::string& path) {
  payload["manifest"] = ctx.manifest();
  corrstruct::write_json_file(payload, path);
}

corrstruct::DiscreteDataset load_input_csv(const std::string& path, char delimiter) {
  corrstruct::CsvOptions opts;
  opts.delimiter = delimiter;
  return corrstruct::load_csv(path, opts);
}

std::vector<long> parse_long_list(const std::string& s) {
  std::vector<long> out;
  std::istringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stol(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw corrstruct::FormatError("bad integer list entry: " + tok);
    }
  }
  return out;
}

// ---- fit ----------------------------------------------------------------

int cmd_fit(const std::string& input, const std::string& method, int k, std::uint64_t seed,
            const std::string& out_prefix, char delimiter, int max_iters, double rel_tol,
            int steps, double learning_rate, RunContext& ctx) {
  using namespace corrstruct;
  ctx.add_input(input);
  const DiscreteDataset ds = load_input_csv(input, delimiter);
  const DistributionSet dist = estimate_distributions(ds, false, 0.0, joint_cell_cap());

  FeatureSet fs;
  json trace;
  if (method == "eig") {
    const Spectrum spec = eigendecompose(build_b(dist), dense_cap());
    fs = features_from_spectrum(spec, dist, k);
    std::vector<double> ev(spec.eigenvalues.data(), spec.eigenvalues.data() + spec.m());
    trace = {{"method", "eig"}, {"eigenvalues", ev}};
  } else if (method == "mace") {
    MaceConfig cfg;
    cfg.k = k;
    cfg.seed = seed;
    cfg.max_iters = max_iters;
    cfg.rel_tol = rel_tol;
    auto [fitted, traces] = mace_fit_k(dist, cfg);
    fs = std::move(fitted);
    const Eigen::VectorXd obj = joint_correlation(fs, dist);
    fs.eigenvalues_hint = (obj.array() + 1.0).matrix();
    json cols = json::array();
    for (const auto& t : traces) cols.push_back(mace_trace_to_json(t));
    trace = {{"method", "mace"},
             {"columns", std::move(cols)},
             {"seed", seed},
             {"final_step", "project_then_renormalize"},
             {"config", {{"k", k}, {"max_iters", cfg.max_iters}, {"rel_tol", cfg.rel_tol},
                         {"reorthogonalize_every", cfg.reorthogonalize_every}}}};
  } else if (method == "mh") {
    HTrainConfig cfg;
    cfg.k = k;
    cfg.seed = seed;
    cfg.steps = steps;
    cfg.learning_rate = learning_rate;
    auto res = mh_train(dist, cfg);
    fs = whiten_features(res.tables, dist);
    const Eigen::VectorXd obj = joint_correlation(fs, dist);
    fs.eigenvalues_hint = (obj.array() + 1.0).matrix();
    // loss curve as CSV (step, mh_score)
    std::ofstream curve(out_prefix + ".loss.csv");
    if (!curve) throw IoError("cannot write " + out_prefix + ".loss.csv");
    curve << "step,mh_score\n";
    for (std::size_t s = 0; s < res.score_curve.size(); ++s)
      curve << s + 1 << "," << res.score_curve[s] << "\n";
    trace = {{"method", "mh"},
             {"seed", seed},
             {"final_mh_score", res.score_curve.back()},
             {"config", {{"k", k}, {"steps", cfg.steps}, {"learning_rate", cfg.learning_rate},
                         {"init_scale", cfg.init_scale}}}};
  } else {
    throw DomainError("unknown method: " + method);
  }

  write_output(feature_set_to_json(fs, ds.alphabets()), ctx, out_prefix + ".features.json");
  write_output(trace, ctx, out_prefix + ".trace.json");
  return 0;
}

// ---- verify -------------------------------------------------------------

int cmd_verify(const std::string& input, const std::string& suite, int k,
               const std::string& features_path, std::uint64_t seed, char delimiter,
               const std::string& out_path, RunContext& ctx) {
  using namespace corrstruct;
  json report;
  bool pass = false;

  if (suite == "bits") {
    ctx.add_input(input);
    const BitsInstance inst = bits_instance_from_json(read_json_file(input));
    const DistributionSet dist = bits_joint(inst);
    const Spectrum spec = eigendecompose(build_b(dist), dense_cap());
    const Eigen::VectorXd analytic = bits_spectrum(inst);
    const double spectrum_err = (spec.eigenvalues - analytic).cwiseAbs().maxCoeff();

    // compare eigenspaces block by block over degenerate eigenvalue groups
    const auto subsets = bits_subsets_ordered(inst);
    double worst_projector = 0.0;
    int ell = 1;
    while (ell < spec.m() && analytic[ell] > 0) {
      int hi = ell;
      while (hi + 1 < spec.m() && analytic[hi + 1] == analytic[ell]) ++hi;
      Eigen::MatrixXd numeric = spec.eigenvectors.middleCols(ell, hi - ell + 1);
      Eigen::MatrixXd exact(spec.m(), hi - ell + 1);
      for (int c = ell; c <= hi; ++c)
        exact.col(c - ell) = features_to_psi(bits_features(inst, c), dist);
      worst_projector = std::max(worst_projector, projector_distance(numeric, exact));
      ell = hi + 1;
    }
    pass = spectrum_err <= 1e-9 && worst_projector <= 1e-9;
    report = {{"suite", "bits"},
              {"spectrum_error", spectrum_err},
              {"projector_distance", worst_projector},
              {"pass", pass}};
  } else if (suite == "lemma1") {
    ctx.add_input(input);
    const DiscreteDataset ds = load_input_csv(input, delimiter);
    const DistributionSet dist = estimate_distributions(ds, false, 0.0, joint_cell_cap());
    const BMatrix b = build_b(dist);
    const Spectrum spec = eigendecompose(b);
    const Lemma1Report rep = check_lemma1(b, spec, dist);
    pass = rep.all_pass();
    report = lemma1_report_to_json(rep);
    report["suite"] = "lemma1";
  } else if (suite == "theorem1" || suite == "theorem2") {
    ctx.add_input(input);
    const DiscreteDataset ds = load_input_csv(input, delimiter);
    const DistributionSet dist = estimate_distributions(ds, true, 0.0, joint_cell_cap());
    const TheoremReport rep = verify_theorem(dist, suite == "theorem1" ? 1 : k);
    pass = rep.pass;
    report = theorem_report_to_json(rep);
    report["suite"] = suite;
  } else if (suite == "mh-identity") {
    ctx.add_input(input);
    const DiscreteDataset ds = load_input_csv(input, delimiter);
    const DistributionSet dist = estimate_distributions(ds, false, 0.0, joint_cell_cap());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<Eigen::MatrixXd> tables(dist.d());
      for (int i = 0; i < dist.d(); ++i) {
        tables[i].resize(dist.alphabet(i).size(), 2);
        for (long r = 0; r < tables[i].rows(); ++r)
          for (int c = 0; c < 2; ++c) tables[i](r, c) = gauss(rng);
      }
      worst = std::max(worst, check_mh_identity(tables, dist));
    }
    pass = worst <= 1e-9;
    report = {{"suite", "mh-identity"}, {"max_residual", worst}, {"draws", 100}, {"pass", pass}};
  } else if (suite == "features") {
    if (features_path.empty()) throw DomainError("--features is required for the features suite");
    ctx.add_input(input);
    ctx.add_input(features_path);
    const DiscreteDataset ds = load_input_csv(input, delimiter);
    const DistributionSet dist = estimate_distributions(ds, false, 0.0, joint_cell_cap());
    std::vector<Alphabet> file_alphabets;
    const FeatureSet fs = feature_set_from_json(read_json_file(features_path), &file_alphabets);
    if (static_cast<int>(file_alphabets.size()) != dist.d())
      throw DomainError("features file variable count does not match the dataset");
    for (int i = 0; i < dist.d(); ++i)
      if (file_alphabets[i].symbols() != dist.alphabet(i).symbols())
        throw DomainError("features file alphabet disagrees with the dataset for variable " +
                          std::to_string(i));
    const double mean_err = feature_means(fs, dist).cwiseAbs().maxCoeff();
    const double gram_err =
        (feature_gram(fs, dist) - Eigen::MatrixXd::Identity(fs.k, fs.k)).cwiseAbs().maxCoeff();
    pass = mean_err <= 1e-8 && gram_err <= 1e-6;
    report = {{"suite", "features"},
              {"zero_mean_residual", mean_err},
              {"orthonormality_residual", gram_err},
              {"pass", pass}};
  } else {
    throw DomainError("unknown suite: " + suite);
  }

  report["manifest"] = ctx.manifest();
  if (out_path.empty())
    std::cout << report.dump(2) << "\n";
  else
    corrstruct::write_json_file(report, out_path);
  return pass ? 0 : 1;
}

// ---- bits ---------------------------------------------------------------

int cmd_bits(int r, const std::string& sets, int k, const std::string& out_path,
             RunContext& ctx) {
  using namespace corrstruct;
  const BitsInstance inst = parse_bits_sets(r, sets);
  const DistributionSet dist = bits_joint(inst);
  const Eigen::VectorXd spectrum = bits_spectrum(inst);

  json j = bits_instance_to_json(inst);
  j["m"] = static_cast<int>(spectrum.size());
  j["spectrum"] = std::vector<double>(spectrum.data(), spectrum.data() + spectrum.size());
  if (k > 0) {
    json features = json::array();
    for (int ell = 1; ell <= k; ++ell) {
      const FeatureSet col = bits_features(inst, ell);
      features.push_back(feature_set_to_json(col, dist.alphabets()));
    }
    j["features"] = std::move(features);
  }
  if (out_path.empty()) {
    j["manifest"] = ctx.manifest();
    std::cout << j.dump(2) << "\n";
  } else {
    write_output(j, ctx, out_path);
  }
  return 0;
}

// ---- complexity ----------------------------------------------------------

int cmd_complexity(const std::string& input, int k, const std::string& n_grid_spec, int trials,
                   double eps, std::uint64_t seed, char delimiter, const std::string& out_path,
                   RunContext& ctx) {
  using namespace corrstruct;
  ctx.add_input(input);
  const DiscreteDataset ds = load_input_csv(input, delimiter);
  const DistributionSet dist = estimate_distributions(ds, true, 0.0, joint_cell_cap());

  const ExponentResult res = error_exponent(dist, k);
  json j = exponent_result_to_json(res);
  if (!n_grid_spec.empty()) {
    const std::vector<long> n_grid = parse_long_list(n_grid_spec);
    const ExceedanceCurve curve = monte_carlo_check(dist, k, n_grid, trials, eps, seed);
    j["monte_carlo"] = exceedance_curve_to_json(curve);
    j["seed"] = seed;
  }
  if (out_path.empty()) {
    j["manifest"] = ctx.manifest();
    std::cout << j.dump(2) << "\n";
  } else {
    write_output(j, ctx, out_path);
  }
  return 0;
}

// ---- preprocess ----------------------------------------------------------

int cmd_preprocess(const std::vector<std::string>& image_paths, const std::string& raw_path,
                   int threshold, int radius, const std::string& frozen_path,
                   const std::string& out_prefix, RunContext& ctx) {
  using namespace corrstruct;
  std::vector<GrayImage> images;
  if (!raw_path.empty()) {
    ctx.add_input(raw_path);
    images = load_raw_images(raw_path);
  }
  for (const auto& p : image_paths) {
    ctx.add_input(p);
    images.push_back(load_pgm(p));
  }
  if (images.empty()) throw FormatError("no input images given");

  PatchGrid grid;
  if (!images.empty()) {
    grid.image_height = images[0].height;
    grid.image_width = images[0].width;
  }

  json sidecar;
  if (frozen_path.empty()) {
    PatchDataset pd = build_patch_dataset(images, grid, threshold, radius);
    write_csv(pd.dataset, out_prefix + ".csv");
    json alphabets = json::array();
    for (int i = 0; i < pd.dataset.d(); ++i) {
      json mapping = json::object();
      for (std::size_t rid = 0; rid < pd.representatives[i].size(); ++rid) {
        std::string bitsstr;
        for (auto b : pd.representatives[i][rid]) bitsstr.push_back(b ? '1' : '0');
        mapping[std::to_string(rid)] = bitsstr;
      }
      alphabets.push_back(std::move(mapping));
    }
    sidecar = {{"alphabets", std::move(alphabets)},
               {"grid", {{"image_height", grid.image_height}, {"image_width", grid.image_width},
                         {"patch", grid.patch}, {"stride", grid.stride}}},
               {"threshold", threshold},
               {"radius", radius},
               {"n", static_cast<int>(images.size())}};
  } else {
    // frozen alphabets: encode against training representatives
    ctx.add_input(frozen_path);
    const json frozen = read_json_file(frozen_path);
    const auto& alphabets_json = frozen.at("alphabets");
    const int d = grid.rows() * grid.cols();
    if (static_cast<int>(alphabets_json.size()) != d)
      throw DomainError("frozen alphabet count does not match the patch grid");

    std::vector<Alphabet> alphabets;
    std::vector<std::string> names;
    std::vector<int> samples(images.size() * static_cast<std::size_t>(d));
    int beyond_total = 0;
    for (int i = 0; i < d; ++i) {
      std::vector<std::vector<std::uint8_t>> reps;
      std::vector<std::string> symbols;
      for (std::size_t rid = 0; rid < alphabets_json[i].size(); ++rid) {
        const std::string key = std::to_string(rid);
        const std::string bitsstr = alphabets_json[i].at(key).get<std::string>();
        std::vector<std::uint8_t> rep;
        for (char c : bitsstr) rep.push_back(c == '1' ? 1 : 0);
        reps.push_back(std::move(rep));
        symbols.push_back(key);
      }
      std::vector<std::vector<std::uint8_t>> vectors;
      for (const auto& img : images)
        vectors.push_back(patchify(binarize(img, threshold), grid)[i]);
      const FrozenEncodeResult enc = encode_frozen(reps, vectors, radius);
      beyond_total += enc.beyond_radius;
      alphabets.emplace_back(std::move(symbols));
      names.push_back("patch_" + std::to_string(i / grid.cols()) + "_" +
                      std::to_string(i % grid.cols()));
      for (std::size_t r = 0; r < images.size(); ++r)
        samples[r * static_cast<std::size_t>(d) + i] = enc.indices[r];
    }
    DiscreteDataset dataset(std::move(alphabets), std::move(names), std::move(samples));
    write_csv(dataset, out_prefix + ".csv");
    sidecar = {{"frozen_from", frozen_path},
               {"beyond_radius", beyond_total},
               {"threshold", threshold},
               {"radius", radius},
               {"n", static_cast<int>(images.size())}};
  }
  write_output(sidecar, ctx, out_prefix + ".alphabets.json");
  return 0;
}

// ---- estimate -------------------------------------------------------------

int cmd_estimate(const std::string& input, bool with_full_joint, double alpha, char delimiter,
                 const std::string& out_path, RunContext& ctx) {
  using namespace corrstruct;
  ctx.add_input(input);
  const DiscreteDataset ds = load_input_csv(input, delimiter);
  const DistributionSet dist = estimate_distributions(ds, with_full_joint, alpha, joint_cell_cap());
  json j = distribution_to_json(dist);
  if (out_path.empty()) {
    j["manifest"] = ctx.manifest();
    std::cout << j.dump(2) << "\n";
  } else {
    write_output(j, ctx, out_path);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"functional representations of common structure in discrete data"};
  app.require_subcommand(1);

  RunContext ctx;
  {
    std::ostringstream cmd;
    for (int i = 0; i < argc; ++i) cmd << (i ? " " : "") << argv[i];
    ctx.command = cmd.str();
  }

  std::string input, out, method = "eig", suite, features_path, sets, n_grid_spec, raw_path,
              frozen_path;
  std::vector<std::string> image_paths;
  int k = 1, r = 1, max_iters = 500, steps = 5000, trials = 100, threshold = 40, radius = 3;
  double rel_tol = 1e-9, learning_rate = 0.05, eps = 0.1, alpha = 0.0;
  std::uint64_t seed = 0;
  char delimiter = ',';
  bool with_full_joint = false;

  auto* fit = app.add_subcommand("fit", "fit feature functions from a CSV dataset");
  fit->add_option("--input", input)->required();
  fit->add_option("--method", method)->check(CLI::IsMember({"eig", "mace", "mh"}));
  fit->add_option("--k", k);
  fit->add_option("--seed", seed);
  fit->add_option("--out", out)->required();
  fit->add_option("--delimiter", delimiter);
  fit->add_option("--max-iters", max_iters);
  fit->add_option("--rel-tol", rel_tol);
  fit->add_option("--steps", steps);
  fit->add_option("--learning-rate", learning_rate);

  auto* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("--input", input)->required();
  verify->add_option("--suite", suite)
      ->required()
      ->check(CLI::IsMember({"lemma1", "theorem1", "theorem2", "mh-identity", "bits", "features"}));
  verify->add_option("--k", k);
  verify->add_option("--features", features_path);
  verify->add_option("--seed", seed);
  verify->add_option("--delimiter", delimiter);
  verify->add_option("--out", out);

  auto* bits = app.add_subcommand("bits", "analytic common-bits oracle");
  bits->add_option("--r", r)->required();
  bits->add_option("--sets", sets)->required();
  bits->add_option("--k", k);
  bits->add_option("--out", out);

  auto* complexity = app.add_subcommand("complexity", "sample-complexity exponent");
  complexity->add_option("--input", input)->required();
  complexity->add_option("--k", k);
  complexity->add_option("--n-grid", n_grid_spec);
  complexity->add_option("--trials", trials);
  complexity->add_option("--eps", eps);
  complexity->add_option("--seed", seed);
  complexity->add_option("--delimiter", delimiter);
  complexity->add_option("--out", out);

  auto* preprocess = app.add_subcommand("preprocess", "images to a discrete dataset");
  preprocess->add_option("--images", image_paths)->delimiter(',');
  preprocess->add_option("--raw", raw_path);
  preprocess->add_option("--threshold", threshold);
  preprocess->add_option("--radius", radius);
  preprocess->add_option("--frozen", frozen_path);
  preprocess->add_option("--out", out)->required();

  auto* estimate = app.add_subcommand("estimate", "empirical distribution export");
  estimate->add_option("--input", input)->required();
  estimate->add_flag("--full-joint", with_full_joint);
  estimate->add_option("--alpha", alpha);
  estimate->add_option("--delimiter", delimiter);
  estimate->add_option("--out", out);

  CLI11_PARSE(app, argc, argv);

  // echo the parsed configuration into the manifest
  ctx.config = {{"k", k}, {"seed", seed}, {"method", method}, {"suite", suite}};

  try {
    if (fit->parsed())
      return cmd_fit(input, method, k, seed, out, delimiter, max_iters, rel_tol, steps,
                     learning_rate, ctx);
    if (verify->parsed()) {
      // theorem2 defaults to a 3-attribute check unless --k was given
      const int verify_k = (suite == "theorem2" && verify->count("--k") == 0) ? 3 : k;
      return cmd_verify(input, suite, verify_k, features_path, seed, delimiter, out, ctx);
    }
    if (bits->parsed()) return cmd_bits(r, sets, k, out, ctx);
    if (complexity->parsed())
      return cmd_complexity(input, k, n_grid_spec, trials, eps, seed, delimiter, out, ctx);
    if (preprocess->parsed())
      return cmd_preprocess(image_paths, raw_path, threshold, radius, frozen_path, out, ctx);
    if (estimate->parsed())
      return cmd_estimate(input, with_full_joint, alpha, delimiter, out, ctx);
  } catch (const corrstruct::Error& e) {
    json err = {{"kind", corrstruct::error_kind_name(e.kind())}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    json err = {{"kind", "internal"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 2;
  }
  return 0;
}
