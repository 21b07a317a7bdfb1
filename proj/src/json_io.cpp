#include "corrstruct/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace corrstruct {

json feature_set_to_json(const FeatureSet& fs, const std::vector<Alphabet>& alphabets) {
  if (alphabets.size() != fs.tables.size())
    throw DomainError("alphabet count does not match feature tables");
  json j;
  j["k"] = fs.k;
  if (fs.eigenvalues_hint) {
    std::vector<double> ev(fs.eigenvalues_hint->data(),
                           fs.eigenvalues_hint->data() + fs.eigenvalues_hint->size());
    j["eigenvalues_hint"] = ev;
  } else {
    j["eigenvalues_hint"] = nullptr;
  }
  json alpha = json::array();
  json tables = json::array();
  for (std::size_t i = 0; i < alphabets.size(); ++i) {
    alpha.push_back(alphabets[i].symbols());
    json table = json::object();
    for (int s = 0; s < alphabets[i].size(); ++s) {
      std::vector<double> row(fs.k);
      for (int c = 0; c < fs.k; ++c) row[c] = fs.tables[i](s, c);
      table[alphabets[i].symbol(s)] = row;
    }
    tables.push_back(std::move(table));
  }
  j["alphabets"] = std::move(alpha);
  j["tables"] = std::move(tables);
  return j;
}

FeatureSet feature_set_from_json(const json& j, std::vector<Alphabet>* alphabets_out) {
  FeatureSet fs;
  fs.k = j.at("k").get<int>();
  const auto& alpha = j.at("alphabets");
  const auto& tables = j.at("tables");
  if (alpha.size() != tables.size()) throw FormatError("features JSON: alphabets/tables mismatch");
  std::vector<Alphabet> alphabets;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    Alphabet ab(alpha[i].get<std::vector<std::string>>());
    Eigen::MatrixXd t(ab.size(), fs.k);
    for (int s = 0; s < ab.size(); ++s) {
      const auto row = tables[i].at(ab.symbol(s)).get<std::vector<double>>();
      if (static_cast<int>(row.size()) != fs.k)
        throw FormatError("features JSON: row length disagrees with k");
      for (int c = 0; c < fs.k; ++c) t(s, c) = row[c];
    }
    fs.tables.push_back(std::move(t));
    alphabets.push_back(std::move(ab));
  }
  if (!j.at("eigenvalues_hint").is_null()) {
    const auto ev = j.at("eigenvalues_hint").get<std::vector<double>>();
    fs.eigenvalues_hint = Eigen::Map<const Eigen::VectorXd>(ev.data(), ev.size());
  }
  if (alphabets_out) *alphabets_out = std::move(alphabets);
  return fs;
}

json distribution_to_json(const DistributionSet& dist) {
  json j;
  json alpha = json::array();
  json marg = json::array();
  for (int i = 0; i < dist.d(); ++i) {
    alpha.push_back(dist.alphabet(i).symbols());
    marg.push_back(std::vector<double>(dist.marginal(i).data(),
                                       dist.marginal(i).data() + dist.marginal(i).size()));
  }
  j["alphabets"] = std::move(alpha);
  j["marginals"] = std::move(marg);
  json pairs = json::array();
  for (int i = 0; i < dist.d(); ++i)
    for (int jj = i + 1; jj < dist.d(); ++jj) {
      const Eigen::MatrixXd t = dist.pairwise(i, jj);
      std::vector<double> rowmajor;
      rowmajor.reserve(t.size());
      for (long r = 0; r < t.rows(); ++r)
        for (long c = 0; c < t.cols(); ++c) rowmajor.push_back(t(r, c));
      pairs.push_back({{"i", i}, {"j", jj}, {"rows", t.rows()}, {"cols", t.cols()},
                       {"table", rowmajor}});
    }
  j["pairwise"] = std::move(pairs);
  j["metadata"] = {{"n", dist.sample_count()},
                   {"d", dist.d()},
                   {"smoothing_alpha", dist.smoothing_alpha()}};
  return j;
}

json lemma1_report_to_json(const Lemma1Report& rep) {
  json checks = json::array();
  for (const auto& c : rep.checks)
    checks.push_back(
        {{"name", c.name}, {"pass", c.pass}, {"residual", c.residual}, {"note", c.note}});
  return {{"checks", std::move(checks)},
          {"degenerate_kernel", rep.degenerate_kernel},
          {"all_pass", rep.all_pass()}};
}

json theorem_report_to_json(const TheoremReport& rep) {
  json rows = json::array();
  for (const auto& r : rep.rows)
    rows.push_back({{"delta", r.delta},
                    {"L", r.L},
                    {"L_over_delta", r.L_over_delta},
                    {"target", r.target},
                    {"gap", r.gap}});
  return {{"k", rep.k}, {"target", rep.target}, {"rows", std::move(rows)},
          {"pass", rep.pass}, {"note", rep.note}};
}

json exponent_result_to_json(const ExponentResult& res) {
  json j = {{"k", res.k}, {"alpha_k", res.alpha_k}, {"gap_ok", res.gap_ok}};
  if (std::isfinite(res.exponent))
    j["exponent"] = res.exponent;
  else
    j["exponent"] = "infinite";
  return j;
}

json exceedance_curve_to_json(const ExceedanceCurve& curve) {
  return {{"n_grid", curve.n_grid},
          {"exceed_counts", curve.exceed_counts},
          {"frequencies", curve.frequencies},
          {"trials", curve.trials},
          {"eps", curve.eps},
          {"decay_rate", curve.decay_rate},
          {"has_zero_frequency", curve.has_zero_frequency}};
}

json mace_trace_to_json(const MaceTrace& trace) {
  return {{"objective", trace.objective},
          {"iters", trace.iters_used},
          {"converged", trace.converged}};
}

json bits_instance_to_json(const BitsInstance& inst) {
  return {{"r", inst.r}, {"index_sets", inst.index_sets}};
}

BitsInstance bits_instance_from_json(const json& j) {
  BitsInstance inst;
  inst.r = j.at("r").get<int>();
  inst.index_sets = j.at("index_sets").get<std::vector<std::vector<int>>>();
  for (auto& s : inst.index_sets) std::sort(s.begin(), s.end());
  inst.validate();
  return inst;
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open file for writing: " + path);
  f << j.dump(2) << "\n";
}

json read_json_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open file: " + path);
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace corrstruct
