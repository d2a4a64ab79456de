// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <string>

#include "calibration.hpp"
#include "dgp.hpp"
#include "fixtures.hpp"
#include "oracles/graph_oracles.hpp"
#include "oracles/panel_oracles.hpp"
#include "scratch.hpp"
#include "test_util.hpp"
#include "tradenet/centrality.hpp"
#include "tradenet/error.hpp"
#include "tradenet/pipeline.hpp"
#include "tradenet/synthetic.hpp"
#include "tradenet/system_gmm.hpp"

using namespace tradenet;
using Clock = std::chrono::steady_clock;

namespace {

const std::filesystem::path kData = TRADENET_DATA_DIR;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("criterion %d %s: %s (%s)\n", id, o.pass ? "PASS" : "FAIL", title, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Outcome fig2_kcore() {
  const auto g = fixtures::kcore_sample_network();
  const auto t0 = Clock::now();
  const auto shells = kcore_decomposition(g);
  const double ms = seconds_since(t0) * 1e3;
  const int max_core = *std::max_element(shells.begin(), shells.end());
  const bool ok = g.size() == 8 && g.edge_count() == 24 && shells == fixtures::kcore_sample_shells && max_core == 3 &&
                  ms < 1.0;
  return {ok, "8 nodes, 12 undirected edges, max core " + std::to_string(max_core) + ", shells " +
                  (shells == fixtures::kcore_sample_shells ? "match" : "differ") + ", " + fmt("%.4f ms", ms)};
}

Outcome centrality_oracles() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240101);
  std::size_t btw_bad = 0, rwb_bad = 0, pr_sum_bad = 0, pr_eig_bad = 0;
  double rwb_err = 0.0, pr_err = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 7);
    const double p = 0.15 + 0.1 * (trial % 6);
    const auto g = testutil::random_digraph(rng, n, p);
    if (betweenness(g).raw != oracle::betweenness_by_enumeration(g)) ++btw_bad;
    const auto rwb = random_walk_betweenness(g);
    const auto rwb_ref = oracle::rwb_absorbing_chain(g);
    for (std::size_t i = 0; i < n; ++i) rwb_err = std::max(rwb_err, std::fabs(rwb[i] - rwb_ref[i]));
    if (rwb_err > 1e-8) ++rwb_bad;
    for (auto mode : {PageRankMode::weighted, PageRankMode::binary}) {
      PageRankOptions opt;
      opt.mode = mode;
      const auto pr = pagerank(g, opt);
      const auto ref = oracle::pagerank_dense_eigen(g, opt.damping, mode == PageRankMode::weighted);
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        sum += pr[i];
        pr_err = std::max(pr_err, std::fabs(pr[i] - ref[i]));
      }
      if (std::fabs(sum - 1.0) > 1e-9) ++pr_sum_bad;
      if (pr_err > 1e-8) ++pr_eig_bad;
    }
  }
  const double s = seconds_since(t0);
  const bool ok = btw_bad == 0 && rwb_bad == 0 && pr_sum_bad == 0 && pr_eig_bad == 0 && s < 30.0;
  return {ok, "200 graphs; betweenness mismatches " + std::to_string(btw_bad) + fmt(", max RWB error %.2e", rwb_err) +
                  fmt(", max PageRank error %.2e", pr_err) + ", sum violations " + std::to_string(pr_sum_bad) +
                  fmt(", %.2f s", s)};
}

Outcome kcore_invariant() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(77);
  std::size_t violations = 0, maximality = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng() % 50);
    const double p = 0.02 + 0.3 * static_cast<double>(rng() % 100) / 100.0;
    const auto g = testutil::random_digraph(rng, n, p);
    const auto shells = kcore_decomposition(g);
    violations += oracle::kcore_violations(g, shells);
    if (!oracle::kcore_matches_repeated_deletion(g, shells)) ++maximality;
  }
  const double s = seconds_since(t0);
  return {violations == 0 && maximality == 0 && s < 5.0,
          "100 graphs n <= 50; min-degree violations " + std::to_string(violations) + ", maximality failures " +
              std::to_string(maximality) + fmt(", %.3f s", s)};
}

bool scale_invariant(const std::vector<FlowRecord>& flows, int year, const CountryUniverse& universe,
                     std::string& why) {
  auto scaled_flows = flows;
  for (auto& f : scaled_flows) f.value *= 1000.0;
  const auto a = build_yearly_graph(flows, year, universe);
  const auto b = build_yearly_graph(scaled_flows, year, universe);
  auto fail = [&](const char* what) {
    why = std::string(what) + " differs in " + std::to_string(year);
    return false;
  };
  if (a.adjacency() != b.adjacency()) return fail("edge set");
  for (auto d : {Direction::in, Direction::out}) {
    if (degree(a, d) != degree(b, d)) return fail("degree");
    const auto sa = strength(a, d);
    const auto sb = strength(b, d);
    for (std::size_t i = 0; i < sa.size(); ++i)
      if (sb[i] != 1000.0 * sa[i]) return fail("strength scaling");
  }
  if (pagerank(a) != pagerank(b)) return fail("weighted PageRank");
  PageRankOptions binary;
  binary.mode = PageRankMode::binary;
  if (pagerank(a, binary) != pagerank(b, binary)) return fail("binary PageRank");
  if (clustering_coefficient(a) != clustering_coefficient(b)) return fail("clustering");
  if (weighted_clustering_onnela(a) != weighted_clustering_onnela(b)) return fail("weighted clustering");
  if (closeness(a) != closeness(b)) return fail("closeness");
  const auto ba = betweenness(a), bb = betweenness(b);
  if (ba.raw != bb.raw || ba.normalized != bb.normalized) return fail("betweenness");
  if (random_walk_betweenness(a) != random_walk_betweenness(b)) return fail("random-walk betweenness");
  if (kcore_decomposition(a) != kcore_decomposition(b)) return fail("k-core");
  return true;
}

Outcome scale_invariance() {
  std::size_t graphs = 0;
  std::string why;
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 4 + static_cast<std::size_t>(trial % 30);
    const auto universe = synthetic_universe(n);
    const auto codes = universe.all();
    std::vector<FlowRecord> flows;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && rng() % 3 != 0) flows.push_back({codes[i], codes[j], 2010, static_cast<double>(1 + rng() % 99999), 0});
    if (!scale_invariant(flows, 2010, universe, why)) return {false, why};
    ++graphs;
  }
  const auto c = load_config(kData / "sample" / "config.ini");
  const auto inputs = ingest(c);
  for (int y = c.first_year; y <= c.last_year; ++y) {
    if (!scale_invariant(inputs.flows, y, inputs.universe, why)) return {false, why};
    ++graphs;
  }
  return {true, std::to_string(graphs) + " filtered graphs (incl. every year of the bundled sample) bitwise unchanged"};
}

Outcome econometric_exactness() {
  const auto t0 = Clock::now();
  double fe_err = 0.0, ols_err = 0.0, gmm_err = 0.0;
  std::mt19937_64 rng(5150);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 1 + static_cast<std::size_t>(trial % 4);
    const auto p = dgp::random_panel(rng, 20 + static_cast<std::size_t>(trial), 4 + trial % 5, k);
    RegressionSpec s;
    s.dependent = "y";
    s.regressors = dgp::xnames(k);
    const auto d = oracle::extract(p, "y", s.regressors);
    const auto fe = fixed_effects_within(p, s);
    const auto lsdv = oracle::lsdv_slopes(d);
    for (std::size_t j = 0; j < k; ++j) fe_err = std::max(fe_err, std::fabs(fe.beta(static_cast<Eigen::Index>(j)) - lsdv[j]));
    const auto ols = pooled_ols(p, s);
    const auto ne = oracle::ols_with_constant(d);
    for (std::size_t j = 0; j <= k; ++j) {
      ols_err = std::max(ols_err, std::fabs(ols.beta(static_cast<Eigen::Index>(j)) - ne[j]) /
                                      std::max(1.0, std::fabs(ne[j])));
    }

    dgp::DynamicOptions o;
    o.n = 60;
    o.t = 6;
    o.with_x = true;
    o.beta_x = 0.7;
    const auto dp = dgp::dynamic_panel(rng, o);
    RegressionSpec g;
    g.dependent = "y";
    g.regressors = {"x"};
    g.include_lagged_dependent = true;
    g.gmm.lag_min = g.gmm.lag_max = 2;
    g.gmm.level_gmm_instruments = false;
    const auto r = system_gmm(dp, g);
    const auto iv = oracle::dynamic_system_iv(dp);
    gmm_err = std::max({gmm_err, std::fabs(r.coef("L1.y") - iv[0]), std::fabs(r.coef("x") - iv[1])});
  }
  const double s = seconds_since(t0);
  const bool ok = fe_err <= 1e-9 && ols_err <= 1e-10 && gmm_err <= 1e-8 && s < 30.0;
  return {ok, "50 panels; FE vs LSDV " + fmt("%.2e", fe_err) + ", OLS vs normal equations " + fmt("%.2e", ols_err) +
                  ", GMM vs closed-form IV " + fmt("%.2e", gmm_err) + fmt(", %.2f s", s)};
}

Outcome gmm_recovery() {
  const auto t0 = Clock::now();
  const int seeds = 100;
  double phi_sum = 0.0;
  int hansen = 0, ar1 = 0, ar2 = 0;
  for (int s = 0; s < seeds; ++s) {
    std::mt19937_64 rng(900000 + static_cast<std::uint64_t>(s));
    dgp::DynamicOptions o;  // N=200, T=8, phi=0.5, unit sd 1, noise sd 1
    RegressionSpec spec;
    spec.dependent = "y";
    spec.include_lagged_dependent = true;
    const auto r = system_gmm(dgp::dynamic_panel(rng, o), spec);
    phi_sum += r.coef("L1.y");
    hansen += r.diagnostics.hansen_p < 0.05;
    ar1 += r.diagnostics.ar1_p < 0.05;
    ar2 += r.diagnostics.ar2_p < 0.05;
  }
  const double phi = phi_sum / seeds;
  const double h = hansen / double(seeds), a1 = ar1 / double(seeds), a2 = ar2 / double(seeds);
  const double s = seconds_since(t0);
  const bool ok = phi >= 0.45 && phi <= 0.55 && h >= 0.01 && h <= 0.12 && a2 >= 0.01 && a2 <= 0.12 && a1 >= 0.8 &&
                  s < 300.0;
  return {ok, fmt("mean phi %.4f", phi) + fmt(", Hansen %.2f", h) + fmt(", AR(2) %.2f", a2) + fmt(", AR(1) %.2f", a1) +
                  fmt(", %.2f s", s)};
}

Outcome calibration_rates() {
  const auto t0 = Clock::now();
  const auto rates = calibration::all(200, 424242);
  std::string detail;
  bool ok = true;
  for (const auto& r : rates) {
    ok = ok && r.size <= 0.12 && r.power >= 0.8;
    detail += r.name + fmt(" size %.3f", r.size) + fmt(" power %.3f; ", r.power);
  }
  const double s = seconds_since(t0);
  ok = ok && s < 300.0;
  return {ok, detail + fmt("%.2f s", s)};
}

Outcome panel_shape() {
  testutil::ScratchDir dir("acceptance_shape");
  SyntheticSpec spec;
  spec.n_countries = 40;
  spec.incomplete_countries = 0;
  write_synthetic(generate_synthetic(spec), spec, dir / "data");
  auto c = load_config(dir / "data" / "config.ini");
  c.out_dir = dir / "out";
  const auto full = run_pipeline(c);
  const auto rows = PanelDataset::from_csv(c.out_dir / "panel.csv").rows();

  auto bundled = load_config(kData / "sample" / "config.ini");
  bundled.out_dir = dir / "bundled";
  const auto b = run_pipeline(bundled);
  const bool ok = full.panel_rows == 720 && rows == 720 && full.panel_countries == 40 && b.panel_rows == 720 &&
                  b.panel_countries == 40;
  return {ok, "full coverage: " + std::to_string(full.panel_countries) + " x 18 = " + std::to_string(rows) +
                  " rows; bundled 54-country sample retains " + std::to_string(b.panel_countries) + " countries, " +
                  std::to_string(b.panel_rows) + " rows"};
}

Outcome determinism() {
  testutil::ScratchDir dir("acceptance_determinism");
  auto c = load_config(kData / "sample" / "config.ini");
  double worst = 0.0;
  for (const char* name : {"a", "b"}) {
    c.out_dir = dir / name;
    const auto t0 = Clock::now();
    run_pipeline(c);
    worst = std::max(worst, seconds_since(t0));
  }
  std::size_t files = 0, differing = 0;
  std::set<std::string> seen;
  for (const char* side : {"a", "b"}) {
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir / side)) {
      if (e.is_regular_file()) seen.insert(std::filesystem::relative(e.path(), dir / side).string());
    }
  }
  for (const auto& rel : seen) {
    ++files;
    const auto pa = dir / "a" / rel, pb = dir / "b" / rel;
    if (!std::filesystem::exists(pa) || !std::filesystem::exists(pb) || testutil::slurp(pa) != testutil::slurp(pb)) {
      ++differing;
    }
  }
  const bool ok = files > 0 && differing == 0 && worst < 10.0;
  return {ok, std::to_string(files) + " files, " + std::to_string(differing) + " differ; 54 nodes x 20 years in " +
                  fmt("%.2f s", worst)};
}

}  // namespace

int main() {
  set_warnings_enabled(false);
  report(1, "k-core of the 8-node sample network", fig2_kcore);
  report(2, "centrality oracle suite", centrality_oracles);
  report(3, "k-core structural invariant", kcore_invariant);
  report(4, "scale invariance of the network measures", scale_invariance);
  report(5, "econometric exactness", econometric_exactness);
  report(6, "GMM recovery on the dynamic panel DGP", gmm_recovery);
  report(7, "diagnostic calibration", calibration_rates);
  report(8, "panel shape", panel_shape);
  report(9, "end-to-end determinism and run time", determinism);
  std::printf("%d of 9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
