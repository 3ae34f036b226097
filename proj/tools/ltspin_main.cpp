// Command-line driver for the layered-triangulation spin toolkit.
//
// Subcommands: sample, diagnose, gauge, mw, longrange-check, validate.
// Every command reads an ExperimentConfig (file plus flag overrides), writes
// its artifacts into <out_dir>/<command>/ under the INCOMPLETE-flag protocol,
// and finishes with a manifest. Outputs are a pure function of the config and
// the code version: rerunning a command with the same config reproduces every
// artifact byte for byte.
//
// Exit codes: 0 success, 1 validation failure (bad parameter ranges or a
// structurally inconsistent triangulation), 2 I/O or parse failure.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ltspin/ltspin.hpp"

namespace {

using namespace ltspin;

OffspringLaw resolve_law(const ExperimentConfig& cfg) {
  if (cfg.law == "custom") return OffspringLaw::from_probs(cfg.law_probs);
  return OffspringLaw::by_name(cfg.law);
}

/// Mean vertex count of a spine-conditioned tree of the given height
/// (layer means are 1 + sigma^2 t); used to refuse materializations that
/// cannot fit the configured budget.
double expected_vertices(const OffspringLaw& law, std::uint64_t height) {
  const double h = static_cast<double>(height);
  return (h + 1.0) + law.variance() * h * (h + 1.0) / 2.0;
}

std::uint32_t checked_u32(std::uint64_t v, const char* what) {
  if (v > 0xffffffffull)
    throw ValidationError(std::string("config: ") + what + " too large");
  return static_cast<std::uint32_t>(v);
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void finish(RunDirectory& run, const std::string& command, const ExperimentConfig& cfg,
            std::chrono::steady_clock::time_point start) {
  run.add_timing("total", elapsed_seconds(start));
  run.finalize(command, cfg.hash_hex());
  std::cout << command << ": wrote " << run.dir().string() << "/manifest.json\n";
}

Table make_table(const std::string& name, const ExperimentConfig& cfg,
                 std::vector<std::string> columns) {
  Table t(name, std::move(columns));
  t.set_meta("config_hash", cfg.hash_hex());
  return t;
}

// ---------------------------------------------------------------------------
// sample: one spine-conditioned tree; layer sizes always, full tree and
// triangulation files when the expected size fits the materialization budget.
// ---------------------------------------------------------------------------
void run_sample(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const OffspringLaw law = resolve_law(cfg);
  RunDirectory run(std::filesystem::path(cfg.out_dir) / "sample");
  run.write_text("config.txt", cfg.canonical_text());

  const bool materialize = expected_vertices(law, cfg.height) <=
                           static_cast<double>(cfg.max_tree_vertices);
  std::vector<std::uint64_t> layers;
  if (materialize) {
    const LayeredTree tree =
        sample_kesten_tree(law, checked_u32(cfg.height, "height"), cfg.seed);
    const Triangulation T = tree_to_lt(tree);
    const ValidationReport report = validate(T);
    if (!report.ok) throw ValidationError("sample: " + report.first_violation);
    layers = T.layer_sizes();
    std::ostringstream tree_os, tri_os;
    save_tree(tree, tree_os);
    save_triangulation(T, tri_os);
    run.write_text("tree.txt", tree_os.str());
    run.write_text("triangulation.txt", tri_os.str());
  } else {
    layers = sample_layer_process(law, cfg.height, cfg.seed);
  }

  Table table = make_table("layers", cfg, {"t", "k"});
  table.set_meta("law", law.name());
  table.set_meta("seed", std::to_string(cfg.seed));
  table.set_meta("height", std::to_string(cfg.height));
  table.set_meta("materialized", materialize ? "1" : "0");
  for (std::size_t t = 0; t < layers.size(); ++t)
    table.add_row({std::to_string(t), std::to_string(layers[t])});
  run.write_text("layers.txt", table.to_string());
  finish(run, "sample", cfg, start);
}

// ---------------------------------------------------------------------------
// diagnose: layer-growth normalization r_t = k_t / (t (ln t)^{1/2+eps}) and
// its partial series per tree, empirical layer means against 1 + sigma^2 t,
// and the scaled increment-martingale second-moment check.
// ---------------------------------------------------------------------------
void run_diagnose(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  if (cfg.height < 10)
    throw ValidationError("diagnose: height must be >= 10 for growth normalization");
  const OffspringLaw law = resolve_law(cfg);
  RunDirectory run(std::filesystem::path(cfg.out_dir) / "diagnose");
  run.write_text("config.txt", cfg.canonical_text());

  std::vector<std::vector<std::uint64_t>> all_layers(cfg.trees);
  for (std::uint32_t i = 0; i < cfg.trees; ++i)
    all_layers[i] = sample_layer_process(law, cfg.height, derive_seed(cfg.seed, i, 0, 4));

  Table growth = make_table("growth", cfg, {"tree", "max_r", "argmax_t", "s_final"});
  growth.set_meta("law", law.name());
  growth.set_meta("epsilon", format_double(cfg.epsilon));
  growth.set_meta("height", std::to_string(cfg.height));
  growth.set_meta("trees", std::to_string(cfg.trees));
  std::vector<double> max_rs;
  for (std::uint32_t i = 0; i < cfg.trees; ++i) {
    const GrowthReport rep = growth_report(all_layers[i], cfg.epsilon);
    max_rs.push_back(rep.max_normalized);
    growth.add_row({std::to_string(i), format_double(rep.max_normalized),
                    std::to_string(rep.argmax_t), format_double(rep.partial_sums.back())});
  }
  growth.set_meta("maxr_q0", format_double(quantile(max_rs, 0.0)));
  growth.set_meta("maxr_q25", format_double(quantile(max_rs, 0.25)));
  growth.set_meta("maxr_q50", format_double(quantile(max_rs, 0.5)));
  growth.set_meta("maxr_q75", format_double(quantile(max_rs, 0.75)));
  growth.set_meta("maxr_q100", format_double(quantile(max_rs, 1.0)));
  run.write_text("growth.txt", growth.to_string());

  // Layer means at logarithmically spaced checkpoints, against 1 + sigma^2 t.
  Table kmean = make_table("kmean", cfg, {"t", "mean", "se", "theory"});
  kmean.set_meta("law", law.name());
  const double sigma_sq = law.variance();
  std::vector<std::uint64_t> checkpoints;
  for (std::uint64_t t = 1; t <= cfg.height; t *= 10) checkpoints.push_back(t);
  if (checkpoints.back() != cfg.height) checkpoints.push_back(cfg.height);
  for (const std::uint64_t t : checkpoints) {
    std::vector<double> ks;
    for (const auto& layers : all_layers) ks.push_back(static_cast<double>(layers[t]));
    const double m = mean(ks);
    const double se = ks.size() > 1 ? std::sqrt(sample_variance(ks) / static_cast<double>(ks.size())) : 0.0;
    kmean.add_row({std::to_string(t), format_double(m), format_double(se),
                   format_double(1.0 + sigma_sq * static_cast<double>(t))});
  }
  run.write_text("kmean.txt", kmean.to_string());

  const MartingaleStats ms =
      martingale_check(law, cfg.epsilon, std::min<std::uint64_t>(cfg.height, 200),
                       std::max<std::uint64_t>(cfg.replicas, 100),
                       derive_seed(cfg.seed, 0, 0, 5));
  Table mart = make_table("martingale", cfg,
                          {"n", "replicas", "epsilon", "mean", "se_mean",
                           "second_moment", "se_second_moment", "series"});
  mart.add_row({std::to_string(ms.n), std::to_string(ms.replicas), format_double(ms.epsilon),
                format_double(ms.mean), format_double(ms.se_mean),
                format_double(ms.second_moment), format_double(ms.se_second_moment),
                format_double(ms.series)});
  run.write_text("martingale.txt", mart.to_string());
  finish(run, "diagnose", cfg, start);
}

// ---------------------------------------------------------------------------
// gauge: the interpolation-profile energy phi and its decay bound on one
// sampled layer process, across the configured n grid.
// ---------------------------------------------------------------------------
void run_gauge(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  if (cfg.n_grid.back() > cfg.height)
    throw ValidationError("gauge: n grid exceeds sampled height");
  const OffspringLaw law = resolve_law(cfg);
  RunDirectory run(std::filesystem::path(cfg.out_dir) / "gauge");
  run.write_text("config.txt", cfg.canonical_text());

  const std::vector<std::uint64_t> layers =
      sample_layer_process(law, cfg.height, cfg.seed);
  Table table = make_table("gauge", cfg, {"n", "q", "phi", "bound", "ratio"});
  table.set_meta("law", law.name());
  table.set_meta("r", std::to_string(cfg.r));
  table.set_meta("theta", format_double(cfg.theta));
  table.set_meta("seed", std::to_string(cfg.seed));
  std::vector<double> shift(cfg.group_dim, 0.0);
  shift[0] = cfg.theta;
  const GroupElement g(std::move(shift));
  const double theta_sq = g.norm_squared();
  for (const std::uint64_t n64 : cfg.n_grid) {
    const std::uint32_t n = checked_u32(n64, "n grid entry");
    if (n < cfg.r + 3)
      throw ValidationError("gauge: every n must be >= r + 3 for the decay bound");
    const GaugeProfile profile = gauge_profile(cfg.r, n, g);
    const double p = phi_from_layers(layers, profile);
    const double bound = phi_upper_bound(layers, cfg.r, n, theta_sq);
    const double ratio = bound > 0.0 ? p / bound : 0.0;
    table.add_row({std::to_string(n), format_double(q_sum(n - cfg.r)), format_double(p),
                   format_double(bound), format_double(ratio)});
  }
  run.write_text("gauge.txt", table.to_string());
  finish(run, "gauge", cfg, start);
}

// ---------------------------------------------------------------------------
// mw: the boundary-influence experiment. Seed-paired replicas per outer
// radius n, aligned boundary at layer n, window-averaged magnetization
// modulus over the inner slab after burn-in.
// ---------------------------------------------------------------------------
void run_mw(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const OffspringLaw law = resolve_law(cfg);
  const auto potential = make_potential(cfg.potential, cfg.spin_dim, cfg.beta);

  SymmetryExperimentParams params;
  params.r = cfg.r;
  params.n_list.clear();
  for (const std::uint64_t n : cfg.n_grid)
    params.n_list.push_back(checked_u32(n, "n grid entry"));
  params.replicas = cfg.replicas;
  params.sweeps = cfg.sweeps;
  params.delta = cfg.delta;
  params.seed = cfg.seed;
  params.workers = cfg.workers;
  if (expected_vertices(law, cfg.n_grid.back()) >
      static_cast<double>(cfg.max_tree_vertices))
    throw ValidationError("mw: expected tree size exceeds max_tree_vertices");

  RunDirectory run(std::filesystem::path(cfg.out_dir) / "mw");
  run.write_text("config.txt", cfg.canonical_text());
  const SymmetryExperimentResult result = symmetry_experiment(law, *potential, params);

  Table cells = make_table("mw_cells", cfg,
                           {"n", "replica", "tree_seed", "init_seed", "sweep_seed",
                            "modulus", "sweep_modulus_median", "acceptance",
                            "rotation_acceptance"});
  cells.set_meta("law", law.name());
  cells.set_meta("potential", potential->descriptor());
  cells.set_meta("r", std::to_string(cfg.r));
  cells.set_meta("sweeps", std::to_string(cfg.sweeps));
  cells.set_meta("delta", format_double(cfg.delta));
  for (const SymmetryCell& c : result.cells)
    cells.add_row({std::to_string(c.n), std::to_string(c.replica),
                   std::to_string(c.tree_seed), std::to_string(c.init_seed),
                   std::to_string(c.sweep_seed), format_double(c.modulus),
                   format_double(c.sweep_modulus_median), format_double(c.acceptance),
                   format_double(c.rotation_acceptance)});
  run.write_text("cells.txt", cells.to_string());

  Table summary = make_table("mw_summary", cfg, {"n", "median", "paired_below_first"});
  for (std::size_t i = 0; i < result.n_list.size(); ++i)
    summary.add_row({std::to_string(result.n_list[i]),
                     format_double(result.median_per_n[i]),
                     format_double(result.paired_below_first[i])});
  run.write_text("summary.txt", summary.to_string());
  finish(run, "mw", cfg, start);
}

// ---------------------------------------------------------------------------
// longrange-check: coupling-decay conditions on truncated trees at the
// configured depth and at half depth, with the analytic tail bound on how
// much deepening the truncation can move S1.
// ---------------------------------------------------------------------------
void run_longrange_check(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  if (cfg.depth / 2 <= cfg.probe_radius)
    throw ValidationError("longrange-check: depth/2 must exceed probe_radius");
  const OffspringLaw law = resolve_law(cfg);
  if (expected_vertices(law, cfg.depth) > static_cast<double>(cfg.max_tree_vertices))
    throw ValidationError("longrange-check: expected tree size exceeds max_tree_vertices");
  const Majorant majorant = Majorant::defaults();
  RunDirectory run(std::filesystem::path(cfg.out_dir) / "longrange-check");
  run.write_text("config.txt", cfg.canonical_text());

  std::vector<std::string> cond_columns = {"tree", "depth", "s1"};
  for (const double l : cfg.l_grid) cond_columns.push_back("s2_" + format_double(l));
  Table cond = make_table("longrange_conditions", cfg, cond_columns);
  cond.set_meta("law", law.name());
  cond.set_meta("majorant", majorant.descriptor());
  cond.set_meta("probe_radius", std::to_string(cfg.probe_radius));
  Table tail = make_table("longrange_tail", cfg,
                          {"tree", "s1_half", "s1_full", "diff", "bound", "within"});

  const std::uint32_t depth = checked_u32(cfg.depth, "depth");
  const std::uint32_t half = depth / 2;
  for (std::uint32_t i = 0; i < cfg.trees; ++i) {
    const LayeredTree full_tree =
        sample_kesten_tree(law, depth, derive_seed(cfg.seed, i, 0, 7));
    const LayeredTree half_tree = truncate_tree(full_tree, half);
    const Triangulation T_full = tree_to_lt(full_tree);
    const Triangulation T_half = tree_to_lt(half_tree);

    LongrangeConditionReport reports[2] = {
        check_conditions(T_half, majorant, cfg.probe_radius, cfg.l_grid),
        check_conditions(T_full, majorant, cfg.probe_radius, cfg.l_grid)};
    for (const LongrangeConditionReport& rep : reports) {
      std::vector<std::string> row = {std::to_string(i), std::to_string(rep.depth),
                                      format_double(rep.s1)};
      for (const double s2 : rep.s2) row.push_back(format_double(s2));
      cond.add_row(std::move(row));
    }
    const double bound =
        s1_tail_bound(layer_sizes(full_tree), half, depth, cfg.probe_radius, majorant);
    const double diff = std::abs(reports[1].s1 - reports[0].s1);
    tail.add_row({std::to_string(i), format_double(reports[0].s1),
                  format_double(reports[1].s1), format_double(diff),
                  format_double(bound), diff <= bound ? "1" : "0"});
  }
  run.write_text("conditions.txt", cond.to_string());
  run.write_text("tail.txt", tail.to_string());
  finish(run, "longrange-check", cfg, start);
}

// ---------------------------------------------------------------------------
// validate: structural check of a triangulation file.
// ---------------------------------------------------------------------------
void run_validate(const ExperimentConfig& cfg, const std::string& in_path) {
  const auto start = std::chrono::steady_clock::now();
  std::ifstream in(in_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + in_path);
  std::ostringstream raw;
  raw << in.rdbuf();
  std::istringstream stream(raw.str());
  ValidationReport report;
  const Triangulation T = load_triangulation(stream, &report);
  if (!report.ok) throw ValidationError(report.first_violation);

  RunDirectory run(std::filesystem::path(cfg.out_dir) / "validate");
  run.write_text("config.txt", cfg.canonical_text());
  Table table = make_table("validation", cfg, {"t", "k_low", "k_up", "edges", "triangles"});
  table.set_meta("input_fnv1a64", hex_u64(fnv1a64(raw.str())));
  table.set_meta("height", std::to_string(T.height()));
  table.set_meta("ok", "1");
  for (std::uint32_t t = 0; t < T.height(); ++t)
    table.add_row({std::to_string(t), std::to_string(T.layer_size(t)),
                   std::to_string(T.layer_size(t + 1)),
                   std::to_string(T.vertical_edge_count(t)),
                   std::to_string(report.strip_triangles[t])});
  run.write_text("report.txt", table.to_string());
  finish(run, "validate", cfg, start);
}

struct FlagValues {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out;
  std::uint32_t workers = 0;
  std::string law;
  std::uint64_t height = 0;
  std::uint32_t r = 0;
  std::uint32_t replicas = 0;
  std::uint64_t sweeps = 0;
  double delta = 0;
  double theta = 0;
  double epsilon = 0;
  std::uint32_t trees = 0;
  std::uint64_t depth = 0;
  std::uint32_t probe_radius = 0;
  std::string in_path;
};

void add_common_options(CLI::App* sub, FlagValues& v) {
  sub->add_option("--config", v.config_path, "config file (key = value lines)");
  sub->add_option("--seed", v.seed, "master seed");
  sub->add_option("--out", v.out, "output directory");
  sub->add_option("--workers", v.workers, "worker pool size for replica runs");
  sub->add_option("--law", v.law,
                  "offspring law (geometric | poisson | deterministic | custom)");
  sub->add_option("--height", v.height, "sampled height");
}

void apply_override(CLI::App* sub, const char* name, const std::function<void()>& set) {
  const CLI::Option* opt = sub->get_option_no_throw(name);
  if (opt != nullptr && opt->count() > 0) set();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"layered-triangulation spin toolkit"};
  app.require_subcommand(1);
  FlagValues v;

  CLI::App* sample = app.add_subcommand("sample", "sample a tree and its triangulation");
  CLI::App* diagnose = app.add_subcommand("diagnose", "layer-growth and martingale reports");
  CLI::App* gauge = app.add_subcommand("gauge", "interpolation-energy decay table");
  CLI::App* mw = app.add_subcommand("mw", "boundary-influence spin experiment");
  CLI::App* longrange =
      app.add_subcommand("longrange-check", "coupling-decay condition report");
  CLI::App* validate_cmd = app.add_subcommand("validate", "check a triangulation file");
  for (CLI::App* sub : {sample, diagnose, gauge, mw, longrange, validate_cmd})
    add_common_options(sub, v);

  diagnose->add_option("--trees", v.trees, "number of sampled trees");
  diagnose->add_option("--epsilon", v.epsilon, "growth normalization exponent offset");
  gauge->add_option("--r", v.r, "inner slab radius");
  gauge->add_option("--theta", v.theta, "boundary shift magnitude");
  mw->add_option("--r", v.r, "inner slab radius");
  mw->add_option("--replicas", v.replicas, "independent replicas per n");
  mw->add_option("--sweeps", v.sweeps, "sweeps per replica (half are burn-in)");
  mw->add_option("--delta", v.delta, "proposal half-width");
  longrange->add_option("--trees", v.trees, "number of sampled trees");
  longrange->add_option("--depth", v.depth, "truncation depth");
  longrange->add_option("--probe-radius", v.probe_radius, "probe slab radius");
  validate_cmd->add_option("--in", v.in_path, "triangulation file to check")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    ltspin::ExperimentConfig cfg;
    if (sub->count("--config") > 0) cfg = ltspin::ExperimentConfig::parse_file(v.config_path);
    apply_override(sub, "--seed", [&] { cfg.seed = v.seed; });
    apply_override(sub, "--out", [&] { cfg.out_dir = v.out; });
    apply_override(sub, "--workers", [&] { cfg.workers = v.workers; });
    apply_override(sub, "--law", [&] { cfg.law = v.law; });
    apply_override(sub, "--height", [&] { cfg.height = v.height; });
    apply_override(sub, "--trees", [&] { cfg.trees = v.trees; });
    apply_override(sub, "--epsilon", [&] { cfg.epsilon = v.epsilon; });
    apply_override(sub, "--r", [&] { cfg.r = v.r; });
    apply_override(sub, "--replicas", [&] { cfg.replicas = v.replicas; });
    apply_override(sub, "--sweeps", [&] { cfg.sweeps = v.sweeps; });
    apply_override(sub, "--delta", [&] { cfg.delta = v.delta; });
    apply_override(sub, "--theta", [&] { cfg.theta = v.theta; });
    apply_override(sub, "--depth", [&] { cfg.depth = v.depth; });
    apply_override(sub, "--probe-radius", [&] { cfg.probe_radius = v.probe_radius; });
    cfg.validate();

    if (sub == sample) run_sample(cfg);
    else if (sub == diagnose) run_diagnose(cfg);
    else if (sub == gauge) run_gauge(cfg);
    else if (sub == mw) run_mw(cfg);
    else if (sub == longrange) run_longrange_check(cfg);
    else run_validate(cfg, v.in_path);
    return 0;
  } catch (const ltspin::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
