// singdist: distance from a planar parallel-manipulator pose to its closest
// degenerate configuration, swept along a one-parameter motion.
//
// Subcommands:
//   sweep     - solve every sample pose of the configured motion; writes
//               distances.csv, kpi.csv, results.json, summary.json and SVG
//               charts into the output directory
//   single    - solve one motion parameter; prints per-branch minima and
//               minimizer anchors, optionally drawing the configuration pair
//   abinitio  - populate the start-solution cache per (interpretation,
//               branch) family and report achieved vs expected root counts
//   rrr       - sweep for the nine-anchor chain machine
//
// Exit codes: 0 success, 2 invalid configuration or input, 3 root-count
// mismatch, 4 continuation or seeding failure.

#include <cstdio>
#include <filesystem>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "singdist/io.hpp"
#include "singdist/svg.hpp"

namespace fs = std::filesystem;
using namespace singdist;

namespace {

std::vector<Interpretation> interps_from_flag(const std::string& flag) {
  std::vector<Interpretation> out;
  if (flag == "all9") {
    for (const Interpretation& i : all_interpretations()) out.push_back(i);
    return out;
  }
  std::stringstream ss(flag);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    const auto i = parse_interpretation(tok);
    if (!i) throw InvalidInput("unknown interpretation \"" + tok + "\" (want rr..bb, prelim, or all9)");
    out.push_back(*i);
  }
  if (out.empty()) throw InvalidInput("no interpretations requested");
  return out;
}

std::vector<std::string> branches_from_flag(const std::string& flag) {
  if (flag == "auto") return {};
  static const std::vector<std::string> known = {"variety",  "collinear_p", "collinear_b", "oneline0",
                                                 "oneline1", "collapse_p",  "collapse_b"};
  std::vector<std::string> out;
  std::stringstream ss(flag);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    if (std::find(known.begin(), known.end(), tok) == known.end())
      throw InvalidInput("unknown branch tag \"" + tok + "\"");
    out.push_back(tok);
  }
  if (out.empty()) throw InvalidInput("no branches requested");
  return out;
}

/// Options shared by the solving subcommands.
struct CommonOpts {
  std::string input;
  std::string interp = "all9";
  std::string branches = "auto";
  int poses = 0;  ///< 0 keeps the input file's sample count
  bool signed_output = false;
  int workers = 1;
  std::uint64_t seed = 0;
  std::string out = ".";
  std::string cache;
  int certify = 1;
};

PipelineSettings pipeline_settings(const CommonOpts& o) {
  PipelineSettings ps;
  ps.seed = o.seed;
  ps.workers = o.workers;
  ps.certify_sources = o.certify;
  return ps;
}

std::string pose_count_or_gap(double v) { return std::isfinite(v) ? fmt9(v) : std::string("gap"); }

/// Distance curves of one interpretation: every branch plus the combination.
std::vector<SvgSeries> sweep_series(const SweepOutcome& so) {
  std::vector<SvgSeries> s;
  if (so.poses.empty()) return s;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t b = 0; b < so.poses.front().branches.size(); ++b) {
    SvgSeries cur;
    cur.label = so.poses.front().branches[b].branch;
    for (const DistanceResult& dr : so.poses)
      cur.points.push_back({dr.phi, dr.branches[b].real ? dr.branches[b].distance : nan});
    s.push_back(std::move(cur));
  }
  SvgSeries overall;
  overall.label = "overall";
  overall.color = "#000000";
  for (const DistanceResult& dr : so.poses)
    overall.points.push_back({dr.phi, dr.overall_index >= 0 ? dr.overall : nan});
  s.push_back(std::move(overall));
  return s;
}

void warn_gaps(const std::string& what, int gaps) {
  if (gaps > 0)
    std::fprintf(stderr, "warning: %s: %d pose(s) with no real critical point (gap rows)\n", what.c_str(),
                 gaps);
}

int cmd_sweep(const CommonOpts& o) {
  RunInput in = read_run_input(o.input);
  in.design = relabel_canonical(in.design);
  if (o.poses > 0) in.motion.n = o.poses;
  const PipelineSettings ps = pipeline_settings(o);
  const CacheHooks hooks = file_cache_hooks(cache_directory(o.cache));
  const std::vector<Interpretation> interps = interps_from_flag(o.interp);
  const std::vector<std::string> filter = branches_from_flag(o.branches);

  std::vector<SweepOutcome> outcomes;
  for (const Interpretation& interp : interps) {
    outcomes.push_back(sweep_interpretation(interp, in.design, in.motion, ps, hooks, filter));
    const SweepOutcome& so = outcomes.back();
    int gaps = 0;
    for (const DistanceResult& dr : so.poses) gaps += dr.overall_index < 0;
    std::printf("%s  %s: %zu poses", interp.token().c_str(), interp.label().c_str(), so.poses.size());
    for (const StageReport& st : so.stages)
      std::printf("  %s %d/%d%s", st.branch.c_str(), st.achieved, st.expected,
                  st.closed_form ? " (closed form)" : st.from_cache ? " (cached)" : "");
    std::printf("\n");
    warn_gaps(interp.token(), gaps);
  }

  const fs::path out_dir(o.out);
  fs::create_directories(out_dir);
  write_text_file(out_dir / "distances.csv", distance_csv(outcomes, o.signed_output));
  const std::vector<KpiRow> kpi = kpi_sweep(in.design, in.motion, o.seed);
  write_text_file(out_dir / "kpi.csv", kpi_csv(kpi));
  write_text_file(out_dir / "results.json", distance_results_json(outcomes, o.signed_output).dump(2) + "\n");
  write_text_file(out_dir / "summary.json", summary_json(outcomes, o.seed, o.workers).dump(2) + "\n");

  for (const SweepOutcome& so : outcomes) {
    const std::string name = "distance_" + so.interp.token() + ".svg";
    write_text_file(out_dir / name,
                    svg_line_chart(sweep_series(so), "φ (rad)", "Distance", so.interp.label()));
  }
  std::vector<SvgSeries> overview;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const SweepOutcome& so : outcomes) {
    SvgSeries cur;
    cur.label = so.interp.label();
    for (const DistanceResult& dr : so.poses)
      cur.points.push_back({dr.phi, dr.overall_index >= 0 ? dr.overall : nan});
    overview.push_back(std::move(cur));
  }
  write_text_file(out_dir / "distances_overview.svg", svg_line_chart(overview, "φ (rad)", "Distance"));
  write_text_file(out_dir / "kpi.svg", svg_line_chart(kpi_plot_series(kpi), "φ (rad)", "Index value"));
  std::printf("artifacts written to %s\n", out_dir.string().c_str());
  return 0;
}

int cmd_single(const CommonOpts& o, double phi, const std::string& svg_path) {
  RunInput in = read_run_input(o.input);
  in.design = relabel_canonical(in.design);
  const PipelineSettings ps = pipeline_settings(o);
  const CacheHooks hooks = file_cache_hooks(cache_directory(o.cache));
  const std::vector<Interpretation> interps = interps_from_flag(o.interp);
  if (interps.size() != 1) throw InvalidInput("single mode takes exactly one interpretation");
  const std::vector<std::string> filter = branches_from_flag(o.branches);

  const DistanceResult dr = distance_at(interps[0], in.design, in.motion, phi, ps, hooks, filter);
  std::printf("%s  %s at φ = %s\n", interps[0].token().c_str(), interps[0].label().c_str(),
              fmt9(phi).c_str());
  for (const BranchPose& bp : dr.branches) {
    std::printf("  %-12s distance = %-15s", bp.branch.c_str(), pose_count_or_gap(bp.distance).c_str());
    if (o.signed_output) std::printf(" sign = %+d", bp.sign);
    std::printf("  real/tracked/failed = %d/%d/%d\n", bp.n_real, bp.n_tracked, bp.n_failed);
    if (bp.real) {
      std::printf("    closest:");
      for (const Vec2& p : bp.minimizer) std::printf(" (%s, %s)", fmt9(p.x).c_str(), fmt9(p.y).c_str());
      std::printf("\n");
    }
  }
  if (dr.overall_index >= 0) {
    std::printf("overall: %s via %s", fmt9(dr.overall).c_str(), dr.branches[dr.overall_index].branch.c_str());
    if (o.signed_output) std::printf(" (sign %+d)", dr.sign);
    std::printf("\n");
  } else {
    std::printf("overall: gap (no branch produced a real critical point)\n");
  }

  if (!svg_path.empty()) {
    if (dr.overall_index < 0) {
      std::fprintf(stderr, "warning: no real minimizer, skipping drawing\n");
    } else {
      const Configuration k = pose_config(in.design, in.motion, phi);
      const std::string title = interps[0].label() + " at φ = " + fmt9(phi);
      write_text_file(svg_path, svg_config_drawing(k.k, dr.branches[dr.overall_index].minimizer, title));
      std::printf("drawing written to %s\n", svg_path.c_str());
    }
  }
  return 0;
}

int cmd_abinitio(const CommonOpts& o) {
  const PipelineSettings ps = pipeline_settings(o);
  const fs::path dir = cache_directory(o.cache);
  if (dir.empty())
    std::fprintf(stderr, "warning: no cache directory configured; counts are computed but not persisted\n");
  const CacheHooks hooks = file_cache_hooks(dir);
  const std::vector<std::string> filter = branches_from_flag(o.branches);

  bool all_ok = true;
  for (const Interpretation& interp : interps_from_flag(o.interp)) {
    for (const BranchSpec& b : applicable_branches(interp)) {
      const std::string tag = branch_tag(b);
      if (!filter.empty() && std::find(filter.begin(), filter.end(), tag) == filter.end()) continue;
      if (branch_has_closed_form(interp, b)) {
        std::printf("%s/%s: closed form, nothing to cache\n", interp.token().c_str(), tag.c_str());
        continue;
      }
      const BranchEngine be(interp, b);
      const SourceFiber src = obtain_source_fiber(be, ps, hooks);
      const bool ok = static_cast<int>(src.solutions.size()) == src.expected;
      all_ok = all_ok && ok;
      std::printf("%s/%s: %zu of %d%s%s\n", interp.token().c_str(), tag.c_str(), src.solutions.size(),
                  src.expected, src.from_cache ? " (cached)" : "", ok ? "" : "  MISMATCH");
    }
  }
  return all_ok ? 0 : 3;
}

int cmd_rrr(const CommonOpts& o) {
  RrrRunInput in = read_rrr_run_input(o.input);
  if (o.poses > 0) in.motion.n = o.poses;
  const PipelineSettings ps = pipeline_settings(o);

  const RrrSweepOutcome out = rrr_sweep(in.design, in.motion, ps);
  int gaps = 0;
  for (const RrrDistanceResult& dr : out.poses) gaps += dr.overall_index < 0;
  std::printf("chain machine: %zu poses", out.poses.size());
  for (const StageReport& st : out.stages) std::printf("  %s %d/%d", st.branch.c_str(), st.achieved, st.expected);
  std::printf("\n");
  warn_gaps("rrr", gaps);

  const fs::path out_dir(o.out);
  fs::create_directories(out_dir);
  write_text_file(out_dir / "rrr_distances.csv", rrr_distance_csv(out.poses, o.signed_output));
  write_text_file(out_dir / "rrr_summary.json", rrr_summary_json(out, o.seed, o.workers).dump(2) + "\n");

  std::vector<SvgSeries> series;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (!out.poses.empty()) {
    for (std::size_t b = 0; b < out.poses.front().branches.size(); ++b) {
      SvgSeries cur;
      cur.label = out.poses.front().branches[b].branch;
      for (const RrrDistanceResult& dr : out.poses)
        cur.points.push_back({dr.phi, dr.branches[b].real ? dr.branches[b].distance : nan});
      series.push_back(std::move(cur));
    }
    SvgSeries overall;
    overall.label = "overall";
    overall.color = "#000000";
    for (const RrrDistanceResult& dr : out.poses)
      overall.points.push_back({dr.phi, dr.overall_index >= 0 ? dr.overall : nan});
    series.push_back(std::move(overall));
  }
  write_text_file(out_dir / "rrr_distance.svg", svg_line_chart(series, "φ (rad)", "Distance"));
  std::printf("artifacts written to %s\n", out_dir.string().c_str());
  return 0;
}

void add_common(CLI::App* sc, CommonOpts& o, bool needs_input, bool takes_output) {
  if (needs_input)
    sc->add_option("--input", o.input, "run input JSON file")->required()->check(CLI::ExistingFile);
  sc->add_option("--interp", o.interp, "interpretation tokens rr..bb or prelim (comma-separated), or all9")
      ->capture_default_str();
  sc->add_option("--branches", o.branches, "branch tags to solve (comma-separated), or auto")
      ->capture_default_str();
  sc->add_option("--workers", o.workers, "worker threads for per-pose solves")
      ->check(CLI::Range(1, 4096))
      ->capture_default_str();
  sc->add_option("--seed", o.seed, "root seed; identical seeds give byte-identical CSV")
      ->capture_default_str();
  sc->add_option("--certify", o.certify, "total random source points certifying each root count")
      ->check(CLI::Range(1, 64))
      ->capture_default_str();
  sc->add_option("--cache", o.cache, "start-solution cache directory (SINGDIST_CACHE overrides)");
  if (takes_output) {
    sc->add_option("--poses", o.poses, "override the input's sample count")->check(CLI::Range(2, 1000000));
    sc->add_flag("--signed", o.signed_output, "emit the side of the degeneracy as a sign column");
    sc->add_option("--out", o.out, "output directory")->capture_default_str();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distance from a planar parallel-manipulator pose to its closest degenerate configuration"};
  app.require_subcommand(1);
  int rc = 0;

  CommonOpts sweep_opts;
  CLI::App* sweep = app.add_subcommand("sweep", "solve every sample pose of the motion");
  add_common(sweep, sweep_opts, true, true);
  sweep->callback([&] { rc = cmd_sweep(sweep_opts); });

  CommonOpts single_opts;
  single_opts.interp = "prelim";
  double phi = 0;
  std::string svg_path;
  CLI::App* single = app.add_subcommand("single", "solve one motion parameter");
  add_common(single, single_opts, true, false);
  single->add_option("--phi", phi, "motion parameter to solve")->required();
  single->add_flag("--signed", single_opts.signed_output, "print the side of the degeneracy per branch");
  single->add_option("--svg", svg_path, "write a drawing of the pose and its closest degenerate mate");
  single->callback([&] { rc = cmd_single(single_opts, phi, svg_path); });

  CommonOpts ab_opts;
  CLI::App* ab = app.add_subcommand("abinitio", "populate the start-solution cache and report root counts");
  add_common(ab, ab_opts, false, false);
  ab->callback([&] { rc = cmd_abinitio(ab_opts); });

  CommonOpts rrr_opts;
  CLI::App* rrr = app.add_subcommand("rrr", "sweep the nine-anchor chain machine");
  rrr->add_option("--input", rrr_opts.input, "chain-machine input JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  rrr->add_option("--poses", rrr_opts.poses, "override the input's sample count")->check(CLI::Range(2, 1000000));
  rrr->add_flag("--signed", rrr_opts.signed_output, "emit the side of the degeneracy as a sign column");
  rrr->add_option("--workers", rrr_opts.workers, "worker threads for per-pose solves")
      ->check(CLI::Range(1, 4096))
      ->capture_default_str();
  rrr->add_option("--seed", rrr_opts.seed, "root seed; identical seeds give byte-identical CSV")
      ->capture_default_str();
  rrr->add_option("--certify", rrr_opts.certify, "total random source points certifying each root count")
      ->check(CLI::Range(1, 64))
      ->capture_default_str();
  rrr->add_option("--out", rrr_opts.out, "output directory")->capture_default_str();
  rrr->callback([&] { rc = cmd_rrr(rrr_opts); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const CountMismatch& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 3;
  } catch (const Stalled& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 3;
  } catch (const SeedTrackingFailure& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 4;
  } catch (const BudgetExceeded& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  }
  return rc;
}
