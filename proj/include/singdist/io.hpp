#pragma once
// File formats:
//
//   * run input      - one JSON object {"design": {...}, "motion": {...}}
//                      describing the frame-normalized design and the
//                      one-parameter motion to sweep;
//   * fiber cache    - one JSON file per (interpretation, branch) holding the
//                      source parameters and every generic endpoint, so the
//                      ab-initio stage runs once per branch across processes;
//   * result JSON    - the per-branch detail behind the distance CSV;
//   * summary JSON   - stage bookkeeping (achieved vs expected root counts,
//                      cache hits, closed-form bypasses, per-pose gaps).
//
// Gaps (poses with no real critical point) serialize as JSON null, never as
// NaN text or a placeholder number.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "singdist/core.hpp"
#include "singdist/lagrangian.hpp"
#include "singdist/model.hpp"
#include "singdist/pipeline.hpp"
#include "singdist/rrr.hpp"

namespace singdist {

// ---------------------------------------------------------------------------
// Plain-file helpers.
// ---------------------------------------------------------------------------

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw InvalidInput("read failed: " + path.string());
  return std::move(ss).str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw InvalidInput("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Run input: design + motion.
// ---------------------------------------------------------------------------

/// A parsed run input file.
struct RunInput {
  DesignParams design;
  MotionSpec motion;
};

namespace detail {

inline double require_number(const nlohmann::json& obj, const std::string& ctx, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw InvalidInput(ctx + ": missing \"" + key + "\"");
  if (!it->is_number()) throw InvalidInput(ctx + ": \"" + key + "\" must be a number");
  return it->get<double>();
}

inline Vec2 require_vec2(const nlohmann::json& obj, const std::string& ctx, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw InvalidInput(ctx + ": missing \"" + key + "\"");
  if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number())
    throw InvalidInput(ctx + ": \"" + key + "\" must be a 2-element number array");
  return Vec2{(*it)[0].get<double>(), (*it)[1].get<double>()};
}

inline void reject_unknown_keys(const nlohmann::json& obj, const std::string& ctx,
                                std::initializer_list<const char*> known) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || (it.key() == k);
    if (!ok) throw InvalidInput(ctx + ": unknown key \"" + it.key() + "\"");
  }
}

inline std::array<Vec2, 3> require_vec2_triple(const nlohmann::json& obj, const std::string& ctx,
                                               const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw InvalidInput(ctx + ": missing \"" + key + "\"");
  if (!it->is_array() || it->size() != 3)
    throw InvalidInput(ctx + ": \"" + key + "\" must be an array of three points");
  std::array<Vec2, 3> out;
  for (int i = 0; i < 3; ++i) {
    const nlohmann::json& p = (*it)[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw InvalidInput(ctx + ": \"" + key + "\" entries must be 2-element number arrays");
    out[i] = Vec2{p[0].get<double>(), p[1].get<double>()};
  }
  return out;
}

inline MotionSpec parse_motion(const nlohmann::json& m) {
  reject_unknown_keys(m, "motion", {"a0", "a1", "b1", "v", "w", "n", "rotate"});
  MotionSpec out;
  out.a0 = require_vec2(m, "motion", "a0");
  out.a1 = require_vec2(m, "motion", "a1");
  out.b1 = require_vec2(m, "motion", "b1");
  out.v = require_number(m, "motion", "v");
  out.w = require_number(m, "motion", "w");
  auto nit = m.find("n");
  if (nit == m.end() || !nit->is_number_integer()) throw InvalidInput("motion: \"n\" must be an integer");
  out.n = nit->get<int>();
  if (auto rit = m.find("rotate"); rit != m.end()) {
    if (!rit->is_boolean()) throw InvalidInput("motion: \"rotate\" must be a boolean");
    out.rotate = rit->get<bool>();
  }
  return out;
}

inline nlohmann::json motion_json(const MotionSpec& m) {
  return nlohmann::json{{"a0", {m.a0.x, m.a0.y}}, {"a1", {m.a1.x, m.a1.y}}, {"b1", {m.b1.x, m.b1.y}},
                        {"v", m.v},               {"w", m.w},               {"n", m.n},
                        {"rotate", m.rotate}};
}

}  // namespace detail

/// Parses a run input object. Top-level keys other than "design"/"motion"
/// are ignored (room for user annotations); unknown keys inside those two
/// objects are rejected so typos cannot silently fall back to defaults.
inline RunInput parse_run_input(const nlohmann::json& root) {
  if (!root.is_object()) throw InvalidInput("top level must be a JSON object");
  auto dit = root.find("design");
  if (dit == root.end() || !dit->is_object()) throw InvalidInput("missing \"design\" object");
  auto mit = root.find("motion");
  if (mit == root.end() || !mit->is_object()) throw InvalidInput("missing \"motion\" object");

  RunInput in;
  const nlohmann::json& d = *dit;
  detail::reject_unknown_keys(d, "design", {"x2", "x3", "y3", "x5", "x6", "y6"});
  in.design.x2 = detail::require_number(d, "design", "x2");
  in.design.x3 = detail::require_number(d, "design", "x3");
  in.design.y3 = detail::require_number(d, "design", "y3");
  in.design.x5 = detail::require_number(d, "design", "x5");
  in.design.x6 = detail::require_number(d, "design", "x6");
  in.design.y6 = detail::require_number(d, "design", "y6");

  in.motion = detail::parse_motion(*mit);
  return in;
}

inline RunInput parse_run_input_text(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("not valid JSON: ") + e.what());
  }
  return parse_run_input(root);
}

inline RunInput read_run_input(const std::filesystem::path& path) {
  return parse_run_input_text(read_text_file(path));
}

/// Serializes a run input to the same shape parse_run_input reads.
inline nlohmann::json run_input_json(const RunInput& in) {
  nlohmann::json d{{"x2", in.design.x2}, {"x3", in.design.x3}, {"y3", in.design.y3},
                   {"x5", in.design.x5}, {"x6", in.design.x6}, {"y6", in.design.y6}};
  return nlohmann::json{{"design", std::move(d)}, {"motion", detail::motion_json(in.motion)}};
}

// ---------------------------------------------------------------------------
// Chain-machine run input: nine-point design + motion.
// ---------------------------------------------------------------------------

/// A parsed chain-machine input file: fixed anchors, moving-frame plate
/// anchors, the intermediate joints at the first sample, and the motion.
struct RrrRunInput {
  RrrDesign design;
  MotionSpec motion;
};

inline RrrRunInput parse_rrr_run_input(const nlohmann::json& root) {
  if (!root.is_object()) throw InvalidInput("top level must be a JSON object");
  auto dit = root.find("design");
  if (dit == root.end() || !dit->is_object()) throw InvalidInput("missing \"design\" object");
  auto mit = root.find("motion");
  if (mit == root.end() || !mit->is_object()) throw InvalidInput("missing \"motion\" object");

  RrrRunInput in;
  detail::reject_unknown_keys(*dit, "design", {"base", "platform", "elbows"});
  in.design.base = detail::require_vec2_triple(*dit, "design", "base");
  in.design.platform = detail::require_vec2_triple(*dit, "design", "platform");
  in.design.elbows = detail::require_vec2_triple(*dit, "design", "elbows");
  in.motion = detail::parse_motion(*mit);
  return in;
}

inline RrrRunInput read_rrr_run_input(const std::filesystem::path& path) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("not valid JSON: ") + e.what());
  }
  return parse_rrr_run_input(root);
}

inline nlohmann::json rrr_run_input_json(const RrrRunInput& in) {
  const auto triple = [](const std::array<Vec2, 3>& pts) {
    nlohmann::json a = nlohmann::json::array();
    for (const Vec2& p : pts) a.push_back({p.x, p.y});
    return a;
  };
  nlohmann::json d{{"base", triple(in.design.base)},
                   {"platform", triple(in.design.platform)},
                   {"elbows", triple(in.design.elbows)}};
  return nlohmann::json{{"design", std::move(d)}, {"motion", detail::motion_json(in.motion)}};
}

// ---------------------------------------------------------------------------
// Source-fiber cache files.
//
// One file per (interpretation, branch), named "<interp>_<branch>.json".
// The dump format writes doubles shortest-round-trip, so a reloaded fiber is
// bit-identical to the stored one and downstream results reproduce exactly.
// A file that is missing, malformed, or inconsistent with the requesting
// system reads as a cache miss (the pipeline then re-solves and overwrites);
// endpoint residuals are re-verified by the pipeline after every load.
// ---------------------------------------------------------------------------

inline std::string cache_file_name(const CriticalSystem& cs) {
  return cs.interp.token() + "_" + branch_tag(cs.branch) + ".json";
}

namespace detail {

inline nlohmann::json complex_json(const Complex& z) { return nlohmann::json{z.real(), z.imag()}; }

inline std::optional<Complex> complex_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) return std::nullopt;
  return Complex(j[0].get<double>(), j[1].get<double>());
}

}  // namespace detail

inline void save_source_fiber(const std::filesystem::path& path, const CriticalSystem& cs,
                              const SourceFiber& fiber) {
  nlohmann::json j;
  j["interpretation"] = cs.interp.token();
  j["branch"] = branch_tag(cs.branch);
  j["expected"] = fiber.expected;
  nlohmann::json params = nlohmann::json::array();
  for (const Complex& z : fiber.params) params.push_back(detail::complex_json(z));
  j["params"] = std::move(params);
  nlohmann::json sols = nlohmann::json::array();
  for (const Eigen::VectorXcd& s : fiber.solutions) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index i = 0; i < s.size(); ++i) row.push_back(detail::complex_json(s[i]));
    sols.push_back(std::move(row));
  }
  j["solutions"] = std::move(sols);
  write_text_file(path, j.dump(1, '\t') + "\n");
}

inline std::optional<SourceFiber> load_source_fiber(const std::filesystem::path& path,
                                                    const CriticalSystem& cs) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec) || ec) return std::nullopt;
  nlohmann::json j = nlohmann::json::parse(read_text_file(path), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  if (j.value("interpretation", "") != cs.interp.token()) return std::nullopt;
  if (j.value("branch", "") != branch_tag(cs.branch)) return std::nullopt;
  auto pit = j.find("params");
  auto sit = j.find("solutions");
  if (pit == j.end() || !pit->is_array() || sit == j.end() || !sit->is_array()) return std::nullopt;
  if (static_cast<int>(pit->size()) != cs.sys.n_params()) return std::nullopt;

  SourceFiber fiber;
  fiber.expected = j.value("expected", -1);
  for (const auto& pj : *pit) {
    auto z = detail::complex_from_json(pj);
    if (!z) return std::nullopt;
    fiber.params.push_back(*z);
  }
  const std::size_t arity = static_cast<std::size_t>(cs.sys.n_unknowns);
  for (const auto& row : *sit) {
    if (!row.is_array() || row.size() != arity) return std::nullopt;
    Eigen::VectorXcd s(static_cast<Eigen::Index>(arity));
    for (std::size_t i = 0; i < arity; ++i) {
      auto z = detail::complex_from_json(row[i]);
      if (!z) return std::nullopt;
      s[static_cast<Eigen::Index>(i)] = *z;
    }
    fiber.solutions.push_back(std::move(s));
  }
  if (fiber.expected != static_cast<int>(fiber.solutions.size())) return std::nullopt;
  return fiber;
}

/// Resolves the effective cache directory: the SINGDIST_CACHE environment
/// variable wins over the configured value; empty means "no cache".
inline std::filesystem::path cache_directory(const std::filesystem::path& configured) {
  if (const char* env = std::getenv("SINGDIST_CACHE"); env != nullptr && *env != '\0') return env;
  return configured;
}

/// File-backed cache hooks rooted at `dir`. An empty path disables caching.
inline CacheHooks file_cache_hooks(const std::filesystem::path& dir) {
  if (dir.empty()) return {};
  CacheHooks hooks;
  hooks.load = [dir](const CriticalSystem& cs) { return load_source_fiber(dir / cache_file_name(cs), cs); };
  hooks.store = [dir](const CriticalSystem& cs, const SourceFiber& fiber) {
    save_source_fiber(dir / cache_file_name(cs), cs, fiber);
  };
  return hooks;
}

// ---------------------------------------------------------------------------
// Result serialization (the JSON counterpart of the distance CSV).
// ---------------------------------------------------------------------------

namespace detail {

/// Finite values pass through; NaN/inf become explicit JSON null — the
/// per-pose gap flag downstream tools should look for.
inline nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline nlohmann::json branch_pose_json(const BranchPose& bp, bool signed_output) {
  nlohmann::json j;
  j["branch"] = bp.branch;
  j["distance"] = finite_or_null(bp.distance);
  j["real"] = bp.real;
  if (bp.real) {
    nlohmann::json mins = nlohmann::json::array();
    for (const Vec2& p : bp.minimizer) mins.push_back(nlohmann::json{p.x, p.y});
    j["minimizer"] = std::move(mins);
  } else {
    j["minimizer"] = nullptr;
  }
  if (signed_output) j["sign"] = bp.sign;
  j["n_real"] = bp.n_real;
  j["n_tracked"] = bp.n_tracked;
  j["n_failed"] = bp.n_failed;
  return j;
}

inline nlohmann::json stage_report_json(const StageReport& st) {
  return nlohmann::json{{"branch", st.branch},
                        {"expected", st.expected},
                        {"achieved", st.achieved},
                        {"closed_form", st.closed_form},
                        {"from_cache", st.from_cache},
                        {"loops", st.loops},
                        {"paths_tracked", st.paths_tracked},
                        {"rebases", st.rebases}};
}

}  // namespace detail

/// Full per-branch detail for every pose of every interpretation.
inline nlohmann::json distance_results_json(std::span<const SweepOutcome> outcomes, bool signed_output) {
  nlohmann::json all = nlohmann::json::array();
  for (const SweepOutcome& so : outcomes) {
    nlohmann::json o;
    o["interpretation"] = so.interp.token();
    o["label"] = so.interp.label();
    nlohmann::json poses = nlohmann::json::array();
    for (const DistanceResult& dr : so.poses) {
      nlohmann::json p;
      p["pose"] = dr.pose_index;
      p["phi"] = dr.phi;
      p["overall"] = detail::finite_or_null(dr.overall);
      p["overall_branch"] = dr.overall_index >= 0 ? nlohmann::json(dr.branches[dr.overall_index].branch)
                                                  : nlohmann::json(nullptr);
      if (signed_output) p["sign"] = dr.sign;
      nlohmann::json branches = nlohmann::json::array();
      for (const BranchPose& bp : dr.branches) branches.push_back(detail::branch_pose_json(bp, signed_output));
      p["branches"] = std::move(branches);
      poses.push_back(std::move(p));
    }
    o["poses"] = std::move(poses);
    all.push_back(std::move(o));
  }
  return all;
}

/// Stage bookkeeping: achieved vs expected root counts per branch, cache and
/// closed-form flags, infeasible branches, and how many poses carry gaps.
inline nlohmann::json summary_json(std::span<const SweepOutcome> outcomes, std::uint64_t seed, int workers) {
  nlohmann::json s;
  s["seed"] = seed;
  s["workers"] = workers;
  nlohmann::json interps = nlohmann::json::array();
  for (const SweepOutcome& so : outcomes) {
    nlohmann::json o;
    o["interpretation"] = so.interp.token();
    o["label"] = so.interp.label();
    o["poses"] = so.poses.size();
    nlohmann::json stages = nlohmann::json::array();
    for (const StageReport& st : so.stages) stages.push_back(detail::stage_report_json(st));
    o["branches"] = std::move(stages);
    o["infeasible"] = so.infeasible;
    int gaps = 0, failed_paths = 0;
    for (const DistanceResult& dr : so.poses) {
      if (dr.overall_index < 0) ++gaps;
      for (const BranchPose& bp : dr.branches) failed_paths += bp.n_failed;
    }
    o["pose_gaps"] = gaps;
    o["failed_paths"] = failed_paths;
    interps.push_back(std::move(o));
  }
  s["interpretations"] = std::move(interps);
  return s;
}

/// Chain-machine sweep bookkeeping, mirroring summary_json.
inline nlohmann::json rrr_summary_json(const RrrSweepOutcome& out, std::uint64_t seed, int workers) {
  nlohmann::json s;
  s["seed"] = seed;
  s["workers"] = workers;
  s["poses"] = out.poses.size();
  nlohmann::json stages = nlohmann::json::array();
  for (const StageReport& st : out.stages) stages.push_back(detail::stage_report_json(st));
  s["branches"] = std::move(stages);
  int gaps = 0, failed_paths = 0;
  for (const RrrDistanceResult& dr : out.poses) {
    if (dr.overall_index < 0) ++gaps;
    for (const RrrBranchPose& bp : dr.branches) failed_paths += bp.n_failed;
  }
  s["pose_gaps"] = gaps;
  s["failed_paths"] = failed_paths;
  return s;
}

}  // namespace singdist
