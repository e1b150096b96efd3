// fovcalib command-line tool.
//
// Exit codes: 0 success, 1 usage error or malformed input file, 2 domain,
// convergence or estimation error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "fovcalib/fovcalib.hpp"

namespace fs = std::filesystem;
using fovcalib::io::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitDomain = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// With --json, stdout carries JSON only and human-readable text goes to stderr.
struct Output {
  bool json_mode = false;
  std::ostream& human() const { return json_mode ? std::cerr : std::cout; }
  void emit(const json& j) const {
    if (json_mode) std::cout << j.dump(2) << '\n';
  }
};

std::string fmt(double v, int precision) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

std::string fmt_opt(const std::optional<double>& v, int precision) {
  return v ? fmt(*v, precision) : std::string("-");
}

fovcalib::RadialModel model_from_flag(const std::string& name) {
  const auto m = fovcalib::parse_radial_model(name);
  if (!m) throw UsageError("unknown model '" + name + "'");
  return *m;
}

// --- zeroshot ---------------------------------------------------------------

struct ZeroShotArgs {
  std::string spec;
  std::optional<std::string> model;
  std::string out;
};

int run_zeroshot(const ZeroShotArgs& a, const Output& out) {
  auto spec = fovcalib::io::camera_spec_from_json(fovcalib::io::read_json_file(a.spec));
  if (a.model) spec.model = model_from_flag(*a.model);
  const auto result = fovcalib::solve_omega(spec);
  const auto intr = fovcalib::to_intrinsics(spec, result);

  auto& h = out.human();
  h << std::left << std::setw(12) << "camera" << std::right << std::setw(6) << "W" << std::setw(6)
    << "H" << std::setw(8) << "fov_h" << std::setw(8) << "fov_v" << std::setw(10) << "fx~"
    << std::setw(10) << "fy~" << std::setw(10) << "f~" << std::setw(11) << "omega*" << std::setw(10)
    << "f*" << std::setw(9) << "clamped" << '\n';
  const std::optional<double> f_tilde =
      result.fy_perspective ? std::optional<double>((result.fx_perspective + *result.fy_perspective) / 2.0)
                            : std::optional<double>(result.fx_perspective);
  h << std::left << std::setw(12) << (spec.name.empty() ? "-" : spec.name) << std::right
    << std::setw(6) << spec.width << std::setw(6) << spec.height << std::setw(8)
    << fmt(spec.fov_h_deg, 2) << std::setw(8) << fmt_opt(spec.fov_v_deg, 2) << std::setw(10)
    << fmt(result.fx_perspective, 1) << std::setw(10) << fmt_opt(result.fy_perspective, 1)
    << std::setw(10) << fmt_opt(f_tilde, 1) << std::setw(11) << fmt(result.omega_star, 6)
    << std::setw(10) << fmt(result.f_star, 1) << std::setw(9) << (result.clamped ? "yes" : "no")
    << '\n';

  if (!a.out.empty()) fovcalib::io::write_json_file(a.out, fovcalib::io::to_json(intr));
  out.emit(json{{"spec", fovcalib::io::to_json(spec)},
                {"result", fovcalib::io::to_json(result)},
                {"intrinsics", fovcalib::io::to_json(intr)}});
  return 0;
}

// --- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
  std::string intrinsics;
  std::string dataset;
  std::optional<double> f_gt;
};

void check_sizes(const fovcalib::Intrinsics& intr, const fovcalib::CorrespondenceSet& data) {
  if (intr.width != data.width || intr.height != data.height) {
    throw fovcalib::DomainError("dataset image size " + std::to_string(data.width) + "x" +
                                std::to_string(data.height) + " does not match intrinsics " +
                                std::to_string(intr.width) + "x" + std::to_string(intr.height));
  }
}

void print_report(std::ostream& h, const fovcalib::CalibrationReport& r) {
  h << std::left << std::setw(24) << "image" << std::right << std::setw(12) << "rms [px]" << '\n';
  for (size_t i = 0; i < r.per_image_rms.size(); ++i) {
    h << std::left << std::setw(24) << r.image_names[i] << std::right << std::setw(12)
      << fmt(r.per_image_rms[i], 4) << '\n';
  }
  h << "f = " << fmt(r.intrinsics.f, 3) << "  omega = " << fmt(r.intrinsics.omega, 7)
    << "  cx = " << fmt(r.intrinsics.cx, 2) << "  cy = " << fmt(r.intrinsics.cy, 2) << '\n';
  h << "RMS reprojection error: " << fmt(r.rms, 4) << " px (" << r.per_image_rms.size()
    << " images)\n";
  if (r.f_err) h << "focal deviation error: " << fmt(100.0 * *r.f_err, 2) << " %\n";
}

int run_evaluate(const EvaluateArgs& a, const Output& out) {
  const auto intr = fovcalib::io::intrinsics_from_json(fovcalib::io::read_json_file(a.intrinsics));
  const auto data = fovcalib::io::correspondences_from_json(fovcalib::io::read_json_file(a.dataset));
  check_sizes(intr, data);
  auto report = fovcalib::rms_reprojection(intr, data);
  if (a.f_gt) report.f_err = fovcalib::deviation_error(intr.f, *a.f_gt);
  print_report(out.human(), report);
  out.emit(fovcalib::io::to_json(report));
  return 0;
}

// --- refine -----------------------------------------------------------------

struct RefineArgs {
  std::string init;
  std::string dataset;
  std::optional<int> images;
  bool sweep = false;
  bool optimize_pp = false;
  int max_iters = 100;
  std::optional<double> f_gt;
  std::string out;
  std::string report;
};

int run_refine(const RefineArgs& a, const Output& out) {
  const auto init = fovcalib::io::intrinsics_from_json(fovcalib::io::read_json_file(a.init));
  auto data = fovcalib::io::correspondences_from_json(fovcalib::io::read_json_file(a.dataset));
  check_sizes(init, data);
  fovcalib::RefineConfig cfg;
  cfg.optimize_principal_point = a.optimize_pp;
  cfg.max_iters = a.max_iters;

  if (a.images) {
    if (*a.images < 1 || static_cast<size_t>(*a.images) > data.images.size()) {
      throw UsageError("--images must lie in [1, " + std::to_string(data.images.size()) + "]");
    }
    data.images.resize(static_cast<size_t>(*a.images));
  }

  if (a.sweep) {
    if (data.images.size() < 2) throw UsageError("--sweep needs at least 2 images");
    const auto sweep = fovcalib::single_shot_sweep(data, init, cfg);
    auto& h = out.human();
    h << std::left << std::setw(24) << "held-in image" << std::right << std::setw(12) << "gen [px]"
      << std::setw(12) << "fit [px]" << std::setw(12) << "f" << std::setw(12) << "omega" << '\n';
    for (const auto& f : sweep.folds) {
      h << std::left << std::setw(24) << f.name << std::right << std::setw(12) << fmt(f.gen, 4)
        << std::setw(12) << fmt(f.fit, 4) << std::setw(12) << fmt(f.intrinsics.f, 2)
        << std::setw(12) << fmt(f.intrinsics.omega, 7) << '\n';
    }
    h << "average generalization error: " << fmt(sweep.eps_gen, 4) << " px\n"
      << "average fitting error:        " << fmt(sweep.eps_fit, 4) << " px\n";
    const json j = fovcalib::io::to_json(sweep);
    if (!a.report.empty()) fovcalib::io::write_json_file(a.report, j);
    out.emit(j);
    return 0;
  }

  auto report = fovcalib::full_calibrate(data, init, cfg);
  if (a.f_gt) report.f_err = fovcalib::deviation_error(report.intrinsics.f, *a.f_gt);
  print_report(out.human(), report);
  out.human() << "initial RMS " << fmt(report.initial_rms, 4) << " px, " << report.iterations
              << " iterations, termination: " << fovcalib::to_string(report.termination) << '\n';
  const json j = fovcalib::io::to_json(report);
  if (!a.out.empty()) fovcalib::io::write_json_file(a.out, fovcalib::io::to_json(report.intrinsics));
  if (!a.report.empty()) fovcalib::io::write_json_file(a.report, j);
  out.emit(j);
  if (report.stalled()) {
    std::cerr << "error: Levenberg-Marquardt stalled (initial RMS " << fmt(report.initial_rms, 4)
              << " px, final " << fmt(report.rms, 4) << " px after " << report.iterations
              << " iterations)\n";
    return kExitDomain;
  }
  return 0;
}

// --- rectify ----------------------------------------------------------------

struct RectifyArgs {
  std::string intrinsics;
  std::string input;
  std::string output;
  bool fit_all = false;
};

int run_rectify(const RectifyArgs& a, const Output& out) {
  const auto intr = fovcalib::io::intrinsics_from_json(fovcalib::io::read_json_file(a.intrinsics));
  const auto img = fovcalib::read_ppm(a.input);
  if (img.width != intr.width || img.height != intr.height) {
    throw fovcalib::DomainError("input image size does not match intrinsics");
  }
  const double new_f = a.fit_all ? fovcalib::fit_all_focal(intr, img.width, img.height) : intr.f;
  const auto map = fovcalib::build_rectify_map(intr, img.width, img.height, new_f);
  fovcalib::write_ppm(a.output, fovcalib::remap(img, map));
  out.human() << "wrote " << a.output << " (" << img.width << "x" << img.height
              << ", new_f = " << fmt(new_f, 3) << ")\n";
  out.emit(json{{"output", a.output}, {"width", img.width}, {"height", img.height}, {"new_f", new_f}});
  return 0;
}

// --- synth ------------------------------------------------------------------

struct SynthArgs {
  std::string scenario;
  std::string out_dir;
  bool render = false;
};

int run_synth(const SynthArgs& a, const Output& out) {
  const auto sc = fovcalib::io::scenario_from_json(fovcalib::io::read_json_file(a.scenario));
  const auto data = fovcalib::generate_correspondences(sc);
  const auto& intr = sc.intrinsics;
  const auto spec = fovcalib::derive_spec(intr, intr.width, intr.height);

  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  fovcalib::io::write_json_file(dir / "dataset.json", fovcalib::io::to_json(data));
  fovcalib::io::write_json_file(dir / "intrinsics.json", fovcalib::io::to_json(intr));
  fovcalib::io::write_json_file(dir / "spec.json", fovcalib::io::to_json(spec));
  fovcalib::io::write_json_file(dir / "scenario.json", fovcalib::io::to_json(sc));
  if (a.render) {
    const auto grid = fovcalib::grid_image(intr.width, intr.height, 40);
    fovcalib::write_ppm(dir / "grid.ppm", grid);
    fovcalib::write_ppm(dir / "grid_distorted.ppm", fovcalib::distort_image(grid, intr));
  }
  out.human() << "wrote " << data.images.size() << " images x " << sc.board.corner_count()
              << " points to " << (dir / "dataset.json").string() << '\n';
  out.emit(json{{"directory", a.out_dir},
                {"images", data.images.size()},
                {"points_per_image", sc.board.corner_count()},
                {"spec", fovcalib::io::to_json(spec)}});
  return 0;
}

// --- curves -----------------------------------------------------------------

struct CurvesArgs {
  double omega = 1.0 / 600.0;
  double r_max = 1200.0;
  int samples = 1000;
  std::string out;
};

int run_curves(const CurvesArgs& a, const Output& out) {
  if (!(a.omega >= 0.0)) throw fovcalib::DomainError("--omega must be non-negative");
  if (!(a.r_max > 0.0)) throw fovcalib::DomainError("--r-max must be positive");
  if (a.samples < 2) throw UsageError("--samples must be >= 2");

  std::ostringstream csv;
  csv << "r_u";
  for (auto m : fovcalib::kAllModels) csv << ',' << fovcalib::to_string(m);
  csv << '\n' << std::setprecision(10);
  // Uniform grid starting at 0 with step r_max / samples.
  for (int i = 0; i < a.samples; ++i) {
    const double r_u = a.r_max * i / a.samples;
    csv << r_u;
    for (auto m : fovcalib::kAllModels) csv << ',' << fovcalib::radial_forward(m, a.omega, r_u);
    csv << '\n';
  }

  if (a.out.empty()) {
    if (out.json_mode) throw UsageError("curves --json requires -o PATH");
    std::cout << csv.str();
    return 0;
  }
  std::ofstream f(a.out);
  if (!f) throw fovcalib::FormatError("cannot write " + a.out);
  f << csv.str();
  out.human() << "wrote " << a.samples << " samples to " << a.out << '\n';
  out.emit(json{{"output", a.out}, {"samples", a.samples}, {"omega", a.omega}, {"r_max", a.r_max}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-shot fisheye calibration from field-of-view specifications"};
  app.require_subcommand(1);
  bool json_mode = false;

  ZeroShotArgs zs;
  auto* zeroshot = app.add_subcommand("zeroshot", "Estimate f and omega from a camera spec");
  zeroshot->add_option("--spec", zs.spec, "Camera spec JSON")->required();
  zeroshot->add_option("--model", zs.model,
                       "perspective|stereographic|equidistance|equisolid|orthographic (default: spec's model)");
  zeroshot->add_option("-o,--output", zs.out, "Write intrinsics JSON here");
  zeroshot->add_flag("--json", json_mode, "Machine-readable output on stdout");

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "RMS reprojection error of intrinsics on a dataset");
  evaluate->add_option("--intrinsics", ev.intrinsics, "Intrinsics JSON")->required();
  evaluate->add_option("--dataset", ev.dataset, "Correspondence dataset JSON")->required();
  evaluate->add_option("--f-gt", ev.f_gt, "Ground-truth focal length for the deviation error");
  evaluate->add_flag("--json", json_mode, "Machine-readable output on stdout");

  RefineArgs rf;
  auto* refine = app.add_subcommand("refine", "Levenberg-Marquardt calibration from an initial guess");
  refine->add_option("--init", rf.init, "Initial intrinsics JSON")->required();
  refine->add_option("--dataset", rf.dataset, "Correspondence dataset JSON")->required();
  refine->add_option("--images", rf.images, "Use only the first K images");
  refine->add_flag("--sweep", rf.sweep, "Single-shot sweep: average generalization / fitting error");
  refine->add_flag("--optimize-principal-point", rf.optimize_pp, "Also refine cx, cy");
  refine->add_option("--max-iters", rf.max_iters, "LM iteration limit")->check(CLI::PositiveNumber);
  refine->add_option("--f-gt", rf.f_gt, "Ground-truth focal length for the deviation error");
  refine->add_option("-o,--output", rf.out, "Write refined intrinsics JSON here");
  refine->add_option("--report", rf.report, "Write the full report JSON here");
  refine->add_flag("--json", json_mode, "Machine-readable output on stdout");

  RectifyArgs rc;
  auto* rectify = app.add_subcommand("rectify", "Undistort a PPM/PGM image into a pinhole view");
  rectify->add_option("--intrinsics", rc.intrinsics, "Intrinsics JSON")->required();
  rectify->add_option("--input", rc.input, "Input PPM (P6) or PGM (P5)")->required();
  rectify->add_option("--output", rc.output, "Output image path")->required();
  rectify->add_flag("--fit-all", rc.fit_all, "Scale so the whole distorted frame stays visible");
  rectify->add_flag("--json", json_mode, "Machine-readable output on stdout");

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset from a scenario file");
  synth->add_option("--scenario", sy.scenario, "Scenario JSON")->required();
  synth->add_option("-o,--output", sy.out_dir, "Output directory")->required();
  synth->add_flag("--render", sy.render, "Also write grid.ppm and grid_distorted.ppm");
  synth->add_flag("--json", json_mode, "Machine-readable output on stdout");

  CurvesArgs cv;
  auto* curves = app.add_subcommand("curves", "CSV of the radial mappings of all projection models");
  curves->add_option("--omega", cv.omega, "Distortion parameter (1/px)");
  curves->add_option("--r-max", cv.r_max, "Largest undistorted radius (px)");
  curves->add_option("--samples", cv.samples, "Number of rows");
  curves->add_option("-o,--output", cv.out, "CSV path (stdout when omitted)");
  curves->add_flag("--json", json_mode, "Machine-readable output on stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  const Output out{json_mode};
  try {
    if (*zeroshot) return run_zeroshot(zs, out);
    if (*evaluate) return run_evaluate(ev, out);
    if (*refine) return run_refine(rf, out);
    if (*rectify) return run_rectify(rc, out);
    if (*synth) return run_synth(sy, out);
    if (*curves) return run_curves(cv, out);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fovcalib::FormatError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fovcalib::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << " (last iterate " << e.last_iterate() << ")\n";
    return kExitDomain;
  } catch (const fovcalib::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const fovcalib::EstimationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitUsage;
}
