#include "mlai/lossrange/trajectory_io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "mlai/tensor/image_io.hpp"

namespace mlai {

using nlohmann::json;

RangeFooter make_footer(const RangeAnalysis& analysis, const RangeConfig& cfg) {
  return {analysis.fit.k_l, analysis.fit.k_r, cfg.K, cfg.rho, analysis.range,
          analysis.set.iterations()};
}

namespace {

void write_footer(std::ostream& out, const RangeFooter& f) {
  const json j = {{"type", "range"},
                  {"k_l", f.k_l},
                  {"k_r", f.k_r},
                  {"K", f.K},
                  {"rho", f.rho},
                  {"v_left", f.range.v_left},
                  {"v_right", f.range.v_right},
                  {"n_left", f.range.n_left},
                  {"n_right", f.range.n_right},
                  {"selected_iterations", f.selected_iterations}};
  out << j.dump() << '\n';
}

}  // namespace

void write_trajectory_jsonl(std::ostream& out, const Trajectory& traj,
                            const std::optional<RangeFooter>& footer) {
  for (const auto& c : traj.candidates) {
    out << json{{"iteration", c.iteration}, {"loss", c.loss}}.dump() << '\n';
  }
  if (footer) write_footer(out, *footer);
}

void write_trajectory_jsonl(std::ostream& out, std::span<const double> losses,
                            const std::optional<RangeFooter>& footer) {
  for (std::size_t i = 0; i < losses.size(); ++i) {
    out << json{{"iteration", i}, {"loss", losses[i]}}.dump() << '\n';
  }
  if (footer) write_footer(out, *footer);
}

void save_trajectory_jsonl(const std::filesystem::path& path, const Trajectory& traj,
                           const std::optional<RangeFooter>& footer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_trajectory_jsonl(out, traj, footer);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

TrajectoryRecord read_trajectory_jsonl(std::istream& in) {
  TrajectoryRecord rec;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      if (rec.footer) throw std::runtime_error("record after range footer");
      if (j.contains("type")) {
        if (j.at("type") != "range") throw std::runtime_error("unknown record type");
        RangeFooter f;
        f.k_l = j.at("k_l").get<double>();
        f.k_r = j.at("k_r").get<double>();
        f.K = j.at("K").get<double>();
        f.rho = j.at("rho").get<std::size_t>();
        f.range.v_left = j.at("v_left").get<std::size_t>();
        f.range.v_right = j.at("v_right").get<std::size_t>();
        f.range.n_left = j.at("n_left").get<std::size_t>();
        f.range.n_right = j.at("n_right").get<std::size_t>();
        f.selected_iterations = j.at("selected_iterations").get<std::vector<std::size_t>>();
        rec.footer = std::move(f);
      } else {
        const auto it = j.at("iteration").get<std::size_t>();
        if (it != rec.iterations.size()) throw std::runtime_error("iterations out of order");
        rec.iterations.push_back(it);
        rec.losses.push_back(j.at("loss").get<double>());
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("trajectory line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rec;
}

TrajectoryRecord load_trajectory_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_trajectory_jsonl(in);
}

std::vector<std::filesystem::path> save_candidate_images(const Trajectory& traj,
                                                         const std::filesystem::path& dir,
                                                         const std::string& stem) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> out;
  for (const auto& c : traj.candidates) {
    char name[32];
    std::snprintf(name, sizeof name, "_iter%04zu.mimg", c.iteration);
    auto p = dir / (stem + name);
    save_raw(c.image, p);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace mlai
