// Copyright 2026 The semfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#if defined(__unix__) || defined(__APPLE__)
#include <sys/resource.h>
#endif

#include "semfuse/io/embeddings.hpp"
#include "semfuse/io/manifest.hpp"
#include "semfuse/io/raster.hpp"
#include "semfuse/render.hpp"
#include "semfuse/semantic_map.hpp"

namespace semfuse {

struct FrameTiming {
  double preprocess_ms = 0.0;  // load and back-project
  double integrate_ms = 0.0;
  double visualize_ms = 0.0;  // render dumps, 0 on frames without one
  std::size_t points = 0;
  std::size_t bytes = 0;  // grid bytes_estimate after the frame

  [[nodiscard]] double total_ms() const { return preprocess_ms + integrate_ms + visualize_ms; }
};

struct BenchReport {
  std::string mode;
  std::size_t threads = 1;
  std::vector<FrameTiming> frames;
  IntegrationReport integration;
  MemoryStats final_stats;
  std::size_t peak_bytes = 0;
  std::size_t peak_rss_bytes = 0;  // 0 when the platform does not report it
  std::uint64_t content_hash = 0;

  [[nodiscard]] double mean_total_ms() const {
    if (frames.empty()) return 0.0;
    double s = 0.0;
    for (const auto& f : frames) s += f.total_ms();
    return s / static_cast<double>(frames.size());
  }

  [[nodiscard]] double fps() const {
    const double ms = mean_total_ms();
    return ms > 0.0 ? 1000.0 / ms : 0.0;
  }
};

struct BenchOptions {
  std::size_t threads = 1;
  std::uint32_t stride = 0;  // 0 keeps the manifest stride
  std::size_t render_every = 0;
  std::filesystem::path render_dir;
  RenderMode render_mode = RenderMode::semantic;
};

struct BenchResult {
  SemanticMap map;
  BenchReport report;
};

[[nodiscard]] inline std::size_t peak_rss_bytes() {
#if defined(__unix__) || defined(__APPLE__)
  rusage usage{};
  if (getrusage(RUSAGE_SELF, &usage) == 0) {
#if defined(__APPLE__)
    return static_cast<std::size_t>(usage.ru_maxrss);
#else
    return static_cast<std::size_t>(usage.ru_maxrss) * 1024;
#endif
  }
#endif
  return 0;
}

/**
 * @brief Integrates a whole manifest sequence, timing the preprocess,
 * integrate and visualize stages of every frame. With render_every N, every
 * Nth frame is rendered from its own pose and written as PPM when render_dir
 * is set.
 */
[[nodiscard]] inline BenchResult run_benchmark(const io::SequenceManifest& m, const BenchOptions& opt = {}) {
  using Clock = std::chrono::steady_clock;
  auto ms_since = [](Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  };
  io::validate_manifest(m);
  const auto poses = io::load_sequence_poses(m);
  const std::uint32_t stride = opt.stride > 0 ? opt.stride : m.stride;
  std::optional<EmbeddingSet> embeddings;
  if (!m.embeddings.empty()) embeddings = io::load_embeddings(m.embeddings);
  std::optional<io::Palette> palette;
  if (!m.palette.empty()) palette = io::load_palette(m.palette);
  if (opt.render_every > 0 && !opt.render_dir.empty()) std::filesystem::create_directories(opt.render_dir);

  BenchResult out{SemanticMap(m.map), {}};
  BenchReport& rep = out.report;
  rep.mode = to_string(m.map.mode);
  rep.threads = std::max<std::size_t>(opt.threads, 1);
  for (std::size_t i = 0; i < m.frames.size(); ++i) {
    FrameTiming ft;
    auto t0 = Clock::now();
    const Frame frame = io::load_sequence_frame(m, i, poses[i], stride);
    ft.preprocess_ms = ms_since(t0);
    t0 = Clock::now();
    rep.integration += out.map.integrate(frame, rep.threads);
    ft.integrate_ms = ms_since(t0);
    ft.points = frame.size();
    if (opt.render_every > 0 && i % opt.render_every == 0) {
      t0 = Clock::now();
      RenderCamera cam;
      cam.pose = poses[i];
      if (m.camera) {
        cam.intrinsics = *m.camera;
      } else {
        cam.intrinsics.width = 160;
        cam.intrinsics.height = 120;
        cam.intrinsics.fx = cam.intrinsics.fy = 131.25;
        cam.intrinsics.cx = 79.5;
        cam.intrinsics.cy = 59.5;
      }
      cam.far = m.map.fusion.max_range;
      const io::Raster img = render(out.map, cam, opt.render_mode, {0.5, rep.threads},
                                    embeddings ? &*embeddings : nullptr, palette ? &*palette : nullptr);
      if (!opt.render_dir.empty()) {
        char name[40];
        std::snprintf(name, sizeof(name), "render_%06zu.ppm", i);
        io::save_ppm(opt.render_dir / name, to_rgb(img));
      }
      ft.visualize_ms = ms_since(t0);
    }
    ft.bytes = out.map.memory_stats().bytes_estimate;
    rep.peak_bytes = std::max(rep.peak_bytes, ft.bytes);
    rep.frames.push_back(ft);
  }
  rep.final_stats = out.map.memory_stats();
  rep.peak_bytes = std::max(rep.peak_bytes, rep.final_stats.bytes_estimate);
  rep.peak_rss_bytes = peak_rss_bytes();
  rep.content_hash = out.map.content_hash();
  return out;
}

/// Flat key=value report.
inline void write_report(std::ostream& os, const BenchReport& r) {
  auto mean = [&](auto field) {
    if (r.frames.empty()) return 0.0;
    double s = 0.0;
    for (const auto& f : r.frames) s += field(f);
    return s / static_cast<double>(r.frames.size());
  };
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(r.content_hash));
  os << "mode=" << r.mode << "\n"
     << "threads=" << r.threads << "\n"
     << "frames=" << r.frames.size() << "\n"
     << "points=" << r.integration.points << "\n"
     << "skipped_nonfinite=" << r.integration.skipped_nonfinite << "\n"
     << "dropped_range=" << r.integration.dropped_range << "\n"
     << "degenerate_rays=" << r.integration.degenerate << "\n"
     << "dropped_features=" << r.integration.dropped_features << "\n"
     << "voxel_updates=" << r.integration.touched_voxels << "\n"
     << "mean_preprocess_ms=" << mean([](const FrameTiming& f) { return f.preprocess_ms; }) << "\n"
     << "mean_integrate_ms=" << mean([](const FrameTiming& f) { return f.integrate_ms; }) << "\n"
     << "mean_visualize_ms=" << mean([](const FrameTiming& f) { return f.visualize_ms; }) << "\n"
     << "mean_total_ms=" << r.mean_total_ms() << "\n"
     << "fps=" << r.fps() << "\n"
     << "active_voxels=" << r.final_stats.active_voxels << "\n"
     << "leaf_nodes=" << r.final_stats.leaf_count << "\n"
     << "internal_nodes=" << r.final_stats.internal_count << "\n"
     << "final_bytes=" << r.final_stats.bytes_estimate << "\n"
     << "peak_bytes=" << r.peak_bytes << "\n"
     << "peak_rss_bytes=" << r.peak_rss_bytes << "\n"
     << "content_hash=" << hash << "\n";
}

/// Per-frame CSV: frame,points,preprocess_ms,integrate_ms,visualize_ms,bytes.
inline void write_timings_csv(std::ostream& os, const BenchReport& r) {
  os << "frame,points,preprocess_ms,integrate_ms,visualize_ms,bytes\n";
  for (std::size_t i = 0; i < r.frames.size(); ++i) {
    const auto& f = r.frames[i];
    os << i << "," << f.points << "," << f.preprocess_ms << "," << f.integrate_ms << "," << f.visualize_ms << ","
       << f.bytes << "\n";
  }
}

[[nodiscard]] inline std::vector<FrameTiming> read_timings_csv(std::istream& is, const std::string& source = "csv") {
  std::vector<FrameTiming> out;
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (number == 1 || line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    std::size_t index = 0;
    FrameTiming f;
    if (!(ss >> index >> f.points >> f.preprocess_ms >> f.integrate_ms >> f.visualize_ms >> f.bytes)) {
      throw std::invalid_argument(source + ":" + std::to_string(number) + ": expected 6 numeric fields");
    }
    out.push_back(f);
  }
  return out;
}

/// Stacked per-frame bars (preprocess blue, integrate orange, visualize
/// green) on a white canvas.
[[nodiscard]] inline io::Raster plot_timings(const std::vector<FrameTiming>& frames, std::uint32_t height = 240) {
  constexpr std::uint32_t kMargin = 10;
  const std::uint32_t bar = frames.size() > 200 ? 1 : (frames.size() > 80 ? 2 : 4);
  const auto width = static_cast<std::uint32_t>(std::max<std::size_t>(160, 2 * kMargin + frames.size() * bar));
  io::Raster img = io::Raster::make(width, height, 3, io::PixelType::u8);
  std::fill(img.u8.begin(), img.u8.end(), std::uint8_t{255});
  auto put = [&](std::uint32_t x, std::uint32_t y, io::Rgb c) {
    if (x >= width || y >= height) return;
    for (std::uint32_t ch = 0; ch < 3; ++ch) img.u8[img.index(x, y, ch)] = c[ch];
  };
  const std::uint32_t plot_h = height - 2 * kMargin;
  const std::uint32_t base = height - kMargin;
  double hi = 0.0;
  for (const auto& f : frames) hi = std::max(hi, f.total_ms());
  const io::Rgb colors[3] = {{31, 119, 180}, {255, 127, 14}, {44, 160, 44}};
  for (std::size_t i = 0; i < frames.size() && hi > 0.0; ++i) {
    const double parts[3] = {frames[i].preprocess_ms, frames[i].integrate_ms, frames[i].visualize_ms};
    double acc = 0.0;
    for (int s = 0; s < 3; ++s) {
      const auto y0 = static_cast<std::uint32_t>(std::lround(acc / hi * plot_h));
      acc += parts[s];
      const auto y1 = static_cast<std::uint32_t>(std::lround(acc / hi * plot_h));
      for (std::uint32_t y = y0; y < y1; ++y) {
        for (std::uint32_t x = 0; x < bar; ++x) put(kMargin + static_cast<std::uint32_t>(i) * bar + x, base - 1 - y, colors[s]);
      }
    }
  }
  for (std::uint32_t x = kMargin - 1; x < width - kMargin / 2; ++x) put(x, base, {0, 0, 0});
  for (std::uint32_t y = kMargin / 2; y <= base; ++y) put(kMargin - 1, y, {0, 0, 0});
  return img;
}

}  // namespace semfuse
