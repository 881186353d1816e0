// Writes the shipped synthetic corpus: motion clips, a furnished room and a box object.
#include "motok/formats.hpp"
#include "motok/synthetic.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

int main(int argc, char** argv) {
  CLI::App app("Generate the synthetic motion corpus and sample scenes", "motok-make-corpus");
  std::string out = "data";
  motok::synthetic::MotionCorpusConfig config;
  app.add_option("--out", out, "Output root")->capture_default_str();
  app.add_option("--sequences", config.num_sequences, "Motion clips")->capture_default_str();
  app.add_option("--frames", config.frames, "Frames per clip")->capture_default_str();
  app.add_option("--seed", config.seed, "Generator seed")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  namespace fs = std::filesystem;
  try {
    const fs::path root(out);
    fs::create_directories(root / "synth");
    fs::create_directories(root / "scenes");
    const auto corpus = motok::synthetic::motion_corpus(config);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "clip_%03zu.mseq", i);
      motok::formats::save_motion(root / "synth" / name, corpus[i]);
    }
    motok::formats::save_voxels(root / "scenes" / "room.vox",
                                motok::synthetic::random_box_scene(48, 0.1, 6, config.seed));
    motok::formats::save_points(
        root / "scenes" / "box.pts",
        motok::synthetic::box_surface_points({0.2, 0.15, 0.2}, 171, config.seed));
    motok::formats::save_motion(root / "scenes" / "walk.mseq",
                                motok::synthetic::straight_walk(90, 0.8));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
