// synth-gen: writes a synthetic corpus-JSON file and its ground truth.
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "sequela/ehr/corpus_json.hpp"
#include "sequela/error.hpp"
#include "sequela/synth/generator.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic hormone-exposure EHR corpus with planted risk structure"};
  std::string spec_path, out_path, truth_path;
  bool report = false;
  app.add_option("--spec", spec_path, "RiskSpec JSON file")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_path, "corpus-JSON output path")->required();
  app.add_option("--truth", truth_path, "ground-truth JSON output path");
  app.add_flag("--report", report, "print the ground-truth report to stdout");
  CLI11_PARSE(app, argc, argv);

  try {
    std::ifstream spec_in(spec_path);
    const auto spec = sequela::synth::risk_spec_from_json(nlohmann::json::parse(spec_in));
    const auto generated = sequela::synth::generate_corpus(spec);

    std::ofstream out(out_path, std::ios::binary);
    out << sequela::ehr::serialize_corpus(generated.corpus);
    if (!out) throw std::runtime_error("cannot write " + out_path);

    if (!truth_path.empty()) {
      std::ofstream truth(truth_path, std::ios::binary);
      truth << sequela::synth::to_json(generated.truth).dump();
      if (!truth) throw std::runtime_error("cannot write " + truth_path);
    }
    if (report) {
      std::cout << sequela::synth::to_json(sequela::synth::ground_truth_report(generated.truth)).dump(2) << "\n";
    }
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "synth-gen: bad spec file: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "synth-gen: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
