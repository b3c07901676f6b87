/*
 * Copyright 2026 The ADC Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Test data generator for the command-line checks.
//   adc_fixture corpus <taxonomy.json> <dir>
//   adc_fixture features <manifest> <taxonomy.json> <out.adce> [probs.adcp] [truth.csv]
#include <iostream>

#include "fixture_data.hpp"

int main(int argc, char** argv) {
  using namespace adc;
  try {
    const std::vector<std::string> args(argv + 1, argv + argc);
    if (args.size() == 3 && args[0] == "corpus") {
      test::write_corpus(load_taxonomy(args[1]), args[2]);
      return 0;
    }
    if (args.size() >= 4 && args[0] == "features") {
      const auto spec = load_taxonomy(args[2]);
      test::write_features(load_manifest(args[1]), spec.classes.size(), args[3], 0.1, 5,
                           args.size() > 4 ? args[4] : "", args.size() > 5 ? args[5] : "");
      return 0;
    }
    std::cerr << "usage: adc_fixture corpus <taxonomy> <dir> | features <manifest> <taxonomy> <out> [probs] [truth]\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "adc_fixture: " << e.what() << "\n";
    return 1;
  }
}
