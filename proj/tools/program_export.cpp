// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

// Writes the builder recipes as BMv2 JSON: program_export [DIR] (default: programs).

#include <filesystem>
#include <fstream>
#include <iostream>

#include "quip/bmv2/loader.hpp"
#include "quip/protocols/programs.hpp"

int main(int argc, char **argv) {
  namespace fs = std::filesystem;
  const fs::path dir = argc > 1 ? fs::path(argv[1]) : fs::path("programs");
  try {
    fs::create_directories(dir);
    for (auto role : {quip::v1q::Role::kEndNode, quip::v1q::Role::kRouter, quip::v1q::Role::kHub}) {
      const fs::path path = dir / quip::protocols::program_file_name(role);
      std::ofstream out(path, std::ios::binary);
      out << quip::bmv2::serialize_program(quip::protocols::build_program(role));
      if (!out) {
        std::cerr << "cannot write " << path << "\n";
        return 3;
      }
      std::cout << path.string() << "\n";
    }
  } catch (const std::exception &e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
