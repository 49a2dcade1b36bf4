#ifndef KGLITE_TEST_UTIL_HPP
#define KGLITE_TEST_UTIL_HPP

#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

#include "kglite/dataset.hpp"

namespace kglite::testutil {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("kglite_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name, const std::string& content) const {
        const auto p = path / name;
        std::ofstream out(p);
        out << content;
        return p.string();
    }
    std::string sub(const std::string& name) const { return (path / name).string(); }
};

inline std::string toy_dir() { return std::string(KGLITE_DATA_DIR) + "/toy"; }

inline TripleStore load_toy(bool with_negatives = false) {
    const std::string d = toy_dir();
    if (with_negatives) {
        return load_dataset(d + "/train.txt", d + "/valid.txt", d + "/test.txt",
                            d + "/valid_neg.txt", d + "/test_neg.txt");
    }
    return load_dataset(d + "/train.txt", d + "/valid.txt", d + "/test.txt");
}

}  // namespace kglite::testutil

#endif
