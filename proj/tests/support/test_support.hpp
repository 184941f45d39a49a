#pragma once

#include "archon/util.hpp"

#include <cstdlib>
#include <string>

namespace archon::testing {

inline fs::path fixtures_dir() { return fs::path(ARCHON_FIXTURES_DIR); }

/// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        std::string tmpl = (fs::temp_directory_path() / "archon-test-XXXXXX").string();
        if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& rel) const { return path_ / rel; }

    void write(const std::string& rel, const std::string& content) const { write_file_atomic(path_ / rel, content); }

private:
    fs::path path_;
};

}  // namespace archon::testing
