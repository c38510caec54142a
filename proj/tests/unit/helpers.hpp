#pragma once

#include <string>

inline std::string src_path(const std::string& rel) {
    return std::string(WOC_SOURCE_DIR) + "/" + rel;
}
