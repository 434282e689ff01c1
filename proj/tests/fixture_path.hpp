#pragma once

#include <string>

inline std::string fixture(const std::string& name) {
    return std::string(RORSCAN_FIXTURE_DIR) + "/" + name;
}
