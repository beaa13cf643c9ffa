#pragma once

#include <string>
#include <vector>

// positional arguments passed after the doctest flags (binary paths, data dirs)
extern std::vector<std::string> g_test_args;
