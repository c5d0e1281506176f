#pragma once

#include <cmath>

// Absolute-tolerance comparison; doctest's Approx is relative-only.
#define CHECK_NEAR(a, b, tol) CHECK(std::abs((a) - (b)) <= (tol))
#define REQUIRE_NEAR(a, b, tol) REQUIRE(std::abs((a) - (b)) <= (tol))
