#include <gtest/gtest.h>
#include "uct/gmf.hpp"
TEST(Smoke, Compiles) { SUCCEED(); }
