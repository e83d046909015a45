#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "tain/log.hpp"
#include "tain/runtime.hpp"

int main(int argc, char** argv) {
  tain::tune_allocator();
  // Library warnings are expected in several tests; keep the output readable.
  tain::set_log_sink([](tain::LogLevel, std::string_view) {});
  doctest::Context ctx(argc, argv);
  return ctx.run();
}
