#include "dwb/experiments.hpp"

int main(int argc, char** argv) {
  return dwb::experiments::cli_main(argc, argv);
}
