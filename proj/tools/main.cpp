#include <iostream>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include "skilldisc/cli.hpp"

int main(int argc, char** argv) {
#ifdef __GLIBC__
  // Batch matrices are freed and reallocated every update; stop glibc from
  // returning that memory to the kernel each time.
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  mallopt(M_MMAP_THRESHOLD, 1 << 25);
#endif
  return skilldisc::cli::run(argc, argv, std::cout, std::cerr);
}
