#include "coiest/error.hpp"

namespace coiest {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
      return 2;
    case ErrorKind::kData:
      return 3;
    case ErrorKind::kNoEvent:
      return 4;
    case ErrorKind::kSolver:
      return 5;
    case ErrorKind::kInstability:
      return 6;
  }
  return 1;
}

}  // namespace coiest
