#include "zsl/error.hpp"

namespace zsl {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kInput: return "input";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kState: return "state";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kData: return "data";
    case ErrorKind::kDiverged: return "diverged";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

}  // namespace zsl
