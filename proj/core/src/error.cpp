#include "faultsev/error.hpp"

namespace faultsev {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::shape: return "shape error";
    case ErrorKind::contract: return "contract error";
    case ErrorKind::config: return "config error";
    case ErrorKind::data: return "data error";
    case ErrorKind::divergence: return "training divergence";
  }
  return "error";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return 1;
    case ErrorKind::data: return 2;
    case ErrorKind::divergence: return 3;
    // Shape and contract violations surface through bad configuration
    // (mismatched node counts, windows longer than a segment).
    case ErrorKind::shape:
    case ErrorKind::contract: return 1;
  }
  return 1;
}

}  // namespace faultsev
