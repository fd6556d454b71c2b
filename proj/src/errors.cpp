#include "blaspe/errors.hpp"

namespace blaspe {

const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::usage: return "usage";
    case ErrorCategory::dimension: return "dimension";
    case ErrorCategory::partition: return "partition";
    case ErrorCategory::shape: return "shape";
    case ErrorCategory::capacity: return "capacity";
    case ErrorCategory::instruction_memory: return "instruction-memory";
    case ErrorCategory::address_fault: return "address-fault";
    case ErrorCategory::deadlock: return "deadlock";
    case ErrorCategory::graph: return "graph";
    case ErrorCategory::undefined_metric: return "undefined-metric";
    case ErrorCategory::config: return "config";
    case ErrorCategory::numerical_mismatch: return "numerical-mismatch";
    case ErrorCategory::internal: return "internal";
  }
  return "internal";
}

}  // namespace blaspe
