#pragma once

#include <stdexcept>
#include <string>

namespace blaspe {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorCategory {
  usage,
  dimension,
  partition,
  shape,
  capacity,
  instruction_memory,
  address_fault,
  deadlock,
  graph,
  undefined_metric,
  config,
  numerical_mismatch,
  internal,
};

const char* category_name(ErrorCategory c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}
  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

#define BLASPE_DEFINE_ERROR(Name, cat)                              \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& m) : Error(ErrorCategory::cat, m) {} \
  };

BLASPE_DEFINE_ERROR(DimensionError, dimension)
BLASPE_DEFINE_ERROR(PartitionError, partition)
BLASPE_DEFINE_ERROR(ShapeError, shape)
BLASPE_DEFINE_ERROR(CapacityError, capacity)
BLASPE_DEFINE_ERROR(InstructionMemoryError, instruction_memory)
BLASPE_DEFINE_ERROR(AddressFault, address_fault)
BLASPE_DEFINE_ERROR(DeadlockError, deadlock)
BLASPE_DEFINE_ERROR(GraphError, graph)
BLASPE_DEFINE_ERROR(UndefinedMetric, undefined_metric)
BLASPE_DEFINE_ERROR(ConfigError, config)
BLASPE_DEFINE_ERROR(NumericalMismatch, numerical_mismatch)

#undef BLASPE_DEFINE_ERROR

}  // namespace blaspe
