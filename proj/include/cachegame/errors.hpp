#pragma once

#include <stdexcept>
#include <string>

namespace cachegame {

// Bad input: malformed instance, out-of-range parameter, invalid placement.
// The CLI maps these to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Solver or numerical breakdown. The CLI maps these to exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CACHEGAME_DEFINE_ERROR(Name, Base)        \
  class Name : public Base {                      \
   public:                                        \
    explicit Name(const std::string& what)        \
        : Base(std::string(#Name ": ") + what) {} \
  };

CACHEGAME_DEFINE_ERROR(InvalidInstance, InputError)
CACHEGAME_DEFINE_ERROR(RowNotStochastic, InputError)
CACHEGAME_DEFINE_ERROR(BetaOutOfRange, InputError)
CACHEGAME_DEFINE_ERROR(CapacityOutOfRange, InputError)
CACHEGAME_DEFINE_ERROR(InvalidPlacement, InputError)
CACHEGAME_DEFINE_ERROR(NonIntegralChunkBudget, InputError)
CACHEGAME_DEFINE_ERROR(MisalignedPlacement, InputError)
CACHEGAME_DEFINE_ERROR(SupportTooLarge, InputError)
CACHEGAME_DEFINE_ERROR(TooLarge, InputError)

CACHEGAME_DEFINE_ERROR(NumericalFailure, NumericError)
CACHEGAME_DEFINE_ERROR(SolverFailure, NumericError)
CACHEGAME_DEFINE_ERROR(DecodingFailure, NumericError)

#undef CACHEGAME_DEFINE_ERROR

}  // namespace cachegame
