#pragma once

#include <stdexcept>
#include <string>

namespace pdms {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define PDMS_DECLARE_ERROR(Name)                                               \
  class Name : public Error {                                                  \
  public:                                                                      \
    explicit Name(const std::string &what) : Error(#Name ": " + what) {}       \
  }

PDMS_DECLARE_ERROR(ParseError);
PDMS_DECLARE_ERROR(InvalidRule);
PDMS_DECLARE_ERROR(NotRelevant);
PDMS_DECLARE_ERROR(ConflictingBindings);
PDMS_DECLARE_ERROR(CounterUnderflow);
PDMS_DECLARE_ERROR(SelfFriendship);
PDMS_DECLARE_ERROR(UnknownTopology);
PDMS_DECLARE_ERROR(UnmatchedReply);
PDMS_DECLARE_ERROR(DeadPeer);
PDMS_DECLARE_ERROR(CorruptSnapshot);
PDMS_DECLARE_ERROR(MalformedScenario);
PDMS_DECLARE_ERROR(InfeasibleSpec);

#undef PDMS_DECLARE_ERROR

} // namespace pdms
