#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace epay {

/// Root of every exception thrown by the epay libraries.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated precondition: bad modulus, wrong length, non-unit multiplier...
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A sampler gave up after its attempt budget.
class SamplingExhausted : public Error {
 public:
  using Error::Error;
};

/// Ciphertext failed to decrypt, unpad, authenticate or parse.
class ChannelCorrupt : public Error {
 public:
  using Error::Error;
};

/// Operation called out of protocol order.
class StateError : public Error {
 public:
  using Error::Error;
};

/// Enumeration refused because the search space is too large.
class ResourceLimit : public Error {
 public:
  using Error::Error;
};

}  // namespace epay
