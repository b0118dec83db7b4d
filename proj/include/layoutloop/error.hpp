// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace layoutloop
{

/// Base of every error thrown by the library.
class Error: public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed XML or markup that cannot be tokenized.
class ParseError: public Error
{
  public:
    using Error::Error;
};

/// Well-formed input that violates the document schema (e.g. missing canvas size).
class SchemaError: public Error
{
  public:
    using Error::Error;
};

class IoError: public Error
{
  public:
    using Error::Error;
};

class ConfigError: public Error
{
  public:
    using Error::Error;
};

/// Caller-supplied data that violates an operation's precondition.
class InputError: public Error
{
  public:
    using Error::Error;
};

class ExternalToolError: public Error
{
  public:
    using Error::Error;
};

class TimeoutError: public Error
{
  public:
    using Error::Error;
};

class TrainingError: public Error
{
  public:
    using Error::Error;
};

/// Tag structure violation in a trajectory transcript.
class FormatError: public Error
{
  public:
    using Error::Error;
};

} // namespace layoutloop
