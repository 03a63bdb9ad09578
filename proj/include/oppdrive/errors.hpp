// Copyright 2026 The oppdrive Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OPPDRIVE__ERRORS_HPP_
#define OPPDRIVE__ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace oppdrive
{

class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Invalid EnvConfig / run configuration.
class ConfigError : public Error
{
public:
  using Error::Error;
};

// reset() could not place vehicles without overlap.
class SpawnError : public Error
{
public:
  using Error::Error;
};

// step() on a world that already ended.
class LifecycleError : public Error
{
public:
  using Error::Error;
};

class InputError : public Error
{
public:
  using Error::Error;
};

// Backend contract violated (modality mismatch, dim mismatch).
class InterfaceError : public Error
{
public:
  using Error::Error;
};

// Remote backend unreachable or timed out after retries.
class AvailabilityError : public Error
{
public:
  using Error::Error;
};

// Malformed request or response on the embedding wire protocol.
class ProtocolError : public Error
{
public:
  using Error::Error;
};

class NumericalError : public Error
{
public:
  using Error::Error;
};

// Checkpoint / run-directory I/O.
class PersistenceError : public Error
{
public:
  using Error::Error;
};

class UsageError : public Error
{
public:
  using Error::Error;
};

}  // namespace oppdrive

#endif  // OPPDRIVE__ERRORS_HPP_
