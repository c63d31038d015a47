/*
 * Copyright (c) the dnshh authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace dnshh {

//! Invalid configuration value (precision out of range, bad weights, ...).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

//! Malformed qname or record; the message carries the offending input.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

//! File missing or unreadable.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

//! Corrupt or version-mismatched serialized state.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

//! Sketches with different precision or hash seed cannot be merged.
struct IncompatibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace dnshh
