/*
   Copyright 2026 The ponzitrace Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <string>

#include <json.hpp>

#include <ponzitrace/cfg.hpp>
#include <ponzitrace/detect.hpp>

namespace ponzitrace::report {

using Json = nlohmann::json;

//! Integers at or above 2^53 become decimal strings.
Json number(std::uint64_t n);

Json to_json(const detect::AnalysisReport& report);

//! Instruction listing grouped by block:
//! {blocks: [{id, start_offset, instructions: [{offset, mnemonic, immediate_hex?}]}]}.
Json opcodes_json(const cfg::Cfg& cfg);

//! Stable text form: sorted keys, two-space indent, trailing newline.
std::string dump(const Json& doc);

std::string serialize(const detect::AnalysisReport& report);

}  // namespace ponzitrace::report
