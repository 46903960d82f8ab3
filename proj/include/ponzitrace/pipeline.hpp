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

#include <ponzitrace/bytecode.hpp>
#include <ponzitrace/cfg.hpp>
#include <ponzitrace/detect.hpp>
#include <ponzitrace/paths.hpp>

namespace ponzitrace {

struct Analysis {
    cfg::Cfg cfg;
    paths::Enumeration enumeration;
    std::vector<paths::AggregatedPath> aggregates;
    detect::AnalysisReport report;
};

/**
 * disassemble, partition, build cfg, enumerate, aggregate, evaluate C1/C2
 * and assemble the report. contract.code_hash is filled in when empty.
 */
Analysis analyze(const bytecode::Bytecode& code, detect::ContractInfo contract, const paths::Bounds& bounds = {});

}  // namespace ponzitrace
