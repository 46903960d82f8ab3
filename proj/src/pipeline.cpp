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

#include <ponzitrace/pipeline.hpp>

#include <ponzitrace/error.hpp>
#include <ponzitrace/word.hpp>

namespace ponzitrace {

Analysis analyze(const bytecode::Bytecode& code, detect::ContractInfo contract, const paths::Bounds& bounds) {
    if (code.bytes.empty()) throw Error{ErrorCode::kEmptyCode, "pipeline", "no bytecode to analyze"};
    if (bounds.max_paths == 0 || bounds.max_blocks_per_path == 0) {
        throw Error{ErrorCode::kInvalidConfig, "paths", "bounds must be positive"};
    }
    if (contract.code_hash.empty()) contract.code_hash = "0x" + bytes_to_hex(keccak256(code.bytes));

    Analysis a;
    a.cfg = cfg::build_cfg_from_code(code);
    a.enumeration = paths::enumerate_paths(a.cfg, bounds);
    a.aggregates = paths::aggregate_paths(a.enumeration.paths);
    const auto c1 = detect::evaluate_c1(a.aggregates);
    const auto c2 = detect::evaluate_c2(a.aggregates);

    std::vector<std::string> diagnostics = a.cfg.diagnostics;
    for (const auto& u : a.cfg.unresolved_jumps) {
        diagnostics.push_back("unresolved jump in block " + std::to_string(u.block) + ": " + u.reason);
    }
    for (const auto& [from, to] : a.cfg.irreducible_edges) {
        diagnostics.push_back("irreducible edge " + std::to_string(from) + "->" + std::to_string(to) +
                              " excluded from loop detection");
    }
    diagnostics.insert(diagnostics.end(), a.enumeration.diagnostics.begin(), a.enumeration.diagnostics.end());
    std::size_t flagless = 0;
    for (const auto& p : a.enumeration.paths) flagless += (!p.is_investing && !p.is_rewarding) ? 1 : 0;
    if (flagless > 0) {
        diagnostics.push_back(std::to_string(flagless) + " paths neither investing nor rewarding (not aggregated)");
    }
    a.report = detect::build_report(contract, a.cfg, a.aggregates, c1, c2, std::move(diagnostics), bounds,
                                    a.enumeration.stats);
    return a;
}

}  // namespace ponzitrace
