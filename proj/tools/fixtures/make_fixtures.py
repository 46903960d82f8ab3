#!/usr/bin/env python3
#
#   Copyright 2026 The ponzitrace Authors
#
#   Licensed under the Apache License, Version 2.0 (the "License");
#   you may not use this file except in compliance with the License.
#   You may obtain a copy of the License at
#
#       http://www.apache.org/licenses/LICENSE-2.0
#
#   Unless required by applicable law or agreed to in writing, software
#   distributed under the License is distributed on an "AS IS" BASIS,
#   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#   See the License for the specific language governing permissions and
#   limitations under the License.

"""Writes fixtures/*.hex with metadata headers.

Solidity fixtures are compiled with solcjs 0.4.26 (npm package "solc@0.4.26");
pass its directory with --solc. Code hashes come from pycryptodome's keccak.
"""

import argparse
import json
import subprocess
from pathlib import Path

from Crypto.Hash import keccak

ROOT = Path(__file__).resolve().parents[2]
FIXTURES = ROOT / "fixtures"

SOLIDITY = {
    "scenario1": ("scenario1.sol", "Pyramid", "0x0b230b071008bbb145b5bff27db01c9248f486b9"),
    "scenario2": ("scenario2.sol", "Pledge", "0x10ec03b714a2660581040c1a0329d88e381ca603"),
}

# name -> (hex, description)
ASSEMBLED = {
    # CALLER; PUSH1 0; SSTORE; PUSH1 3
    # loop: JUMPDEST; DUP1; ISZERO; PUSH1 end; JUMPI
    #       CALL(GAS, SLOAD(0), 1, 0, 0, 0, 0); POP; counter -= 1; PUSH1 loop; JUMP
    # end:  JUMPDEST; STOP
    "micro_ponzi": (
        "3360005560035b8015602057600080808060016000545af150600190036006565b00",
        "hand-assembled: CALLER stored to slot 0, loop paying the address in slot 0",
    ),
    # CALLER; PUSH1 0; SSTORE; STOP
    "micro_invest": ("3360005500", "hand-assembled: CALLER stored to slot 0"),
    # CALL(GAS, SLOAD(0), CALLVALUE, 0, 0, 0, 0); STOP
    "micro_reward": ("6000808080346000545af100", "hand-assembled: pays the address in slot 0"),
    # PUSH1 3
    # loop: JUMPDEST; DUP1; ISZERO; PUSH1 out; JUMPI; PUSH1 1; SWAP1; SUB; PUSH1 loop; JUMP
    # out:  JUMPDEST; CALLER; PUSH1 0; SSTORE
    #       CALL(GAS, SLOAD(0), 1, 0, 0, 0, 0); STOP
    "loop_without_call": (
        "60035b8015600f57600190036002565b33600055600080808060016000545af100",
        "hand-assembled: counting loop without CALL, CALL after the loop",
    ),
}


def code_hash(code: bytes) -> str:
    return "0x" + keccak.new(digest_bits=256, data=code).hexdigest()


def compile_solidity(solc_dir: Path, source: Path, contract: str) -> str:
    script = (
        "const solc = require(process.argv[1]);"
        "const src = require('fs').readFileSync(process.argv[2], 'utf8');"
        "const out = solc.compile(src, 1);"
        "const c = out.contracts[':' + process.argv[3]];"
        "if (!c) { console.error(JSON.stringify(out.errors)); process.exit(1); }"
        "process.stdout.write(JSON.stringify({version: solc.version(), code: c.runtimeBytecode}));"
    )
    res = subprocess.run(["node", "-e", script, str(solc_dir), str(source), contract],
                         check=True, capture_output=True, text=True)
    return res.stdout


def write(name: str, code_hex: str, meta: dict) -> None:
    code = bytes.fromhex(code_hex)
    lines = [f"# {k}: {v}" for k, v in meta.items()]
    lines.append(f"# code_hash: {code_hash(code)}")
    body = code.hex()
    lines += [body[i:i + 64] for i in range(0, len(body), 64)]
    (FIXTURES / f"{name}.hex").write_text("\n".join(lines) + "\n")
    print(f"{name}: {len(code)} bytes {code_hash(code)}")


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--solc", type=Path, required=True, help="node_modules/solc of solc@0.4.26")
    ap.add_argument("--date", required=True)
    args = ap.parse_args()

    for name, (src, contract, address) in SOLIDITY.items():
        out = json.loads(compile_solidity(args.solc, FIXTURES / "src" / src, contract))
        write(name, out["code"], {
            "address": address,
            "chain": "ethereum-mainnet",
            "retrieved": args.date,
            "origin": f"reconstruction; runtime code of {contract} in src/{src}, solc {out['version']} optimized",
        })
    for name, (code_hex, what) in ASSEMBLED.items():
        write(name, code_hex, {
            "address": "none",
            "chain": "none",
            "retrieved": args.date,
            "origin": what,
        })


if __name__ == "__main__":
    main()
