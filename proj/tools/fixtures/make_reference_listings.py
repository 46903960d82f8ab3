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

"""Freezes pyevmasm output for the fixture corpus and its opcode table.

tests/data/<fixture>.ref.txt: "<offset> <mnemonic> [<immediate hex>]"
tests/data/opcodes.ref.txt:   "<byte hex> <mnemonic> <pops> <pushes> <immediate bytes>"
"""

from pathlib import Path

import pyevmasm
from pyevmasm import instruction_tables

ROOT = Path(__file__).resolve().parents[2]
FORK = "istanbul"


def fixture_code(path: Path) -> bytes:
    body = "".join(line.strip() for line in path.read_text().splitlines() if not line.startswith("#"))
    return bytes.fromhex(body)


def main() -> None:
    out_dir = ROOT / "tests" / "data"
    out_dir.mkdir(parents=True, exist_ok=True)
    for fx in sorted((ROOT / "fixtures").glob("*.hex")):
        lines = []
        for ins in pyevmasm.disassemble_all(fixture_code(fx), fork=FORK):
            line = f"{ins.pc} {ins.name}"
            if ins.has_operand:
                line += " " + format(ins.operand, "0{}x".format(2 * ins.operand_size))
            lines.append(line)
        (out_dir / f"{fx.stem}.ref.txt").write_text("\n".join(lines) + "\n")
        print(fx.stem, len(lines))

    table = instruction_tables[FORK]
    rows = []
    for byte in range(256):
        try:
            ins = table[byte]
        except KeyError:
            continue
        rows.append(f"{byte:02x} {ins.name} {ins.pops} {ins.pushes} {ins.operand_size}")
    (out_dir / "opcodes.ref.txt").write_text("\n".join(rows) + "\n")
    print("opcodes", len(rows))


if __name__ == "__main__":
    main()
