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

"""Keccak-256 vectors from pycryptodome, frozen into tests/data."""

import random
from pathlib import Path

from Crypto.Hash import keccak

DATA = Path(__file__).resolve().parents[2] / "tests" / "data"


def digest(data: bytes) -> str:
    return keccak.new(digest_bits=256, data=data).hexdigest()


def main() -> None:
    rng = random.Random(20261016)
    lines = []
    # lengths straddle the 136-byte rate
    for n in [0, 1, 31, 32, 33, 135, 136, 137, 200, 271, 272, 273, 1000]:
        data = bytes(rng.randrange(256) for _ in range(n))
        lines.append(f"{data.hex() or '-'} {digest(data)}")
    (DATA / "keccak_vectors.txt").write_text("\n".join(lines) + "\n")

    rows = [f"{n} {int(digest(n.to_bytes(32, 'big')), 16)}" for n in range(8)]
    (DATA / "array_bases.txt").write_text("\n".join(rows) + "\n")


if __name__ == "__main__":
    main()
