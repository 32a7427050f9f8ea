"""The canonical group zoo."""

from __future__ import annotations

import json
from pathlib import Path

_Q8_TABLE = """\
*,1,-1,i,-i,j,-j,k,-k
1,1,-1,i,-i,j,-j,k,-k
-1,-1,1,-i,i,-j,j,-k,k
i,i,-i,-1,1,k,-k,-j,j
-i,-i,i,1,-1,-k,k,j,-j
j,j,-j,-k,k,-1,1,i,-i
-j,-j,j,k,-k,1,-1,-i,i
k,k,-k,j,-j,-i,i,-1,1
-k,-k,k,-j,j,i,-i,1,-1
"""


def _unit(i: int, n: int) -> list[int]:
    return [int(j == i) for j in range(n)]


ZOO: dict[str, dict] = {
    "c12": {"kind": "cyclic", "params": {"n": 12}, "generators": [1]},
    "c64": {"kind": "cyclic", "params": {"n": 64}, "generators": [1]},
    "c256": {"kind": "cyclic", "params": {"n": 256}, "generators": [1]},
    "z2_4": {"kind": "product_of_cyclics", "params": {"moduli": [2] * 4},
             "generators": [_unit(i, 4) for i in range(4)]},
    "z2_6": {"kind": "product_of_cyclics", "params": {"moduli": [2] * 6},
             "generators": [_unit(i, 6) for i in range(6)]},
    "prism62": {"kind": "product_of_cyclics", "params": {"moduli": [6, 2]},
                "generators": [[1, 0], [0, 1]]},
    "z16xz4": {"kind": "product_of_cyclics", "params": {"moduli": [16, 4]},
               "generators": [[1, 0], [0, 1]]},
    "d16": {"kind": "dihedral", "params": {"n": 8}, "generators": [[1, 0], [0, 1]]},
    "heis3": {"kind": "heisenberg_mod_p", "params": {"p": 3},
              "generators": [[1, 0, 0], [0, 1, 0]]},
    "s4": {"kind": "symmetric_group", "params": {"n": 4}, "generators": ["(1 2)", "(1 2 3 4)"]},
    "q8_table": {"kind": "explicit_table", "params": {"csv": _Q8_TABLE}, "generators": ["i", "j"]},
}


def zoo_names() -> list[str]:
    return list(ZOO)


def zoo_spec(name: str) -> dict:
    return {"name": name, **ZOO[name]}


def emit(out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name in ZOO:
        path = out / f"{name}.json"
        path.write_text(json.dumps(zoo_spec(name), indent=2, sort_keys=True) + "\n")
        paths.append(path)
    return paths
