#!/usr/bin/env python3
"""Convert `<name>_feat.npy`, `<name>_adj.npy` and `<name>_label.npy` files
into the layout the bundled configs expect:

    data/<name>/edges.txt     one "i j" pair per undirected edge, i < j
    data/<name>/features.bin  u32 N, u32 d, then N*d f64, all little-endian
    data/<name>/labels.txt    one class id per line

Usage: prepare_datasets.py SRC_DIR [--out data] [--names cora bat ...]
"""

import argparse
import struct
import sys
from pathlib import Path

import numpy as np

NAMES = ["cora", "citeseer", "amap", "bat", "eat", "uat"]


def convert(src: Path, out: Path, name: str) -> bool:
    files = {k: src / f"{name}_{k}.npy" for k in ("feat", "adj", "label")}
    missing = [str(p) for p in files.values() if not p.exists()]
    if missing:
        print(f"skip {name}: missing {', '.join(missing)}", file=sys.stderr)
        return False
    x = np.load(files["feat"]).astype("<f8")
    adj = np.load(files["adj"])
    y = np.load(files["label"]).astype(int).ravel()
    if hasattr(adj, "tocoo"):
        adj = adj.toarray()
    n = x.shape[0]
    assert adj.shape == (n, n) and y.shape == (n,), f"{name}: inconsistent shapes"

    sym = (adj != 0) | (adj.T != 0)
    np.fill_diagonal(sym, False)
    rows, cols = np.nonzero(np.triu(sym, k=1))

    dst = out / name
    dst.mkdir(parents=True, exist_ok=True)
    with open(dst / "edges.txt", "w") as f:
        for i, j in zip(rows, cols):
            f.write(f"{i} {j}\n")
    with open(dst / "features.bin", "wb") as f:
        f.write(struct.pack("<II", n, x.shape[1]))
        f.write(np.ascontiguousarray(x).tobytes())
    np.savetxt(dst / "labels.txt", y, fmt="%d")
    print(f"{name}: N={n} m={len(rows)} d={x.shape[1]} C={len(np.unique(y))}")
    return True


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("src", type=Path)
    p.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data")
    p.add_argument("--names", nargs="+", default=NAMES)
    args = p.parse_args()
    done = [convert(args.src, args.out, n) for n in args.names]
    return 0 if any(done) else 1


if __name__ == "__main__":
    sys.exit(main())
