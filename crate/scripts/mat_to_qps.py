#!/usr/bin/env python3
"""Convert Maros-Meszaros instances stored as .mat files into free-form QPS.

The .mat layout holds  min 1/2 x'Px + c'x  s.t.  Ax = b,  h_l <= Gx <= h_u,
x_l <= x <= x_u.  Equality rows become E rows, G rows become G/L rows (with a
RANGES entry when both sides are finite), and variable bounds go to BOUNDS.
The objective constant is not stored in the .mat files and is therefore lost.

usage: mat_to_qps.py OUT_DIR FILE.mat [FILE.mat ...]
"""
import os
import sys

import numpy as np
import scipy.io as sio
import scipy.sparse as sp


def fmt(v):
    return repr(float(v))


def convert(path, out_dir):
    name = os.path.splitext(os.path.basename(path))[0]
    d = sio.loadmat(path)
    P = sp.csc_matrix(d["P"], dtype=float)
    n = P.shape[0]
    c = np.asarray(d["c"], dtype=float).reshape(-1) if d["c"].size else np.zeros(n)
    A = sp.csc_matrix(d["A"], dtype=float) if d["A"].shape[0] else sp.csc_matrix((0, n))
    b = np.asarray(d["b"], dtype=float).reshape(-1)
    G = sp.csc_matrix(d["G"], dtype=float) if d["G"].shape[0] else sp.csc_matrix((0, n))
    hl = np.asarray(d["h_l"], dtype=float).reshape(-1)
    hu = np.asarray(d["h_u"], dtype=float).reshape(-1)
    xl = np.asarray(d["x_l"], dtype=float).reshape(-1) if d["x_l"].size else np.full(n, -np.inf)
    xu = np.asarray(d["x_u"], dtype=float).reshape(-1) if d["x_u"].size else np.full(n, np.inf)

    rows = []  # (name, kind, rhs, range)
    for i in range(A.shape[0]):
        rows.append((f"E{i + 1}", "E", b[i], None))
    for i in range(G.shape[0]):
        lo, hi = hl[i], hu[i]
        rname = f"G{i + 1}"
        if np.isfinite(lo) and np.isfinite(hi):
            if lo == hi:
                rows.append((rname, "E", lo, None))
            else:
                rows.append((rname, "G", lo, hi - lo))
        elif np.isfinite(lo):
            rows.append((rname, "G", lo, None))
        elif np.isfinite(hi):
            rows.append((rname, "L", hi, None))
        else:
            rows.append((rname, "N", 0.0, None))

    K = sp.vstack([A, G]).tocsc()
    cols = [f"X{j + 1}" for j in range(n)]
    lines = [f"NAME          {name}", "ROWS", " N  OBJ"]
    for rname, kind, _, _ in rows:
        lines.append(f" {kind}  {rname}")
    lines.append("COLUMNS")
    for j in range(n):
        empty = not any(K.data[K.indptr[j]:K.indptr[j + 1]])
        if c[j] != 0.0 or empty:
            lines.append(f"    {cols[j]}  OBJ  {fmt(c[j])}")
        for idx in range(K.indptr[j], K.indptr[j + 1]):
            i = K.indices[idx]
            if K.data[idx] != 0.0:
                lines.append(f"    {cols[j]}  {rows[i][0]}  {fmt(K.data[idx])}")
    lines.append("RHS")
    for rname, kind, rhs, _ in rows:
        if rhs != 0.0 and kind != "N":
            lines.append(f"    RHS  {rname}  {fmt(rhs)}")
    ranged = [r for r in rows if r[3] is not None]
    if ranged:
        lines.append("RANGES")
        for rname, _, _, rng in ranged:
            lines.append(f"    RNG  {rname}  {fmt(rng)}")
    blines = []
    for j in range(n):
        lo, hi = xl[j], xu[j]
        if lo == hi:
            blines.append(f" FX BND  {cols[j]}  {fmt(lo)}")
            continue
        if not np.isfinite(lo) and not np.isfinite(hi):
            blines.append(f" FR BND  {cols[j]}")
            continue
        if np.isfinite(lo):
            if lo != 0.0:
                blines.append(f" LO BND  {cols[j]}  {fmt(lo)}")
        else:
            blines.append(f" MI BND  {cols[j]}")
        if np.isfinite(hi):
            blines.append(f" UP BND  {cols[j]}  {fmt(hi)}")
    if blines:
        lines.append("BOUNDS")
        lines.extend(blines)
    L = sp.tril(P).tocoo()
    entries = sorted(zip(L.col, L.row, L.data))
    entries = [e for e in entries if e[2] != 0.0]
    if entries:
        lines.append("QUADOBJ")
        for j, i, v in entries:
            lines.append(f"    {cols[j]}  {cols[i]}  {fmt(v)}")
    lines.append("ENDATA")
    with open(os.path.join(out_dir, f"{name}.QPS"), "w") as fh:
        fh.write("\n".join(lines) + "\n")


def main():
    out_dir = sys.argv[1]
    for path in sys.argv[2:]:
        convert(path, out_dir)


if __name__ == "__main__":
    main()
