#!/usr/bin/env python3
"""Regenerate the bundled case files from the PYPOWER copies of the IEEE
39-bus and 118-bus systems.

Dispatch comes from an AC OPF (pypower.runopf). Generator voltages are the
internal EMF magnitudes |E'| = |V_t + j xd' I| at that solution. The DC
slack bus later absorbs losses, so the slack generator's P used for E' is the
DC-balanced value.

    pip install pypower
    python3 tools/convert_case.py data/
"""
import json
import math
import sys
from pathlib import Path

import numpy as np
from pypower.api import case39, case118, ppoption, runopf

# bus: (H seconds, xd' pu), 100 MVA system base
DYN39 = {
    39: (500.0, 0.006), 31: (30.3, 0.0697), 32: (35.8, 0.0531),
    33: (28.6, 0.0436), 34: (26.0, 0.132), 35: (34.8, 0.05),
    36: (26.4, 0.049), 37: (24.3, 0.057), 38: (34.5, 0.057),
    30: (42.0, 0.031),
}
# 39-bus generator order used for G1..G10 labels
ORDER39 = [39, 31, 32, 33, 34, 35, 36, 37, 38, 30]


def dyn118(gen_row):
    # H = 5 s and xd' = 0.25 pu on a machine base of Pmax MVA
    pmax = gen_row[8]
    return 5.0 * pmax / 100.0, 0.25 * 100.0 / pmax


def solve_opf(ppc):
    opt = ppoption(VERBOSE=0, OUT_ALL=0)
    res = runopf(ppc, opt)
    if not res["success"]:
        raise SystemExit("OPF did not converge")
    return res


def build(res, slack, dyn, order=None):
    base = float(res["baseMVA"])
    bus = res["bus"]
    ids = [int(b[0]) for b in bus]
    idx = {b: k for k, b in enumerate(ids)}
    gens = [g for g in res["gen"] if g[7] > 0]
    if order is not None:
        gens = sorted(gens, key=lambda g: order.index(int(g[0])))
    pd_total = float(bus[:, 2].sum())
    pg_other = sum(float(g[1]) for g in gens if int(g[0]) != slack)
    out_gens = []
    for g in gens:
        b = int(g[0])
        h, xd = dyn(g) if callable(dyn) else dyn[b]
        p = pd_total - pg_other if b == slack else float(g[1])
        vt = bus[idx[b], 7] * np.exp(1j * math.radians(bus[idx[b], 8]))
        cur = np.conj((p + 1j * float(g[2])) / base / vt)
        e = vt + 1j * xd * cur
        out_gens.append({
            "bus": b,
            "pg_mw": round(float(g[1]), 6),
            "pg_max_mw": float(g[8]),
            "inertia_s": round(h, 6),
            "xd_prime_pu": round(xd, 8),
            "vm_pu": round(float(abs(e)), 6),
        })
    branches = [
        {"from": int(r[0]), "to": int(r[1]), "x_pu": float(r[3])}
        for r in res["branch"] if r[10] > 0
    ]
    buses = [{"id": int(b[0]), "pd_mw": float(b[2])} for b in bus]
    return {
        "base_mva": base,
        "base_freq_hz": 60.0,
        "slack_bus": slack,
        "buses": buses,
        "branches": branches,
        "gens": out_gens,
    }


def write_matpower(path, res, case):
    def table(rows):
        return "\n".join("\t" + "\t".join(repr(float(v)) for v in r) + ";" for r in rows)

    bus = np.array(res["bus"][:, :13])
    bus[:, 1] = [3 if int(b) == case["slack_bus"] else t for b, t in zip(bus[:, 0], bus[:, 1])]
    with open(path, "w") as fh:
        fh.write("function mpc = case39\n% OPF dispatch, see tools/convert_case.py\n")
        fh.write("mpc.version = '2';\n")
        fh.write(f"mpc.baseMVA = {case['base_mva']};\n\n")
        fh.write("%% bus data\nmpc.bus = [\n" + table(bus) + "\n];\n\n")
        fh.write("%% generator data\nmpc.gen = [\n" + table(res["gen"][:, :10]) + "\n];\n\n")
        fh.write("%% branch data\nmpc.branch = [\n" + table(res["branch"][:, :11]) + "\n];\n")


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "data")
    out.mkdir(parents=True, exist_ok=True)

    r39 = solve_opf(case39())
    c39 = build(r39, 31, DYN39, ORDER39)
    (out / "case39.json").write_text(json.dumps(c39, indent=1) + "\n")
    write_matpower(out / "case39.m", r39, c39)
    dyn = {"base_freq_hz": 60.0, "gens": [
        {k: g[k] for k in ("bus", "inertia_s", "xd_prime_pu", "vm_pu")} for g in c39["gens"]]}
    (out / "case39_dyn.json").write_text(json.dumps(dyn, indent=1) + "\n")

    r118 = solve_opf(case118())
    c118 = build(r118, 69, dyn118)
    (out / "case118.json").write_text(json.dumps(c118, indent=1) + "\n")


if __name__ == "__main__":
    main()
