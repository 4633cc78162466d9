#!/usr/bin/env python3
"""Compare a sweep output directory against data/reference_targets.json.

    evgrid sweep --fleet data/fleet34.txt --out out
    python3 tools/compare_reference.py out

Exit status is 0 when every scenario is within tolerance, 1 otherwise.
"""

import argparse
import json
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("sweep_dir", type=pathlib.Path, help="directory written by `evgrid sweep --out`")
    parser.add_argument("--targets", type=pathlib.Path, default=ROOT / "data" / "reference_targets.json")
    parser.add_argument("--loss-tolerance", type=float, help="relative, overrides the targets file")
    parser.add_argument("--voltage-tolerance", type=float, help="pu, overrides the targets file")
    args = parser.parse_args()

    targets = json.loads(args.targets.read_text())
    loss_tol = args.loss_tolerance if args.loss_tolerance is not None else targets["tolerance"]["loss_relative"]
    v_tol = args.voltage_tolerance if args.voltage_tolerance is not None else targets["tolerance"]["min_voltage_pu"]

    print(f"{'scenario':<16}{'loss kWh':>10}{'target':>10}{'rel':>9}   {'min V':>7}{'target':>8}{'diff':>9}")
    ok = True
    for name, ref in targets["scenarios"].items():
        summary_file = args.sweep_dir / name / "summary.json"
        if not summary_file.exists():
            print(f"{name:<16}missing {summary_file}")
            ok = False
            continue
        summary = json.loads(summary_file.read_text())
        loss = summary["total_loss_kwh"]["mean"]
        vmin = summary["min_voltage_pu"]["mean"]
        rel = (loss - ref["loss_kwh"]) / ref["loss_kwh"]
        dv = vmin - ref["min_voltage_pu"]
        within = abs(rel) <= loss_tol and abs(dv) <= v_tol
        ok &= within
        print(f"{name:<16}{loss:>10.3f}{ref['loss_kwh']:>10.3f}{rel:>+9.1%}   {vmin:>7.4f}{ref['min_voltage_pu']:>8.4f}"
              f"{dv:>+9.4f}  {'ok' if within else 'outside'}")
    print(f"tolerance: losses {loss_tol:.0%}, minima {v_tol} pu")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
