"""Command-line driver: map AIGs to LUT netlists and verify the mappings.

Exit codes are the machine contract: 0 equivalent (or success), 1
non-equivalent, 2 usage or parse error, 3 verdict unknown.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import io as mecio
from . import simulate
from .equiv import EcReport, check_miter, checking_logic_block, mec_verify
from .errors import BudgetExhausted, MecError, ParseError
from .mapper import CorrespondingPair, CorrespondingPairSet, MapConfig, map_network
from .netgraph import ChoiceMergeConfig, Network, merge_choice
from .satcore import SolveBudget


@dataclass
class FlowConfig:
    k: int = 6
    cuts_per_node: int = 8
    area_rounds: int = 2
    choice_path: Optional[str] = None
    method: str = "mec"  # mec | miter | both | oracle
    budget_ms: float = 10_000.0
    max_conflicts: int = 1_000_000
    jobs: int = 1
    seed: int = 0
    dot_out: Optional[str] = None
    report: str = "text"  # text | machine

    def solve_budget(self) -> SolveBudget:
        return SolveBudget(
            max_conflicts=self.max_conflicts, max_seconds=self.budget_ms / 1000.0
        )

    def map_config(self) -> MapConfig:
        return MapConfig(
            k=self.k, cuts_per_node=self.cuts_per_node, area_rounds=self.area_rounds
        )


def _load_network(path: str, cfg: FlowConfig) -> Network:
    net = mecio.read_aiger(Path(path).read_bytes())
    if cfg.choice_path:
        other = mecio.read_aiger(Path(cfg.choice_path).read_bytes())
        net = merge_choice(net, other, ChoiceMergeConfig(seed=cfg.seed or 0xC0FFEE))
    return net


def cmd_map(in_path: str, out_path: Optional[str], cfg: FlowConfig) -> int:
    t0 = time.perf_counter()
    net = _load_network(in_path, cfg)
    mg, _cps = map_network(net, cfg.map_config())
    blif = mecio.write_lut_blif(mg, model=Path(in_path).stem)
    out = out_path or str(Path(in_path).with_suffix(".blif"))
    Path(out).write_text(blif)
    elapsed = time.perf_counter() - t0
    if cfg.report == "machine":
        print(f"luts={mg.lut_count()}")
        print(f"depth={mg.depth()}")
        print(f"out={out}")
    else:
        print(
            f"mapped {in_path}: {mg.lut_count()} LUTs, depth {mg.depth()}, "
            f"{elapsed:.3f} s -> {out}"
        )
    return 0


def _parallel_mec(og, mg, cfg: FlowConfig) -> EcReport:
    """Check blocks with a process pool, reporting the first failure in
    topological order."""
    from .mapper import topologize_cps

    t0 = time.perf_counter()
    cps = CorrespondingPairSet(
        [CorrespondingPair(blk.src, i) for i, blk in enumerate(mg.blocks)]
    )
    ordered = topologize_cps(cps, og).pairs
    budget = cfg.solve_budget()
    wave = max(4, cfg.jobs * 4)
    with ProcessPoolExecutor(
        max_workers=cfg.jobs, initializer=_pool_init, initargs=(og, mg, budget)
    ) as pool:
        for start in range(0, len(ordered), wave):
            chunk = ordered[start : start + wave]
            for offset, outcome in enumerate(pool.map(_pool_check, chunk)):
                i = start + offset
                status, cex = outcome
                if status == "unknown":
                    return EcReport(
                        "unknown", "mec", blocks_checked=i + 1,
                        reason="block budget exhausted",
                        total_seconds=time.perf_counter() - t0,
                    )
                if status == "diff":
                    return EcReport(
                        "non_equivalent", "mec", failing_pair=ordered[i],
                        cex=cex, cex_kind="leaf_local", blocks_checked=i + 1,
                        total_seconds=time.perf_counter() - t0,
                    )
    return EcReport(
        "equivalent", "mec", blocks_checked=len(ordered),
        total_seconds=time.perf_counter() - t0,
    )


_POOL_STATE: dict = {}


def _pool_init(og, mg, budget) -> None:
    _POOL_STATE["og"] = og
    _POOL_STATE["mg"] = mg
    _POOL_STATE["budget"] = budget


def _pool_check(pair):
    og, mg, budget = _POOL_STATE["og"], _POOL_STATE["mg"], _POOL_STATE["budget"]
    if pair.fn == 0:
        return ("ok", None)
    try:
        ok, cex = checking_logic_block(pair, og, mg, budget)
    except BudgetExhausted:
        return ("unknown", None)
    return ("ok", None) if ok else ("diff", cex)


_EXIT_OF_VERDICT = {"equivalent": 0, "non_equivalent": 1, "unknown": 3}


def _run_verify(og, mg, cfg: FlowConfig) -> tuple[int, list[EcReport]]:
    reports: list[EcReport] = []
    budget = cfg.solve_budget()
    if cfg.method in ("mec", "both"):
        if cfg.jobs > 1:
            reports.append(_parallel_mec(og, mg, cfg))
        else:
            reports.append(mec_verify(og, mg, budget=budget))
    if cfg.method in ("miter", "both"):
        reports.append(check_miter(og, mg, budget))
    if cfg.method == "oracle":
        t0 = time.perf_counter()
        sv = simulate.exhaustive_equiv(og, mg)
        verdict = {
            "equivalent": "equivalent",
            "non_equivalent": "non_equivalent",
            "too_large": "unknown",
        }[sv.status]
        rep = EcReport(verdict, "miter", total_seconds=time.perf_counter() - t0)
        if sv.cex is not None:
            rep.cex = {i: v for i, v in enumerate(sv.cex)}
            rep.cex_kind = "primary_input"
        if sv.status == "too_large":
            rep.reason = "too many inputs for exhaustive simulation"
        reports.append(rep)
    verdicts = {r.verdict for r in reports}
    if "non_equivalent" in verdicts:
        code = 1
    elif verdicts == {"equivalent"}:
        code = 0
    else:
        code = 3
    if len(verdicts) > 1 and cfg.method == "both":
        print("warning: methods disagree", file=sys.stderr)
    return code, reports


def cmd_verify(
    in_path: str, mapped_path: Optional[str], cfg: FlowConfig, remap: bool = False
) -> int:
    og = _load_network(in_path, cfg)
    if remap:
        mg, _ = map_network(og, cfg.map_config())
    else:
        mg = mecio.read_lut_blif(Path(mapped_path).read_text())
    code, reports = _run_verify(og, mg, cfg)
    for rep in reports:
        print(rep.to_machine() if cfg.report == "machine" else rep.to_text())
    failing = next((r for r in reports if r.failing_pair is not None), None)
    if failing is not None and cfg.dot_out:
        dot = mecio.write_dot_block(og, mg, failing.failing_pair, failing.cex)
        Path(cfg.dot_out).write_text(dot)
        if cfg.report != "machine":
            print(f"wrote failing block to {cfg.dot_out}")
    return code


def cmd_bench(manifest_path: str, cfg: FlowConfig, out=None) -> int:
    """Map and verify each circuit in the manifest; emit one CSV row each."""
    out = out or sys.stdout
    paths = []
    for line in Path(manifest_path).read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            paths.append(line)
    writer = csv.writer(out)
    writer.writerow(
        ["name", "size", "level", "mec_time_s", "miter_time_s", "speedup", "verdict"]
    )
    for path in paths:
        name = Path(path).stem
        try:
            og = _load_network(path, cfg)
        except (OSError, MecError) as e:
            writer.writerow([name, "-", "-", "-", "-", "-", f"error: {e}"])
            continue
        mg, _ = map_network(og, cfg.map_config())
        budget = cfg.solve_budget()
        rep_mec = mec_verify(og, mg, budget=budget)
        rep_mtr = check_miter(og, mg, budget)
        mec_cell = f"{rep_mec.total_seconds:.4f}"
        if rep_mec.verdict == "unknown":
            mec_cell = "timeout"
        mtr_cell = f"{rep_mtr.total_seconds:.4f}"
        if rep_mtr.verdict == "unknown":
            mtr_cell = "timeout"
        if "timeout" in (mec_cell, mtr_cell) or rep_mec.total_seconds == 0:
            speedup = "-"
        else:
            speedup = f"{rep_mtr.total_seconds / rep_mec.total_seconds:.2f}"
        writer.writerow(
            [name, og.n_ands(), og.gate_levels(), mec_cell, mtr_cell, speedup,
             rep_mec.verdict]
        )
    return 0


def cmd_debug(in_path: str, mapped_path: str, cfg: FlowConfig) -> int:
    cfg.method = "mec"
    cfg.dot_out = cfg.dot_out or str(Path(in_path).with_suffix(".block.dot"))
    og = _load_network(in_path, cfg)
    mg = mecio.read_lut_blif(Path(mapped_path).read_text())
    code, reports = _run_verify(og, mg, cfg)
    rep = reports[0]
    print(rep.to_machine() if cfg.report == "machine" else rep.to_text())
    if rep.failing_pair is not None:
        blk = mg.blocks[rep.failing_pair.sn]
        tt_str = format(blk.tt, f"0{1 << len(blk.leaves)}b")[::-1]
        print(f"block sn{rep.failing_pair.sn}: src node {blk.src}")
        print(f"  leaves: {blk.leaves}")
        print(f"  tt: {tt_str} (low pattern leftmost)")
        dot = mecio.write_dot_block(og, mg, rep.failing_pair, rep.cex)
        Path(cfg.dot_out).write_text(dot)
        print(f"wrote failing block to {cfg.dot_out}")
    return code


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="mec", description="k-LUT mapping and mapping equivalence checking"
    )
    sub = top.add_subparsers(dest="command", required=True)

    def k_value(text: str) -> int:
        v = int(text)
        if not 2 <= v <= 6:
            raise argparse.ArgumentTypeError("k must be between 2 and 6")
        return v

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("-k", type=k_value, default=6, help="LUT input size (2-6)")
        p.add_argument("--cuts", type=int, default=8, help="priority cuts per node")
        p.add_argument("--area-rounds", type=int, default=2)
        p.add_argument("--choice", metavar="AIG", help="merge a second, equivalent AIG")
        p.add_argument("--budget-ms", type=float, default=10_000.0)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--dot-out", metavar="PATH")
        p.add_argument("--report", choices=["text", "machine"], default="text")
        p.add_argument("--seed", type=int, default=0)

    p_map = sub.add_parser("map", help="map an AIG to a LUT netlist")
    p_map.add_argument("input")
    p_map.add_argument("-o", "--out")
    add_common(p_map)

    p_ver = sub.add_parser("verify", help="verify a mapping against its AIG")
    p_ver.add_argument("input")
    p_ver.add_argument("mapped", nargs="?")
    p_ver.add_argument("--remap", action="store_true", help="map in-process")
    p_ver.add_argument(
        "--method", choices=["mec", "miter", "both", "oracle"], default="mec"
    )
    add_common(p_ver)

    p_bench = sub.add_parser("bench", help="CSV runtime comparison over a manifest")
    p_bench.add_argument("manifest")
    p_bench.add_argument("-o", "--out")
    add_common(p_bench)

    p_dbg = sub.add_parser("debug", help="verify and dump the failing block as DOT")
    p_dbg.add_argument("input")
    p_dbg.add_argument("mapped")
    add_common(p_dbg)
    return top


def _config_from_args(args: argparse.Namespace) -> FlowConfig:
    return FlowConfig(
        k=args.k,
        cuts_per_node=args.cuts,
        area_rounds=args.area_rounds,
        choice_path=args.choice,
        method=getattr(args, "method", "mec"),
        budget_ms=args.budget_ms,
        jobs=args.jobs,
        seed=args.seed,
        dot_out=args.dot_out,
        report=args.report,
    )


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    cfg = _config_from_args(args)
    try:
        if args.command == "map":
            return cmd_map(args.input, args.out, cfg)
        if args.command == "verify":
            if not args.remap and not args.mapped:
                print("verify needs a BLIF argument or --remap", file=sys.stderr)
                return 2
            return cmd_verify(args.input, args.mapped, cfg, remap=args.remap)
        if args.command == "bench":
            if args.out:
                with open(args.out, "w", newline="") as fh:
                    return cmd_bench(args.manifest, cfg, fh)
            return cmd_bench(args.manifest, cfg)
        if args.command == "debug":
            return cmd_debug(args.input, args.mapped, cfg)
    except (OSError, ParseError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except MecError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
