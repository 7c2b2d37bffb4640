"""Command-line entry point: rank, create, embed, decode, attack, report.

Exit codes: 0 success, 2 configuration/data error, 3 decode reported
corruption, 4 the optimizer found no feasible watermark. TABMARK_SEED sets
the default seed; every subcommand accepts --json for machine-readable
output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .attacks import AttackSpec, resilience_sweep
from .decoder import decode
from .errors import TabmarkError
from .keyfile import load_key, save_key
from .pipeline import EncodeOptions, encode
from .pso import SwarmConfig
from .ranking import BinningSpec, classification_potential
from .store import UsabilityConstraints, load_dataset, save_dataset
from .timing import measure_scaling

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CORRUPTED = 3
EXIT_INFEASIBLE = 4


def _default_seed() -> int:
    return int(os.environ.get("TABMARK_SEED", "0"))


def _emit(payload: dict, as_json: bool, lines) -> None:
    if as_json:
        print(json.dumps(payload, indent=2))
    else:
        for line in lines:
            print(line)


def _add_input_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--in", dest="input", required=True, help="input CSV")
    parser.add_argument("--class-col", default="class")
    parser.add_argument("--id-col", default="synthesize",
                        help='id column name, or "synthesize"')


def _add_encode_args(parser: argparse.ArgumentParser) -> None:
    _add_input_args(parser)
    parser.add_argument("--length", type=int, default=16)
    parser.add_argument("--bits", default=None,
                        help="explicit watermark bit string, e.g. 11001")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--top-exclude", type=int, default=1)
    parser.add_argument("--cp-threshold", type=float, default=None)
    parser.add_argument("--bins", type=int, default=10)
    parser.add_argument("--beta-cap", type=float, default=0.02)
    parser.add_argument("--cp-tol", type=float, default=1e-6)
    parser.add_argument("--mean-tol", type=float, default=1e-3)
    parser.add_argument("--std-tol", type=float, default=1e-3)
    parser.add_argument("--integer-col", action="append", default=[],
                        help="feature whose integer type must be preserved")
    parser.add_argument("--particles", type=int, default=100)
    parser.add_argument("--iterations", type=int, default=100)
    parser.add_argument("--stagnation", type=int, default=10)


def _encode_options(args) -> EncodeOptions:
    seed = args.seed if args.seed is not None else _default_seed()
    constraints = UsabilityConstraints(
        cp_tolerance=args.cp_tol,
        mean_tol=args.mean_tol,
        std_tol=args.std_tol,
        beta_cap=args.beta_cap,
        integer_columns=frozenset(args.integer_col),
    )
    swarm = SwarmConfig(particles=args.particles, iterations=args.iterations,
                        stagnation_window=args.stagnation, seed=seed)
    return EncodeOptions(
        length=args.length, bits=args.bits, seed=seed,
        top_exclude=args.top_exclude, cp_threshold=args.cp_threshold,
        bin_count=args.bins, constraints=constraints, swarm=swarm)


def _cmd_rank(args) -> int:
    dataset = load_dataset(args.input, args.class_col, args.id_col)
    cp = classification_potential(
        dataset, BinningSpec.equal_width(dataset, args.bins))
    rows = cp.as_rows()
    lines = [f"{'feature':<20} {'gain':>10} {'cp%':>8} {'rank':>5}"]
    lines += [f"{r['feature']:<20} {r['gain']:>10.5f} {r['cp']:>8.3f} {r['rank']:>5}"
              for r in rows]
    _emit({"features": rows, "degenerate": cp.degenerate}, args.json, lines)
    return EXIT_OK


def _creation_payload(result) -> dict:
    return {
        "feasible": result.creation.feasible,
        "fitness": result.creation.fitness,
        "repaired": result.creation.repaired,
        "iterations": result.creation.iterations,
        "candidates": list(result.candidates.features),
        "betas": result.creation.rates,
        "bounds": {k: list(v) for k, v in result.creation.bounds.items()},
        "violations": result.creation.violations,
        "bits": result.watermark.as_string(),
    }


def _cmd_create(args) -> int:
    dataset = load_dataset(args.input, args.class_col, args.id_col)
    result = encode(dataset, _encode_options(args), embed_stage=False)
    payload = _creation_payload(result)
    if args.params_out:
        with open(args.params_out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
    lines = [f"feasible: {payload['feasible']}",
             f"candidates: {', '.join(payload['candidates'])}"]
    lines += [f"  beta[{k}] = {v:.3e}" for k, v in payload["betas"].items()]
    _emit(payload, args.json, lines)
    return EXIT_OK if result.feasible else EXIT_INFEASIBLE


def _cmd_embed(args) -> int:
    dataset = load_dataset(args.input, args.class_col, args.id_col)
    result = encode(dataset, _encode_options(args))
    if not result.feasible:
        _emit(_creation_payload(result), args.json,
              ["no feasible watermark parameters found",
               f"violations: {result.creation.violations}"])
        return EXIT_INFEASIBLE
    save_dataset(result.marked, args.out)
    save_key(result.key, args.key_out)
    payload = _creation_payload(result)
    payload.update({
        "marked": args.out,
        "key": args.key_out,
        "constraints_passed": result.constraint_report.passed,
        "delta_summary": result.key.delta.summary(),
    })
    _emit(payload, args.json, [
        f"embedded {result.watermark.length} bits into "
        f"{len(result.candidates.features)} features",
        f"marked dataset: {args.out}",
        f"key file: {args.key_out}",
        f"constraints passed: {result.constraint_report.passed}",
    ])
    return EXIT_OK


def _cmd_decode(args) -> int:
    key = load_key(args.key)
    id_col = args.id_col or key.id_column
    class_col = args.class_col or key.class_column
    suspect = load_dataset(args.input, class_col, id_col)
    result = decode(suspect, key)
    payload = result.to_dict()
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
    _emit(payload, args.json, [
        f"decoded bits: {result.as_string()}",
        f"accuracy vs key: {result.accuracy:.4f}",
        f"correlation: {result.correlation:.4f}",
        f"verdict: {result.verdict}",
    ])
    return EXIT_CORRUPTED if result.verdict == "corrupted" else EXIT_OK


def _cmd_attack(args) -> int:
    key = load_key(args.key)
    marked = load_dataset(args.input, args.class_col or key.class_column,
                          args.id_col or key.id_column)
    with open(args.spec, "r", encoding="utf-8") as fh:
        grid = [AttackSpec.from_dict(item) for item in json.load(fh)]
    report = resilience_sweep(marked, key, grid)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(report.to_json(indent=2))
    if args.curves:
        report.write_curves(args.curves)
    lines = []
    for p in report.points:
        if p.spec.kind == "combined":
            strength = (f"del={p.spec.delete_frac} ins={p.spec.insert_frac} "
                        f"alt={p.spec.alter_frac}")
        else:
            strength = f"alpha={p.spec.alpha}"
        if p.error:
            lines.append(f"{p.spec.kind:<18} {strength:<28} ERROR {p.error}")
        else:
            lines.append(f"{p.spec.kind:<18} {strength:<28} "
                         f"accuracy={p.bit_accuracy:.3f} verdict={p.verdict}")
    _emit(report.to_dict(), args.json, lines)
    return EXIT_OK


def _cmd_report(args) -> int:
    rows = [int(r) for r in args.rows.split(",")]
    seed = args.seed if args.seed is not None else _default_seed()
    report = measure_scaling(rows, seed=seed, repeats=args.repeats,
                             length=args.length)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(report.to_json(indent=2))
    lines = [f"backend: {report.backend}",
             f"{'rows':>8} {'embed_s':>10} {'decode_s':>10}"]
    lines += [f"{r:>8} {e:>10.4f} {d:>10.4f}"
              for r, e, d in zip(report.rows, report.embed_seconds,
                                 report.decode_seconds)]
    lines.append(f"embed  fit: R^2={report.embed_fit.r_squared:.4f}")
    lines.append(f"decode fit: R^2={report.decode_fit.r_squared:.4f}")
    _emit(report.to_dict(), args.json, lines)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tabmark",
        description="Right-protect numeric tabular datasets with an "
                    "imperceptible, attack-resilient watermark.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_rank = sub.add_parser("rank", help="rank features by classification potential")
    _add_input_args(p_rank)
    p_rank.add_argument("--bins", type=int, default=10)

    p_create = sub.add_parser("create", help="optimize watermark parameters")
    _add_encode_args(p_create)
    p_create.add_argument("--params-out", default=None)

    p_embed = sub.add_parser("embed", help="create and embed a watermark")
    _add_encode_args(p_embed)
    p_embed.add_argument("--out", required=True, help="marked CSV output")
    p_embed.add_argument("--key-out", required=True, help="key JSON output")

    p_decode = sub.add_parser("decode", help="decode a watermark from a suspect CSV")
    p_decode.add_argument("--in", dest="input", required=True)
    p_decode.add_argument("--key", required=True)
    p_decode.add_argument("--report", default=None)
    p_decode.add_argument("--id-col", default=None)
    p_decode.add_argument("--class-col", default=None)

    p_attack = sub.add_parser("attack", help="run an attack grid and score decoding")
    p_attack.add_argument("--in", dest="input", required=True)
    p_attack.add_argument("--key", required=True)
    p_attack.add_argument("--spec", required=True, help="attacks JSON file")
    p_attack.add_argument("--report", default=None)
    p_attack.add_argument("--curves", default=None)
    p_attack.add_argument("--id-col", default=None)
    p_attack.add_argument("--class-col", default=None)

    p_report = sub.add_parser("report", help="embed/decode timing vs row count")
    p_report.add_argument("--rows", default="10000,20000,40000")
    p_report.add_argument("--repeats", type=int, default=15)
    p_report.add_argument("--length", type=int, default=16)
    p_report.add_argument("--seed", type=int, default=None)
    p_report.add_argument("--out", default=None)

    for sp in (p_rank, p_create, p_embed, p_decode, p_attack, p_report):
        sp.add_argument("--json", action="store_true",
                        help="machine-readable output")
    return parser


_HANDLERS = {
    "rank": _cmd_rank,
    "create": _cmd_create,
    "embed": _cmd_embed,
    "decode": _cmd_decode,
    "attack": _cmd_attack,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (TabmarkError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
