"""Command-line entry point: build, decode, sweep and schedule-check.

Codes come from builtin names (C3, C5, T9, T25, steane, bicycle) or from
a plain-text spec file of `key = value` lines whose values are Python
literals: convolutional families list delay-polynomial exponents (e.g.
`H = [[[0,1,2],[0,2],[0]]]`), block codes list stabiliser supports, turbo
files reference two seed families, bicycle files give (m, w, remove).
"""

from __future__ import annotations

import argparse
import ast
import json
import math
import os
import sys

import numpy as np

from .bicycle import build_bicycle, random_seed_row
from .codes import CssCode, convolutional_code, foliate, pure_error
from .delay import DelayMatrix, SeedSet, verify_orthogonality
from .foliated import DecodeConfig
from .library import CONV_SEEDS, TURBO_SPECS, steane
from .montecarlo import (
    BicycleTarget,
    FoliatedTarget,
    TurboTarget,
    bicycle_target,
    run_sweep,
    write_batches_csv,
    write_sweep_csv,
)
from .schedule import (
    builtin_schedule,
    check_all_single_faults,
    import_schedule,
    propagate_fault,
    validate,
)
from .trellis import build_trellis
from .turbo import TurboDecodeConfig, build_turbo

CONV_DISTANCE = {"C3": 3, "C5": 5}


class CliError(Exception):
    """User-facing error with a field-level message."""


def parse_spec_file(path: str) -> dict:
    """Parses `key = value` lines; values are Python literals or names.

    Raises:
        CliError: On unreadable files or malformed lines, naming the
            offending line and field.
    """
    spec: dict = {}
    try:
        text = open(path).read()
    except OSError as exc:
        raise CliError(f"cannot read spec file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected `key = value`")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        try:
            spec[key] = ast.literal_eval(value)
        except (ValueError, SyntaxError):
            spec[key] = value
    if "family" not in spec:
        raise CliError(f"{path}: missing `family` field")
    return spec


def _seed_from_spec(spec: dict, path: str = "<spec>") -> SeedSet:
    for fieldname in ("g", "h", "rates"):
        if fieldname not in spec:
            raise CliError(f"{path}: convolutional spec missing `{fieldname}`")
    try:
        return SeedSet(
            generator=DelayMatrix.from_exponents(spec["g"]),
            parity=DelayMatrix.from_exponents(spec["h"]),
            isf=(
                DelayMatrix.from_exponents(spec["isf"])
                if "isf" in spec
                else None
            ),
            rates=tuple(spec["rates"]),
            name=str(spec.get("name", "custom")),
        )
    except (TypeError, ValueError) as exc:
        raise CliError(f"{path}: bad seed matrices: {exc}") from exc


def _block_from_spec(spec: dict, path: str = "<spec>") -> CssCode:
    for fieldname in ("n", "k", "sx", "sz", "lx", "lz"):
        if fieldname not in spec:
            raise CliError(f"{path}: block spec missing `{fieldname}`")
    n = int(spec["n"])

    def mat(supports):
        rows = np.zeros((len(supports), n), dtype=np.uint8)
        for i, sup in enumerate(supports):
            rows[i, list(sup)] = 1
        return rows

    code = CssCode(
        n=n, k=int(spec["k"]), sx=mat(spec["sx"]), sz=mat(spec["sz"]),
        logical_x=mat(spec["lx"]), logical_z=mat(spec["lz"]),
        name=str(spec.get("name", "custom")),
    )
    try:
        code.validate()
    except ValueError as exc:
        raise CliError(f"{path}: invalid block code: {exc}") from exc
    return code


def resolve_code(args) -> tuple[str, object]:
    """Returns (family, definition) from --code or --spec.

    Families: "conv" (SeedSet), "turbo" (TurboCodeSpec), "bicycle"
    (dict of m/w/remove), "block" (CssCode).
    """
    if getattr(args, "spec", None):
        spec = parse_spec_file(args.spec)
        family = str(spec["family"]).lower()
        if family == "convolutional":
            return "conv", _seed_from_spec(spec, args.spec)
        if family == "block":
            return "block", _block_from_spec(spec, args.spec)
        if family == "turbo":
            inner = str(spec.get("inner", ""))
            outer = str(spec.get("outer", ""))
            if inner not in CONV_SEEDS or outer not in CONV_SEEDS:
                raise CliError(
                    f"{args.spec}: turbo inner/outer must name builtin seed "
                    f"families {sorted(CONV_SEEDS)}"
                )
            from .turbo import TurboCodeSpec

            return "turbo", TurboCodeSpec(
                inner=CONV_SEEDS[inner](), outer=CONV_SEEDS[outer](),
                interleaver_kind=str(spec.get("interleaver", "transpose")),
                rng_seed=int(spec.get("rng_seed", 0)),
                name=str(spec.get("name", "custom")),
            )
        if family == "bicycle":
            return "bicycle", {
                "m": int(spec.get("m", 0)),
                "w": int(spec.get("w", 0)),
                "remove": int(spec.get("remove", 1)),
                "rng_seed": int(spec.get("rng_seed", 0)),
            }
        raise CliError(f"{args.spec}: unknown family {family!r}")
    name = args.code
    if name in CONV_SEEDS:
        return "conv", CONV_SEEDS[name]()
    if name in TURBO_SPECS:
        return "turbo", TURBO_SPECS[name]("transpose")
    if name == "steane":
        return "block", steane()
    if name == "bicycle":
        return "bicycle", {"m": 64, "w": 13, "remove": 4, "rng_seed": 0}
    raise CliError(f"unknown code {name!r}")


def make_target(family, definition, tau, layers, args):
    """Builds a Monte Carlo target for the resolved code."""
    if family == "conv":
        code = convolutional_code(definition, tau)
        fc = foliate(code, layers)
        return FoliatedTarget(
            fc=fc, config=DecodeConfig(seed=definition),
            name=definition.name or "conv",
        )
    if family == "turbo":
        tc = build_turbo(definition, tau_out=tau, L=layers)
        return TurboTarget(
            tc=tc,
            config=TurboDecodeConfig(
                rounds=args.rounds, exchange_iters=args.exchange_iters
            ),
            name=definition.name,
        )
    if family == "bicycle":
        d = definition
        seed_row = random_seed_row(d["m"], d["w"], rng_seed=d["rng_seed"])
        code = build_bicycle(d["m"], seed_row, k=d["remove"]).to_css()
        return bicycle_target(code, layers, name="bicycle")
    if family == "block":
        raise CliError("block codes support `build` only")
    raise CliError(f"no target for family {family!r}")


def _tau_for_k(family, definition, k, layers, args) -> int:
    """Smallest frame count giving exactly k logical qubits."""
    for tau in range(1, k + 16):
        try:
            target = make_target(family, definition, tau, layers, args)
        except (ValueError, CliError):
            continue
        if target.k == k:
            return tau
        if target.k > k:
            break
    raise CliError(f"no frame count yields k={k} for this family")


def _rate_fraction(family, definition, tau, args) -> str:
    """Asymptotic rate from the per-frame location increment."""
    a = make_target(family, definition, tau, 1, args)
    b = make_target(family, definition, tau + 1, 1, args)
    dk = b.k - a.k
    dn = b.n_sites - a.n_sites
    if dk <= 0 or dn <= 0:
        return f"{a.k}/{a.n_sites}"
    g = math.gcd(dk, dn)
    return f"{dk // g}/{dn // g}"


def cmd_build(args) -> int:
    family, definition = resolve_code(args)
    tau = args.tau or 8
    if family == "conv":
        report = verify_orthogonality(definition)
        code = convolutional_code(definition, tau)
        trellis = build_trellis(definition, tau)
        d = CONV_DISTANCE.get(definition.name, None)
        print(f"code {definition.name or 'conv'} tau={tau}")
        print(f"[[{code.n}, {code.k}, {d if d else '?'}]]")
        print(f"rate {_rate_fraction(family, definition, tau, args)}")
        print(f"{trellis.n_states} trellis states")
        print(f"orthogonality {'pass' if report.passed else 'FAIL'}")
        if not report.passed:
            for check in report.failing():
                print(f"  failed: {check}")
            return 1
        return 0
    if family == "turbo":
        tc = build_turbo(definition, tau_out=tau, L=1)
        inner_rep = verify_orthogonality(definition.inner)
        outer_rep = verify_orthogonality(definition.outer)
        print(f"code {definition.name} tau={tau}")
        print(f"[[{tc.n_locations}, {tc.k}, {definition.distance}]]")
        print(f"rate {_rate_fraction(family, definition, tau, args)}")
        print(f"d={definition.distance}")
        ok = inner_rep.passed and outer_rep.passed
        print(f"orthogonality {'pass' if ok else 'FAIL'}")
        return 0 if ok else 1
    if family == "bicycle":
        d = definition
        seed_row = random_seed_row(d["m"], d["w"], rng_seed=d["rng_seed"])
        code = build_bicycle(d["m"], seed_row, k=d["remove"])
        css = code.to_css()
        from . import gf2
        from .bicycle import distance_bound

        ortho = not np.any(gf2.matmul(code.h, code.h.T))
        bound = distance_bound(code, trials=50)
        print(f"code bicycle m={d['m']} w={d['w']}")
        print(f"[[{css.n}, {css.k}, <={bound}]]")
        g = math.gcd(css.k, css.n)
        print(f"rate {css.k // g}/{css.n // g}")
        print(f"orthogonality {'pass' if ortho else 'FAIL'}")
        return 0 if ortho else 1
    definition.validate()
    print(f"code {definition.name}")
    print(f"[[{definition.n}, {definition.k}, ?]]")
    print("orthogonality pass")
    return 0


def _parse_indices(text: str) -> list:
    if not text.strip():
        return []
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise CliError(f"bad index list {text!r}") from exc


def cmd_decode(args) -> int:
    family, definition = resolve_code(args)
    target = make_target(family, definition, args.tau or 8, args.layers, args)
    fc = target.fc if hasattr(target, "fc") else target.tc.fc
    if args.error is not None:
        e_sites = np.zeros(target.n_sites, dtype=np.uint8)
        for i in _parse_indices(args.error):
            if not 0 <= i < target.n_sites:
                raise CliError(
                    f"error index {i} out of range (n={target.n_sites})"
                )
            e_sites[i] ^= 1
        e = target.expand(e_sites)
        syndrome = target.syndrome(e)
    elif args.syndrome is not None:
        e = None
        bits = _parse_indices(args.syndrome)
        n_rows = fc.parity_checks.shape[0]
        if len(bits) != n_rows:
            raise CliError(f"syndrome must have {n_rows} bits")
        syndrome = np.array(bits, dtype=np.uint8)
    else:
        raise CliError("provide --error or --syndrome")
    correction = target.decode(syndrome, args.p)
    e0 = pure_error(fc, syndrome[: fc.parity_checks.shape[0]])
    report = {
        "code": target.name,
        "L": target.L,
        "k": target.k,
        "n_sites": target.n_sites,
        "syndrome": syndrome.tolist(),
        "pure_error": np.nonzero(e0)[0].tolist(),
        "correction": np.nonzero(correction)[0].tolist(),
    }
    if e is not None:
        residual = e ^ correction
        word, bits = target.failure(residual)
        report["residual"] = np.nonzero(residual)[0].tolist()
        report["verdict"] = "logical failure" if word else "success"
        report["bit_failures"] = bits
    print(json.dumps(report, indent=2))
    return 0


def cmd_sweep(args) -> int:
    family, definition = resolve_code(args)
    p_grid = [float(x) for x in args.p_grid.split(",") if x.strip()]
    if not p_grid:
        raise CliError("empty --p-grid")
    ks = args.k or [None]
    results = []
    for k in ks:
        for layers in args.layers_list:
            if k is None:
                tau = args.tau or 8
            else:
                tau = _tau_for_k(family, definition, k, layers, args)
            target = make_target(family, definition, tau, layers, args)
            results.append(
                run_sweep(
                    target, p_grid, n_trials=args.trials, seed=args.seed,
                    max_j=args.j_max, workers=args.workers,
                    exhaustive_cap=args.exhaustive_cap,
                )
            )
    os.makedirs(args.out, exist_ok=True)
    sweep_path = os.path.join(args.out, "sweep.csv")
    batch_path = os.path.join(args.out, "batches.csv")
    write_sweep_csv(results, sweep_path)
    write_batches_csv(results, batch_path)
    for r in results:
        for w in r.warnings:
            print(f"warning: {r.code} k={r.k} L={r.L}: {w}", file=sys.stderr)
    print(f"wrote {sweep_path} and {batch_path}")
    return 0


def cmd_schedule_check(args) -> int:
    if args.file:
        if not args.name:
            raise CliError("--file needs --name for the check matrix")
        ref = builtin_schedule(args.name, tau=args.tau)
        try:
            sched = import_schedule(open(args.file).read(), ref.checks, args.name)
        except (OSError, ValueError, IndexError) as exc:
            raise CliError(f"cannot parse schedule file: {exc}") from exc
        sched.tau = ref.tau
    else:
        sched = builtin_schedule(args.name, tau=args.tau)
    report = validate(sched)
    print(f"schedule {sched.name}: {sched.horizon} steps, "
          f"{len(sched.gates)} gates, {sched.n_checks} checks")
    if not report.valid:
        for t, key in report.collisions:
            print(f"collision: step T{t} on {key[0]}_{key[1]}")
        for r, q in report.uncovered:
            print(f"uncovered: check {r} qubit {q}")
        for r, q in report.extra:
            print(f"extra gate: check {r} qubit {q}")
        return 1
    print("valid: no collisions, full coverage")
    worst = 0
    for r in range(sched.n_checks):
        for t in range(sched.horizon + 1):
            worst = max(worst, propagate_fault(sched, "ancilla", r, t).weight)
    print(f"max reduced fault weight {worst}")
    if args.faults:
        rep = check_all_single_faults(sched, sheets=args.sheets)
        verdict = "corrected" if rep.passed else "NOT corrected"
        print(
            f"single faults ({args.sheets} sheets): {rep.n_decoded} patterns, "
            f"{len(rep.failures)} failures -> all {verdict}"
            if rep.passed
            else f"single faults ({args.sheets} sheets): {rep.n_decoded} "
            f"patterns, {len(rep.failures)} failures"
        )
        return 0 if rep.passed else 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="folqec",
        description="Foliated sparse-code construction and decoding toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_code_opts(p):
        p.add_argument("--code", help="builtin code name")
        p.add_argument("--spec", help="code spec file")
        p.add_argument("--tau", type=int, help="frame count")
        p.add_argument("--rounds", type=int, default=2,
                       help="turbo feedback rounds")
        p.add_argument("--exchange-iters", type=int, default=1,
                       help="sheet message exchanges per turbo stage")

    b = sub.add_parser("build", help="construct a code and print parameters")
    add_code_opts(b)
    b.set_defaults(func=cmd_build)

    d = sub.add_parser("decode", help="decode one error or syndrome")
    add_code_opts(d)
    d.add_argument("--layers", type=int, default=1)
    d.add_argument("--error", help="error support indices, comma separated")
    d.add_argument("--syndrome", help="syndrome bits, comma separated")
    d.add_argument("--p", type=float, default=0.01, help="channel prior")
    d.set_defaults(func=cmd_decode)

    s = sub.add_parser("sweep", help="Monte Carlo WER/BER sweep to CSV")
    add_code_opts(s)
    s.add_argument("--k", type=int, action="append",
                   help="logical count (repeatable); frame count is solved")
    s.add_argument("--layers", type=int, action="append", dest="layers_list",
                   default=None, help="sheet count (repeatable)")
    s.add_argument("--p-grid", required=True,
                   help="comma-separated physical error probabilities")
    s.add_argument("--trials", type=int, default=2000)
    s.add_argument("--j-max", type=int, default=None)
    s.add_argument("--exhaustive-cap", type=int, default=None,
                   help="largest weight orbit enumerated exactly")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int,
                   default=int(os.environ.get("FOLQEC_WORKERS", "1")))
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("schedule-check", help="validate a construction schedule")
    c.add_argument("--name", help="builtin schedule family")
    c.add_argument("--file", help="gate list file")
    c.add_argument("--tau", type=int, default=None)
    c.add_argument("--faults", action="store_true",
                   help="also decode every single-fault pattern")
    c.add_argument("--sheets", type=int, default=3,
                   help="sheet count for the fault decode")
    c.set_defaults(func=cmd_schedule_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "layers_list", "missing") is None:
        args.layers_list = [1]
    if args.command in ("build", "decode", "sweep") and not (
        args.code or args.spec
    ):
        parser.error("provide --code or --spec")
    if args.command == "schedule-check" and not (args.name or args.file):
        parser.error("provide --name or --file")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
