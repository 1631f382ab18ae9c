"""``qdcomp`` command-line interface.

Exit codes: 0 success, 1 verification mismatch, 2 usage or config error,
3 resource cap exceeded.
"""
import argparse
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .codes import (
    cq_scheme,
    huffman,
    kraft_converse,
    kraft_feasible,
    kraft_sum,
    optimal_length_from_spectrum,
    quantum_kraft_sum,
)
from .ensembles import GeneralLaw, ensemble_state, require_valid, validate
from .errors import ContractError, ResourceError
from .modelio import BUILTIN_MODELS, builtin_model, load_model
from .numkit import Limits, entropy_from_spectrum, hermitian_eigvals, shannon_entropy
from .qmc import EntropyReport, EntropyRow, dynamical_entropy, system_for_model

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3

FORMATS = ("table", "csv", "json")

TRINE_GOLDEN = [1.0, 0.9528, 0.9306, 0.9169, 0.9076, 0.9008, 0.8957, 0.8918, 0.8886, 0.8861, 0.8839, 0.8822]
TRINE_TOL = 5e-4
TRINE_RATE_CEILING = 0.8827


@dataclass
class RunConfig:
    command: str
    model_path: str = None
    builtin: str = None
    k: int = None
    k_max: int = None
    fmt: str = "table"
    out: str = None
    tol: float = None
    limits: Limits = field(default_factory=Limits)

    def __post_init__(self):
        if self.fmt not in FORMATS:
            raise ContractError(f"format must be one of {', '.join(FORMATS)}")
        for name in ("k", "k_max"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ContractError(f"--{name.replace('_', '')} must be >= 1")


def _fmt(x):
    if x is None:
        return "-"
    if isinstance(x, bool):
        return "yes" if x else "no"
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def render_table(header, rows):
    cells = [[_fmt(c) for c in row] for row in rows]
    widths = [max(len(h), *(len(r[i]) for r in cells)) if cells else len(h) for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    return "\n".join(lines) + "\n"


def _csv(header, rows):
    def cell(x):
        if x is None:
            return ""
        if isinstance(x, bool):
            return "true" if x else "false"
        return repr(x) if isinstance(x, float) else str(x)

    return "\n".join([",".join(header)] + [",".join(cell(c) for c in r) for r in rows]) + "\n"


def _emit(text, cfg):
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(cfg):
    if cfg.builtin and cfg.model_path:
        raise ContractError("use either --model or --builtin, not both")
    if cfg.builtin:
        return builtin_model(cfg.builtin)
    if cfg.model_path:
        return load_model(cfg.model_path)
    raise ContractError("a model is required: pass --model FILE or --builtin NAME")


def _k_range(cfg, default):
    if cfg.k is not None and cfg.k_max is not None:
        raise ContractError("use either --k or --kmax, not both")
    if cfg.k is not None:
        return [cfg.k]
    return list(range(1, (cfg.k_max or default) + 1))


def default_k_max(model, limits):
    """12 for Markov/IID laws, 8 for general laws, clipped to the matrix cap."""
    base = 8 if isinstance(model.law, GeneralLaw) else 12
    if model.d == 1:
        return base
    fit = int(math.floor(math.log(limits.max_dim) / math.log(model.d) + 1e-12))
    return max(1, min(base, fit))


def _report_text(report, cfg, with_codes):
    if cfg.fmt == "csv":
        return report.to_csv()
    if cfg.fmt == "json":
        return report.to_json()
    header = ["k", "S", "S/k"] + (["EL*_k", "bounds"] if with_codes else [])
    rows = [[r.k, r.S, r.S_per_k] + ([r.EL_star_k, r.bounds_ok] if with_codes else []) for r in report.rows]
    text = render_table(header, rows)
    if len(report.rows) > 1:
        text += f"limsup estimate (max of last {report.tail_window}): {report.limsup_estimate:.6g}\n"
    if not report.stationary:
        text += "warning: initial distribution is not stationary (Pp != p)\n"
    return text


def cmd_entropy(cfg):
    """``S(rho_{S^k})`` and ``S/k`` from the directly built ensemble state."""
    model = _load(cfg)
    require_valid(model)
    rows = []
    for k in _k_range(cfg, 1):
        w = hermitian_eigvals(ensemble_state(model, k, cfg.limits))
        S = entropy_from_spectrum(w)
        rows.append(EntropyRow(k, S, S / k))
    _emit(_report_text(EntropyReport(rows, system="ensemble"), cfg, False), cfg)
    return EXIT_OK


def cmd_optimal_length(cfg):
    """``EL*(rho_{S^k})``, ``EL*_k`` and the entropy sandwich."""
    model = _load(cfg)
    require_valid(model)
    results = []
    for k in _k_range(cfg, 1):
        w = hermitian_eigvals(ensemble_state(model, k, cfg.limits))
        S = entropy_from_spectrum(w)
        el = optimal_length_from_spectrum(w)
        ok = bool(S - 1e-9 <= el < S + 1)
        results.append({"k": k, "S": S, "EL_star": el, "EL_star_k": el / k, "lower": S / k,
                        "upper": S / k + 1 / k, "bounds_ok": ok})
    header = ["k", "S", "EL_star", "EL_star_k", "lower", "upper", "bounds_ok"]
    if cfg.fmt == "json":
        text = json.dumps({"rows": results}, indent=2) + "\n"
    elif cfg.fmt == "csv":
        text = _csv(header, [[r[h] for h in header] for r in results])
    else:
        text = render_table(["k", "S", "EL*", "EL*_k", "S/k", "S/k+1/k", "sandwich"],
                            [[r[h] for h in header] for r in results])
    _emit(text, cfg)
    return EXIT_OK if all(r["bounds_ok"] for r in results) else EXIT_MISMATCH


def cmd_dynamical_entropy(cfg):
    """``S(rho_k)/k`` from the quantum Markov chain, ``k = 1..kmax``."""
    model = _load(cfg)
    report_v = require_valid(model)
    k_max = cfg.k or cfg.k_max or default_k_max(model, cfg.limits)
    system = system_for_model(model, depth=k_max)
    report = dynamical_entropy(system, k_max, limits=cfg.limits)
    report.stationary = report_v.stationary
    _emit(_report_text(report, cfg, True), cfg)
    return EXIT_OK


def cmd_validate(cfg):
    model = _load(cfg)
    report = validate(model)
    header = ["check", "level", "passed", "residual", "detail"]
    rows = [[c.name, c.level, c.passed, float(c.residual), c.detail] for c in report.checks]
    if cfg.fmt == "json":
        text = json.dumps({"ok": report.ok, "checks": [dict(zip(header, r)) for r in rows]}, indent=2) + "\n"
    elif cfg.fmt == "csv":
        text = _csv(header, rows)
    else:
        text = render_table(header, rows) + ("valid\n" if report.ok else "INVALID\n")
    _emit(text, cfg)
    return EXIT_OK if report.ok else EXIT_MISMATCH


# ------------------------------------------------------------- reproduce


def _reproduce_rows(name, cfg):
    """Compute one built-in example; returns (rows, extra checks)."""
    model = builtin_model(name)
    checks = []
    if name == "trine":
        k_max = min(cfg.k_max or 12, 12)
        tol = cfg.tol if cfg.tol is not None else TRINE_TOL
        report = dynamical_entropy(system_for_model(model), k_max, limits=cfg.limits)
        rows = []
        for r, gold in zip(report.rows, TRINE_GOLDEN):
            diff = abs(r.S_per_k - gold)
            rows.append([r.k, r.S_per_k, gold, diff, diff <= tol])
        seq = report.per_symbol()
        checks.append(("strictly decreasing", all(b < a for a, b in zip(seq, seq[1:]))))
        if k_max == 12:
            checks.append((f"S(rho_12)/12 <= {TRINE_RATE_CEILING}", seq[-1] <= TRINE_RATE_CEILING))
        return rows, checks, "S_per_k"
    if name == "bell":
        k_max = min(cfg.k_max or 10, 12)
        tol = cfg.tol if cfg.tol is not None else 1e-9
        report = dynamical_entropy(system_for_model(model), k_max, limits=cfg.limits)
        rows = [[r.k, r.S, float(r.k), abs(r.S - r.k), abs(r.S - r.k) <= tol] for r in report.rows]
        checks.append(("EL*_k = 1", all(abs(r.EL_star_k - 1.0) <= tol for r in report.rows)))
        return rows, checks, "S"
    if name == "iid-demo":
        k_max = min(cfg.k_max or 8, 12)
        tol = cfg.tol if cfg.tol is not None else 1e-9
        report = dynamical_entropy(system_for_model(model), k_max, limits=cfg.limits)
        s1 = report.rows[0].S
        rows = [[r.k, r.S_per_k, s1, abs(r.S_per_k - s1), abs(r.S_per_k - s1) <= tol] for r in report.rows]
        checks.append(("EL*_k sandwich", all(r.bounds_ok for r in report.rows)))
        return rows, checks, "S_per_k"
    raise ContractError(f"unknown example {name!r}; choose from {', '.join(BUILTIN_MODELS)}")


def cmd_reproduce(cfg, name):
    rows, checks, quantity = _reproduce_rows(name, cfg)
    ok = all(r[-1] for r in rows) and all(c[1] for c in checks)
    header = ["k", quantity, "expected", "abs_diff", "ok"]
    if cfg.fmt == "json":
        text = json.dumps({
            "example": name,
            "passed": ok,
            "rows": [dict(zip(header, r)) for r in rows],
            "checks": [{"check": c, "ok": v} for c, v in checks],
        }, indent=2) + "\n"
    elif cfg.fmt == "csv":
        text = _csv(header, rows)
    else:
        text = render_table(header, rows)
        for c, v in checks:
            text += f"{c}: {'ok' if v else 'FAILED'}\n"
        text += f"{name}: {'PASS' if ok else 'FAIL'} ({len(rows)} comparisons)\n"
    _emit(text, cfg)
    return EXIT_OK if ok else EXIT_MISMATCH


# ------------------------------------------------------------ kraft / huffman


def _numbers(tokens, cast):
    out = []
    for tok in tokens:
        for part in tok.replace(",", " ").split():
            try:
                out.append(cast(part))
            except ValueError:
                raise ContractError(f"cannot parse {part!r}") from None
    if not out:
        raise ContractError("no values given")
    return out


def cmd_kraft(cfg, tokens):
    lengths = _numbers(tokens, int)
    if any(l < 1 for l in lengths):
        raise ContractError("codeword lengths must be >= 1")
    feasible = kraft_feasible(lengths)
    result = {"lengths": lengths, "kraft_sum": kraft_sum(lengths), "feasible": feasible}
    if feasible:
        code = kraft_converse(lengths)
        result["code"] = code.to_json()
        result["quantum_kraft_sum"] = quantum_kraft_sum(cq_scheme(code))
    if cfg.fmt == "json":
        text = json.dumps(result, indent=2) + "\n"
    elif cfg.fmt == "csv":
        words = result.get("code", {})
        text = _csv(["symbol", "length", "codeword"], [[i, l, words.get(str(i), "")] for i, l in enumerate(lengths)])
    else:
        text = f"lengths: {' '.join(map(str, lengths))}\nKraft sum: {result['kraft_sum']:.6g}\n"
        text += f"feasible: {'yes' if feasible else 'no'}\n"
        if feasible:
            text += "canonical prefix code: " + " ".join(f"{k}:{v}" for k, v in result["code"].items()) + "\n"
            text += f"c-q scheme Kraft sum: {result['quantum_kraft_sum']:.6g}\n"
    _emit(text, cfg)
    return EXIT_OK


def cmd_huffman(cfg, tokens):
    p = np.array(_numbers(tokens, float))
    code = huffman(p)
    el = code.expected_length(p)
    H = shannon_entropy(p)
    result = {"pmf": p.tolist(), "code": code.to_json(), "lengths": [code.lengths.get(i, 0) for i in range(p.size)],
              "expected_length": el, "entropy": H, "kraft_sum": kraft_sum(code.length_list())}
    if cfg.fmt == "json":
        text = json.dumps(result, indent=2) + "\n"
    elif cfg.fmt == "csv":
        text = _csv(["symbol", "p", "length", "codeword"],
                    [[i, float(p[i]), code.lengths.get(i, 0), code.codewords.get(i, "")] for i in range(p.size)])
    else:
        text = render_table(["symbol", "p", "length", "codeword"],
                            [[i, float(p[i]), code.lengths.get(i, 0), code.codewords.get(i, "-")] for i in range(p.size)])
        text += f"expected length: {el:.6g}\nentropy: {H:.6g}\nKraft sum: {result['kraft_sum']:.6g}\n"
    _emit(text, cfg)
    return EXIT_OK


# ----------------------------------------------------------------- parser


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qdcomp",
        description="Optimal lossless compression rates of quantum stochastic ensembles.",
        epilog="Arguments may be read from a file with @FILE (one per line).",
        fromfile_prefix_chars="@",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", dest="fmt", choices=FORMATS, default="table")
    common.add_argument("--out", metavar="FILE")
    common.add_argument("--max-dim", type=int, default=Limits.max_dim, metavar="INT")
    common.add_argument("--max-enum", type=int, default=Limits.max_enum, metavar="INT")

    model_args = argparse.ArgumentParser(add_help=False)
    model_args.add_argument("--model", metavar="FILE", help="JSON model file")
    model_args.add_argument("--builtin", choices=sorted(BUILTIN_MODELS), help="built-in example model")
    ks = model_args.add_mutually_exclusive_group()
    ks.add_argument("--k", type=int, metavar="INT")
    ks.add_argument("--kmax", dest="k_max", type=int, metavar="INT")

    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    sub.add_parser("entropy", parents=[common, model_args], help="von Neumann entropy of rho_{S^k}")
    sub.add_parser("optimal-length", parents=[common, model_args], help="optimal average codeword length EL*_k")
    sub.add_parser("dynamical-entropy", parents=[common, model_args], help="S(rho_k)/k table from the quantum Markov chain")
    sub.add_parser("validate", parents=[common, model_args], help="check model invariants")
    rp = sub.add_parser("reproduce", parents=[common], help="re-run a worked example against golden values")
    rp.add_argument("name", choices=sorted(BUILTIN_MODELS))
    rp.add_argument("--kmax", dest="k_max", type=int, metavar="INT")
    rp.add_argument("--tol", type=float, help="override the comparison tolerance")
    kp = sub.add_parser("kraft", parents=[common], help="Kraft sum and canonical prefix code for lengths")
    kp.add_argument("lengths", nargs="+", help="codeword lengths, e.g. 1,2,2")
    hp = sub.add_parser("huffman", parents=[common], help="Huffman code for a pmf")
    hp.add_argument("pmf", nargs="+", help="probabilities, e.g. 0.5,0.25,0.25")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(
            command=args.command,
            model_path=getattr(args, "model", None),
            builtin=getattr(args, "builtin", None),
            k=getattr(args, "k", None),
            k_max=getattr(args, "k_max", None),
            fmt=args.fmt,
            out=args.out,
            tol=getattr(args, "tol", None),
            limits=Limits(args.max_dim, args.max_enum),
        )
        if args.command == "entropy":
            return cmd_entropy(cfg)
        if args.command == "optimal-length":
            return cmd_optimal_length(cfg)
        if args.command == "dynamical-entropy":
            return cmd_dynamical_entropy(cfg)
        if args.command == "validate":
            return cmd_validate(cfg)
        if args.command == "reproduce":
            return cmd_reproduce(cfg, args.name)
        if args.command == "kraft":
            return cmd_kraft(cfg, args.lengths)
        return cmd_huffman(cfg, args.pmf)
    except ResourceError as exc:
        print(f"qdcomp: resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ContractError as exc:
        print(f"qdcomp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
