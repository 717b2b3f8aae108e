"""Command-line surface: analyze, convert, oracle, diag, check.

Exit codes: 0 every queried variable is polynomial; 2 some variable is
super-polynomial or unbounded; 1 invalid input; 3 internal assertion.
FCGROW_LOG selects the log level (error, info, debug).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

from . import converter, dep_domain as dd, fc_model as fc, lare_model as lm
from . import matrix_check as mx, parsing, printing, report as rp, trace_oracle as orc
from .errors import (AnalysisError, ConversionError, FcgrowError,
                     IllFormedLare, InvalidProgram, ParseError)

log = logging.getLogger("fcgrow")


def _setup_logging() -> None:
    level = {"error": logging.ERROR, "info": logging.INFO,
             "debug": logging.DEBUG}.get(os.environ.get("FCGROW_LOG", "error"),
                                         logging.ERROR)
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="fcgrow: %(levelname)s: %(message)s")


def _detect_format(path: str, override: str | None) -> str:
    if override:
        return override
    for ext, fmt in ((".fc", "fc"), (".lare", "lare"), (".loop", "loop")):
        if path.endswith(ext):
            return fmt
    raise FcgrowError(f"cannot infer format of {path!r}; pass --format")


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write_out(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_expr(text: str, fmt: str) -> lm.LareExpr:
    if fmt == "lare":
        return parsing.parse_lare(text)
    if fmt == "loop":
        return lm.embed_structured(parsing.parse_loop(text))
    raise FcgrowError(f"format {fmt!r} is not an expression")


def _analyze_expr(e: lm.LareExpr):
    n = lm.max_var(e)
    e2, n_eff, huge_vars = lm.rewrite_huge(e, n)
    deps = dd.analyze_lare(e2, n_eff)
    rep = dd.classify(deps, n_eff, huge_vars)
    return deps, rep, n_eff


def _dot_graph(g: converter.LabeledGraph) -> str:
    lines = ["digraph work {"]
    for a in sorted(g.arcs, key=lambda a: a.seq):
        src, dst = converter._node_key(a.src), converter._node_key(a.dst)
        val = a.label.val
        if isinstance(val, frozenset):
            label = f"{len(val)} deps"
        else:
            label = printing.print_lare(val)
        label = label.replace('"', "'")
        if len(label) > 40:
            label = label[:37] + "..."
        lines.append(f'  "{src}" -> "{dst}" [label="{label}"];')
    for e in sorted(g.entries, key=converter._node_key):
        lines.append(f'  "{converter._node_key(e)}" [shape=diamond];')
    for x in sorted(g.exits, key=converter._node_key):
        lines.append(f'  "{converter._node_key(x)}" [shape=doublecircle];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _stage_writer(prefix: str | None):
    if not prefix:
        return None
    counter = [0]

    def hook(stage: str, g: converter.LabeledGraph) -> None:
        path = f"{prefix}.{counter[0]:02d}.{stage}.dot"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(_dot_graph(g))
        counter[0] += 1

    return hook


def cmd_analyze(args) -> int:
    text = _read(args.input)
    fmt = _detect_format(args.input, args.format)
    t0 = time.perf_counter()
    if fmt == "fc":
        p = parsing.parse_fc(text)
        hook = _stage_writer(args.emit_dot if args.trace_stages else None)
        if args.mode == "fused":
            fused = converter.analyze_fc_fused(p, stage_hook=hook)
            pairs = [rp.PairSummary(e, x, fused.deps[(e, x)], fused.reports[(e, x)])
                     for (e, x) in sorted(fused.deps)]
            combined, warnings = fused.combined, fused.warnings
        else:
            conv = converter.convert_fc_explicit(p, budget=args.budget,
                                                 stage_hook=hook)
            pairs = []
            reports = []
            for (e, x) in sorted(conv.labels):
                expr = conv.labels[(e, x)]
                deps, vrep, _ = _analyze_expr(expr)
                pairs.append(rp.PairSummary(e, x, deps, vrep))
                reports.append(vrep)
            combined = dd.worst_report(reports)
            warnings = conv.warnings
            if args.emit_lare:
                chunks = []
                for (e, x) in sorted(conv.labels):
                    chunks.append(f"## pair {e} -> {x}")
                    chunks.append(printing.print_lare(conv.labels[(e, x)]))
                with open(args.emit_lare, "w", encoding="utf-8") as fh:
                    fh.write("\n".join(chunks) + "\n")
    else:
        e = _load_expr(text, fmt)
        deps, vrep, _ = _analyze_expr(e)
        pairs = [rp.PairSummary("in", "out", deps, vrep)]
        combined, warnings = vrep, []
    doc = rp.ReportDocument(rp.input_digest(text), fmt, args.mode, pairs,
                            combined, warnings,
                            timing_ms=(time.perf_counter() - t0) * 1e3)
    log.info("analysis took %.1f ms", doc.timing_ms)
    _write_out(doc.to_json() if args.json else doc.to_text(), args.out)
    return doc.exit_code


def cmd_convert(args) -> int:
    text = _read(args.input)
    fmt = _detect_format(args.input, args.format)
    if fmt != "fc":
        raise FcgrowError("convert expects a flowchart input")
    p = parsing.parse_fc(text)
    hook = _stage_writer(args.emit_dot if args.trace_stages else None)
    conv = converter.convert_fc_explicit(p, budget=args.budget, stage_hook=hook)
    chunks = []
    for (e, x) in sorted(conv.labels):
        chunks.append(f"## pair {e} -> {x}")
        chunks.append(printing.print_lare(conv.labels[(e, x)]))
    for w in conv.warnings:
        chunks.append(f"## warning: {w}")
    _write_out("\n".join(chunks) + "\n", args.out)
    return 0


def cmd_oracle(args) -> int:
    text = _read(args.input)
    fmt = _detect_format(args.input, args.format)
    prog = parsing.parse_fc(text) if fmt == "fc" else _load_expr(text, fmt)
    scales = [int(tok) for tok in args.init.split(",")]
    caps = orc.EnumCaps(max_len=args.max_len, huge_val=args.huge,
                        seed=args.seed, budget=args.budget)
    if len(scales) >= 3:
        probe = orc.growth_probe(prog, args.var, scales, caps)
        payload = probe.to_json_dict()
        verdict_line = (f"x{args.var}: {probe.verdict} values={list(probe.values)}"
                        f" truncated={probe.truncated}")
    else:
        nvars = prog.n if isinstance(prog, fc.FlowchartProgram) else lm.max_var(prog)
        init = tuple(scales * nvars)[:nvars] if len(scales) == 1 else tuple(scales)
        res = orc.max_final(prog, args.var, init, caps)
        payload = {"var": args.var, "scales": scales, "values": [res.value],
                   "verdict": "Inconclusive", "truncated": res.truncated,
                   "witness": None if res.witness is None
                   else [list(s) for _, s in res.witness.steps]}
        verdict_line = f"x{args.var}: max={res.value} truncated={res.truncated}"
    if args.json:
        _write_out(json.dumps(payload, sort_keys=True, indent=2) + "\n", args.out)
    else:
        _write_out(verdict_line + "\n", args.out)
    return 0


def cmd_diag(args) -> int:
    text = _read(args.input)
    fmt = _detect_format(args.input, args.format)
    if fmt == "fc":
        p = parsing.parse_fc(text)
        fused = converter.analyze_fc_fused(p)
        sets = {f"{e}->{x}": s for (e, x), s in sorted(fused.deps.items())}
        n_eff = fused.n_eff
    else:
        e = _load_expr(text, fmt)
        deps, _, n_eff = _analyze_expr(e)
        sets = {"in->out": deps}
    chunks = []
    for name, s in sets.items():
        chunks.append(f"## {name}")
        chunks.append(dd.format_depset(s))
        if args.matrices:
            if n_eff > mx.SOM_MAX_N:
                raise FcgrowError(
                    f"--matrices needs n <= {mx.SOM_MAX_N} (got {n_eff})")
            for a in sorted(mx.som(s, n_eff)):
                chunks.append("matrix:")
                chunks.append(mx.format_matrix(a))
        if args.srg:
            g = mx.build_srg(s, n_eff)
            with open(args.srg, "w", encoding="utf-8") as fh:
                fh.write(mx.srg_dot(g))
            chunks.append(f"## srg written to {args.srg}")
    _write_out("\n".join(chunks) + "\n", args.out)
    return 0


def cmd_check(args) -> int:
    text = _read(args.input)
    fmt = _detect_format(args.input, args.format)
    if fmt == "fc":
        p = parsing.parse_fc(text)
        violations = fc.validate_program(p)
        if violations:
            _write_out("\n".join(str(v) for v in violations) + "\n", args.out)
            return rp.EXIT_INVALID
    else:
        e = _load_expr(text, fmt)
        bad = lm.wf_check(e, lm.max_var(e))
        if bad:
            _write_out("\n".join(str(v) for v in bad) + "\n", args.out)
            return rp.EXIT_INVALID
    _write_out("ok\n", args.out)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fcgrow")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--input", required=True)
        sp.add_argument("--format", choices=["fc", "lare", "loop"])
        sp.add_argument("--json", action="store_true")
        sp.add_argument("--out")

    sp = sub.add_parser("analyze", help="growth-rate analysis (fused by default)")
    common(sp)
    sp.add_argument("--mode", choices=["fused", "explicit"], default="fused")
    sp.add_argument("--budget", type=int, default=converter.DEFAULT_BUDGET)
    sp.add_argument("--emit-lare", metavar="PATH")
    sp.add_argument("--emit-dot", metavar="PREFIX")
    sp.add_argument("--trace-stages", action="store_true")
    sp.set_defaults(fn=cmd_analyze)

    sp = sub.add_parser("convert", help="emit the explicit LARE per (entry, exit)")
    common(sp)
    sp.add_argument("--budget", type=int, default=converter.DEFAULT_BUDGET)
    sp.add_argument("--emit-dot", metavar="PREFIX")
    sp.add_argument("--trace-stages", action="store_true")
    sp.set_defaults(fn=cmd_convert)

    sp = sub.add_parser("oracle", help="concrete-semantics growth probe")
    common(sp)
    sp.add_argument("--var", type=int, required=True)
    sp.add_argument("--init", required=True, metavar="N[,N...]")
    sp.add_argument("--huge", type=int, default=8)
    sp.add_argument("--max-len", type=int, default=200)
    sp.add_argument("--budget", type=int)
    sp.add_argument("--seed", type=int)
    sp.set_defaults(fn=cmd_oracle)

    sp = sub.add_parser("diag", help="dependency sets, matrices, size-relation graph")
    common(sp)
    sp.add_argument("--matrices", action="store_true")
    sp.add_argument("--srg", metavar="PATH")
    sp.set_defaults(fn=cmd_diag)

    sp = sub.add_parser("check", help="parse and validate only")
    common(sp)
    sp.set_defaults(fn=cmd_check)
    return ap


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ParseError, InvalidProgram, IllFormedLare, ConversionError,
            FileNotFoundError) as exc:
        _emit_error(args, "invalid-input", exc)
        return rp.EXIT_INVALID
    except AnalysisError as exc:
        _emit_error(args, "internal", exc)
        return rp.EXIT_INTERNAL
    except FcgrowError as exc:
        _emit_error(args, "invalid-input", exc)
        return rp.EXIT_INVALID


def _emit_error(args, kind: str, exc: Exception) -> None:
    if getattr(args, "json", False):
        doc = {"schema": rp.SCHEMA, "error": {"kind": kind, "message": str(exc)}}
        sys.stdout.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    else:
        sys.stderr.write(f"fcgrow: {kind}: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
