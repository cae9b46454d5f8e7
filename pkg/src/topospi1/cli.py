"""Command-line interface.

Every command writes JSON (or a text rendering of the same JSON) to stdout.
Exit codes: 0 success, 1 mathematical failure, 2 input error, 3 cap skip.
Errors are reported on stderr as a JSON object.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .errors import CapExceeded, InputError, ToposError
from .finiteness import analyze
from .galois import fibre, galois_covering, is_galois, reconstruct_fibre
from .grp import FinitePresentation, truncated_completion
from .io import (
    dumps,
    group_to_json,
    load_json,
    map_to_json,
    read_functor,
    read_group,
    read_presentation,
    read_presheaf,
    read_site,
)
from .pi1 import bg_roundtrip, fundamental_group, induced_map, route_agreement
from .verify import SUITES, RunConfig, run_replay, run_verify


def _text(obj: Any, indent: str = "") -> list[str]:
    """Plain rendering of a JSON value, one scalar per line."""
    lines = []
    if isinstance(obj, dict):
        for k in sorted(obj):
            v = obj[k]
            if isinstance(v, (dict, list)) and v and not all(isinstance(x, (int, str, bool)) or x is None for x in v):
                lines.append(f"{indent}{k}:")
                lines.extend(_text(v, indent + "  "))
            else:
                lines.append(f"{indent}{k}: {json.dumps(v)}")
    elif isinstance(obj, list):
        for k, v in enumerate(obj):
            lines.append(f"{indent}- [{k}]")
            lines.extend(_text(v, indent + "  "))
    else:
        lines.append(f"{indent}{json.dumps(obj)}")
    return lines


def emit(obj: Any, fmt: str, text: str | None = None) -> None:
    if fmt == "text":
        sys.stdout.write((text if text is not None else "\n".join(_text(obj))) + "\n")
    else:
        sys.stdout.write(dumps(obj))


def _config(args: argparse.Namespace) -> RunConfig:
    env = RunConfig.env_caps()
    vals = {}
    for key in ("cap_lattice", "cap_hom", "cap_order", "bound"):
        v = getattr(args, key, None)
        if v is None:
            v = env.get(key)
        if v is not None:
            vals[key] = v
    try:
        return RunConfig(seed=args.seed, format=args.format, route=getattr(args, "route", "both"),
                         mutations=tuple(getattr(args, "mutate", None) or ()), **vals)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _load(path: str) -> tuple[Any, Path]:
    p = Path(path)
    return load_json(p), p.parent


def _presheaf(path: str):
    raw, base = _load(path)
    return read_presheaf(raw, base)


# --------------------------------------------------------------------------
# commands


def _kind(raw: Any) -> str:
    if not isinstance(raw, dict):
        raise InputError("top-level JSON value must be an object")
    if "sets" in raw:
        return "presheaf"
    if "relators" in raw or ("generators" in raw and raw["generators"] and isinstance(raw["generators"][0], str)):
        return "presentation"
    if "table" in raw or "generators" in raw:
        return "group"
    if "objects" in raw and "source" not in raw:
        return "site"
    if "source" in raw or "group_hom" in raw:
        return "functor"
    if "group" in raw:
        return "site"
    raise InputError("cannot tell what kind of object this file describes")


def cmd_validate(args, cfg: RunConfig) -> int:
    raw, base = _load(args.path)
    kind = args.kind or _kind(raw)
    out: dict[str, Any] = {"valid": True, "kind": kind}
    if kind == "group":
        G = read_group(raw)
        out["order"] = G.order
    elif kind == "presentation":
        P = read_presentation(raw)
        out["generators"] = list(P.generators)
    elif kind == "site":
        C = read_site(raw, base)
        out["objects"] = len(C.objects)
        out["morphisms"] = len(C.morphisms)
    elif kind == "presheaf":
        X = read_presheaf(raw, base)
        out["total_size"] = X.total_size
    elif kind == "functor":
        u = read_functor(raw, base)
        out["source"] = u.src.name
        out["target"] = u.tgt.name
    else:
        raise InputError(f"unknown kind {kind!r}")
    emit(out, cfg.format)
    return 0


def cmd_analyze(args, cfg: RunConfig) -> int:
    X = _presheaf(args.path)
    rep = analyze(X, cfg.cap_lattice, with_witnesses=args.witnesses)
    emit(rep.to_json(), cfg.format, rep.to_text())
    return 0 if rep.fully_decided else 3


def cmd_galois_covering(args, cfg: RunConfig) -> int:
    X = _presheaf(args.path)
    cov = galois_covering(X, cap=cfg.cap_order)
    cert = is_galois(cov.covering, cap=cfg.cap_order)
    out = cov.to_json()
    out["certificate"] = cert.to_json()
    emit(out, cfg.format)
    return 0


def cmd_fibre(args, cfg: RunConfig) -> int:
    X = _presheaf(args.path)
    fr = fibre(X, galois_covering(X, cap=cfg.cap_order), cap=cfg.cap_hom)
    out = fr.to_json()
    out["transitive"] = fr.is_transitive()
    emit(out, cfg.format)
    return 0


def cmd_reconstruct(args, cfg: RunConfig) -> int:
    X = _presheaf(args.path)
    fr = fibre(X, galois_covering(X, cap=cfg.cap_order), cap=cfg.cap_hom)
    rec = reconstruct_fibre(X, fr)
    out = {
        "fibre_size": fr.size,
        "reconstruction": rec.obj.to_json(inline_site=False),
        "isomorphic": rec.iso is not None,
        "isomorphism": map_to_json(rec.iso) if rec.iso is not None else None,
    }
    emit(out, cfg.format)
    return 0 if rec.iso is not None else 1


def cmd_pi1(args, cfg: RunConfig) -> int:
    raw, base = _load(args.path)
    C = read_site(raw, base)
    m = cfg.bound
    cap = max(6, m)
    out: dict[str, Any] = {"bound": m}
    agree = None
    if cfg.route in ("galois", "both"):
        fg = fundamental_group(C, m, cap)
        out["limit"] = group_to_json(fg.group)
        out["generator_images"] = fg.to_json()["generator_images"]
        out["system"] = fg.system.to_json()["entries"]
        out["edges"] = fg.system.to_json()["edges"]
    if cfg.route in ("cores", "both"):
        from .pi1 import pi1_presentation

        comp = truncated_completion(pi1_presentation(C).presentation, m, cap)
        out["completion"] = comp.to_json()
        if cfg.route == "cores":
            out["limit"] = group_to_json(comp.group)
            out["system"] = [{"degree": a.degree, "perms": [list(p) for p in a.perms]} for a in comp.actions]
    if cfg.route == "both":
        ra = route_agreement(C, m, cap, fg)
        agree = ra.agree
        out["route_witness"] = ra.to_json()["witness"]
    out["agreement"] = agree
    emit(out, cfg.format)
    return 1 if agree is False else 0


def cmd_induced(args, cfg: RunConfig) -> int:
    raw, base = _load(args.path)
    u = read_functor(raw, base)
    im = induced_map(u, cfg.bound, cap=max(6, cfg.bound))
    out = im.to_json()
    out["source"] = group_to_json(im.source.group)
    out["target"] = group_to_json(im.target.group)
    emit(out, cfg.format)
    return 0


def cmd_bg(args, cfg: RunConfig) -> int:
    raw, _ = _load(args.path)
    G = read_group(raw)
    r = bg_roundtrip(G)
    out = r.to_json()
    out["limit"] = group_to_json(r.fundamental.group)
    emit(out, cfg.format)
    return 0 if r.ok else 1


def cmd_completion(args, cfg: RunConfig) -> int:
    raw, _ = _load(args.path)
    P: FinitePresentation = read_presentation(raw)
    comp = truncated_completion(P, cfg.bound, cap=max(6, cfg.bound))
    emit(comp.to_json(), cfg.format)
    return 0


def cmd_verify(args, cfg: RunConfig) -> int:
    if args.replay:
        msg = run_replay(args.replay, cfg)
        out = {"replay": args.replay, "failed": msg is not None, "message": msg}
        emit(out, cfg.format)
        return 1 if msg is not None else 0
    suites: list[str] = []
    for s in args.suite or ["all"]:
        suites.extend(x for x in s.split(",") if x)
    try:
        rep = run_verify(suites, cfg, Path(args.out_dir) if args.out_dir else None)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    emit(rep.to_json(), cfg.format, rep.to_text())
    return 0 if rep.ok else 1


COMMANDS = {
    "validate": (cmd_validate, "check a group, presentation, site, presheaf or functor file"),
    "analyze": (cmd_analyze, "finiteness report for a presheaf"),
    "galois-covering": (cmd_galois_covering, "Galois object covering a locally constant presheaf"),
    "fibre": (cmd_fibre, "fibre functor value with the automorphism action"),
    "reconstruct": (cmd_reconstruct, "rebuild a presheaf from its fibre"),
    "pi1": (cmd_pi1, "bounded profinite fundamental group of a connected site"),
    "induced": (cmd_induced, "map of fundamental groups induced by a functor"),
    "bg": (cmd_bg, "fundamental group of a classifying site and reconstruction check"),
    "completion": (cmd_completion, "finite quotient of a presented group by low-index kernels"),
    "verify": (cmd_verify, "run the property suites"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--bound", type=int, default=None, help="degree bound m (default 6)")
    common.add_argument("--cap-lattice", dest="cap_lattice", type=int, default=None)
    common.add_argument("--cap-hom", dest="cap_hom", type=int, default=None)
    common.add_argument("--cap-order", dest="cap_order", type=int, default=None)

    p = argparse.ArgumentParser(prog="topospi1", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"topospi1 {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        sp = sub.add_parser(name, parents=[common], help=help_)
        if name != "verify":
            sp.add_argument("path")
        if name == "validate":
            sp.add_argument("--kind", choices=("group", "presentation", "site", "presheaf", "functor"))
        if name == "analyze":
            sp.add_argument("--witnesses", action="store_true")
        if name == "pi1":
            sp.add_argument("--route", choices=("galois", "cores", "both"), default="both")
        if name == "verify":
            sp.add_argument("--suite", action="append", help=f"one of {', '.join(SUITES)} or all; repeatable")
            sp.add_argument("--replay", metavar="FILE", help="re-run a counterexample file")
            sp.add_argument("--out-dir", dest="out_dir", default=None,
                            help="directory for counterexample files (default ./counterexamples)")
            sp.add_argument("--mutate", action="append", choices=("quotient",),
                            help="deliberately corrupt an operation to test the harness")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cmd = COMMANDS[args.command][0]
    try:
        cfg = _config(args)
        return cmd(args, cfg)
    except ToposError as exc:
        sys.stderr.write(json.dumps(exc.to_json(), sort_keys=True) + "\n")
        return exc.exit_code
    except RecursionError:
        err = CapExceeded("input too large for the search")
        sys.stderr.write(json.dumps(err.to_json(), sort_keys=True) + "\n")
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())
