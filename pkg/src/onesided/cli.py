"""Command line entry points producing JSON run reports.

Seed splitting (all streams derive from the single ``--seed`` value s):
  gen             generator streams [s, 101..127] (per generator kind)
  plant           coloring draw [s, 1]
  recover-*       planting [s, 1], net [s, 11], heuristic clustering [s, 23]
  color, color3   net [s, 11], heuristic clustering [s, 23]
  indep-set       net [s, 31]

Exit codes: 0 success, 1 input error, 2 algorithmic failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .coloring import color_3_expander, color_expander, find_independent_set
from .errors import AlgorithmFailure, InputError
from .graph_core import (
    Partition,
    coloring_quality,
    load_graph,
    load_partition,
    model_matrix,
    normalized_adjacency,
    permutation_match,
    save_graph,
    save_partition,
)
from .instances import GeneratorSpec
from .planting import load_planted, plant_k_coloring, recover_full, recover_partial_list, save_planted
from .recovery import RecoveryParams
from .spectral import eig_sym, threshold_rank, verify_rank_inequality

COMMANDS = ("gen", "spectrum", "rank-check", "color", "color3", "indep-set", "plant",
            "recover-partial", "recover-full", "eval")

DEFAULTS = {
    "lam": 0.4, "eta": 0.05, "net_resolution": 0.5, "rank_cap": 8, "max_candidates": 20000,
    "seed": 0, "mode": "auto", "sigma": 0.5, "tau": None, "gamma": 0.05,
}


# ------------------------------------------------------------------ JSON


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_dict"):
        return _plain(obj.to_dict())
    return str(obj)


def _emit(obj, out, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, key in enumerate(sorted(obj)):
            out.append(pad + json.dumps(key) + ": ")
            _emit(obj[key], out, indent, level + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, list):
        if not obj or all(not isinstance(v, (dict, list)) for v in obj):
            out.append("[" + ", ".join(_scalar(v) for v in obj) + "]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad)
            _emit(v, out, indent, level + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "]")
    else:
        out.append(_scalar(obj))


def _scalar(v) -> str:
    if isinstance(v, float):
        if math.isnan(v) or math.isinf(v):
            return "null"
        text = "%.17g" % v
        return text if any(c in text for c in ".en") else text + ".0"
    return json.dumps(v)


def dumps(obj, indent=2) -> str:
    """JSON with sorted keys and floats at 17 significant digits."""
    out: list = []
    _emit(_plain(obj), out, indent, 0)
    return "".join(out) + "\n"


# ------------------------------------------------------------------ report


@dataclass
class RunReport:
    command: str
    parameters: dict
    seed: int
    spectra: dict = field(default_factory=dict)
    result: dict = field(default_factory=dict)
    agreement: dict = field(default_factory=dict)
    wall_time: float = 0.0
    exit_code: int = 0
    error: str = ""

    def payload(self) -> dict:
        """Everything except the wall time; identical across reruns."""
        out = {
            "command": self.command, "parameters": self.parameters, "seed": self.seed,
            "spectra": self.spectra, "result": self.result, "agreement": self.agreement,
            "exit_code": self.exit_code, "version": __version__,
        }
        if self.error:
            out["error"] = self.error
        return out

    def to_dict(self):
        return dict(self.payload(), wall_time=self.wall_time)

    def to_json(self) -> str:
        return dumps(self.to_dict())


# ------------------------------------------------------------------ helpers


def _need(cfg, *keys):
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise InputError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def _params(cfg, k=None) -> RecoveryParams:
    p = RecoveryParams(
        lam=float(cfg["lam"]), eta=float(cfg["eta"]), net_resolution=float(cfg["net_resolution"]),
        rank_cap=int(cfg["rank_cap"]), max_candidates=int(cfg["max_candidates"]), seed=int(cfg["seed"]),
        mode=cfg["mode"],
    )
    if cfg.get("min_class_fraction") is not None:
        p.min_class_fraction = float(cfg["min_class_fraction"])
    elif k is not None:
        p.min_class_fraction = min(p.min_class_fraction, 1.0 / k)
    return p.validate(k)


def spectra_summary(g, lam, taus=()):
    spec = eig_sym(normalized_adjacency(g))
    ev = spec.eigenvalues
    out = {
        "lambda2": ev[1] if len(ev) > 1 else None,
        "lambda3": ev[2] if len(ev) > 2 else None,
        "lambda_min": ev[-1] if len(ev) else None,
        "top_rank": {str(lam): threshold_rank(spec, lam, "top")},
        "bottom_rank": {str(lam): threshold_rank(spec, lam, "bottom")},
    }
    for t in taus:
        out["top_rank"][str(t)] = threshold_rank(spec, t, "top")
        out["bottom_rank"][str(t)] = threshold_rank(spec, t, "bottom")
    return spec, out


def _load_model(value):
    if value is None:
        return None
    if isinstance(value, (list, tuple)):
        return np.array(value, dtype=float)
    text = Path(value).read_text() if Path(str(value)).exists() else str(value)
    try:
        return np.array(json.loads(text), dtype=float)
    except json.JSONDecodeError as exc:
        raise InputError(f"model matrix is not valid JSON: {exc}") from exc


def _reference(cfg, n):
    return load_partition(cfg["partition"], n=n) if cfg.get("partition") else None


def _agreement(reference, result):
    if reference is None:
        return {}
    perm, ag = permutation_match(reference, result)
    return {"agreement": ag, "permutation": list(perm)}


# ------------------------------------------------------------------ commands

GEN_KEYS = {
    "regular": ("n", "d", "max_lambda2"), "er": ("n", "p"), "sbm": ("n", "d"),
    "biregular": ("n1", "n2", "d1"), "indset": ("n", "d", "gamma"),
    "blowup": ("eps", "degree"), "lambda3": ("eps",),
}


def cmd_gen(cfg, rep):
    if cfg.get("generator"):
        gs = GeneratorSpec.from_dict(cfg["generator"])
    else:
        _need(cfg, "kind")
        keys = GEN_KEYS.get(cfg["kind"], ())
        params = {key: cfg[key] for key in keys if cfg.get(key) is not None}
        if cfg.get("model") is not None:
            params["M"] = _load_model(cfg["model"]).tolist()
        if cfg.get("base") is not None:
            params["base"] = cfg["base"]
        gs = GeneratorSpec(cfg["kind"], params, int(cfg["seed"])).validate()
    g, part, extra = gs.build(base_loader=load_graph)
    _, rep.spectra = spectra_summary(g, float(cfg["lam"]))
    rep.result = {"n": g.n, "m": g.m, "regular": g.is_regular, "min_degree": g.degree.min(),
                  "max_degree": g.degree.max(), "generator": json.loads(gs.to_json()), **extra}
    if cfg.get("emit"):
        prefix = str(cfg["emit"])
        save_graph(g, prefix + ".el")
        if part is not None:
            save_partition(part, prefix + ".part")
        Path(prefix + ".manifest.json").write_text(dumps({"generator": json.loads(gs.to_json()), "seed": gs.seed}))
        rep.result["emitted"] = prefix


def cmd_spectrum(cfg, rep):
    _need(cfg, "input")
    g = load_graph(cfg["input"])
    taus = [float(cfg["tau"])] if cfg.get("tau") is not None else []
    spec, rep.spectra = spectra_summary(g, float(cfg["lam"]), taus)
    rep.result = {"eigenvalues": spec.eigenvalues, "residual": spec.residual(),
                  "orthogonality_error": spec.orthogonality_error()}


def cmd_rank_check(cfg, rep):
    _need(cfg, "input", "tau")
    g = load_graph(cfg["input"])
    spec = eig_sym(normalized_adjacency(g))
    taus = cfg["tau"] if isinstance(cfg["tau"], list) else [cfg["tau"]]
    sigmas = cfg["sigma"] if isinstance(cfg["sigma"], list) else [cfg["sigma"]]
    reports = [verify_rank_inequality(spec, float(t), float(s)).to_dict() for t in taus for s in sigmas]
    rep.spectra = {"lambda2": spec.lambda2(), "lambda_min": spec.lambda_min()}
    rep.result = reports[0] if len(reports) == 1 else {"reports": reports, "holds": all(r["holds"] for r in reports)}


def cmd_color(cfg, rep):
    _need(cfg, "input", "k")
    g = load_graph(cfg["input"])
    k = int(cfg["k"])
    res = color_expander(g, k, _params(cfg, k), sigma=float(cfg["sigma"]))
    _, rep.spectra = spectra_summary(g, float(cfg["lam"]))
    rep.result = res.to_dict()
    rep.agreement = _agreement(_reference(cfg, g.n), res)


def cmd_color3(cfg, rep):
    _need(cfg, "input", "gamma")
    g = load_graph(cfg["input"])
    res = color_3_expander(g, float(cfg["gamma"]), _params(cfg))
    _, rep.spectra = spectra_summary(g, float(cfg["lam"]))
    rep.result = res.to_dict()
    rep.agreement = _agreement(_reference(cfg, g.n), res)


def cmd_indep_set(cfg, rep):
    _need(cfg, "input", "gamma")
    g = load_graph(cfg["input"])
    S, info = find_independent_set(g, float(cfg["gamma"]), float(cfg["lam"]), int(cfg["rank_cap"]),
                                   _params(cfg), return_info=True)
    _, rep.spectra = spectra_summary(g, float(cfg["lam"]))
    rep.result = {"independent_set": S, "size": len(S), "fraction": len(S) / g.n,
                  "bottom_rank": info.bottom_rank, "net_resolution": info.resolution,
                  "net_size": info.candidates, "guarantee": info.guarantee}


def _planted_from_cfg(cfg):
    if cfg.get("planted"):
        return load_planted(cfg["planted"])
    _need(cfg, "host", "k")
    inst = plant_k_coloring(load_graph(cfg["host"]), int(cfg["k"]), int(cfg["seed"]))
    if cfg.get("d") is not None:
        from .planting import PlantedInstance
        inst = PlantedInstance(inst.host, inst.planted, inst.graph, float(cfg["d"]), inst.seed)
    return inst


def cmd_plant(cfg, rep):
    inst = _planted_from_cfg(cfg)
    rep.result = {"n": inst.graph.n, "k": inst.k, "d": inst.d, "host_edges": inst.host.m,
                  "removed_edges": inst.removed, "class_sizes": inst.planted.class_sizes}
    if cfg.get("emit"):
        prefix = str(cfg["emit"])
        save_planted(inst, prefix)
        save_graph(inst.graph, prefix + ".el")
        rep.result["emitted"] = prefix


def cmd_recover_partial(cfg, rep):
    if cfg.get("host") or cfg.get("planted"):
        inst = _planted_from_cfg(cfg)
        g, d, k, reference = inst.graph, inst.d, inst.k, inst.planted
    else:
        _need(cfg, "input", "d", "k")
        g, d, k = load_graph(cfg["input"]), float(cfg["d"]), int(cfg["k"])
        reference = _reference(cfg, g.n)
    cands = recover_partial_list(g, d, k, _params(cfg, k))
    rep.result = cands.to_dict(reference)
    if reference is not None and len(cands):
        i, ag = cands.best(reference)
        rep.agreement = {"best_candidate": i, "agreement": ag}


def cmd_recover_full(cfg, rep):
    inst = _planted_from_cfg(cfg)
    size_limit = int(cfg["size_limit"]) if cfg.get("size_limit") is not None else None
    res = recover_full(inst, _params(cfg, inst.k), size_limit=size_limit)
    perm, ag = permutation_match(inst.planted, res.partition)
    rep.spectra = {"host_lambda2": res.host_lambda2}
    rep.result = {"coloring": res.partition.chi, "candidate_index": res.candidate_index,
                  "diagnostics": res.diagnostics, "warnings": res.warnings, "proper": True}
    rep.agreement = {"agreement": ag, "permutation": list(perm)}


def cmd_eval(cfg, rep):
    _need(cfg, "input", "partition")
    g = load_graph(cfg["input"])
    p = load_partition(cfg["partition"], n=g.n)
    target = _load_model(cfg.get("model"))
    q = coloring_quality(g, p, target)
    mat = normalized_adjacency(g, sparse=True)
    _, rep.spectra = spectra_summary(g, float(cfg["lam"]))
    rep.result = {
        "model": model_matrix(mat, p).entries, "per_pair_variance": q.per_pair_variance,
        "model_distance": q.model_distance, "delta_vertex_cover": q.delta_vertex_cover,
        "delta_vertex_cover_degree": q.delta_vertex_cover_degree,
        "monochromatic_edges": q.monochromatic_edges,
    }
    if cfg.get("reference"):
        ref = load_partition(cfg["reference"], n=g.n)
        rep.agreement = _agreement(ref, p)


HANDLERS = {
    "gen": cmd_gen, "spectrum": cmd_spectrum, "rank-check": cmd_rank_check, "color": cmd_color,
    "color3": cmd_color3, "indep-set": cmd_indep_set, "plant": cmd_plant,
    "recover-partial": cmd_recover_partial, "recover-full": cmd_recover_full, "eval": cmd_eval,
}


def run(command: str, config: dict) -> RunReport:
    """Execute one command; errors are captured in the report's exit code."""
    if command not in HANDLERS:
        raise InputError(f"unknown command {command!r}")
    cfg = dict(DEFAULTS)
    cfg.update({k: v for k, v in config.items() if v is not None})
    params = {k: v for k, v in sorted(cfg.items()) if v is not None and k not in ("out", "config")}
    rep = RunReport(command, params, int(cfg["seed"]))
    t0 = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            HANDLERS[command](cfg, rep)
        except AlgorithmFailure as exc:
            rep.exit_code, rep.error = 2, f"{type(exc).__name__}: {exc}"
            diag = getattr(exc, "diagnostics", None)
            if diag:
                rep.result = {"diagnostics": diag}
        except (InputError, OSError, ValueError, KeyError) as exc:
            rep.exit_code, rep.error = 1, f"{type(exc).__name__}: {exc}"
    if caught:
        rep.result.setdefault("warnings", [])
        rep.result["warnings"] = list(rep.result["warnings"]) + sorted({str(w.message) for w in caught})
    rep.wall_time = time.perf_counter() - t0
    return rep


# ------------------------------------------------------------------ argv


def _float_list(text):
    vals = [float(x) for x in str(text).split(",")]
    return vals if len(vals) > 1 else vals[0]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="onesided", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file of options; flags override it")
        p.add_argument("--input", help="edge list")
        p.add_argument("--host", help="host edge list for planting")
        p.add_argument("--planted", help="prefix of a saved planted instance")
        p.add_argument("--partition", help="partition file")
        p.add_argument("--reference", help="reference partition for eval")
        p.add_argument("--k", type=int)
        p.add_argument("--d", type=float)
        p.add_argument("--gamma", type=float)
        p.add_argument("--tau", type=_float_list, help="value or comma list")
        p.add_argument("--sigma", type=_float_list, help="value or comma list")
        p.add_argument("--lambda", dest="lam", type=float)
        p.add_argument("--eta", type=float)
        p.add_argument("--net-resolution", type=float)
        p.add_argument("--rank-cap", type=int)
        p.add_argument("--max-candidates", type=int)
        p.add_argument("--min-class-fraction", type=float)
        p.add_argument("--size-limit", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--mode", choices=["auto", "exhaustive", "heuristic"])
        p.add_argument("--out", help="report path (stdout if omitted)")
        p.add_argument("--emit", help="output prefix for generated instances")
        if name == "gen":
            p.add_argument("--kind", choices=GeneratorSpec.KINDS)
            p.add_argument("--n", type=int)
            p.add_argument("--p", type=float)
            p.add_argument("--n1", type=int)
            p.add_argument("--n2", type=int)
            p.add_argument("--d1", type=int)
            p.add_argument("--eps", type=float)
            p.add_argument("--degree", type=int)
            p.add_argument("--max-lambda2", type=float)
            p.add_argument("--base", help="base edge list (blowup, lambda3)")
        if name in ("gen", "eval"):
            p.add_argument("--model", help="model matrix as JSON text or file")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if k != "command"}
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return 1
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        if "lambda" in cfg:
            cfg["lam"] = cfg.pop("lambda")
    cfg.update({k: v for k, v in flags.items() if v is not None})
    if args.command == "gen" and cfg.get("d") is not None and float(cfg["d"]).is_integer():
        cfg["d"] = int(cfg["d"])
    rep = run(args.command, cfg)
    text = rep.to_json()
    if cfg.get("out"):
        Path(cfg["out"]).write_text(text)
    else:
        sys.stdout.write(text)
    if rep.error:
        print(f"error: {rep.error}", file=sys.stderr)
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
